//! Fast invariant suite behind the `selftest` command.

use crate::acoustics::{acoustic_energy, acoustic_propagate, AcousticState};
use crate::compressible::{CompressibleStepper, FieldState, SolverOptions};
use crate::harness::CheckResult;
use crate::incompressible::{IncompressibleState, IncompressibleStepper, Target};
use crate::io::snapshot::Snapshot;
use crate::model::{rel_pressure_p, GridSpec, SimParams};
use crate::relative_energy::{relative_energy, TestTriple};
use crate::spectral::random::{random_band_limited_scalar, random_band_limited_vector};
use crate::spectral::{curl, div, grad, helmholtz_split, Grid, VectorField};

fn check(name: &str, value: f64, tol: f64) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed: value.is_finite() && value <= tol,
        detail: format!("{value:.3e} <= {tol:.0e}"),
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

pub fn run_selftest() -> Vec<CheckResult> {
    let p = SimParams {
        grid: GridSpec::new(16, 2.0 * std::f64::consts::PI).expect("valid grid"),
        ..SimParams::DEFAULT
    };
    let g = Grid::new(p.grid);
    let mut out = Vec::new();

    // P(rho) = rho int_1^rho (p(s) - p(1)) / s^2 ds
    let worst = [0.2, 0.7, 1.3, 2.5]
        .iter()
        .map(|&rho| {
            let q = rho * simpson(|s| p.a * (s.powf(p.gamma) - 1.0) / (s * s), 1.0, rho, 2000);
            let v = rel_pressure_p(rho, &p).expect("rho > 0");
            ((v - q) / q).abs()
        })
        .fold(0.0f64, f64::max);
    out.push(check("relative pressure potential quadrature", worst, 1e-8));

    let a = random_band_limited_vector(&g, 4, 1);
    let phi = random_band_limited_scalar(&g, 4, 2);
    out.push(check("div curl", div(&curl(&a)).max_abs() / a.max_abs(), 1e-10));
    out.push(check("curl grad", curl(&grad(&phi)).max_abs() / phi.max_abs(), 1e-10));
    let (s, gp) = helmholtz_split(&a);
    out.push(check("helmholtz reconstruction", s.add(&gp).sub(&a).max_abs(), 1e-12));

    let ac0 = AcousticState::from_fields(0.0, &phi, &random_band_limited_scalar(&g, 4, 3));
    let e0 = acoustic_energy(&ac0, &p);
    let fwd = acoustic_propagate(&ac0, &p, 0.73);
    out.push(check("acoustic energy", ((acoustic_energy(&fwd, &p) - e0) / e0).abs(), 1e-12));
    let back = acoustic_propagate(&fwd, &p, 0.0);
    out.push(check("acoustic reversibility", back.psi_field().sub(&phi).max_abs(), 1e-12));

    let eq = FieldState::equilibrium(&g);
    let worst = CompressibleStepper::new(&eq, &p, &SolverOptions::default())
        .and_then(|mut st| {
            st.step(0.1)?;
            let s = st.state();
            Ok(s.rho.sub(&eq.rho).max_abs().max(s.u.max_abs()).max(s.omega.max_abs()))
        })
        .unwrap_or(f64::INFINITY);
    out.push(check("equilibrium fixed point", worst, 1e-13));

    let target = IncompressibleState::new(0.0, s.clone(), random_band_limited_vector(&g, 3, 4));
    let worst = IncompressibleStepper::new(&target, &p, Target::Ns)
        .and_then(|mut st| {
            st.step(0.01)?;
            Ok(div(&st.state().v).max_abs())
        })
        .unwrap_or(f64::INFINITY);
    out.push(check("incompressible step stays solenoidal", worst, 1e-12));

    let s = FieldState {
        t: 0.25,
        rho: phi.map(|x| 1.0 + 0.1 * x),
        u: a.clone(),
        omega: VectorField::zeros(&g),
    };
    let snap = s.to_snapshot(&p);
    let same = snap
        .to_bytes()
        .and_then(|b| Snapshot::from_bytes(&b))
        .map(|r| r.data == snap.data && r.header == snap.header)
        .unwrap_or(false);
    out.push(CheckResult {
        name: "snapshot round trip".into(),
        passed: same,
        detail: String::new(),
    });
    let e = TestTriple::new(s.rho.clone(), s.u.clone(), s.omega.clone())
        .and_then(|tt| relative_energy(&s, &tt, &p))
        .unwrap_or(f64::INFINITY);
    out.push(check("relative energy vanishes on its arguments", e, 0.0));
    out
}

#[cfg(test)]
mod tests {
    #[test]
    fn selftest_passes() {
        for r in super::run_selftest() {
            assert!(r.passed, "{} {}", r.name, r.detail);
        }
    }
}
