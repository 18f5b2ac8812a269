//! Limit systems: incompressible micro-polar Navier-Stokes, and incompressible
//! Euler with a passively transported micro-rotation.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::snapshot::{Snapshot, SnapshotHeader};
use crate::model::SimParams;
use crate::spectral::ops::{spectral_div, times_ik};
use crate::spectral::{Grid, ScalarField, SpectralField, VectorField};

type Spec6 = [Vec<Complex64>; 6];

/// Relative divergence tolerated on input velocities.
pub const SOLENOIDAL_TOL: f64 = 1e-10;

pub const FIELD_NAMES: [&str; 7] = ["v_x", "v_y", "v_z", "omega_x", "omega_y", "omega_z", "pi"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Ns,
    Euler,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncompressibleState {
    pub t: f64,
    pub v: VectorField,
    pub omega: VectorField,
    /// Pressure; filled by [`IncompressibleState::with_pressure`].
    pub pi: ScalarField,
}

impl IncompressibleState {
    pub fn new(t: f64, v: VectorField, omega: VectorField) -> Self {
        let pi = ScalarField::zeros(v.grid());
        IncompressibleState { t, v, omega, pi }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.v.grid()
    }

    /// Recomputes the pressure from the pressure Poisson problem.
    pub fn with_pressure(mut self) -> Self {
        self.pi = pressure_poisson(&self.v);
        self
    }

    fn to_spec(&self) -> Spec6 {
        let g = self.grid();
        let mut out = g.forward_many(&[
            self.v.component(0).values(),
            self.v.component(1).values(),
            self.v.component(2).values(),
            self.omega.component(0).values(),
            self.omega.component(1).values(),
            self.omega.component(2).values(),
        ]);
        std::array::from_fn(|i| std::mem::take(&mut out[i]))
    }

    fn from_spec(grid: &Arc<Grid>, t: f64, q: &Spec6) -> Self {
        let refs: Vec<&[Complex64]> = q.iter().map(|v| v.as_slice()).collect();
        let mut phys = grid.inverse_many(&refs);
        let mut take = |i: usize| ScalarField::from_values(grid, std::mem::take(&mut phys[i])).expect("grid length");
        let v = VectorField::new(take(0), take(1), take(2)).expect("same grid");
        let omega = VectorField::new(take(3), take(4), take(5)).expect("same grid");
        IncompressibleState::new(t, v, omega)
    }

    pub fn to_snapshot(&self, p: &SimParams, target: Target) -> Snapshot {
        let g = self.grid();
        let kind = match target {
            Target::Ns => "incompressible_ns",
            Target::Euler => "euler",
        };
        let header = SnapshotHeader::new(kind, g.n(), g.box_len(), &FIELD_NAMES, self.t)
            .with_meta("nu", p.nu)
            .with_meta("gamma", p.gamma);
        let mut data: Vec<Vec<f64>> = self
            .v
            .comps()
            .iter()
            .chain(self.omega.comps().iter())
            .map(|c| c.values().to_vec())
            .collect();
        data.push(self.pi.values().to_vec());
        Snapshot::new(header, data).expect("state layout matches header")
    }

    pub fn from_snapshot(s: &Snapshot, grid: &Arc<Grid>) -> Result<Self> {
        if s.header.n != grid.n() || s.header.box_len != grid.box_len() {
            return Err(Error::Corrupt("snapshot grid does not match".into()));
        }
        let f = |name: &str| -> Result<ScalarField> {
            ScalarField::from_values(grid, s.require(name)?.to_vec())
        };
        let v = VectorField::new(f("v_x")?, f("v_y")?, f("v_z")?)?;
        let omega = VectorField::new(f("omega_x")?, f("omega_y")?, f("omega_z")?)?;
        Ok(IncompressibleState {
            t: s.header.time,
            v,
            omega,
            pi: f("pi")?,
        })
    }
}

fn check_solenoidal(v: &VectorField) -> Result<()> {
    let s = v.fft();
    let d = spectral_div(&s);
    let g = v.grid();
    let dn = d.weighted_energy(|_| 1.0).sqrt();
    let gn: f64 = s
        .comps
        .iter()
        .map(|c| {
            c.weighted_energy(|i| {
                let k = g.wavevector(i);
                k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
            })
        })
        .sum::<f64>()
        .sqrt();
    if dn > SOLENOIDAL_TOL * gn.max(f64::MIN_POSITIVE) && dn > 1e-300 {
        return Err(Error::Precondition(format!(
            "velocity is not solenoidal: ||div v|| / ||grad v|| = {:e}",
            dn / gn
        )));
    }
    Ok(())
}

fn project(grid: &Grid, v: &mut [Vec<Complex64>]) {
    for i in 0..grid.len() {
        let k = grid.wavevector(i);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 {
            continue;
        }
        let kv = (v[0][i] * k[0] + v[1][i] * k[1] + v[2][i] * k[2]) / k2;
        for c in 0..3 {
            v[c][i] -= kv * k[c];
        }
    }
}

/// Per-mode decay rates `(v, omega longitudinal, omega transverse)`.
fn linear_rates(p: &SimParams, target: Target, k2: f64) -> (f64, f64, f64) {
    match target {
        Target::Euler => (0.0, 0.0, 0.0),
        Target::Ns => {
            let nu = p.nu;
            (
                nu * (p.mu + p.xi) * k2,
                nu * p.re_m * (2.0 * p.mu_p + p.lambda_p) * k2 + 4.0 * nu * p.xi,
                nu * p.re_m * p.mu_p * k2 + 4.0 * nu * p.xi,
            )
        }
    }
}

fn apply_linear(grid: &Grid, p: &SimParams, target: Target, q: &Spec6) -> Spec6 {
    let mut out: Spec6 = std::array::from_fn(|_| vec![Complex64::default(); grid.len()]);
    for i in 0..grid.len() {
        let k = grid.wavevector(i);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        let (rv, rl, rt) = linear_rates(p, target, k2);
        let w = [q[3][i], q[4][i], q[5][i]];
        let wl = if k2 > 0.0 {
            (w[0] * k[0] + w[1] * k[1] + w[2] * k[2]) / k2
        } else {
            Complex64::default()
        };
        for c in 0..3 {
            out[c][i] = -rv * q[c][i];
            let lpart = wl * k[c];
            out[3 + c][i] = -rt * (w[c] - lpart) - rl * lpart;
        }
    }
    out
}

/// Diagonal exponential `exp(L tau)` stored per mode.
struct Exponential {
    tau: f64,
    v: Vec<f64>,
    wl: Vec<f64>,
    wt: Vec<f64>,
}

impl Exponential {
    fn new(grid: &Grid, p: &SimParams, target: Target, tau: f64) -> Self {
        let mut v = Vec::with_capacity(grid.len());
        let mut wl = Vec::with_capacity(grid.len());
        let mut wt = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let k = grid.wavevector(i);
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            let (rv, rl, rt) = linear_rates(p, target, k2);
            v.push((-rv * tau).exp());
            wl.push((-rl * tau).exp());
            wt.push((-rt * tau).exp());
        }
        Exponential { tau, v, wl, wt }
    }

    fn apply(&self, grid: &Grid, q: &Spec6) -> Spec6 {
        let mut out = q.clone();
        for i in 0..grid.len() {
            let k = grid.wavevector(i);
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            for c in 0..3 {
                out[c][i] *= self.v[i];
            }
            let w = [q[3][i], q[4][i], q[5][i]];
            let wl = if k2 > 0.0 {
                (w[0] * k[0] + w[1] * k[1] + w[2] * k[2]) / k2
            } else {
                Complex64::default()
            };
            for c in 0..3 {
                let lpart = wl * k[c];
                out[3 + c][i] = (w[c] - lpart) * self.wt[i] + lpart * self.wl[i];
            }
        }
        out
    }
}

/// Advection `(v . grad) f` for the three components of `v` and `omega`,
/// returned in physical space.
fn advection(grid: &Arc<Grid>, q: &Spec6) -> Vec<Vec<f64>> {
    let len = grid.len();
    let refs: Vec<&[Complex64]> = q[..3].iter().map(|v| v.as_slice()).collect();
    let v = grid.inverse_many(&refs);
    let mut grads: Vec<Vec<Complex64>> = Vec::with_capacity(18);
    for comp in q.iter() {
        for j in 0..3 {
            grads.push((0..len).map(|i| times_ik(comp[i], grid.wavevector(i)[j])).collect());
        }
    }
    let grefs: Vec<&[Complex64]> = grads.iter().map(|v| v.as_slice()).collect();
    let d = grid.inverse_many(&grefs);
    (0..6)
        .map(|c| {
            (0..len)
                .map(|i| v[0][i] * d[3 * c][i] + v[1][i] * d[3 * c + 1][i] + v[2][i] * d[3 * c + 2][i])
                .collect()
        })
        .collect()
}

/// Explicit part: transport and the curl couplings; the velocity part is
/// projected onto solenoidal fields.
fn apply_explicit(grid: &Arc<Grid>, p: &SimParams, target: Target, q: &Spec6, dealias: bool) -> Spec6 {
    let adv = advection(grid, q);
    let refs: Vec<&[f64]> = adv.iter().map(|v| v.as_slice()).collect();
    let mut f = grid.forward_many(&refs);
    for c in f.iter_mut() {
        for z in c.iter_mut() {
            *z = -*z;
        }
    }
    if target == Target::Ns {
        let two_nu_xi = 2.0 * p.nu * p.xi;
        for i in 0..grid.len() {
            let k = grid.wavevector(i);
            let (v, w) = ([q[0][i], q[1][i], q[2][i]], [q[3][i], q[4][i], q[5][i]]);
            let curl = |a: [Complex64; 3]| {
                [
                    times_ik(a[2], k[1]) - times_ik(a[1], k[2]),
                    times_ik(a[0], k[2]) - times_ik(a[2], k[0]),
                    times_ik(a[1], k[0]) - times_ik(a[0], k[1]),
                ]
            };
            let (cv, cw) = (curl(v), curl(w));
            for c in 0..3 {
                f[c][i] += cw[c] * two_nu_xi;
                f[3 + c][i] += cv[c] * two_nu_xi;
            }
        }
    }
    let mut out: Spec6 = std::array::from_fn(|i| std::mem::take(&mut f[i]));
    project(grid, &mut out[..3]);
    if dealias {
        for i in 0..grid.len() {
            if !grid.keeps(i) {
                for c in out.iter_mut() {
                    c[i] = Complex64::default();
                }
            }
        }
    }
    out
}

fn tendency(grid: &Arc<Grid>, q: &Spec6) -> (VectorField, VectorField) {
    let s = IncompressibleState::from_spec(grid, 0.0, q);
    (s.v, s.omega)
}

fn full_rhs(s: &IncompressibleState, p: &SimParams, target: Target, dealias: bool) -> Result<(VectorField, VectorField)> {
    check_solenoidal(&s.v)?;
    let g = s.grid().clone();
    let q = s.to_spec();
    let l = apply_linear(&g, p, target, &q);
    let n = apply_explicit(&g, p, target, &q, dealias);
    let total: Spec6 = std::array::from_fn(|c| l[c].iter().zip(&n[c]).map(|(a, b)| a + b).collect());
    Ok(tendency(&g, &total))
}

/// `(dv, domega)` of the incompressible micro-polar system.
pub fn rhs_incompressible_ns(s: &IncompressibleState, p: &SimParams) -> Result<(VectorField, VectorField)> {
    full_rhs(s, p, Target::Ns, false)
}

/// `(dv, domega)` of incompressible Euler with transported micro-rotation.
pub fn rhs_euler_transport(s: &IncompressibleState) -> Result<(VectorField, VectorField)> {
    full_rhs(s, &SimParams::DEFAULT, Target::Euler, false)
}

/// Right-hand side of the semi-discrete system integrated by the stepper.
pub fn rhs_discrete(s: &IncompressibleState, p: &SimParams, target: Target) -> Result<(VectorField, VectorField)> {
    full_rhs(s, p, target, true)
}

/// Pressure with `-Laplacian pi = div((v . grad) v)` and zero mean.
pub fn pressure_poisson(v: &VectorField) -> ScalarField {
    let g = v.grid().clone();
    let z = VectorField::zeros(&g);
    let q = IncompressibleState::new(0.0, v.clone(), z).to_spec();
    let adv = advection(&g, &q);
    let refs: Vec<&[f64]> = adv[..3].iter().map(|v| v.as_slice()).collect();
    let c = g.forward_many(&refs);
    let mut pi = SpectralField::zeros(&g);
    for (i, o) in pi.coeffs_mut().iter_mut().enumerate() {
        let k = g.wavevector(i);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 > 0.0 {
            let kc = times_ik(c[0][i], k[0]) + times_ik(c[1][i], k[1]) + times_ik(c[2][i], k[2]);
            *o = kc / k2;
        }
    }
    pi.ifft()
}

/// Kinetic energy `1/2 int |v|^2 + 1/2 int |omega|^2`.
pub fn kinetic_energy(s: &IncompressibleState) -> f64 {
    0.5 * (s.v.norm2().integral() + s.omega.norm2().integral())
}

/// Viscous dissipation rate of the micro-polar limit system.
pub fn ns_dissipation_rate(s: &IncompressibleState, p: &SimParams) -> f64 {
    let v = s.v.fft();
    let w = s.omega.fft();
    let n = crate::compressible::energy::dissipation_norms(
        s.grid(),
        [v.comps[0].coeffs(), v.comps[1].coeffs(), v.comps[2].coeffs()],
        [w.comps[0].coeffs(), w.comps[1].coeffs(), w.comps[2].coeffs()],
    );
    crate::compressible::energy::weighted_dissipation(p, n).iter().sum()
}

pub type IncompressibleSource = Box<dyn Fn(f64) -> (VectorField, VectorField) + Send + Sync>;

/// Integrating-factor RK4 with re-projection after every stage.
pub struct IncompressibleStepper {
    grid: Arc<Grid>,
    params: SimParams,
    target: Target,
    q: Spec6,
    t: f64,
    cfl: f64,
    dt_max: f64,
    exps: Option<(Exponential, Exponential)>,
    source: Option<IncompressibleSource>,
}

impl IncompressibleStepper {
    pub fn new(initial: &IncompressibleState, params: &SimParams, target: Target) -> Result<Self> {
        params.validate()?;
        check_solenoidal(&initial.v)?;
        if !(initial.v.is_finite() && initial.omega.is_finite()) {
            return Err(Error::NonFinite {
                t: initial.t,
                field: "initial state".into(),
                snapshot: None,
            });
        }
        let grid = initial.grid().clone();
        let mut q = initial.to_spec();
        project(&grid, &mut q[..3]);
        for i in 0..grid.len() {
            if !grid.keeps(i) {
                for c in q.iter_mut() {
                    c[i] = Complex64::default();
                }
            }
        }
        Ok(IncompressibleStepper {
            grid,
            params: *params,
            target,
            q,
            t: initial.t,
            cfl: 0.4,
            dt_max: 0.05,
            exps: None,
            source: None,
        })
    }

    pub fn with_source(mut self, source: IncompressibleSource) -> Self {
        self.source = Some(source);
        self
    }

    pub fn with_limits(mut self, cfl: f64, dt_max: f64) -> Self {
        self.cfl = cfl;
        self.dt_max = dt_max;
        self
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> IncompressibleState {
        IncompressibleState::from_spec(&self.grid, self.t, &self.q)
    }

    pub fn stable_dt(&self) -> f64 {
        let v = self.grid.inverse_many(&[&self.q[0], &self.q[1], &self.q[2]]);
        let vmax = (0..self.grid.len())
            .map(|i| v[0][i] * v[0][i] + v[1][i] * v[1][i] + v[2][i] * v[2][i])
            .fold(0.0, f64::max)
            .sqrt();
        if vmax > 0.0 {
            self.dt_max.min(self.cfl * self.grid.spacing() / vmax)
        } else {
            self.dt_max
        }
    }

    fn explicit(&self, q: &Spec6, t: f64) -> Spec6 {
        let mut n = apply_explicit(&self.grid, &self.params, self.target, q, true);
        if let Some(src) = &self.source {
            let (sv, sw) = src(t);
            let s = IncompressibleState::new(t, sv, sw).to_spec();
            for c in 0..6 {
                for (a, b) in n[c].iter_mut().zip(&s[c]) {
                    *a += b;
                }
            }
        }
        n
    }

    pub fn step(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param("dt", format!("must be positive, got {dt}")));
        }
        if self.exps.as_ref().map_or(true, |(h, _)| h.tau != 0.5 * dt) {
            self.exps = Some((
                Exponential::new(&self.grid, &self.params, self.target, 0.5 * dt),
                Exponential::new(&self.grid, &self.params, self.target, dt),
            ));
        }
        let (eh, ef) = self.exps.as_ref().expect("built above");
        let g = &self.grid;
        let t = self.t;
        let comb = |a: &Spec6, b: &Spec6, s: f64| -> Spec6 {
            let mut out: Spec6 = std::array::from_fn(|c| a[c].iter().zip(&b[c]).map(|(x, y)| x + y * s).collect());
            project(g, &mut out[..3]);
            out
        };
        let q0 = &self.q;
        let k1 = self.explicit(q0, t);
        let k2 = self.explicit(&eh.apply(g, &comb(q0, &k1, 0.5 * dt)), t + 0.5 * dt);
        let eq0 = eh.apply(g, q0);
        let k3 = self.explicit(&comb(&eq0, &k2, 0.5 * dt), t + 0.5 * dt);
        let k4 = self.explicit(&comb(&ef.apply(g, q0), &eh.apply(g, &k3), dt), t + dt);
        let a = ef.apply(g, q0);
        let b = ef.apply(g, &k1);
        let mid: Spec6 = std::array::from_fn(|c| k2[c].iter().zip(&k3[c]).map(|(x, y)| x + y).collect());
        let m = eh.apply(g, &mid);
        let w = dt / 6.0;
        let mut next: Spec6 = std::array::from_fn(|c| {
            (0..g.len())
                .map(|i| a[c][i] + (b[c][i] + m[c][i] * 2.0 + k4[c][i]) * w)
                .collect()
        });
        project(g, &mut next[..3]);
        if next.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            let s = IncompressibleState::from_spec(g, t + dt, &next);
            return Err(Error::NonFinite {
                t: t + dt,
                field: "incompressible state".into(),
                snapshot: Some(Box::new(s.to_snapshot(&self.params, self.target))),
            });
        }
        self.q = next;
        self.t = t + dt;
        Ok(())
    }

    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        let span = t_target - self.t;
        if span < -1e-12 {
            return Err(Error::Precondition("cannot step backwards".into()));
        }
        if span <= 1e-14 * t_target.abs().max(1.0) {
            return Ok(());
        }
        let n = ((span / self.stable_dt()) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let dt = span / n as f64;
        for _ in 0..n {
            self.step(dt)?;
        }
        self.t = t_target;
        Ok(())
    }
}

/// One step of the chosen limit system.
pub fn step_incompressible(s: &IncompressibleState, p: &SimParams, dt: f64, target: Target) -> Result<IncompressibleState> {
    let mut st = IncompressibleStepper::new(s, p, target)?;
    st.step(dt)?;
    Ok(st.state())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GridSpec;
    use crate::spectral::random::random_band_limited_vector;
    use crate::spectral::{curl, div};

    fn grid() -> Arc<Grid> {
        Grid::new(GridSpec::new(16, 6.0).unwrap())
    }

    #[test]
    fn zero_state_is_fixed() {
        let g = grid();
        let s = IncompressibleState::new(0.0, VectorField::zeros(&g), VectorField::zeros(&g));
        let (dv, dw) = rhs_incompressible_ns(&s, &SimParams::DEFAULT).unwrap();
        assert_eq!(dv.max_abs(), 0.0);
        assert_eq!(dw.max_abs(), 0.0);
        let n = step_incompressible(&s, &SimParams::DEFAULT, 0.1, Target::Euler).unwrap();
        assert_eq!(n.v.max_abs(), 0.0);
    }

    #[test]
    fn velocity_tendency_is_solenoidal() {
        let g = grid();
        let v = curl(&random_band_limited_vector(&g, 3, 1));
        let w = random_band_limited_vector(&g, 3, 2);
        let s = IncompressibleState::new(0.0, v, w);
        let (dv, _) = rhs_incompressible_ns(&s, &SimParams::DEFAULT).unwrap();
        assert!(div(&dv).max_abs() < 1e-10 * dv.max_abs());
    }

    #[test]
    fn non_solenoidal_input_is_rejected() {
        let g = grid();
        let s = IncompressibleState::new(0.0, random_band_limited_vector(&g, 3, 1), VectorField::zeros(&g));
        assert!(matches!(rhs_euler_transport(&s), Err(Error::Precondition(_))));
    }

    #[test]
    fn frozen_micro_rotation_without_velocity() {
        let g = grid();
        let w = random_band_limited_vector(&g, 3, 5);
        let s = IncompressibleState::new(0.0, VectorField::zeros(&g), w.clone());
        let (dv, dw) = rhs_euler_transport(&s).unwrap();
        assert!(dv.max_abs() < 1e-15);
        assert!(dw.max_abs() < 1e-15);
    }
}
