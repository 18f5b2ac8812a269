//! Time integration of the scaled compressible micro-polar system and its
//! diagnostics.

pub mod apriori;
pub mod energy;
pub mod lighthill;
pub mod linear;
pub mod stepper;

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::io::snapshot::{Snapshot, SnapshotHeader};
use crate::model::{enthalpy_remainder, SimParams};
use crate::spectral::ops::times_ik;
use crate::spectral::{Grid, ScalarField, VectorField};

pub use apriori::{apriori_diagnostics, AprioriAccumulator, AprioriTable};
pub use energy::{dissipation_rates, energy_report, total_energy, EnergyLedger, EnergyRow};
pub use lighthill::{lighthill_sources, LighthillSources, Tensor};
pub use stepper::{CompressibleStepper, SolverOptions, SourceFn};

/// Smallest admissible density sample.
pub const MIN_DENSITY: f64 = 1e-6;

/// Spectral coefficients of `(rho, u_x, u_y, u_z, omega_x, omega_y, omega_z)`.
pub(crate) type Spec7 = [Vec<Complex64>; 7];

pub const FIELD_NAMES: [&str; 7] = ["rho", "u_x", "u_y", "u_z", "omega_x", "omega_y", "omega_z"];

/// Density, velocity and micro-rotation at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub t: f64,
    pub rho: ScalarField,
    pub u: VectorField,
    pub omega: VectorField,
}

/// Time derivatives of the three unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct Tendency {
    pub drho: ScalarField,
    pub du: VectorField,
    pub domega: VectorField,
}

impl FieldState {
    pub fn equilibrium(grid: &Arc<Grid>) -> Self {
        FieldState {
            t: 0.0,
            rho: ScalarField::constant(grid, 1.0),
            u: VectorField::zeros(grid),
            omega: VectorField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.rho.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.rho.is_finite() && self.u.is_finite() && self.omega.is_finite()
    }

    pub(crate) fn to_spec(&self) -> Spec7 {
        let g = self.grid();
        let mut out = g.forward_many(&[
            self.rho.values(),
            self.u.component(0).values(),
            self.u.component(1).values(),
            self.u.component(2).values(),
            self.omega.component(0).values(),
            self.omega.component(1).values(),
            self.omega.component(2).values(),
        ]);
        let arr: [Vec<Complex64>; 7] = std::array::from_fn(|i| std::mem::take(&mut out[i]));
        arr
    }

    pub(crate) fn from_spec(grid: &Arc<Grid>, t: f64, q: &Spec7) -> Self {
        let refs: Vec<&[Complex64]> = q.iter().map(|v| v.as_slice()).collect();
        let phys = grid.inverse_many(&refs);
        assemble(grid, t, phys)
    }

    pub fn to_snapshot(&self, p: &SimParams) -> Snapshot {
        let g = self.grid();
        let header = SnapshotHeader::new("compressible", g.n(), g.box_len(), &FIELD_NAMES, self.t)
            .with_meta("eps", p.eps)
            .with_meta("nu", p.nu)
            .with_meta("gamma", p.gamma)
            .with_meta("a", p.a);
        let data = vec![
            self.rho.values().to_vec(),
            self.u.component(0).values().to_vec(),
            self.u.component(1).values().to_vec(),
            self.u.component(2).values().to_vec(),
            self.omega.component(0).values().to_vec(),
            self.omega.component(1).values().to_vec(),
            self.omega.component(2).values().to_vec(),
        ];
        Snapshot::new(header, data).expect("state layout matches header")
    }

    pub fn from_snapshot(s: &Snapshot, grid: &Arc<Grid>) -> Result<Self> {
        if s.header.n != grid.n() || s.header.box_len != grid.box_len() {
            return Err(Error::Corrupt(format!(
                "snapshot grid ({}, {}) does not match ({}, {})",
                s.header.n,
                s.header.box_len,
                grid.n(),
                grid.box_len()
            )));
        }
        let phys = FIELD_NAMES
            .iter()
            .map(|name| s.require(name).map(|v| v.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Ok(assemble(grid, s.header.time, phys))
    }
}

fn assemble(grid: &Arc<Grid>, t: f64, mut phys: Vec<Vec<f64>>) -> FieldState {
    let mut take = |i: usize| ScalarField::from_values(grid, std::mem::take(&mut phys[i])).expect("grid length");
    let rho = take(0);
    let u = VectorField::new(take(1), take(2), take(3)).expect("same grid");
    let omega = VectorField::new(take(4), take(5), take(6)).expect("same grid");
    FieldState { t, rho, u, omega }
}

/// Positivity and finiteness guard applied to every evaluated state.
pub(crate) fn check_state(rho: &[f64], others: &[&[f64]], t: f64, snapshot: impl Fn() -> Snapshot) -> Result<()> {
    let mut min_rho = f64::INFINITY;
    for &r in rho {
        if !r.is_finite() {
            return Err(Error::NonFinite {
                t,
                field: "rho".into(),
                snapshot: Some(Box::new(snapshot())),
            });
        }
        min_rho = min_rho.min(r);
    }
    for (c, f) in others.iter().enumerate() {
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                t,
                field: FIELD_NAMES[c + 1].into(),
                snapshot: Some(Box::new(snapshot())),
            });
        }
    }
    if min_rho <= MIN_DENSITY {
        return Err(Error::SingularState {
            t,
            min_rho,
            snapshot: Some(Box::new(snapshot())),
        });
    }
    Ok(())
}

/// Spectral linear operator `L q` (the part propagated exactly).
pub(crate) fn apply_linear(grid: &Grid, p: &SimParams, q: &Spec7) -> Spec7 {
    let c2e = p.sound_speed().powi(2) / (p.eps * p.eps);
    let nu = p.nu;
    let mut out: Spec7 = std::array::from_fn(|_| vec![Complex64::default(); grid.len()]);
    for i in 0..grid.len() {
        let k = grid.wavevector(i);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        let u = [q[1][i], q[2][i], q[3][i]];
        let w = [q[4][i], q[5][i], q[6][i]];
        let ku = k[0] * u[0] + k[1] * u[1] + k[2] * u[2];
        let kw = k[0] * w[0] + k[1] * w[1] + k[2] * w[2];
        out[0][i] = -(times_ik(u[0], k[0]) + times_ik(u[1], k[1]) + times_ik(u[2], k[2]));
        for c in 0..3 {
            out[1 + c][i] = -times_ik(q[0][i], k[c]) * c2e
                + nu * (-(p.mu + p.xi) * k2 * u[c] - (p.mu + p.lambda - p.xi) * k[c] * ku);
            out[4 + c][i] = nu * p.re_m * (-p.mu_p * k2 * w[c] - (p.mu_p + p.lambda_p) * k[c] * kw)
                - 4.0 * nu * p.xi * w[c];
        }
    }
    out
}

/// Explicit remainder `N(q)`: transport, variable coefficients, the enthalpy
/// beyond its linearization and the curl couplings.
pub(crate) fn apply_nonlinear(grid: &Arc<Grid>, p: &SimParams, q: &Spec7, t: f64, dealias: bool) -> Result<Spec7> {
    let len = grid.len();
    let refs: Vec<&[Complex64]> = q.iter().map(|v| v.as_slice()).collect();
    let base = grid.inverse_many(&refs);
    let rho = &base[0];
    check_state(rho, &[&base[1], &base[2], &base[3], &base[4], &base[5], &base[6]], t, || {
        FieldState::from_spec(grid, t, q).to_snapshot(p)
    })?;

    // Gradients of u and omega: index 3*i + j holds d_j of component i.
    let mut grads: Vec<Vec<Complex64>> = Vec::with_capacity(18);
    for comp in 1..7 {
        for j in 0..3 {
            grads.push(
                (0..len)
                    .map(|idx| times_ik(q[comp][idx], grid.wavevector(idx)[j]))
                    .collect(),
            );
        }
    }
    let viscous = p.nu > 0.0;
    if viscous {
        // div S(grad u) and div M(grad omega)
        for base_comp in [1usize, 4] {
            let (a, b) = if base_comp == 1 {
                (p.mu + p.xi, p.mu + p.lambda - p.xi)
            } else {
                (p.mu_p, p.mu_p + p.lambda_p)
            };
            let mut out: [Vec<Complex64>; 3] = std::array::from_fn(|_| vec![Complex64::default(); len]);
            for idx in 0..len {
                let k = grid.wavevector(idx);
                let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                let v = [q[base_comp][idx], q[base_comp + 1][idx], q[base_comp + 2][idx]];
                let kv = k[0] * v[0] + k[1] * v[1] + k[2] * v[2];
                for c in 0..3 {
                    out[c][idx] = -a * k2 * v[c] - b * k[c] * kv;
                }
            }
            grads.extend(out);
        }
    }
    let grefs: Vec<&[Complex64]> = grads.iter().map(|v| v.as_slice()).collect();
    let d = grid.inverse_many(&grefs);
    let du = |i: usize, j: usize| &d[3 * i + j];
    let dw = |i: usize, j: usize| &d[9 + 3 * i + j];

    let u = [&base[1], &base[2], &base[3]];
    let w = [&base[4], &base[5], &base[6]];
    let inv_eps2 = 1.0 / (p.eps * p.eps);
    let two_nu_xi = 2.0 * p.nu * p.xi;
    let mut out_phys: Vec<Vec<f64>> = vec![vec![0.0; len]; 10];
    for idx in 0..len {
        let r = rho[idx];
        let inv = 1.0 / r - 1.0;
        let uu = [u[0][idx], u[1][idx], u[2][idx]];
        let curl_u = [
            du(2, 1)[idx] - du(1, 2)[idx],
            du(0, 2)[idx] - du(2, 0)[idx],
            du(1, 0)[idx] - du(0, 1)[idx],
        ];
        let curl_w = [
            dw(2, 1)[idx] - dw(1, 2)[idx],
            dw(0, 2)[idx] - dw(2, 0)[idx],
            dw(1, 0)[idx] - dw(0, 1)[idx],
        ];
        for c in 0..3 {
            out_phys[c][idx] = (r - 1.0) * uu[c];
        }
        out_phys[3][idx] = enthalpy_remainder(r, p) * inv_eps2;
        for c in 0..3 {
            let adv_u = uu[0] * du(c, 0)[idx] + uu[1] * du(c, 1)[idx] + uu[2] * du(c, 2)[idx];
            let adv_w = uu[0] * dw(c, 0)[idx] + uu[1] * dw(c, 1)[idx] + uu[2] * dw(c, 2)[idx];
            let mut nu_c = -adv_u;
            let mut nw_c = -adv_w;
            if viscous {
                let div_s = d[18 + c][idx];
                let div_m = d[21 + c][idx];
                let vu = div_s + 2.0 * p.xi * curl_w[c];
                let vw = p.nu * p.re_m * div_m + two_nu_xi * curl_u[c] - 2.0 * two_nu_xi * w[c][idx];
                nu_c += p.nu * inv * vu + two_nu_xi * curl_w[c];
                nw_c += inv * vw + two_nu_xi * curl_u[c];
            }
            out_phys[4 + c][idx] = nu_c;
            out_phys[7 + c][idx] = nw_c;
        }
    }
    let prefs: Vec<&[f64]> = out_phys.iter().map(|v| v.as_slice()).collect();
    let mut f = grid.forward_many(&prefs);
    let mut out: Spec7 = std::array::from_fn(|_| vec![Complex64::default(); len]);
    for idx in 0..len {
        let k = grid.wavevector(idx);
        out[0][idx] = -(times_ik(f[0][idx], k[0]) + times_ik(f[1][idx], k[1]) + times_ik(f[2][idx], k[2]));
        for c in 0..3 {
            out[1 + c][idx] = f[4 + c][idx] - times_ik(f[3][idx], k[c]);
        }
    }
    for c in 0..3 {
        out[4 + c] = std::mem::take(&mut f[7 + c]);
    }
    if dealias {
        dealias_spec(grid, &mut out);
    }
    Ok(out)
}

pub(crate) fn dealias_spec(grid: &Grid, q: &mut Spec7) {
    for idx in 0..grid.len() {
        if !grid.keeps(idx) {
            for f in q.iter_mut() {
                f[idx] = Complex64::default();
            }
        }
    }
}

fn tendency_from_spec(grid: &Arc<Grid>, q: &Spec7) -> Tendency {
    let s = FieldState::from_spec(grid, 0.0, q);
    Tendency {
        drho: s.rho,
        du: s.u,
        domega: s.omega,
    }
}

/// Pointwise time derivative of the full system at `s`.
///
/// Products are evaluated on the grid samples without truncation so that the
/// result is the collocation derivative of the given (band-limited) state.
pub fn rhs_compressible(s: &FieldState, p: &SimParams) -> Result<Tendency> {
    let grid = s.grid().clone();
    let q = s.to_spec();
    let lin = apply_linear(&grid, p, &q);
    let nl = apply_nonlinear(&grid, p, &q, s.t, false)?;
    let total: Spec7 = std::array::from_fn(|c| lin[c].iter().zip(&nl[c]).map(|(a, b)| a + b).collect());
    Ok(tendency_from_spec(&grid, &total))
}

/// Time derivative of the semi-discrete system actually integrated by the
/// stepper (remainder truncated by the 2/3 rule).
pub fn rhs_discrete(s: &FieldState, p: &SimParams) -> Result<Tendency> {
    let grid = s.grid().clone();
    let q = s.to_spec();
    let lin = apply_linear(&grid, p, &q);
    let nl = apply_nonlinear(&grid, p, &q, s.t, true)?;
    let total: Spec7 = std::array::from_fn(|c| lin[c].iter().zip(&nl[c]).map(|(a, b)| a + b).collect());
    Ok(tendency_from_spec(&grid, &total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GridSpec;
    use crate::spectral::random::{random_band_limited_scalar, random_band_limited_vector};
    use crate::spectral::{div, helmholtz_split};

    fn grid() -> Arc<Grid> {
        Grid::new(GridSpec::new(16, 6.0).unwrap())
    }

    #[test]
    fn equilibrium_has_zero_tendency() {
        let g = grid();
        let t = rhs_compressible(&FieldState::equilibrium(&g), &SimParams::DEFAULT).unwrap();
        assert!(t.drho.max_abs() < 1e-15);
        assert!(t.du.max_abs() < 1e-15);
        assert!(t.domega.max_abs() < 1e-15);
    }

    #[test]
    fn solenoidal_velocity_gives_zero_density_tendency() {
        let g = grid();
        let (sol, _) = helmholtz_split(&random_band_limited_vector(&g, 3, 4));
        let s = FieldState {
            u: sol,
            ..FieldState::equilibrium(&g)
        };
        let t = rhs_compressible(&s, &SimParams::DEFAULT).unwrap();
        assert!(t.drho.max_abs() < 1e-13);
        assert!(div(&s.u).max_abs() < 1e-13);
    }

    #[test]
    fn nonpositive_density_is_a_singular_state() {
        let g = grid();
        let s = FieldState {
            rho: ScalarField::from_fn(&g, |x| (x[0] * 2.0 * std::f64::consts::PI / 6.0).sin() * 2.0),
            ..FieldState::equilibrium(&g)
        };
        let err = rhs_compressible(&s, &SimParams::DEFAULT).unwrap_err();
        assert!(matches!(err, Error::SingularState { .. }));
        assert!(err.snapshot().is_some());
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn snapshot_round_trip() {
        let g = grid();
        let s = FieldState {
            t: 0.25,
            rho: random_band_limited_scalar(&g, 3, 1).scale(0.1).map(|v| v + 1.0),
            u: random_band_limited_vector(&g, 3, 2),
            omega: random_band_limited_vector(&g, 3, 3),
        };
        let snap = s.to_snapshot(&SimParams::DEFAULT);
        let back = FieldState::from_snapshot(&Snapshot::from_bytes(&snap.to_bytes().unwrap()).unwrap(), &g).unwrap();
        assert_eq!(back, s);
    }
}
