//! Energy functional, viscous dissipation and the running energy balance.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use super::{FieldState, Spec7};
use crate::model::{rel_pressure_p, SimParams};
use crate::spectral::Grid;

/// `(kinetic u, kinetic omega, internal)` parts of the total energy.
pub fn total_energy(s: &FieldState, p: &SimParams) -> (f64, f64, f64) {
    let w = s.grid().cell_volume();
    let rho = s.rho.values();
    let u2 = s.u.norm2();
    let w2 = s.omega.norm2();
    let inv_eps2 = 1.0 / (p.eps * p.eps);
    let mut eu = 0.0;
    let mut ew = 0.0;
    let mut ei = 0.0;
    for i in 0..rho.len() {
        eu += 0.5 * rho[i] * u2.values()[i];
        ew += 0.5 * rho[i] * w2.values()[i];
        ei += rel_pressure_p(rho[i].max(0.0), p).expect("nonnegative density") * inv_eps2;
    }
    (eu * w, ew * w, ei * w)
}

/// Squared L2 norms of the first-order quantities entering the dissipation,
/// from spectral coefficients of `u` and `omega`:
/// `(|grad u|^2, (div u)^2, |grad w|^2, (div w)^2, |2w - curl u|^2)`.
pub(crate) fn dissipation_norms(grid: &Grid, u: [&[Complex64]; 3], w: [&[Complex64]; 3]) -> [f64; 5] {
    let mut acc = [0.0; 5];
    for i in 0..grid.len() {
        let k = grid.wavevector(i);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        let uu = [u[0][i], u[1][i], u[2][i]];
        let ww = [w[0][i], w[1][i], w[2][i]];
        let u2: f64 = uu.iter().map(|c| c.norm_sqr()).sum();
        let w2: f64 = ww.iter().map(|c| c.norm_sqr()).sum();
        let ku = k[0] * uu[0] + k[1] * uu[1] + k[2] * uu[2];
        let kw = k[0] * ww[0] + k[1] * ww[1] + k[2] * ww[2];
        // curl u_hat = i k x u_hat
        let kx = [
            k[1] * uu[2] - k[2] * uu[1],
            k[2] * uu[0] - k[0] * uu[2],
            k[0] * uu[1] - k[1] * uu[0],
        ];
        let coupling: f64 = (0..3)
            .map(|c| (ww[c] * 2.0 - Complex64::new(-kx[c].im, kx[c].re)).norm_sqr())
            .sum();
        acc[0] += k2 * u2;
        acc[1] += ku.norm_sqr();
        acc[2] += k2 * w2;
        acc[3] += kw.norm_sqr();
        acc[4] += coupling;
    }
    let pw = grid.plancherel_weight();
    acc.map(|a| a * pw)
}

/// Quadratic dissipation densities integrated over the box, weighted by the
/// viscosities: `(velocity, micro-rotation, coupling)`.
pub(crate) fn weighted_dissipation(p: &SimParams, n: [f64; 5]) -> [f64; 3] {
    [
        p.nu * (p.mu * n[0] + (p.mu + p.lambda) * n[1]),
        p.nu * p.re_m * (p.mu_p * n[2] + (p.mu_p + p.lambda_p) * n[3]),
        p.nu * p.xi * n[4],
    ]
}

pub(crate) fn dissipation_rates_spec(grid: &Grid, p: &SimParams, q: &Spec7) -> [f64; 3] {
    weighted_dissipation(
        p,
        dissipation_norms(grid, [&q[1], &q[2], &q[3]], [&q[4], &q[5], &q[6]]),
    )
}

/// Instantaneous dissipation rates `(velocity, micro-rotation, coupling)`.
pub fn dissipation_rates(s: &FieldState, p: &SimParams) -> [f64; 3] {
    let u = s.u.fft();
    let w = s.omega.fft();
    weighted_dissipation(
        p,
        dissipation_norms(
            s.grid(),
            [u.comps[0].coeffs(), u.comps[1].coeffs(), u.comps[2].coeffs()],
            [w.comps[0].coeffs(), w.comps[1].coeffs(), w.comps[2].coeffs()],
        ),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyRow {
    pub t: f64,
    pub e_kin_u: f64,
    pub e_kin_omega: f64,
    pub e_internal: f64,
    pub d_visc_u: f64,
    pub d_visc_omega: f64,
    pub d_coupling: f64,
    /// `E(t) + D(0, t) - E(0)`.
    pub residual: f64,
}

impl EnergyRow {
    pub fn energy(&self) -> f64 {
        self.e_kin_u + self.e_kin_omega + self.e_internal
    }

    pub fn dissipated(&self) -> f64 {
        self.d_visc_u + self.d_visc_omega + self.d_coupling
    }
}

/// Energy rows at output times plus the trapezoidal dissipation integrals.
#[derive(Debug, Clone, Default)]
pub struct EnergyLedger {
    pub rows: Vec<EnergyRow>,
    last: Option<(f64, [f64; 3])>,
    acc: [f64; 3],
    e0: Option<f64>,
}

impl EnergyLedger {
    pub fn new() -> Self {
        Self::default()
    }

    fn push_rate(&mut self, t: f64, rate: [f64; 3]) {
        if let Some((t0, r0)) = self.last {
            if t <= t0 {
                return;
            }
            let h = t - t0;
            for c in 0..3 {
                self.acc[c] += 0.5 * h * (r0[c] + rate[c]);
            }
        }
        self.last = Some((t, rate));
    }

    pub(crate) fn accumulate_spec(&mut self, grid: &Arc<Grid>, p: &SimParams, t: f64, q: &Spec7) {
        let rate = dissipation_rates_spec(grid, p, q);
        self.push_rate(t, rate);
    }

    /// Feeds the dissipation rate of `s` into the running integral.
    pub fn accumulate(&mut self, s: &FieldState, p: &SimParams) {
        let rate = dissipation_rates(s, p);
        self.push_rate(s.t, rate);
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.residual.abs()))
    }

    pub fn initial_energy(&self) -> Option<f64> {
        self.e0
    }
}

/// Appends the energy row of `s`; the dissipation integral runs up to `s.t`.
pub fn energy_report(s: &FieldState, ledger: &mut EnergyLedger, p: &SimParams) -> EnergyRow {
    if ledger.last.map_or(true, |(t, _)| s.t > t) {
        ledger.accumulate(s, p);
    }
    let (e_kin_u, e_kin_omega, e_internal) = total_energy(s, p);
    let e = e_kin_u + e_kin_omega + e_internal;
    let e0 = *ledger.e0.get_or_insert(e);
    let row = EnergyRow {
        t: s.t,
        e_kin_u,
        e_kin_omega,
        e_internal,
        d_visc_u: ledger.acc[0],
        d_visc_omega: ledger.acc[1],
        d_coupling: ledger.acc[2],
        residual: e + ledger.acc.iter().sum::<f64>() - e0,
    };
    ledger.rows.push(row);
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GridSpec;
    use crate::spectral::random::random_band_limited_vector;
    use crate::spectral::{curl, div, gradient_tensor, ScalarField, VectorField};
    use std::f64::consts::PI;

    #[test]
    fn equilibrium_has_no_energy() {
        let g = Grid::new(GridSpec::new(16, 4.0).unwrap());
        let s = FieldState::equilibrium(&g);
        let mut l = EnergyLedger::new();
        let r = energy_report(&s, &mut l, &SimParams::DEFAULT);
        assert_eq!(r.energy(), 0.0);
        assert_eq!(r.dissipated(), 0.0);
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn single_mode_kinetic_energy() {
        let l = 4.0;
        let g = Grid::new(GridSpec::new(16, l).unwrap());
        let amp = 0.3;
        let u = VectorField::from_fn(&g, |x| [0.0, amp * (2.0 * PI * x[0] / l).sin(), 0.0]);
        let s = FieldState {
            u,
            ..FieldState::equilibrium(&g)
        };
        let (eu, ew, ei) = total_energy(&s, &SimParams::DEFAULT);
        assert!((eu - 0.5 * amp * amp * g.volume() / 2.0).abs() < 1e-13);
        assert_eq!(ew, 0.0);
        assert_eq!(ei, 0.0);
    }

    #[test]
    fn spectral_dissipation_matches_physical_quadrature() {
        let g = Grid::new(GridSpec::new(16, 5.0).unwrap());
        let u = random_band_limited_vector(&g, 4, 21);
        let w = random_band_limited_vector(&g, 4, 22);
        let s = FieldState {
            rho: ScalarField::constant(&g, 1.0),
            u: u.clone(),
            omega: w.clone(),
            t: 0.0,
        };
        let p = SimParams {
            lambda: 0.3,
            lambda_p: -0.2,
            re_m: 1.7,
            ..SimParams::DEFAULT
        };
        let rates = dissipation_rates(&s, &p);
        let gu = gradient_tensor(&u);
        let gw = gradient_tensor(&w);
        let sq = |t: &[[ScalarField; 3]; 3]| -> f64 {
            t.iter().flatten().map(|f| f.map(|v| v * v).integral()).sum()
        };
        let du = div(&u).map(|v| v * v).integral();
        let dw = div(&w).map(|v| v * v).integral();
        let cp = w.scale(2.0).sub(&curl(&u)).norm2().integral();
        let expect = [
            p.nu * (p.mu * sq(&gu) + (p.mu + p.lambda) * du),
            p.nu * p.re_m * (p.mu_p * sq(&gw) + (p.mu_p + p.lambda_p) * dw),
            p.nu * p.xi * cp,
        ];
        for c in 0..3 {
            assert!((rates[c] - expect[c]).abs() < 1e-10 * expect[c].abs(), "{c}: {rates:?} {expect:?}");
        }
    }
}
