//! Oracles shared by the integration and acceptance suites.
#![allow(dead_code)]

use std::sync::Arc;

use lowmach::compressible::{rhs_discrete, FieldState, Tendency};
use lowmach::model::{GridSpec, SimParams};
use lowmach::spectral::random::{random_band_limited_scalar, random_band_limited_vector};
use lowmach::spectral::{Grid, ScalarField, VectorField};

/// Adaptive Simpson quadrature.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64, m: f64, fm: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) + rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    rec(f, a, fa, b, fb, m, fm, whole, tol, 50)
}

/// Observed order from errors at successively halved steps.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Smooth time-dependent state built from fixed low-mode fields.
pub struct Manufactured {
    pub grid: Arc<Grid>,
    pub params: SimParams,
    sigma: ScalarField,
    a: VectorField,
    b: VectorField,
}

impl Manufactured {
    pub fn new(params: SimParams, seed: u64) -> Self {
        let grid = Grid::new(params.grid);
        Manufactured {
            sigma: random_band_limited_scalar(&grid, 2, seed),
            a: random_band_limited_vector(&grid, 2, seed + 1),
            b: random_band_limited_vector(&grid, 2, seed + 2),
            grid,
            params,
        }
    }

    pub fn state(&self, t: f64) -> FieldState {
        FieldState {
            t,
            rho: self.sigma.map(|s| 1.0 + 0.2 * t.cos() * s),
            u: self.a.scale(0.5 * (t + 0.3).sin()),
            omega: self.b.scale(0.4 * (2.0 * t).cos()),
        }
    }

    fn state_dot(&self, t: f64) -> Tendency {
        Tendency {
            drho: self.sigma.scale(-0.2 * t.sin()),
            du: self.a.scale(0.5 * (t + 0.3).cos()),
            domega: self.b.scale(-0.8 * (2.0 * t).sin()),
        }
    }

    /// Forcing that makes `state` an exact solution of the semi-discrete system.
    pub fn source(&self, t: f64) -> Tendency {
        let rhs = rhs_discrete(&self.state(t), &self.params).expect("manufactured state is admissible");
        let d = self.state_dot(t);
        Tendency {
            drho: d.drho.sub(&rhs.drho),
            du: d.du.sub(&rhs.du),
            domega: d.domega.sub(&rhs.domega),
        }
    }
}

pub fn max_state_diff(a: &FieldState, b: &FieldState) -> f64 {
    a.rho
        .sub(&b.rho)
        .max_abs()
        .max(a.u.sub(&b.u).max_abs())
        .max(a.omega.sub(&b.omega).max_abs())
}

pub fn small_params(eps: f64, nu: f64) -> SimParams {
    SimParams {
        eps,
        nu,
        grid: GridSpec::new(16, 8.0 * std::f64::consts::PI).unwrap(),
        ..SimParams::DEFAULT
    }
}
