//! Strang-split integrator: exact linear half steps around an explicit RK4
//! step of the remainder.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::energy::EnergyLedger;
use super::linear::LinearPropagator;
use super::{apply_linear, apply_nonlinear, dealias_spec, FieldState, Spec7, Tendency};
use crate::error::{Error, Result};
use crate::model::SimParams;
use crate::spectral::Grid;

/// Time-dependent forcing added to the right-hand side (manufactured solutions).
pub type SourceFn = Box<dyn Fn(f64) -> Tendency + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    /// Courant factor for advection and viscosity.
    pub cfl: f64,
    /// Accuracy cap `dt <= acoustic_cfl * eps * h / c` (0 disables it when splitting).
    pub acoustic_cfl: f64,
    pub dt_max: f64,
    /// Exact linear propagation; when off the whole system goes through RK4.
    pub splitting: bool,
    /// Overrides the adaptive rule when set.
    pub fixed_dt: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            cfl: 0.4,
            acoustic_cfl: 0.5,
            dt_max: 0.05,
            splitting: true,
            fixed_dt: None,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::param("solver.cfl", format!("must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.acoustic_cfl >= 0.0 && self.acoustic_cfl.is_finite()) {
            return Err(Error::param("solver.acoustic_cfl", "must be finite and nonnegative"));
        }
        if !(self.dt_max > 0.0) {
            return Err(Error::param("solver.dt_max", "must be positive"));
        }
        if let Some(dt) = self.fixed_dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::param("solver.fixed_dt", "must be positive"));
            }
        }
        Ok(())
    }
}

pub struct CompressibleStepper {
    grid: Arc<Grid>,
    params: SimParams,
    opts: SolverOptions,
    q: Spec7,
    t: f64,
    half: Option<LinearPropagator>,
    source: Option<SourceFn>,
    steps: usize,
}

impl CompressibleStepper {
    pub fn new(initial: &FieldState, params: &SimParams, opts: &SolverOptions) -> Result<Self> {
        params.validate()?;
        opts.validate()?;
        if initial.grid().spec() != params.grid {
            return Err(Error::Precondition("initial state grid differs from parameter grid".into()));
        }
        let grid = initial.grid().clone();
        super::check_state(
            initial.rho.values(),
            &[
                initial.u.component(0).values(),
                initial.u.component(1).values(),
                initial.u.component(2).values(),
                initial.omega.component(0).values(),
                initial.omega.component(1).values(),
                initial.omega.component(2).values(),
            ],
            initial.t,
            || initial.to_snapshot(params),
        )?;
        let mut q = initial.to_spec();
        dealias_spec(&grid, &mut q);
        Ok(CompressibleStepper {
            grid,
            params: *params,
            opts: *opts,
            q,
            t: initial.t,
            half: None,
            source: None,
            steps: 0,
        })
    }

    pub fn with_source(mut self, source: SourceFn) -> Self {
        self.source = Some(source);
        self
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    pub fn state(&self) -> FieldState {
        FieldState::from_spec(&self.grid, self.t, &self.q)
    }

    /// Largest step allowed by the stability and accuracy rules at the current state.
    pub fn stable_dt(&self) -> f64 {
        if let Some(dt) = self.opts.fixed_dt {
            return dt;
        }
        let p = &self.params;
        let h = self.grid.spacing();
        let u = self
            .grid
            .inverse_many(&[&self.q[1], &self.q[2], &self.q[3]]);
        let umax = (0..self.grid.len())
            .map(|i| u[0][i] * u[0][i] + u[1][i] * u[1][i] + u[2][i] * u[2][i])
            .fold(0.0, f64::max)
            .sqrt();
        let mut dt = self.opts.dt_max;
        if umax > 0.0 {
            dt = dt.min(self.opts.cfl * h / umax);
        }
        let visc = p.nu
            * ((p.mu + p.xi) + (p.mu + p.lambda - p.xi).abs())
                .max(p.re_m * (2.0 * p.mu_p + p.lambda_p.abs()));
        if visc > 0.0 {
            dt = dt.min(self.opts.cfl * h * h / visc);
        }
        let c = p.sound_speed();
        let acoustic = if self.opts.splitting {
            self.opts.acoustic_cfl
        } else {
            self.opts.cfl
        };
        if acoustic > 0.0 {
            dt = dt.min(acoustic * p.eps * h / c);
        }
        dt
    }

    fn remainder(&self, q: &Spec7, t: f64) -> Result<Spec7> {
        let mut n = apply_nonlinear(&self.grid, &self.params, q, t, true)?;
        if !self.opts.splitting {
            let l = apply_linear(&self.grid, &self.params, q);
            for c in 0..7 {
                for (a, b) in n[c].iter_mut().zip(&l[c]) {
                    *a += b;
                }
            }
        }
        if let Some(src) = &self.source {
            let f = src(t);
            let s = FieldState {
                t,
                rho: f.drho,
                u: f.du,
                omega: f.domega,
            }
            .to_spec();
            for c in 0..7 {
                for (a, b) in n[c].iter_mut().zip(&s[c]) {
                    *a += b;
                }
            }
        }
        Ok(n)
    }

    /// Advances by one step of size `dt`.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param("dt", format!("must be positive, got {dt}")));
        }
        if self.opts.splitting {
            let stale = self.half.as_ref().map_or(true, |h| h.tau() != 0.5 * dt);
            if stale {
                self.half = Some(LinearPropagator::new(&self.grid, &self.params, 0.5 * dt));
            }
            let half = self.half.as_ref().expect("propagator just built");
            half.apply(&mut self.q);
        }
        let t = self.t;
        let axpy = |q: &Spec7, k: &Spec7, h: f64| -> Spec7 {
            std::array::from_fn(|c| q[c].iter().zip(&k[c]).map(|(a, b)| a + b * h).collect())
        };
        let k1 = self.remainder(&self.q, t)?;
        let k2 = self.remainder(&axpy(&self.q, &k1, 0.5 * dt), t + 0.5 * dt)?;
        let k3 = self.remainder(&axpy(&self.q, &k2, 0.5 * dt), t + 0.5 * dt)?;
        let k4 = self.remainder(&axpy(&self.q, &k3, dt), t + dt)?;
        let w = dt / 6.0;
        for c in 0..7 {
            for i in 0..self.grid.len() {
                self.q[c][i] += (k1[c][i] + (k2[c][i] + k3[c][i]) * 2.0 + k4[c][i]) * w;
            }
        }
        if let Some(half) = &self.half {
            if self.opts.splitting {
                half.apply(&mut self.q);
            }
        }
        self.t = t + dt;
        self.steps += 1;
        if self.q.iter().flatten().any(|c: &Complex64| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite {
                t: self.t,
                field: "state".into(),
                snapshot: Some(Box::new(self.state().to_snapshot(&self.params))),
            });
        }
        Ok(())
    }

    /// Steps with uniform substeps until `t_target`, feeding the energy ledger
    /// after every step when one is supplied.
    pub fn advance_to(&mut self, t_target: f64, mut ledger: Option<&mut EnergyLedger>) -> Result<()> {
        let span = t_target - self.t;
        if span < -1e-12 {
            return Err(Error::Precondition(format!(
                "cannot step backwards from t = {} to {t_target}",
                self.t
            )));
        }
        if span <= 1e-14 * t_target.abs().max(1.0) {
            return Ok(());
        }
        let dt_max = self.stable_dt();
        let n = ((span / dt_max) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let dt = span / n as f64;
        for i in 1..=n {
            self.step(dt)?;
            if i == n {
                self.t = t_target;
            }
            if let Some(l) = ledger.as_deref_mut() {
                l.accumulate_spec(&self.grid, &self.params, self.t, &self.q);
            }
        }
        Ok(())
    }
}
