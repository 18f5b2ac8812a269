//! Relative energy between a compressible state and a smooth comparison triple.

use serde::Serialize;

use crate::acoustics::AcousticState;
use crate::compressible::FieldState;
use crate::error::{Error, Result};
use crate::incompressible::IncompressibleState;
use crate::model::{relative_potential, SimParams};
use crate::spectral::{gradient_tensor, ScalarField, VectorField};

/// Comparison triple `(r, U, W)` with `r > 0`.
#[derive(Debug, Clone)]
pub struct TestTriple {
    pub r: ScalarField,
    pub u: VectorField,
    pub w: VectorField,
}

impl TestTriple {
    pub fn new(r: ScalarField, u: VectorField, w: VectorField) -> Result<Self> {
        if r.grid().spec() != u.grid().spec() || r.grid().spec() != w.grid().spec() {
            return Err(Error::Precondition("test triple fields live on different grids".into()));
        }
        let rmin = r.min();
        if !(rmin > 0.0) {
            return Err(Error::Domain(format!("test density must be positive, min r = {rmin}")));
        }
        Ok(TestTriple { r, u, w })
    }
}

/// Parts `(velocity, micro-rotation, potential)` of the relative energy.
///
/// The potential part carries the `1/eps^2` weight of the scaled energy.
pub fn relative_energy_parts(s: &FieldState, tt: &TestTriple, p: &SimParams) -> Result<[f64; 3]> {
    if s.grid().spec() != tt.r.grid().spec() {
        return Err(Error::Precondition("state and test triple grids differ".into()));
    }
    let rho = s.rho.values();
    let r = tt.r.values();
    if let Some(bad) = r.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::Domain(format!("test density must be positive, got {bad}")));
    }
    let du = s.u.sub(&tt.u).norm2();
    let dw = s.omega.sub(&tt.w).norm2();
    let inv_eps2 = 1.0 / (p.eps * p.eps);
    let mut acc = [0.0; 3];
    for i in 0..rho.len() {
        acc[0] += 0.5 * rho[i] * du.values()[i];
        acc[1] += 0.5 * rho[i] * dw.values()[i];
        acc[2] += relative_potential(rho[i].max(0.0), r[i], p) * inv_eps2;
    }
    let cv = s.grid().cell_volume();
    Ok(acc.map(|a| a * cv))
}

pub fn relative_energy(s: &FieldState, tt: &TestTriple, p: &SimParams) -> Result<f64> {
    Ok(relative_energy_parts(s, tt, p)?.iter().sum())
}

/// `(1 + eps psi, v + grad Psi, omega)`.
pub fn compose_test_triple(euler: &IncompressibleState, ac: &AcousticState, eps: f64) -> Result<TestTriple> {
    if euler.grid().spec() != ac.grid().spec() {
        return Err(Error::Precondition("target and acoustic grids differ".into()));
    }
    let r = ac.psi_field().map(|v| 1.0 + eps * v);
    let rmin = r.min();
    if !(rmin > 0.0) {
        return Err(Error::Domain(format!(
            "1 + eps psi must be positive (min {rmin} at eps = {eps}); eps too large for the acoustic amplitude"
        )));
    }
    TestTriple::new(r, euler.v.add(&ac.wave_velocity()), euler.omega.clone())
}

/// The five quadratic dissipation integrals in `(u - U, omega - W)`:
/// `nu mu |grad du|^2`, `nu (mu + lambda) (div du)^2`,
/// `nu Re_M mu' |grad dw|^2`, `nu Re_M (mu' + lambda') (div dw)^2`, `nu xi |2 dw - curl du|^2`.
pub fn dissipation_blocks(s: &FieldState, tt: &TestTriple, p: &SimParams) -> [f64; 5] {
    let du = s.u.sub(&tt.u).fft();
    let dw = s.omega.sub(&tt.w).fft();
    let n = crate::compressible::energy::dissipation_norms(
        s.grid(),
        [du.comps[0].coeffs(), du.comps[1].coeffs(), du.comps[2].coeffs()],
        [dw.comps[0].coeffs(), dw.comps[1].coeffs(), dw.comps[2].coeffs()],
    );
    [
        p.nu * p.mu * n[0],
        p.nu * (p.mu + p.lambda) * n[1],
        p.nu * p.re_m * p.mu_p * n[2],
        p.nu * p.re_m * (p.mu_p + p.lambda_p) * n[3],
        p.nu * p.xi * n[4],
    ]
}

/// The four error norms bounded by the convergence-rate corollary:
/// `||sqrt(rho)(u - U)||^2`, `||sqrt(rho)(omega - W)||^2`,
/// `||(rho - 1)/eps - psi||^2` and `||(rho - 1)/eps^(2/g) - psi/eps^(2/g - 1)||_g^g`,
/// with `psi = (r - 1)/eps`.
pub fn corollary_norms(s: &FieldState, tt: &TestTriple, eps: f64, gamma: f64) -> [f64; 4] {
    let rho = s.rho.values();
    let r = tt.r.values();
    let du = s.u.sub(&tt.u).norm2();
    let dw = s.omega.sub(&tt.w).norm2();
    let e2g = eps.powf(2.0 / gamma);
    let e2g1 = eps.powf(2.0 / gamma - 1.0);
    let mut acc = [0.0; 4];
    for i in 0..rho.len() {
        let psi = (r[i] - 1.0) / eps;
        acc[0] += rho[i] * du.values()[i];
        acc[1] += rho[i] * dw.values()[i];
        acc[2] += ((rho[i] - 1.0) / eps - psi).powi(2);
        acc[3] += ((rho[i] - 1.0) / e2g - psi / e2g1).abs().powf(gamma);
    }
    let cv = s.grid().cell_volume();
    acc.map(|a| a * cv)
}

/// Gronwall coefficient `c(t) = 1 + ||grad v||_inf + ||grad omega||_inf` of a target state.
pub fn gronwall_coefficient(target: &IncompressibleState) -> f64 {
    let sup = |v: &VectorField| {
        gradient_tensor(v)
            .iter()
            .flatten()
            .fold(0.0f64, |m, f| m.max(f.max_abs()))
    };
    1.0 + sup(&target.v) + sup(&target.omega)
}

/// Sampled relative energy along a run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RelEnergyTrace {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub dissipation: Vec<[f64; 5]>,
    /// Gronwall coefficient `c(t)` of the target at each sample.
    pub coefficient: Vec<f64>,
}

impl RelEnergyTrace {
    pub fn push(&mut self, t: f64, value: f64, dissipation: [f64; 5], coefficient: f64) {
        self.times.push(t);
        self.values.push(value);
        self.dissipation.push(dissipation);
        self.coefficient.push(coefficient);
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(*v))
    }

    /// `exp(int c(t) dt)` by the trapezoidal rule.
    pub fn growth_factor(&self) -> f64 {
        let mut integral = 0.0;
        for j in 1..self.times.len() {
            integral += 0.5 * (self.times[j] - self.times[j - 1]) * (self.coefficient[j] + self.coefficient[j - 1]);
        }
        integral.exp()
    }
}

pub fn gronwall_alpha(gamma: f64) -> f64 {
    (0.25f64).min(1.0 / (2.0 * gamma))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GronwallReport {
    pub alpha: f64,
    pub sup_e: f64,
    pub c_t: f64,
    pub e0: f64,
    /// Implied constant `(sup E - c_T E0) / eps^alpha`.
    pub c_hat: f64,
    pub c_ref: f64,
    pub passes: bool,
}

/// Checks `sup E <= c_ref eps^alpha + c_T E0`.
///
/// `c_ref = None` calibrates against this trace, as is done at the coarsest
/// `eps` of a sweep. `c_t = None` uses the trace's own growth factor.
pub fn gronwall_check(
    trace: &RelEnergyTrace,
    eps: f64,
    gamma: f64,
    e0: f64,
    c_t: Option<f64>,
    c_ref: Option<f64>,
) -> Result<GronwallReport> {
    if trace.values.is_empty() {
        return Err(Error::Precondition("relative energy trace is empty".into()));
    }
    let alpha = gronwall_alpha(gamma);
    let sup_e = trace.sup();
    let c_t = c_t.unwrap_or_else(|| trace.growth_factor());
    let c_hat = (sup_e - c_t * e0) / eps.powf(alpha);
    let c_ref = c_ref.unwrap_or(c_hat.max(0.0));
    let bound = c_ref * eps.powf(alpha) + c_t * e0;
    let passes = sup_e <= bound * (1.0 + 1e-12);
    Ok(GronwallReport {
        alpha,
        sup_e,
        c_t,
        e0,
        c_hat,
        c_ref,
        passes,
    })
}
