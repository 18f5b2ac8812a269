//! Physical parameters, the barotropic equation of state and the scalar
//! thermodynamic potentials built on it.
//!
//! Everything here is a pure function of validated [`SimParams`]; validation
//! happens once, when the parameters are constructed or deserialized.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid: `n` points per axis on a cube of side `box_len`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpecRaw")]
pub struct GridSpec {
    pub n: usize,
    pub box_len: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpecRaw {
    #[serde(default = "default_n")]
    n: usize,
    #[serde(default = "default_box_len")]
    box_len: f64,
}

fn default_n() -> usize {
    32
}

fn default_box_len() -> f64 {
    8.0 * std::f64::consts::PI
}

impl TryFrom<GridSpecRaw> for GridSpec {
    type Error = Error;

    fn try_from(raw: GridSpecRaw) -> Result<Self> {
        GridSpec::new(raw.n, raw.box_len)
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n: default_n(),
            box_len: default_box_len(),
        }
    }
}

impl GridSpec {
    pub fn new(n: usize, box_len: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::param("grid.n", format!("must be a power of two >= 16, got {n}")));
        }
        if !(box_len.is_finite() && box_len > 0.0) {
            return Err(Error::param("grid.box_len", format!("must be positive, got {box_len}")));
        }
        Ok(GridSpec { n, box_len })
    }

    pub fn spacing(&self) -> f64 {
        self.box_len / self.n as f64
    }

    pub fn volume(&self) -> f64 {
        self.box_len.powi(3)
    }
}

/// Physical and scaling parameters of the scaled micro-polar system.
///
/// `eps` is the Mach number, `nu` the inverse Reynolds number and `re_m` the
/// micro-Reynolds ratio. The Strouhal number is fixed to one and the
/// micro-inertia is absorbed into the scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SimParamsRaw")]
pub struct SimParams {
    pub a: f64,
    pub gamma: f64,
    pub mu: f64,
    pub lambda: f64,
    pub mu_p: f64,
    pub lambda_p: f64,
    pub xi: f64,
    pub eps: f64,
    pub nu: f64,
    pub re_m: f64,
    pub grid: GridSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SimParamsRaw {
    a: f64,
    gamma: f64,
    mu: f64,
    lambda: f64,
    mu_p: f64,
    lambda_p: f64,
    xi: f64,
    eps: f64,
    nu: f64,
    re_m: f64,
    grid: GridSpec,
}

impl Default for SimParamsRaw {
    fn default() -> Self {
        let d = SimParams::DEFAULT;
        SimParamsRaw {
            a: d.a,
            gamma: d.gamma,
            mu: d.mu,
            lambda: d.lambda,
            mu_p: d.mu_p,
            lambda_p: d.lambda_p,
            xi: d.xi,
            eps: d.eps,
            nu: d.nu,
            re_m: d.re_m,
            grid: d.grid,
        }
    }
}

impl TryFrom<SimParamsRaw> for SimParams {
    type Error = Error;

    fn try_from(r: SimParamsRaw) -> Result<Self> {
        let p = SimParams {
            a: r.a,
            gamma: r.gamma,
            mu: r.mu,
            lambda: r.lambda,
            mu_p: r.mu_p,
            lambda_p: r.lambda_p,
            xi: r.xi,
            eps: r.eps,
            nu: r.nu,
            re_m: r.re_m,
            grid: r.grid,
        };
        p.validate()?;
        Ok(p)
    }
}

impl Default for SimParams {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl SimParams {
    pub const DEFAULT: SimParams = SimParams {
        a: 1.0,
        gamma: 2.0,
        mu: 1.0,
        lambda: 0.0,
        mu_p: 1.0,
        lambda_p: 0.0,
        xi: 0.5,
        eps: 0.1,
        nu: 0.01,
        re_m: 1.0,
        grid: GridSpec {
            n: 32,
            box_len: 8.0 * std::f64::consts::PI,
        },
    };

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("a", self.a),
            ("gamma", self.gamma),
            ("mu", self.mu),
            ("lambda", self.lambda),
            ("mu_p", self.mu_p),
            ("lambda_p", self.lambda_p),
            ("xi", self.xi),
            ("eps", self.eps),
            ("nu", self.nu),
            ("re_m", self.re_m),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        if self.a <= 0.0 {
            return Err(Error::param("a", "pressure coefficient must be positive (p = a*rho^gamma)"));
        }
        if self.gamma <= 1.5 {
            return Err(Error::param(
                "gamma",
                format!("gamma must exceed 3/2 (barotropic pressure law p = a*rho^gamma), got {}", self.gamma),
            ));
        }
        if self.mu <= 0.0 {
            return Err(Error::param("mu", "shear viscosity must be positive"));
        }
        if self.mu_p <= 0.0 {
            return Err(Error::param("mu_p", "micro-viscosity must be positive"));
        }
        if self.xi <= 0.0 {
            return Err(Error::param("xi", "coupling viscosity must be positive"));
        }
        if 2.0 * self.mu + 3.0 * self.lambda < 0.0 {
            return Err(Error::param("lambda", "viscosities must satisfy 2*mu + 3*lambda >= 0"));
        }
        if 2.0 * self.mu_p + 3.0 * self.lambda_p < 0.0 {
            return Err(Error::param("lambda_p", "micro-viscosities must satisfy 2*mu_p + 3*lambda_p >= 0"));
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::param("eps", format!("Mach number must lie in (0, 1], got {}", self.eps)));
        }
        if self.nu < 0.0 {
            return Err(Error::param("nu", "inverse Reynolds number must be nonnegative"));
        }
        if self.re_m <= 0.0 {
            return Err(Error::param("re_m", "micro-Reynolds ratio must be positive"));
        }
        GridSpec::new(self.grid.n, self.grid.box_len)?;
        Ok(())
    }

    pub fn with_eps(mut self, eps: f64) -> Result<Self> {
        self.eps = eps;
        self.validate()?;
        Ok(self)
    }

    pub fn with_nu(mut self, nu: f64) -> Result<Self> {
        self.nu = nu;
        self.validate()?;
        Ok(self)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        self.gamma = gamma;
        self.validate()?;
        Ok(self)
    }

    pub fn with_grid(mut self, grid: GridSpec) -> Self {
        self.grid = grid;
        self
    }

    /// Reference sound speed `sqrt(p'(1)) = sqrt(a*gamma)`.
    pub fn sound_speed(&self) -> f64 {
        (self.a * self.gamma).sqrt()
    }
}

/// `p(rho) = a rho^gamma`.
pub fn pressure(rho: f64, p: &SimParams) -> Result<f64> {
    if !(rho >= 0.0) {
        return Err(Error::Domain(format!("pressure needs rho >= 0, got {rho}")));
    }
    Ok(p.a * rho.powf(p.gamma))
}

/// Closed form of `rho * int_1^rho p(z)/z^2 dz`.
pub fn helmholtz_h(rho: f64, p: &SimParams) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("H needs rho > 0, got {rho}")));
    }
    Ok(p.a * (rho.powf(p.gamma) - rho) / (p.gamma - 1.0))
}

pub fn helmholtz_h_prime(rho: f64, p: &SimParams) -> f64 {
    p.a * (p.gamma * rho.powf(p.gamma - 1.0) - 1.0) / (p.gamma - 1.0)
}

/// `x^g - 1 - g (x - 1)` for `x = 1 + d`, without cancellation near `d = 0`.
fn convex_remainder(d: f64, g: f64) -> f64 {
    if d.abs() < 1e-3 {
        // Taylor series; truncation error ~ d^7.
        let mut term = 1.0;
        let mut sum = 0.0;
        let mut coeff = g;
        for k in 1..=6 {
            term *= d;
            if k >= 2 {
                sum += coeff * term;
            }
            coeff *= (g - k as f64) / (k as f64 + 1.0);
        }
        sum
    } else if d <= -1.0 {
        // x = 0: remainder is g - 1.
        (1.0 + d).max(0.0).powf(g) - 1.0 - g * d
    } else {
        (g * d.ln_1p()).exp_m1() - g * d
    }
}

/// Relative pressure potential `P(rho, 1) = H(rho) - H'(1)(rho - 1) - H(1)`.
///
/// Extends continuously to `rho = 0`, where it equals `a`.
pub fn rel_pressure_p(rho: f64, p: &SimParams) -> Result<f64> {
    if !(rho >= 0.0) {
        return Err(Error::Domain(format!("P needs rho >= 0, got {rho}")));
    }
    Ok(p.a * convex_remainder(rho - 1.0, p.gamma) / (p.gamma - 1.0))
}

/// Bregman distance of `H` between `rho` and the reference `r`:
/// `H(rho) - H'(r)(rho - r) - H(r)`.
pub fn relative_potential(rho: f64, r: f64, p: &SimParams) -> f64 {
    // The linear part of H cancels; what remains is a/(g-1) r^g phi(rho/r - 1).
    let d = (rho - r) / r;
    p.a * r.powf(p.gamma) * convex_remainder(d, p.gamma) / (p.gamma - 1.0)
}

/// Specific enthalpy `h` with `h'(rho) = p'(rho)/rho` and `h(1) = 0`.
pub fn enthalpy(rho: f64, p: &SimParams) -> f64 {
    p.a * p.gamma / (p.gamma - 1.0) * (rho.powf(p.gamma - 1.0) - 1.0)
}

/// `h(rho) - c^2 (rho - 1)`: the part of the enthalpy beyond its linearization.
pub fn enthalpy_remainder(rho: f64, p: &SimParams) -> f64 {
    let c2 = p.a * p.gamma;
    let d = rho - 1.0;
    let g1 = p.gamma - 1.0;
    // c^2 [ (x^{g-1} - 1)/(g-1) - d ]  ==  c^2/(g-1) [x^{g-1} - 1 - (g-1) d]
    c2 * convex_remainder(d, g1) / g1
}

/// Comparison quantity `|rho-1|^2` near equilibrium, `|rho-1|^gamma` away from it.
pub fn p_envelope(rho: f64, p: &SimParams) -> f64 {
    let d = (rho - 1.0).abs();
    if d < 0.5 {
        d * d
    } else {
        d.powf(p.gamma)
    }
}

/// Empirical equivalence constants `c1 q <= P <= c2 q` on a density grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeConstants {
    pub c1: f64,
    pub c2: f64,
}

impl EnvelopeConstants {
    /// Calibrates on `samples` equally spaced densities in `[0, rho_max]`.
    pub fn calibrate(p: &SimParams, rho_max: f64, samples: usize) -> Self {
        let mut c1 = f64::INFINITY;
        let mut c2: f64 = 0.0;
        for i in 0..samples {
            let rho = rho_max * i as f64 / (samples - 1) as f64;
            let q = p_envelope(rho, p);
            if q == 0.0 {
                continue;
            }
            let ratio = rel_pressure_p(rho, p).unwrap_or(f64::NAN) / q;
            c1 = c1.min(ratio);
            c2 = c2.max(ratio);
        }
        EnvelopeConstants { c1, c2 }
    }
}

/// Lower and upper envelope values `(c1 q(rho), c2 q(rho))`.
pub fn p_equivalence_bounds(rho: f64, p: &SimParams, consts: &EnvelopeConstants) -> (f64, f64) {
    let q = p_envelope(rho, p);
    (consts.c1 * q, consts.c2 * q)
}
