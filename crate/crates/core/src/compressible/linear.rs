//! Exact propagator of the constant-coefficient part of the compressible
//! system, linearized about `rho = 1, u = 0, omega = 0`.
//!
//! Per wavevector the density and longitudinal velocity form a damped
//! acoustic pair; the transverse velocity and both micro-rotation parts decay
//! independently. The curl couplings are left to the explicit remainder.

use std::sync::Arc;

use num_complex::Complex64;

use super::Spec7;
use crate::model::SimParams;
use crate::spectral::Grid;

#[derive(Debug, Clone, Copy, Default)]
struct ModeCoeffs {
    /// Unit wavevector (zero for the mean mode).
    khat: [f64; 3],
    kappa: f64,
    /// Acoustic 2x2 block acting on `(rho_hat, -i u_hat_L)`.
    m: [[f64; 2]; 2],
    u_t: f64,
    w_l: f64,
    w_t: f64,
}

/// Damping rates of the linear symbol at wavenumber magnitude `kappa`.
#[derive(Debug, Clone, Copy)]
pub struct LinearRates {
    pub acoustic_damping: f64,
    pub u_transverse: f64,
    pub omega_longitudinal: f64,
    pub omega_transverse: f64,
}

pub fn linear_rates(p: &SimParams, kappa: f64) -> LinearRates {
    let k2 = kappa * kappa;
    let nu = p.nu;
    LinearRates {
        acoustic_damping: nu * (2.0 * p.mu + p.lambda) * k2,
        u_transverse: nu * (p.mu + p.xi) * k2,
        omega_longitudinal: nu * p.re_m * (2.0 * p.mu_p + p.lambda_p) * k2 + 4.0 * nu * p.xi,
        omega_transverse: nu * p.re_m * p.mu_p * k2 + 4.0 * nu * p.xi,
    }
}

/// `exp(A tau)` for `A = [[0, kappa], [-kappa c^2/eps^2, -d]]`.
pub fn acoustic_block(kappa: f64, c_over_eps: f64, d: f64, tau: f64) -> [[f64; 2]; 2] {
    let w2 = kappa * kappa * c_over_eps * c_over_eps;
    let beta2 = w2 - 0.25 * d * d;
    let (cs, sn) = if beta2 > 0.0 {
        let b = beta2.sqrt();
        ((b * tau).cos(), (b * tau).sin() / b)
    } else if beta2 < 0.0 {
        let g = (-beta2).sqrt();
        ((g * tau).cosh(), (g * tau).sinh() / g)
    } else {
        (1.0, tau)
    };
    let e = (-0.5 * d * tau).exp();
    [
        [e * (cs + 0.5 * d * sn), e * kappa * sn],
        [-e * kappa * c_over_eps * c_over_eps * sn, e * (cs - 0.5 * d * sn)],
    ]
}

#[derive(Debug, Clone)]
pub struct LinearPropagator {
    tau: f64,
    coeffs: Vec<ModeCoeffs>,
}

impl LinearPropagator {
    pub fn new(grid: &Arc<Grid>, p: &SimParams, tau: f64) -> Self {
        let c_over_eps = p.sound_speed() / p.eps;
        let coeffs = (0..grid.len())
            .map(|i| {
                let k = grid.wavevector(i);
                let kappa = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
                let r = linear_rates(p, kappa);
                if kappa == 0.0 {
                    return ModeCoeffs {
                        m: [[1.0, 0.0], [0.0, 1.0]],
                        u_t: 1.0,
                        w_l: (-r.omega_longitudinal * tau).exp(),
                        w_t: (-r.omega_transverse * tau).exp(),
                        ..Default::default()
                    };
                }
                ModeCoeffs {
                    khat: [k[0] / kappa, k[1] / kappa, k[2] / kappa],
                    kappa,
                    m: acoustic_block(kappa, c_over_eps, r.acoustic_damping, tau),
                    u_t: (-r.u_transverse * tau).exp(),
                    w_l: (-r.omega_longitudinal * tau).exp(),
                    w_t: (-r.omega_transverse * tau).exp(),
                }
            })
            .collect();
        LinearPropagator { tau, coeffs }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn apply(&self, q: &mut Spec7) {
        let (rho, rest) = q.split_at_mut(1);
        let (u, w) = rest.split_at_mut(3);
        for (i, mc) in self.coeffs.iter().enumerate() {
            let kh = mc.khat;
            // micro-rotation: longitudinal and transverse decay
            let wl = kh[0] * w[0][i] + kh[1] * w[1][i] + kh[2] * w[2][i];
            for c in 0..3 {
                let lpart = wl * kh[c];
                w[c][i] = (w[c][i] - lpart) * mc.w_t + lpart * mc.w_l;
            }
            if mc.kappa == 0.0 {
                continue;
            }
            let ul = kh[0] * u[0][i] + kh[1] * u[1][i] + kh[2] * u[2][i];
            // y = -i u_L
            let y = Complex64::new(ul.im, -ul.re);
            let r0 = rho[0][i];
            let r1 = r0 * mc.m[0][0] + y * mc.m[0][1];
            let y1 = r0 * mc.m[1][0] + y * mc.m[1][1];
            rho[0][i] = r1;
            let ul1 = Complex64::new(-y1.im, y1.re);
            for c in 0..3 {
                u[c][i] = (u[c][i] - ul * kh[c]) * mc.u_t + ul1 * kh[c];
            }
        }
    }
}
