//! Uniform-in-eps bound entries on essential and residual sets.

use serde::Serialize;

use super::FieldState;
use crate::model::SimParams;
use crate::spectral::{essential_mask, norm_lp_masked, ScalarField, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AprioriTable {
    /// `sup_t ||(rho-1) 1_ess||_{L2} / eps`.
    pub rho_ess: f64,
    /// `sup_t ||(rho-1) 1_res||_{L^gamma} / eps^{2/gamma}`.
    pub rho_res: f64,
    /// `sup_t ||(u, omega) 1_ess||_{L2}`.
    pub vel_ess: f64,
    /// `||(u, omega) 1_res||_{L2(0,T;L2)} / eps^{min(1, 2/gamma)}`.
    pub vel_res: f64,
    /// Conjugate exponent `gamma / (gamma - 1)`.
    pub gamma_conj: f64,
}

/// Running sup/integral over a trajectory sampled in increasing time.
#[derive(Debug, Clone)]
pub struct AprioriAccumulator {
    eps: f64,
    gamma: f64,
    rho_ess: f64,
    rho_res: f64,
    vel_ess: f64,
    res_sq_integral: f64,
    last: Option<(f64, f64)>,
}

fn six_vector(u: &VectorField, w: &VectorField) -> Vec<ScalarField> {
    u.comps().iter().chain(w.comps().iter()).cloned().collect()
}

fn masked_l2(fields: &[ScalarField], mask: &[bool], cell: f64) -> f64 {
    let mut sum = 0.0;
    for f in fields {
        for (v, &m) in f.values().iter().zip(mask) {
            if m {
                sum += v * v;
            }
        }
    }
    (sum * cell).sqrt()
}

impl AprioriAccumulator {
    pub fn new(p: &SimParams) -> Self {
        AprioriAccumulator {
            eps: p.eps,
            gamma: p.gamma,
            rho_ess: 0.0,
            rho_res: 0.0,
            vel_ess: 0.0,
            res_sq_integral: 0.0,
            last: None,
        }
    }

    pub fn push(&mut self, s: &FieldState) {
        let ess = essential_mask(&s.rho);
        let res: Vec<bool> = ess.iter().map(|m| !m).collect();
        let dev = s.rho.map(|r| r - 1.0);
        let cell = s.grid().cell_volume();
        let re = norm_lp_masked(&dev, 2.0, &ess).expect("p = 2 is valid");
        let rr = norm_lp_masked(&dev, self.gamma, &res).expect("gamma > 1");
        let six = six_vector(&s.u, &s.omega);
        let ve = masked_l2(&six, &ess, cell);
        let vr = masked_l2(&six, &res, cell);
        self.rho_ess = self.rho_ess.max(re / self.eps);
        self.rho_res = self.rho_res.max(rr / self.eps.powf(2.0 / self.gamma));
        self.vel_ess = self.vel_ess.max(ve);
        let vr2 = vr * vr;
        if let Some((t0, v0)) = self.last {
            if s.t > t0 {
                self.res_sq_integral += 0.5 * (s.t - t0) * (v0 + vr2);
            }
        }
        self.last = Some((s.t, vr2));
    }

    pub fn finish(&self) -> AprioriTable {
        AprioriTable {
            rho_ess: self.rho_ess,
            rho_res: self.rho_res,
            vel_ess: self.vel_ess,
            vel_res: self.res_sq_integral.sqrt() / self.eps.powf(1f64.min(2.0 / self.gamma)),
            gamma_conj: self.gamma / (self.gamma - 1.0),
        }
    }
}

/// Bound table of a sampled trajectory.
pub fn apriori_diagnostics(trajectory: &[FieldState], p: &SimParams) -> AprioriTable {
    let mut acc = AprioriAccumulator::new(p);
    for s in trajectory {
        acc.push(s);
    }
    acc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GridSpec;
    use crate::spectral::Grid;

    #[test]
    fn equilibrium_trajectory_is_zero() {
        let g = Grid::new(GridSpec::new(16, 4.0).unwrap());
        let mut a = FieldState::equilibrium(&g);
        let mut b = a.clone();
        a.t = 0.0;
        b.t = 1.0;
        let t = apriori_diagnostics(&[a, b], &SimParams::DEFAULT);
        assert_eq!((t.rho_ess, t.rho_res, t.vel_ess, t.vel_res), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(t.gamma_conj, 2.0);
    }

    #[test]
    fn small_bump_has_empty_residual_set() {
        let g = Grid::new(GridSpec::new(16, 4.0).unwrap());
        let p = SimParams::DEFAULT;
        let s = FieldState {
            rho: ScalarField::from_fn(&g, |x| {
                let r2: f64 = x.iter().map(|v| (v - 2.0).powi(2)).sum();
                1.0 + p.eps * 0.4 * (-r2).exp()
            }),
            ..FieldState::equilibrium(&g)
        };
        let t = apriori_diagnostics(&[s], &p);
        assert_eq!(t.rho_res, 0.0);
        assert!(t.rho_ess > 0.0);
    }
}
