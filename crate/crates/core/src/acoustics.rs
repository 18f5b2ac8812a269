//! Exact spectral solution of the acoustic system
//! `eps psi_t + Lap Psi = eps f1`, `eps grad Psi_t + c^2 grad psi = eps f2`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::snapshot::{Snapshot, SnapshotHeader};
use crate::model::SimParams;
use crate::spectral::ops::{spectral_grad, spectral_gradient_potential, spectral_helmholtz};
use crate::spectral::{
    cutoff, helmholtz_split, mollify, norm_lp_masked, Grid, ScalarField, SpectralField, VectorField,
};

/// Density-type variable `psi` and acoustic potential `Psi`, stored spectrally.
#[derive(Debug, Clone)]
pub struct AcousticState {
    pub t: f64,
    pub psi: SpectralField,
    pub potential: SpectralField,
}

impl AcousticState {
    pub fn zero(grid: &Arc<Grid>) -> Self {
        AcousticState {
            t: 0.0,
            psi: SpectralField::zeros(grid),
            potential: SpectralField::zeros(grid),
        }
    }

    /// Builds a state from physical `psi` and `Psi`; the mean of `Psi` is dropped.
    pub fn from_fields(t: f64, psi: &ScalarField, potential: &ScalarField) -> Self {
        let mut pot = potential.fft();
        pot.coeffs_mut()[0] = Complex64::default();
        AcousticState {
            t,
            psi: psi.fft(),
            potential: pot,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.psi.grid()
    }

    pub fn psi_field(&self) -> ScalarField {
        self.psi.ifft()
    }

    pub fn potential_field(&self) -> ScalarField {
        self.potential.ifft()
    }

    /// Wave velocity `grad Psi`.
    pub fn wave_velocity(&self) -> VectorField {
        spectral_grad(&self.potential).ifft()
    }

    pub fn to_snapshot(&self, p: &SimParams) -> Snapshot {
        let g = self.grid();
        let header = SnapshotHeader::new("acoustic", g.n(), g.box_len(), &["psi", "Psi"], self.t)
            .with_meta("eps", p.eps)
            .with_meta("a", p.a)
            .with_meta("gamma", p.gamma);
        Snapshot::new(
            header,
            vec![self.psi_field().into_values(), self.potential_field().into_values()],
        )
        .expect("state layout matches header")
    }

    pub fn from_snapshot(s: &Snapshot, grid: &Arc<Grid>) -> Result<Self> {
        if s.header.n != grid.n() || s.header.box_len != grid.box_len() {
            return Err(Error::Corrupt("snapshot grid does not match".into()));
        }
        let psi = ScalarField::from_values(grid, s.require("psi")?.to_vec())?;
        let pot = ScalarField::from_values(grid, s.require("Psi")?.to_vec())?;
        Ok(AcousticState::from_fields(s.header.time, &psi, &pot))
    }
}

fn kappa(grid: &Grid, i: usize) -> f64 {
    let k = grid.wavevector(i);
    (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()
}

/// Acoustic energy `1/2 int (c^2 psi^2 + |grad Psi|^2)`.
pub fn acoustic_energy(s: &AcousticState, p: &SimParams) -> f64 {
    let g = s.grid();
    let c2 = p.sound_speed().powi(2);
    let sum: f64 = (0..g.len())
        .map(|i| {
            let k = kappa(g, i);
            c2 * s.psi.coeffs()[i].norm_sqr() + k * k * s.potential.coeffs()[i].norm_sqr()
        })
        .sum();
    0.5 * sum * g.plancherel_weight()
}

/// Free evolution to time `t` (backwards when `t < s0.t`).
pub fn acoustic_propagate(s0: &AcousticState, p: &SimParams, t: f64) -> AcousticState {
    let g = s0.grid().clone();
    let c = p.sound_speed();
    let tau = t - s0.t;
    let mut psi = s0.psi.clone();
    let mut pot = s0.potential.clone();
    for i in 0..g.len() {
        let k = kappa(&g, i);
        if k == 0.0 {
            pot.coeffs_mut()[i] = Complex64::default();
            continue;
        }
        let (sn, cs) = (c * k / p.eps * tau).sin_cos();
        let a = s0.psi.coeffs()[i];
        let b = s0.potential.coeffs()[i];
        psi.coeffs_mut()[i] = a * cs + b * (k / c * sn);
        pot.coeffs_mut()[i] = b * cs - a * (c / k * sn);
    }
    AcousticState { t, psi, potential: pot }
}

/// Solution with sampled sources: free flight between samples and the
/// trapezoidal rule for the Duhamel integral in the co-rotating frame.
///
/// `times[0]` must equal `s0.t`; `f1[j]` and `f2[j]` are the sources at
/// `times[j]`. Returns the state at every sample time.
pub fn acoustic_propagate_forced(
    s0: &AcousticState,
    p: &SimParams,
    times: &[f64],
    f1: &[ScalarField],
    f2: &[VectorField],
) -> Result<Vec<AcousticState>> {
    if times.is_empty() || times.len() != f1.len() || times.len() != f2.len() {
        return Err(Error::Precondition("source samples must match the sample times".into()));
    }
    if (times[0] - s0.t).abs() > 1e-12 * s0.t.abs().max(1.0) {
        return Err(Error::Precondition("first source sample must sit at the initial time".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("sample times must increase".into()));
    }
    let g = s0.grid().clone();
    let c = p.sound_speed();
    let t0 = s0.t;
    let len = g.len();
    let kap: Vec<f64> = (0..len).map(|i| kappa(&g, i)).collect();

    // Rotated-frame forcing R(-(s - t0)) F(s) with F = (c f1_hat, kappa phi_hat).
    let rotated_forcing = |j: usize| -> Vec<[Complex64; 2]> {
        let f1h = f1[j].fft();
        let f2h = f2[j].fft();
        let (sol, _) = spectral_helmholtz(&f2h);
        let sol_norm: f64 = sol.comps.iter().map(|s| s.weighted_energy(|_| 1.0)).sum::<f64>().sqrt();
        let tot: f64 = f2h.comps.iter().map(|s| s.weighted_energy(|_| 1.0)).sum::<f64>().sqrt();
        if sol_norm > 1e-10 * tot {
            log::warn!(
                "vector source at t = {} has solenoidal content (relative {:e}); it is discarded",
                times[j],
                sol_norm / tot
            );
        }
        let phi = spectral_gradient_potential(&f2h);
        let tau = times[j] - t0;
        (0..len)
            .map(|i| {
                let k = kap[i];
                let a = f1h.coeffs()[i] * c;
                let b = phi.coeffs()[i] * k;
                if k == 0.0 {
                    return [a, Complex64::default()];
                }
                // R(theta) = [[cos, sin], [-sin, cos]]; apply R(-w tau)
                let (sn, cs) = (c * k / p.eps * tau).sin_cos();
                [a * cs - b * sn, a * sn + b * cs]
            })
            .collect()
    };

    // Rotated-frame initial data Y0 = X(t0).
    let mut y: Vec<[Complex64; 2]> = (0..len)
        .map(|i| [s0.psi.coeffs()[i] * c, s0.potential.coeffs()[i] * kap[i]])
        .collect();
    let mut out = Vec::with_capacity(times.len());
    let to_state = |y: &[[Complex64; 2]], t: f64| -> AcousticState {
        let mut psi = SpectralField::zeros(&g);
        let mut pot = SpectralField::zeros(&g);
        let tau = t - t0;
        for i in 0..len {
            let k = kap[i];
            if k == 0.0 {
                psi.coeffs_mut()[i] = y[i][0] / c;
                continue;
            }
            let (sn, cs) = (c * k / p.eps * tau).sin_cos();
            let x0 = y[i][0] * cs + y[i][1] * sn;
            let x1 = -y[i][0] * sn + y[i][1] * cs;
            psi.coeffs_mut()[i] = x0 / c;
            pot.coeffs_mut()[i] = x1 / k;
        }
        AcousticState { t, psi, potential: pot }
    };
    out.push(to_state(&y, t0));
    let mut prev = rotated_forcing(0);
    for j in 1..times.len() {
        let next = rotated_forcing(j);
        let h = 0.5 * (times[j] - times[j - 1]);
        for i in 0..len {
            y[i][0] += (prev[i][0] + next[i][0]) * h;
            y[i][1] += (prev[i][1] + next[i][1]) * h;
        }
        out.push(to_state(&y, times[j]));
        prev = next;
    }
    Ok(out)
}

/// Regularized acoustic data: `psi = chi_eta * (phi rho1)` and `grad Psi` the
/// gradient part of `chi_eta * (phi H_perp[u0])`.
pub fn regularized_acoustic_data(rho1_0: &ScalarField, u0: &VectorField, eta: f64) -> Result<AcousticState> {
    let psi = mollify(&cutoff(rho1_0), eta)?;
    let (_, grad_part) = helmholtz_split(u0);
    let smoothed = mollify(&cutoff(&grad_part), eta)?;
    let pot = spectral_gradient_potential(&smoothed.fft());
    Ok(AcousticState {
        t: 0.0,
        psi: psi.fft(),
        potential: pot,
    })
}

/// Largest admissible window before waves re-enter through the periodic seam.
pub fn wraparound_time(eps: f64, c: f64, l_gap: f64) -> f64 {
    l_gap * eps / c
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalDecay {
    pub window: f64,
    /// `||grad Psi||_{L^q(0,T_w; L^p(K))}`.
    pub lq_lp: f64,
    /// `int_0^T_w ||grad Psi||^2_{L2(K)} dt`.
    pub local_energy: f64,
}

/// Space-time norms of the wave velocity over the measurement set `K`.
///
/// The trajectory must start at `t = 0` and be ordered in time; its span is
/// the measurement window and must stay below the wrap-around time.
pub fn local_decay_metrics(
    trajectory: &[AcousticState],
    k_mask: &[bool],
    p_exp: f64,
    q_exp: f64,
    l_gap: f64,
    p: &SimParams,
) -> Result<LocalDecay> {
    if trajectory.len() < 2 {
        return Err(Error::InvalidWindow("need at least two samples".into()));
    }
    if !(p_exp >= 1.0 && q_exp >= 1.0) {
        return Err(Error::param("p_exp/q_exp", "exponents must be >= 1"));
    }
    let t0 = trajectory[0].t;
    let window = trajectory[trajectory.len() - 1].t - t0;
    let limit = wraparound_time(p.eps, p.sound_speed(), l_gap);
    if !(window > 0.0) || window >= limit {
        return Err(Error::InvalidWindow(format!(
            "window {window} must lie in (0, {limit}) (wrap-around time at eps = {})",
            p.eps
        )));
    }
    let mut lp = Vec::with_capacity(trajectory.len());
    let mut l2sq = Vec::with_capacity(trajectory.len());
    for s in trajectory {
        let gv = s.wave_velocity();
        lp.push(norm_lp_masked(&gv, p_exp, k_mask)?);
        let l2 = norm_lp_masked(&gv, 2.0, k_mask)?;
        l2sq.push(l2 * l2);
    }
    let mut lq = 0.0;
    let mut energy = 0.0;
    for j in 1..trajectory.len() {
        let h = trajectory[j].t - trajectory[j - 1].t;
        if h <= 0.0 {
            return Err(Error::InvalidWindow("trajectory times must increase".into()));
        }
        lq += 0.5 * h * (lp[j - 1].powf(q_exp) + lp[j].powf(q_exp));
        energy += 0.5 * h * (l2sq[j - 1] + l2sq[j]);
    }
    Ok(LocalDecay {
        window,
        lq_lp: lq.powf(1.0 / q_exp),
        local_energy: energy,
    })
}

/// Uniformly sampled free trajectory on `[0, window]`.
pub fn sample_trajectory(s0: &AcousticState, p: &SimParams, window: f64, samples: usize) -> Vec<AcousticState> {
    (0..=samples)
        .map(|j| acoustic_propagate(s0, p, s0.t + window * j as f64 / samples as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GridSpec;
    use crate::spectral::random::{random_band_limited_scalar, random_band_limited_vector};
    use crate::spectral::{grad, norm_lp};

    fn setup() -> (Arc<Grid>, SimParams) {
        let p = SimParams {
            grid: GridSpec::new(16, 8.0).unwrap(),
            ..SimParams::DEFAULT
        };
        (Grid::new(p.grid), p)
    }

    #[test]
    fn propagation_by_zero_is_identity() {
        let (g, p) = setup();
        let s = AcousticState::from_fields(
            0.0,
            &random_band_limited_scalar(&g, 3, 1),
            &random_band_limited_scalar(&g, 3, 2),
        );
        let s1 = acoustic_propagate(&s, &p, 0.0);
        for (a, b) in s1.psi.coeffs().iter().zip(s.psi.coeffs()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn quarter_period_converts_density_into_potential() {
        let (g, p) = setup();
        let k = 2.0 * std::f64::consts::PI / g.box_len();
        let psi = ScalarField::from_fn(&g, |x| (k * x[0]).cos());
        let s = AcousticState::from_fields(0.0, &psi, &ScalarField::zeros(&g));
        let c = p.sound_speed();
        let tq = std::f64::consts::PI * p.eps / (2.0 * c * k);
        let s1 = acoustic_propagate(&s, &p, tq);
        assert!(s1.psi_field().max_abs() < 1e-12);
        let expect = psi.scale(-c / k);
        assert!(s1.potential_field().sub(&expect).max_abs() < 1e-12 * expect.max_abs());
    }

    #[test]
    fn gradient_velocity_recovers_smoothed_potential() {
        let (g, _) = setup();
        let bump = ScalarField::from_fn(&g, |x| {
            let r2: f64 = x.iter().map(|v| (v - 4.0).powi(2)).sum();
            (-r2).exp()
        });
        let u0 = grad(&bump);
        let s = regularized_acoustic_data(&ScalarField::zeros(&g), &u0, 0.2).unwrap();
        let expect = mollify(&cutoff(&u0), 0.2).unwrap();
        let (_, expect_grad) = helmholtz_split(&expect);
        assert!(s.wave_velocity().sub(&expect_grad).max_abs() < 1e-12);
        assert_eq!(s.psi_field().max_abs(), 0.0);
        assert!(norm_lp(&s.wave_velocity(), 2.0).unwrap() > 0.0);
    }

    #[test]
    fn window_beyond_wraparound_is_refused() {
        let (g, p) = setup();
        let s = AcousticState::zero(&g);
        let traj = sample_trajectory(&s, &p, 1.0, 4);
        let mask = vec![true; g.len()];
        let err = local_decay_metrics(&traj, &mask, 4.0, 4.0, 2.0, &p).unwrap_err();
        assert!(matches!(err, Error::InvalidWindow(_)));
        let traj = sample_trajectory(&s, &p, 0.01, 4);
        let ok = local_decay_metrics(&traj, &mask, 4.0, 4.0, 2.0, &p).unwrap();
        assert_eq!(ok.local_energy, 0.0);
        assert_eq!(ok.lq_lp, 0.0);
    }

    #[test]
    fn solenoidal_field_gives_no_acoustic_data() {
        let (g, _) = setup();
        let u0 = crate::spectral::curl(&random_band_limited_vector(&g, 3, 3));
        let s = regularized_acoustic_data(&ScalarField::zeros(&g), &u0, 0.3).unwrap();
        assert!(acoustic_energy(&s, &SimParams::DEFAULT) < 1e-24);
    }
}
