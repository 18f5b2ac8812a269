//! Convolution with a radial `C^inf_c` kernel of unit mass, applied as a
//! Fourier multiplier.

use std::collections::HashMap;
use std::f64::consts::PI;

use super::field::GridField;
use crate::error::{Error, Result};

const QUAD_POINTS: usize = 512;

/// Unnormalized profile `exp(-1/(1-r^2))` on the unit ball.
fn profile(r: f64) -> f64 {
    if r >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r * r)).exp()
    }
}

/// Fourier transform of the unit-mass kernel at radial frequency `s`.
///
/// The radial integrand extends to a smooth even function supported in
/// (-1, 1), so the trapezoidal rule converges spectrally.
#[derive(Debug, Clone)]
pub struct KernelTransform {
    nodes: Vec<(f64, f64)>,
    mass: f64,
}

impl Default for KernelTransform {
    fn default() -> Self {
        Self::new()
    }
}

impl KernelTransform {
    pub fn new() -> Self {
        let h = 1.0 / QUAD_POINTS as f64;
        let nodes: Vec<(f64, f64)> = (1..QUAD_POINTS)
            .map(|j| {
                let r = j as f64 * h;
                (r, 4.0 * PI * profile(r) * r * r * h)
            })
            .collect();
        let mass = nodes.iter().map(|(_, w)| w).sum();
        KernelTransform { nodes, mass }
    }

    /// `chi_hat(s)` with `chi_hat(0) = 1`.
    pub fn eval(&self, s: f64) -> f64 {
        if s == 0.0 {
            return 1.0;
        }
        let sum: f64 = self
            .nodes
            .iter()
            .map(|&(r, w)| {
                let x = s * r;
                w * x.sin() / x
            })
            .sum();
        sum / self.mass
    }

    /// Kernel value `chi(x)` at radius `r` (unit mass normalization).
    pub fn kernel(&self, r: f64) -> f64 {
        profile(r) / self.mass
    }
}

/// `chi_eta * f` with `chi_eta(x) = eta^-3 chi(x / eta)`.
pub fn mollify<F: GridField>(f: &F, eta: f64) -> Result<F> {
    let grid = f.grid().clone();
    let l = grid.box_len();
    if !(eta > 0.0 && eta <= l / 4.0) {
        return Err(Error::param("eta", format!("smoothing length must lie in (0, L/4], got {eta}")));
    }
    let kt = KernelTransform::new();
    let scale = 2.0 * PI / l;
    let mut table: HashMap<usize, f64> = HashMap::new();
    let mult: Vec<f64> = (0..grid.len())
        .map(|i| {
            let m2 = grid.mode_radius2(i);
            *table
                .entry(m2)
                .or_insert_with(|| kt.eval(eta * scale * (m2 as f64).sqrt()))
        })
        .collect();
    let mut out = f.clone();
    for c in out.components_mut() {
        let s = c.fft().multiply(|i| mult[i].into());
        *c = s.ifft();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GridSpec;
    use crate::spectral::field::ScalarField;
    use crate::spectral::grid::Grid;
    use crate::spectral::ops::{grad, norm_lp};

    #[test]
    fn transform_matches_direct_3d_quadrature() {
        // Direct midpoint quadrature over the cube [-1,1]^3 of chi(x) cos(s x_1).
        let kt = KernelTransform::new();
        let m = 80;
        let h = 2.0 / m as f64;
        for &s in &[0.0, 1.0, 3.0, 7.5] {
            let mut sum = 0.0;
            for i in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        let x = -1.0 + (i as f64 + 0.5) * h;
                        let y = -1.0 + (j as f64 + 0.5) * h;
                        let z = -1.0 + (k as f64 + 0.5) * h;
                        let r = (x * x + y * y + z * z).sqrt();
                        sum += kt.kernel(r) * (s * x).cos();
                    }
                }
            }
            sum *= h * h * h;
            assert!((sum - kt.eval(s)).abs() < 1e-6, "s={s}: {sum} vs {}", kt.eval(s));
        }
    }

    #[test]
    fn constants_are_preserved() {
        let g = Grid::new(GridSpec::new(16, 8.0).unwrap());
        let c = ScalarField::constant(&g, 2.5);
        let m = mollify(&c, 0.7).unwrap();
        assert!(m.sub(&c).max_abs() < 1e-13);
        assert!(mollify(&c, 0.0).is_err());
        assert!(mollify(&c, 2.5).is_err());
    }

    #[test]
    fn single_mode_is_scaled_by_transform() {
        let l = 8.0;
        let g = Grid::new(GridSpec::new(16, l).unwrap());
        let k = 2.0 * PI * 3.0 / l;
        let f = ScalarField::from_fn(&g, |x| (k * x[1]).cos());
        let eta = 0.5;
        let m = mollify(&f, eta).unwrap();
        let factor = KernelTransform::new().eval(eta * k);
        assert!(m.sub(&f.scale(factor)).max_abs() < 1e-13);
    }

    #[test]
    fn error_is_bounded_by_eta_times_gradient() {
        let l = 8.0;
        let g = Grid::new(GridSpec::new(32, l).unwrap());
        let f = ScalarField::from_fn(&g, |x| {
            let r2: f64 = x.iter().map(|xi| (xi - l / 2.0).powi(2)).sum();
            (-r2 / 1.5).exp()
        });
        let gn = norm_lp(&grad(&f), 2.0).unwrap();
        for &eta in &[0.4, 0.2, 0.1, 0.05] {
            let err = norm_lp(&f.sub(&mollify(&f, eta).unwrap()), 2.0).unwrap();
            assert!(err <= eta * gn, "eta={eta}: {err} > {}", eta * gn);
        }
    }
}
