//! Differential operators, projections and norms on the periodic grid.
//!
//! Derivatives are multiplications by `i k` in Fourier space. The Nyquist
//! wavenumber is treated as zero so that every operator maps Hermitian
//! spectra to Hermitian spectra.

use std::sync::Arc;

use num_complex::Complex64;

use super::field::{GridField, ScalarField, SpectralField, SpectralVector, VectorField};
use super::grid::Grid;
use crate::error::{Error, Result};

#[inline]
pub(crate) fn times_ik(c: Complex64, k: f64) -> Complex64 {
    Complex64::new(-k * c.im, k * c.re)
}

/// `d f / d x_axis` in spectral space.
pub fn spectral_partial(f: &SpectralField, axis: usize) -> SpectralField {
    let g = f.grid().clone();
    f.multiply(|i| Complex64::new(0.0, g.wavevector(i)[axis]))
}

pub fn spectral_grad(f: &SpectralField) -> SpectralVector {
    SpectralVector {
        comps: [spectral_partial(f, 0), spectral_partial(f, 1), spectral_partial(f, 2)],
    }
}

pub fn spectral_div(v: &SpectralVector) -> SpectralField {
    let g = v.grid().clone();
    let mut out = SpectralField::zeros(&g);
    let [a, b, c] = &v.comps;
    for (i, o) in out.coeffs_mut().iter_mut().enumerate() {
        let k = g.wavevector(i);
        *o = times_ik(a.coeffs()[i], k[0]) + times_ik(b.coeffs()[i], k[1]) + times_ik(c.coeffs()[i], k[2]);
    }
    out
}

pub fn spectral_curl(v: &SpectralVector) -> SpectralVector {
    let g = v.grid().clone();
    let mut out = SpectralVector::zeros(&g);
    let [a, b, c] = &v.comps;
    for i in 0..g.len() {
        let k = g.wavevector(i);
        let (ax, ay, az) = (a.coeffs()[i], b.coeffs()[i], c.coeffs()[i]);
        out.comps[0].coeffs_mut()[i] = times_ik(az, k[1]) - times_ik(ay, k[2]);
        out.comps[1].coeffs_mut()[i] = times_ik(ax, k[2]) - times_ik(az, k[0]);
        out.comps[2].coeffs_mut()[i] = times_ik(ay, k[0]) - times_ik(ax, k[1]);
    }
    out
}

pub fn spectral_laplacian(f: &SpectralField) -> SpectralField {
    let g = f.grid().clone();
    f.multiply(|i| {
        let k = g.wavevector(i);
        Complex64::new(-(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]), 0.0)
    })
}

/// Solenoidal and gradient parts in spectral space; the mean goes to the
/// solenoidal part.
pub fn spectral_helmholtz(v: &SpectralVector) -> (SpectralVector, SpectralVector) {
    let g = v.grid().clone();
    let mut sol = v.clone();
    let mut grad = SpectralVector::zeros(&g);
    for i in 0..g.len() {
        let k = g.wavevector(i);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 {
            continue;
        }
        let kv = (0..3).map(|c| v.comps[c].coeffs()[i] * k[c]).sum::<Complex64>() / k2;
        for c in 0..3 {
            let gc = kv * k[c];
            grad.comps[c].coeffs_mut()[i] = gc;
            sol.comps[c].coeffs_mut()[i] -= gc;
        }
    }
    (sol, grad)
}

/// Solenoidal projection (Leray projector) in place.
pub fn project_solenoidal(v: &mut SpectralVector) {
    let g = v.grid().clone();
    for i in 0..g.len() {
        let k = g.wavevector(i);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 {
            continue;
        }
        let kv = (0..3).map(|c| v.comps[c].coeffs()[i] * k[c]).sum::<Complex64>() / k2;
        for c in 0..3 {
            v.comps[c].coeffs_mut()[i] -= kv * k[c];
        }
    }
}

/// Scalar potential `phi` with `grad phi = H_perp[v]` and zero mean.
pub fn spectral_gradient_potential(v: &SpectralVector) -> SpectralField {
    let g = v.grid().clone();
    let mut out = SpectralField::zeros(&g);
    for (i, o) in out.coeffs_mut().iter_mut().enumerate() {
        let k = g.wavevector(i);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 {
            continue;
        }
        // i k phi = k (k.v)/k^2  =>  phi = -i (k.v)/k^2
        let kv = (0..3).map(|c| v.comps[c].coeffs()[i] * k[c]).sum::<Complex64>() / k2;
        *o = Complex64::new(kv.im, -kv.re);
    }
    out
}

pub fn grad(f: &ScalarField) -> VectorField {
    spectral_grad(&f.fft()).ifft()
}

pub fn div(v: &VectorField) -> ScalarField {
    spectral_div(&v.fft()).ifft()
}

pub fn curl(v: &VectorField) -> VectorField {
    spectral_curl(&v.fft()).ifft()
}

pub fn laplacian(f: &ScalarField) -> ScalarField {
    spectral_laplacian(&f.fft()).ifft()
}

/// `v = sol + grad_part` with `div sol = 0` and `curl grad_part = 0`.
pub fn helmholtz_split(v: &VectorField) -> (VectorField, VectorField) {
    let (s, g) = spectral_helmholtz(&v.fft());
    (s.ifft(), g.ifft())
}

/// Gradient tensor `grad[i][j] = d v_i / d x_j`.
pub fn gradient_tensor(v: &VectorField) -> [[ScalarField; 3]; 3] {
    let s = v.fft();
    let row = |i: usize| {
        let gi = spectral_grad(&s.comps[i]).ifft();
        let [a, b, c] = gi.comps().clone();
        [a, b, c]
    };
    [row(0), row(1), row(2)]
}

/// Band-limits a field with the 2/3 rule.
pub fn dealias<F: GridField>(f: &F) -> F {
    let mut out = f.clone();
    for c in out.components_mut() {
        let mut s = c.fft();
        s.dealias();
        *c = s.ifft();
    }
    out
}

/// Discrete `L^p` norm of the pointwise Euclidean magnitude. `p = inf` gives
/// the maximum over samples.
pub fn norm_lp<F: GridField>(f: &F, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::param("p", format!("Lebesgue exponent must be >= 1, got {p}")));
    }
    let mag = f.magnitude();
    if p.is_infinite() {
        return Ok(mag.max());
    }
    let w = mag.grid().cell_volume();
    let sum: f64 = if p == 2.0 {
        mag.values().iter().map(|v| v * v).sum()
    } else {
        mag.values().iter().map(|v| v.powf(p)).sum()
    };
    Ok((sum * w).powf(1.0 / p))
}

/// `L^p` norm restricted to the samples where `mask` is true.
pub fn norm_lp_masked<F: GridField>(f: &F, p: f64, mask: &[bool]) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::param("p", format!("Lebesgue exponent must be >= 1, got {p}")));
    }
    let mag = f.magnitude();
    let vals = mag.values().iter().zip(mask).filter(|(_, &m)| m).map(|(v, _)| *v);
    if p.is_infinite() {
        return Ok(vals.fold(0.0, f64::max));
    }
    let sum: f64 = vals.map(|v| v.powf(p)).sum();
    Ok((sum * mag.grid().cell_volume()).powf(1.0 / p))
}

/// `W^{s,2}` norm through Plancherel with multiplier `(1 + |k|^2)^{s/2}`;
/// negative `s` gives the dual scale.
pub fn norm_sobolev<F: GridField>(f: &F, s: f64) -> f64 {
    let g = f.grid().clone();
    let weight: Vec<f64> = (0..g.len())
        .map(|i| {
            let k = g.wavevector(i);
            (1.0 + k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).powf(s)
        })
        .collect();
    f.components()
        .iter()
        .map(|c| c.fft().weighted_energy(|i| weight[i]))
        .sum::<f64>()
        .sqrt()
}

/// Pointwise mask of the essential set `|rho - 1| < 1/2`.
pub fn essential_mask(rho: &ScalarField) -> Vec<bool> {
    rho.values().iter().map(|&r| (r - 1.0).abs() < 0.5).collect()
}

/// `(f 1_{|rho-1|<1/2}, f 1_{|rho-1|>=1/2})`.
pub fn indicator_split<F: GridField>(rho: &ScalarField, f: &F) -> Result<(F, F)> {
    if rho.grid().spec() != f.grid().spec() {
        return Err(Error::Precondition("indicator split needs fields on one grid".into()));
    }
    let mask = essential_mask(rho);
    let mut ess = f.clone();
    let mut res = f.clone();
    for c in ess.components_mut() {
        for (v, &m) in c.values_mut().iter_mut().zip(&mask) {
            if !m {
                *v = 0.0;
            }
        }
    }
    for c in res.components_mut() {
        for (v, &m) in c.values_mut().iter_mut().zip(&mask) {
            if m {
                *v = 0.0;
            }
        }
    }
    Ok((ess, res))
}

/// `C^inf` step from 0 (t <= 0) to 1 (t >= 1).
fn smooth_step(t: f64) -> f64 {
    let f = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    let a = f(t);
    let b = f(1.0 - t);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Smooth cut-off equal to one on the central cube of half-width `3L/16` and
/// vanishing outside the central `(L/2)^3` sub-box.
pub fn plateau(grid: &Arc<Grid>) -> ScalarField {
    let l = grid.box_len();
    let c = l / 2.0;
    let inner = 3.0 * l / 16.0;
    let outer = l / 4.0;
    ScalarField::from_fn(grid, |x| {
        x.iter()
            .map(|&xi| smooth_step((outer - (xi - c).abs()) / (outer - inner)))
            .product()
    })
}

/// Multiplies every component by the plateau cut-off.
pub fn cutoff<F: GridField>(f: &F) -> F {
    let phi = plateau(f.grid());
    let mut out = f.clone();
    for c in out.components_mut() {
        for (v, w) in c.values_mut().iter_mut().zip(phi.values()) {
            *v *= w;
        }
    }
    out
}

/// Mask of the central cube of side `fraction * L` (the measurement set K).
pub fn central_box_mask(grid: &Arc<Grid>, fraction: f64) -> Vec<bool> {
    let c = grid.box_len() / 2.0;
    let half = fraction * grid.box_len() / 2.0;
    (0..grid.len())
        .map(|i| grid.coords(i).iter().all(|&x| (x - c).abs() <= half))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GridSpec;
    use crate::spectral::random::random_band_limited_vector;
    use std::f64::consts::PI;

    fn grid(n: usize, l: f64) -> Arc<Grid> {
        Grid::new(GridSpec::new(n, l).unwrap())
    }

    #[test]
    fn gradient_of_single_mode() {
        let l = 3.0;
        let g = grid(16, l);
        let f = ScalarField::from_fn(&g, |x| (2.0 * PI * x[0] / l).sin());
        let gr = grad(&f);
        let expected = ScalarField::from_fn(&g, |x| 2.0 * PI / l * (2.0 * PI * x[0] / l).cos());
        assert!(gr.component(0).sub(&expected).max_abs() < 1e-13);
        assert!(gr.component(1).max_abs() < 1e-14);
        assert!(gr.component(2).max_abs() < 1e-14);
    }

    #[test]
    fn helmholtz_of_pure_parts() {
        let g = grid(16, 5.0);
        let a = random_band_limited_vector(&g, 3, 11);
        let sol = curl(&a);
        let (s, gp) = helmholtz_split(&sol);
        assert!(s.sub(&sol).max_abs() < 1e-12 * sol.max_abs().max(1.0));
        assert!(gp.max_abs() < 1e-12 * sol.max_abs().max(1.0));
        let pot = random_band_limited_vector(&g, 3, 12).component(0).clone();
        let gf = grad(&pot);
        let (s, gp) = helmholtz_split(&gf);
        assert!(s.max_abs() < 1e-12 * gf.max_abs());
        assert!(gp.sub(&gf).max_abs() < 1e-12 * gf.max_abs());
    }

    #[test]
    fn mean_goes_to_solenoidal_part() {
        let g = grid(16, 2.0);
        let v = VectorField::from_fn(&g, |_| [1.0, -2.0, 0.5]);
        let (s, gp) = helmholtz_split(&v);
        assert!(s.sub(&v).max_abs() < 1e-14);
        assert!(gp.max_abs() < 1e-14);
    }

    #[test]
    fn norms_of_simple_fields() {
        let l = 2.0;
        let g = grid(16, l);
        let one = ScalarField::constant(&g, 1.0);
        assert!((norm_lp(&one, 2.0).unwrap() - l.powf(1.5)).abs() < 1e-12);
        assert!(norm_lp(&one, 0.5).is_err());
        let k = 2.0 * PI / l;
        let s = ScalarField::from_fn(&g, |x| (k * x[0]).sin());
        let expect = (g.volume() / 2.0).sqrt() * (1.0 + k * k).sqrt();
        assert!((norm_sobolev(&s, 1.0) - expect).abs() < 1e-12 * expect);
        assert!((norm_lp(&s, f64::INFINITY).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn indicator_examples() {
        let g = grid(16, 1.0);
        let f = random_band_limited_vector(&g, 3, 5);
        let (e, r) = indicator_split(&ScalarField::constant(&g, 1.0), &f).unwrap();
        assert_eq!(e, f);
        assert_eq!(r.max_abs(), 0.0);
        let (e, r) = indicator_split(&ScalarField::constant(&g, 2.0), &f).unwrap();
        assert_eq!(e.max_abs(), 0.0);
        assert_eq!(r, f);
    }

    #[test]
    fn indicator_split_matches_pointwise_mask() {
        let g = grid(16, 1.0);
        let rho = ScalarField::from_fn(&g, |x| 1.0 + 1.2 * (2.0 * PI * x[0]).sin());
        let f = random_band_limited_vector(&g, 3, 9).component(1).clone();
        let (e, r) = indicator_split(&rho, &f).unwrap();
        for i in 0..g.len() {
            let ess = (rho.values()[i] - 1.0).abs() < 0.5;
            assert_eq!(e.values()[i], if ess { f.values()[i] } else { 0.0 });
            assert_eq!(r.values()[i], if ess { 0.0 } else { f.values()[i] });
            assert_eq!(e.values()[i] + r.values()[i], f.values()[i]);
        }
    }

    #[test]
    fn plateau_is_one_in_the_middle_and_zero_outside() {
        let g = grid(32, 8.0);
        let phi = plateau(&g);
        let c = 4.0;
        for i in 0..g.len() {
            let x = g.coords(i);
            let r = x.iter().map(|&xi| (xi - c).abs()).fold(0.0, f64::max);
            if r <= 1.5 {
                assert_eq!(phi.values()[i], 1.0);
            }
            if r >= 2.0 {
                assert_eq!(phi.values()[i], 0.0);
            }
        }
    }
}
