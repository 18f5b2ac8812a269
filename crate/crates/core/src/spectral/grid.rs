use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::model::GridSpec;

/// Periodic grid together with its wavenumbers and FFT plans.
///
/// Samples are stored row-major over `(z, y, x)`, so `x` is the fastest
/// index: `idx = (iz * n + iy) * n + ix`.
pub struct Grid {
    spec: GridSpec,
    n: usize,
    /// Derivative wavenumbers per axis index; the Nyquist entry is zero.
    k1d: Vec<f64>,
    /// Signed integer mode numbers per axis index in `(-n/2, n/2]`.
    m1d: Vec<i64>,
    /// 2/3-rule mask per axis index.
    keep1d: Vec<bool>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("box_len", &self.spec.box_len)
            .finish()
    }
}

impl Grid {
    pub fn new(spec: GridSpec) -> Arc<Grid> {
        let n = spec.n;
        let scale = 2.0 * std::f64::consts::PI / spec.box_len;
        let m1d: Vec<i64> = (0..n)
            .map(|i| if i <= n / 2 { i as i64 } else { i as i64 - n as i64 })
            .collect();
        let k1d = m1d
            .iter()
            .map(|&m| if m as usize == n / 2 { 0.0 } else { m as f64 * scale })
            .collect();
        let keep1d = m1d.iter().map(|&m| 3 * m.unsigned_abs() < n as u64).collect();
        let mut planner = FftPlanner::new();
        Arc::new(Grid {
            spec,
            n,
            k1d,
            m1d,
            keep1d,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        })
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of grid points, `n^3`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn box_len(&self) -> f64 {
        self.spec.box_len
    }

    pub fn spacing(&self) -> f64 {
        self.spec.spacing()
    }

    pub fn volume(&self) -> f64 {
        self.spec.volume()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (iz * self.n + iy) * self.n + ix
    }

    pub fn unravel(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx % n, (idx / n) % n, idx / (n * n))
    }

    /// Physical coordinates of a grid index.
    pub fn coords(&self, idx: usize) -> [f64; 3] {
        let (ix, iy, iz) = self.unravel(idx);
        let h = self.spacing();
        [ix as f64 * h, iy as f64 * h, iz as f64 * h]
    }

    /// Wavevector used for differentiation at a spectral index.
    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let (ix, iy, iz) = self.unravel(idx);
        [self.k1d[ix], self.k1d[iy], self.k1d[iz]]
    }

    pub fn k_axis(&self) -> &[f64] {
        &self.k1d
    }

    /// Integer mode numbers `(mx, my, mz)` at a spectral index.
    pub fn modes(&self, idx: usize) -> [i64; 3] {
        let (ix, iy, iz) = self.unravel(idx);
        [self.m1d[ix], self.m1d[iy], self.m1d[iz]]
    }

    /// Squared integer radius of the differentiable modes (Nyquist counted as 0).
    pub(crate) fn mode_radius2(&self, idx: usize) -> usize {
        let half = (self.n / 2) as i64;
        self.modes(idx)
            .iter()
            .map(|&m| if m == half { 0 } else { (m * m) as usize })
            .sum()
    }

    pub fn keeps(&self, idx: usize) -> bool {
        let (ix, iy, iz) = self.unravel(idx);
        self.keep1d[ix] && self.keep1d[iy] && self.keep1d[iz]
    }

    /// Spectral index of `-k`.
    pub fn mirror(&self, idx: usize) -> usize {
        let n = self.n;
        let (ix, iy, iz) = self.unravel(idx);
        self.index((n - ix) % n, (n - iy) % n, (n - iz) % n)
    }

    /// Plancherel weight: `int |f|^2 dx = weight * sum |f_hat|^2`.
    pub fn plancherel_weight(&self) -> f64 {
        self.volume() / (self.len() as f64).powi(2)
    }

    /// In-place unnormalized forward transform.
    pub(crate) fn fft_inplace(&self, data: &mut [Complex64]) {
        self.transform(data, &self.fwd);
    }

    /// In-place inverse transform, normalized by `1/n^3`.
    pub(crate) fn ifft_inplace(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inv);
        let s = 1.0 / self.len() as f64;
        for c in data.iter_mut() {
            *c *= s;
        }
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let nn = n * n;
        assert_eq!(data.len(), nn * n);
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        // x lanes are contiguous
        fft.process_with_scratch(data, &mut scratch);
        let mut buf = vec![Complex64::default(); nn];
        // y lanes: transpose each z-plane
        for plane in data.chunks_exact_mut(nn) {
            for y in 0..n {
                for x in 0..n {
                    buf[x * n + y] = plane[y * n + x];
                }
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for x in 0..n {
                for y in 0..n {
                    plane[y * n + x] = buf[x * n + y];
                }
            }
        }
        // z lanes: gather one y-slab at a time
        for y in 0..n {
            for z in 0..n {
                let row = (z * n + y) * n;
                for x in 0..n {
                    buf[x * n + z] = data[row + x];
                }
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for z in 0..n {
                let row = (z * n + y) * n;
                for x in 0..n {
                    data[row + x] = buf[x * n + z];
                }
            }
        }
    }

    /// Forward transforms of real fields, two per complex FFT.
    pub fn forward_many(&self, fields: &[&[f64]]) -> Vec<Vec<Complex64>> {
        let mut out = Vec::with_capacity(fields.len());
        for pair in fields.chunks(2) {
            let len = self.len();
            let mut z: Vec<Complex64> = match pair {
                [a, b] => a.iter().zip(b.iter()).map(|(&x, &y)| Complex64::new(x, y)).collect(),
                [a] => a.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
                _ => unreachable!(),
            };
            debug_assert_eq!(z.len(), len);
            self.fft_inplace(&mut z);
            if pair.len() == 1 {
                out.push(z);
                continue;
            }
            let mut fa = vec![Complex64::default(); len];
            let mut fb = vec![Complex64::default(); len];
            for idx in 0..len {
                let zk = z[idx];
                let zm = z[self.mirror(idx)].conj();
                fa[idx] = (zk + zm) * 0.5;
                // (zk - zm) / (2i)
                let d = zk - zm;
                fb[idx] = Complex64::new(d.im * 0.5, -d.re * 0.5);
            }
            out.push(fa);
            out.push(fb);
        }
        out
    }

    /// Inverse transforms of Hermitian spectra back to real samples.
    pub fn inverse_many(&self, spectra: &[&[Complex64]]) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(spectra.len());
        for pair in spectra.chunks(2) {
            let mut z: Vec<Complex64> = match pair {
                [a, b] => a
                    .iter()
                    .zip(b.iter())
                    .map(|(&x, &y)| Complex64::new(x.re - y.im, x.im + y.re))
                    .collect(),
                [a] => a.to_vec(),
                _ => unreachable!(),
            };
            self.ifft_inplace(&mut z);
            out.push(z.iter().map(|c| c.re).collect());
            if pair.len() == 2 {
                out.push(z.iter().map(|c| c.im).collect());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_transforms_match_single_transforms() {
        let g = Grid::new(GridSpec::new(16, 3.0).unwrap());
        let a: Vec<f64> = (0..g.len()).map(|i| ((i * 7919) % 101) as f64 / 101.0 - 0.5).collect();
        let b: Vec<f64> = (0..g.len()).map(|i| ((i * 104729) % 97) as f64 / 97.0).collect();
        let pair = g.forward_many(&[&a, &b]);
        let single_b = g.forward_many(&[&b]);
        let max_diff = pair[1]
            .iter()
            .zip(&single_b[0])
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(max_diff < 1e-10);
        let back = g.inverse_many(&[&pair[0], &pair[1]]);
        for (x, y) in back[0].iter().zip(&a) {
            assert!((x - y).abs() < 1e-13);
        }
        for (x, y) in back[1].iter().zip(&b) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn mirror_is_an_involution() {
        let g = Grid::new(GridSpec::new(16, 1.0).unwrap());
        for idx in 0..g.len() {
            assert_eq!(g.mirror(g.mirror(idx)), idx);
        }
    }

    #[test]
    fn dealias_mask_keeps_low_third() {
        let g = Grid::new(GridSpec::new(32, 1.0).unwrap());
        let kept: Vec<i64> = (0..32).filter(|&i| g.keep1d[i]).map(|i| g.m1d[i]).collect();
        assert_eq!(kept.iter().copied().max(), Some(10));
        assert_eq!(kept.iter().copied().min(), Some(-10));
    }
}
