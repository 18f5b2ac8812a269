use std::sync::Arc;

use num_complex::Complex64;

use super::grid::Grid;
use crate::error::{Error, Result};

/// Real samples of a scalar on the periodic grid.
#[derive(Clone)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarField")
            .field("n", &self.grid.n())
            .field("max_abs", &self.max_abs())
            .finish()
    }
}

impl PartialEq for ScalarField {
    fn eq(&self, other: &Self) -> bool {
        self.grid.spec() == other.grid.spec() && self.values == other.values
    }
}

impl ScalarField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Arc<Grid>, c: f64) -> Self {
        ScalarField {
            grid: grid.clone(),
            values: vec![c; grid.len()],
        }
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.coords(i))).collect();
        ScalarField {
            grid: grid.clone(),
            values,
        }
    }

    pub fn from_values(grid: &Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Precondition(format!(
                "field has {} samples, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(ScalarField {
            grid: grid.clone(),
            values,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        ScalarField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    pub fn add(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &ScalarField) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    /// Equal-weight quadrature of the samples over the box.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn fft(&self) -> SpectralField {
        let mut out = self.grid.forward_many(&[&self.values]);
        SpectralField {
            grid: self.grid.clone(),
            coeffs: out.pop().unwrap(),
        }
    }
}

/// Three scalar components on the same grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    comps: [ScalarField; 3],
}

impl VectorField {
    pub fn new(x: ScalarField, y: ScalarField, z: ScalarField) -> Result<Self> {
        let spec = x.grid().spec();
        if y.grid().spec() != spec || z.grid().spec() != spec {
            return Err(Error::Precondition("vector components live on different grids".into()));
        }
        Ok(VectorField { comps: [x, y, z] })
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        VectorField {
            comps: [ScalarField::zeros(grid), ScalarField::zeros(grid), ScalarField::zeros(grid)],
        }
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let samples: Vec<[f64; 3]> = (0..grid.len()).map(|i| f(grid.coords(i))).collect();
        let comp = |c: usize| ScalarField {
            grid: grid.clone(),
            values: samples.iter().map(|s| s[c]).collect(),
        };
        VectorField {
            comps: [comp(0), comp(1), comp(2)],
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.comps[0].grid()
    }

    pub fn comps(&self) -> &[ScalarField; 3] {
        &self.comps
    }

    pub fn comps_mut(&mut self) -> &mut [ScalarField; 3] {
        &mut self.comps
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.comps[i]
    }

    pub fn map_comps(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        VectorField {
            comps: [f(&self.comps[0]), f(&self.comps[1]), f(&self.comps[2])],
        }
    }

    pub fn zip_comps(&self, other: &VectorField, f: impl Fn(&ScalarField, &ScalarField) -> ScalarField) -> Self {
        VectorField {
            comps: [
                f(&self.comps[0], &other.comps[0]),
                f(&self.comps[1], &other.comps[1]),
                f(&self.comps[2], &other.comps[2]),
            ],
        }
    }

    pub fn add(&self, other: &VectorField) -> Self {
        self.zip_comps(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &VectorField) -> Self {
        self.zip_comps(other, |a, b| a.sub(b))
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_comps(|c| c.scale(s))
    }

    /// Multiplies every component by a scalar field.
    pub fn mul_scalar(&self, s: &ScalarField) -> Self {
        self.map_comps(|c| c.mul(s))
    }

    pub fn dot(&self, other: &VectorField) -> ScalarField {
        let a = &self.comps;
        let b = &other.comps;
        let values = (0..a[0].values.len())
            .map(|i| a[0].values[i] * b[0].values[i] + a[1].values[i] * b[1].values[i] + a[2].values[i] * b[2].values[i])
            .collect();
        ScalarField {
            grid: self.grid().clone(),
            values,
        }
    }

    /// Pointwise squared magnitude.
    pub fn norm2(&self) -> ScalarField {
        self.dot(self)
    }

    pub fn max_abs(&self) -> f64 {
        self.norm2().max().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|c| c.is_finite())
    }

    pub fn fft(&self) -> SpectralVector {
        let g = self.grid();
        let mut out = g.forward_many(&[&self.comps[0].values, &self.comps[1].values, &self.comps[2].values]);
        let z = out.pop().unwrap();
        let y = out.pop().unwrap();
        let x = out.pop().unwrap();
        let wrap = |coeffs| SpectralField {
            grid: g.clone(),
            coeffs,
        };
        SpectralVector {
            comps: [wrap(x), wrap(y), wrap(z)],
        }
    }
}

/// Fourier coefficients of a real scalar, unnormalized forward convention.
#[derive(Clone)]
pub struct SpectralField {
    grid: Arc<Grid>,
    coeffs: Vec<Complex64>,
}

impl std::fmt::Debug for SpectralField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralField").field("n", &self.grid.n()).finish()
    }
}

impl SpectralField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        SpectralField {
            grid: grid.clone(),
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn from_coeffs(grid: &Arc<Grid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::Precondition("coefficient count does not match grid".into()));
        }
        Ok(SpectralField {
            grid: grid.clone(),
            coeffs,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn ifft(&self) -> ScalarField {
        let mut out = self.grid.inverse_many(&[&self.coeffs]);
        ScalarField {
            grid: self.grid.clone(),
            values: out.pop().unwrap(),
        }
    }

    /// Applies a per-mode multiplier `m(idx)`.
    pub fn multiply(&self, m: impl Fn(usize) -> Complex64) -> Self {
        SpectralField {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().enumerate().map(|(i, &c)| c * m(i)).collect(),
        }
    }

    /// Zeroes every coefficient outside the 2/3-rule cube.
    pub fn dealias(&mut self) {
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            if !self.grid.keeps(i) {
                *c = Complex64::default();
            }
        }
    }

    /// `sum_k w(k) |f_hat(k)|^2` scaled so that `w = 1` gives the squared L2 norm.
    pub fn weighted_energy(&self, w: impl Fn(usize) -> f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| w(i) * c.norm_sqr())
            .sum::<f64>()
            * self.grid.plancherel_weight()
    }

    /// Largest deviation from Hermitian symmetry `f(-k) = conj f(k)`.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|i| (self.coeffs[i] - self.coeffs[self.grid.mirror(i)].conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn k0(&self) -> Complex64 {
        self.coeffs[0]
    }
}

#[derive(Clone, Debug)]
pub struct SpectralVector {
    pub comps: [SpectralField; 3],
}

impl SpectralVector {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        SpectralVector {
            comps: [SpectralField::zeros(grid), SpectralField::zeros(grid), SpectralField::zeros(grid)],
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.comps[0].grid()
    }

    pub fn ifft(&self) -> VectorField {
        let g = self.grid();
        let mut out = g.inverse_many(&[&self.comps[0].coeffs, &self.comps[1].coeffs, &self.comps[2].coeffs]);
        let z = out.pop().unwrap();
        let y = out.pop().unwrap();
        let x = out.pop().unwrap();
        let wrap = |values| ScalarField {
            grid: g.clone(),
            values,
        };
        VectorField {
            comps: [wrap(x), wrap(y), wrap(z)],
        }
    }
}

/// Anything made of scalar components on one grid.
pub trait GridField: Clone {
    fn components(&self) -> Vec<&ScalarField>;
    fn components_mut(&mut self) -> Vec<&mut ScalarField>;

    fn grid(&self) -> &Arc<Grid> {
        self.components()[0].grid()
    }

    /// Pointwise Euclidean magnitude over components.
    fn magnitude(&self) -> ScalarField {
        let comps = self.components();
        let mut out = ScalarField::zeros(comps[0].grid());
        for c in &comps {
            for (o, v) in out.values.iter_mut().zip(c.values()) {
                *o += v * v;
            }
        }
        for o in out.values.iter_mut() {
            *o = o.sqrt();
        }
        out
    }
}

impl GridField for ScalarField {
    fn components(&self) -> Vec<&ScalarField> {
        vec![self]
    }

    fn components_mut(&mut self) -> Vec<&mut ScalarField> {
        vec![self]
    }
}

impl GridField for VectorField {
    fn components(&self) -> Vec<&ScalarField> {
        self.comps.iter().collect()
    }

    fn components_mut(&mut self) -> Vec<&mut ScalarField> {
        self.comps.iter_mut().collect()
    }
}
