//! Source terms of the acoustic analogy and their gradient parts.

use crate::model::{pressure, SimParams};
use crate::spectral::ops::{spectral_div, spectral_helmholtz};
use crate::spectral::{curl, div, gradient_tensor, ScalarField, SpectralVector, VectorField};

use super::FieldState;

/// Rank-two tensor field, `t[i][j]`.
pub type Tensor = [[ScalarField; 3]; 3];

#[derive(Debug, Clone)]
pub struct LighthillSources {
    /// `rho u (x) u`.
    pub f1: Tensor,
    /// `-nu S(grad u)`.
    pub f2: Tensor,
    /// `eps^-2 (p(rho) - c^2 (rho - 1) - p(1)) I`.
    pub f3: Tensor,
    /// `2 nu xi curl omega`.
    pub g: VectorField,
    /// Gradient parts `H_perp[div f_i]` and `H_perp[g]`.
    pub grad_f1: VectorField,
    pub grad_f2: VectorField,
    pub grad_f3: VectorField,
    pub grad_g: VectorField,
}

/// Row-wise divergence `(div t)_i = d_j t_ij`.
pub fn tensor_div(t: &Tensor) -> VectorField {
    let grid = t[0][0].grid().clone();
    let mut out = SpectralVector::zeros(&grid);
    for i in 0..3 {
        let row = VectorField::new(t[i][0].clone(), t[i][1].clone(), t[i][2].clone()).expect("same grid");
        out.comps[i] = spectral_div(&row.fft());
    }
    out.ifft()
}

fn gradient_part(v: &VectorField) -> VectorField {
    spectral_helmholtz(&v.fft()).1.ifft()
}

pub fn lighthill_sources(s: &FieldState, p: &SimParams) -> LighthillSources {
    let grid = s.grid().clone();
    let u = s.u.comps();
    let f1: Tensor = std::array::from_fn(|i| std::array::from_fn(|j| s.rho.mul(&u[i]).mul(&u[j])));
    let gu = gradient_tensor(&s.u);
    let du = div(&s.u);
    let zero = ScalarField::zeros(&grid);
    let f2: Tensor = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut e = gu[i][j].scale(-p.nu * (p.mu + p.xi));
            if i == j {
                e = e.add(&du.scale(-p.nu * (p.mu + p.lambda - p.xi)));
            }
            e
        })
    });
    let c2 = p.sound_speed().powi(2);
    let p1 = p.a;
    let inv_eps2 = 1.0 / (p.eps * p.eps);
    let iso = s
        .rho
        .map(|r| (pressure(r.max(0.0), p).expect("nonnegative density") - c2 * (r - 1.0) - p1) * inv_eps2);
    let f3: Tensor = std::array::from_fn(|i| std::array::from_fn(|j| if i == j { iso.clone() } else { zero.clone() }));
    let g = curl(&s.omega).scale(2.0 * p.nu * p.xi);
    LighthillSources {
        grad_f1: gradient_part(&tensor_div(&f1)),
        grad_f2: gradient_part(&tensor_div(&f2)),
        grad_f3: gradient_part(&tensor_div(&f3)),
        grad_g: gradient_part(&g),
        f1,
        f2,
        f3,
        g,
    }
}
