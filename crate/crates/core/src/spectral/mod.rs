//! Discrete field algebra on the periodic grid.

pub mod field;
pub mod grid;
pub mod mollifier;
pub mod ops;
pub mod random;

pub use field::{GridField, ScalarField, SpectralField, SpectralVector, VectorField};
pub use grid::Grid;
pub use mollifier::{mollify, KernelTransform};
pub use ops::{
    central_box_mask, curl, cutoff, dealias, div, essential_mask, grad, gradient_tensor, helmholtz_split,
    indicator_split, laplacian, norm_lp, norm_lp_masked, norm_sobolev, plateau, project_solenoidal,
};
