//! Benjamin-Feir spectra of small-amplitude gravity-capillary Stokes waves
//! in deep water.

pub mod closed_form;
pub mod eig;
pub mod error;
pub mod fourier;
pub mod operator_assembly;
pub mod reduction;
pub mod spectral_engine;
pub mod stokes_expansion;
pub mod validation;

pub use error::{BfError, Result};
pub use num_complex::Complex64;
