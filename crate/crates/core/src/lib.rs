//! Desk-scale machinery for inhomogeneous complex random matrices.
//!
//! The crate samples ensembles `A = M + C ⋆ X`, computes their spectra with
//! from-scratch dense complex linear algebra, estimates anti-concentration
//! quantities (Lévy concentration, the randomized least common denominator),
//! probes invertibility over compressible and incompressible vectors, and runs
//! the smallest-singular-value and circular-law experiments.
//!
//! The linear algebra and sampling core is generic over the real scalar type
//! (see [`Real`]); the Monte Carlo layers work in `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anticonc;
pub mod config;
pub mod ensembles;
mod error;
pub mod experiments;
pub mod linalg;
pub mod report;
mod scalar;
pub mod seed;
pub mod sphere;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Real;

pub use num_complex::Complex;

/// Complex scalar over `f64`.
pub type C64 = Complex<f64>;
/// Complex scalar over `f32`.
pub type C32 = Complex<f32>;

/// Dense complex matrix in double precision.
pub type ComplexMatrix64 = linalg::ComplexMatrix<f64>;
/// Dense complex matrix in single precision.
pub type ComplexMatrix32 = linalg::ComplexMatrix<f32>;

/// Spectrum in double precision.
pub type Spectrum64 = linalg::SpectrumResult<f64>;
/// Spectrum in single precision.
pub type Spectrum32 = linalg::SpectrumResult<f32>;

/// Empirical spectral distribution in double precision.
pub type Esd64 = experiments::Esd<f64>;

