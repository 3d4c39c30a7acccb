//! Spectral limits of matrix-valued functions of independent random matrices,
//! and the Monte Carlo machinery to check them.
//!
//! The crate has two halves that meet in the middle:
//!
//! * a simulation half -- [`ensembles`] builds random matrix tuples and the
//!   matrix functions of interest, [`spectra`] extracts singular values,
//!   eigenvalues and empirical transforms, and [`gof`] compares empirical
//!   spectra against limit laws;
//! * an analytic half -- [`freeprob`] implements the moment / R / S transform
//!   calculus including free additive convolution by subordination,
//!   [`solver`] solves the master system for the Stieltjes transform of
//!   shifted hermitizations and turns the radial `psi` field into a planar
//!   eigenvalue density, and [`limitlaws`] catalogs the closed-form limits.

pub mod ensembles;
pub mod error;
pub mod freeprob;
pub mod gof;
pub mod limitlaws;
pub mod linalg;
pub mod solver;
pub mod spectra;

pub use error::{Error, Result};
pub use linalg::CMatrix;
