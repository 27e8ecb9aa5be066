//! Numerical experiments on composition operators `f ↦ f∘Φ` acting on Hardy
//! and weighted Bergman spaces of the unit disk and the polydisk.
//!
//! Modules, bottom-up:
//!
//! * [`series`]: truncated power series and coefficient extraction.
//! * [`symbols`]: the catalogue of analytic self-maps.
//! * [`boundary`]: Carleson window measures of boundary pushforwards.
//! * [`operator`]: finite-section matrices and closed-form operator quantities.
//! * [`kernel`]: converged spectra from the boundary reproducing-kernel factor.
//! * [`spectra`]: singular values, tensor merges, bound evaluators and fits.
//! * [`harmonic`]: walk-on-spheres harmonic measure in planar domains.
//! * [`experiments`]: reproducible experiment runners and their outputs.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod error;
pub mod experiments;
pub mod harmonic;
pub mod kernel;
pub mod operator;
pub mod par;
pub mod series;
pub mod special;
pub mod spectra;
pub mod symbols;

pub use error::{Error, Result};
pub use num_complex::Complex64;
