//! Exact toolkit for non-archimedean quantum-cohomology spectra.

pub mod blowup;
pub mod error;
pub mod frames;
pub mod graded_ring;
pub mod hodge_descent;
pub mod invariants;
pub mod io;
pub mod levi_civita;
pub mod matrix;
pub mod number_field;
pub mod poly;
pub mod quantum_model;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
