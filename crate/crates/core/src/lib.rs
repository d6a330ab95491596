//! Forward and inverse spectral computations for the third-order operator
//! i·y‴ on [0, 1] with periodic boundary conditions, perturbed by the
//! rank-one nonlocal potential α⟨y, v⟩v.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ctrig;
pub mod error;
pub mod forward;
pub mod inverse;
pub mod oracle;
pub mod potential;
pub mod quadrature;
pub mod resolvent;

pub use error::{Result, SpectralError};

/// Complex scalar used throughout.
pub type ComplexScalar = num_complex::Complex64;
