//! Perfect quantum optical vortex states.
//!
//! Special functions, the Bessel–Gauss and perfect vortex state families, the
//! lens Fourier transform linking them, and the two-mode Wigner function with
//! its negativity volume.

pub mod cli;
pub mod error;
pub mod io;
pub mod lensft;
pub mod quadrature;
pub mod selftest;
pub mod specfun;
pub mod states;
pub mod wigner;

pub use error::{Error, Result};
