//! Numerical toolkit for phase-space quantum mechanics in one degree of
//! freedom: Wigner transforms by three independent routes, symplectic
//! connections built from generating functions, covariant phase-space
//! Schrödinger operators and their gauge transformations.

pub mod error;
pub mod exprlang;
pub mod io;
pub mod numgrid;
pub mod par;
pub mod quadrature;
pub mod schrod;
pub mod states;
pub mod symcalc;
pub mod wigner;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
