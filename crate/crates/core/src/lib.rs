//! Numerical construction of a convex body in `R^n`, `n >= 5`, whose centroid is the
//! centroid of exactly one of its hyperplane sections through it.

pub mod config;
pub mod counterexample;
pub mod error;
pub mod fourier;
pub mod gegenbauer;
pub mod io;
pub mod planar;
pub mod profile;
pub mod quadrature;
pub mod revolution;

pub use error::{Error, Result};
