//! Numerical laboratory for the thin obstacle (Signorini) problem.

pub mod config;
pub mod error;
pub mod exact;
pub mod freeboundary;
pub mod functionals;
pub mod grid;
pub mod io;
pub mod poly;
pub mod quadrature;
pub mod rescale;
pub mod solver;
pub mod suites;

pub use error::{Error, Result};
