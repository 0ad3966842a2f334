//! Riesz bounds and perturbation-stability certificates for spaces spanned by
//! translates of a single window, with brute-force finite-section checks.

pub mod bounds;
pub mod certify;
pub mod cli;
pub mod error;
pub mod generator;
pub mod oracle;
pub mod perturb;
pub mod quadrature;
pub mod spectrum;

pub use bounds::{Convention, FrameBounds, Provenance};
pub use error::{QsisError, Result};
pub use generator::{Exponent, Generator};
