//! fraclab: a numerical laboratory for the Dirichlet fractional Laplacian.
//!
//! The crate evaluates every explicit constant and threshold of the
//! variational theory for (-Delta)^s u = lambda f(u) on a bounded domain
//! (best embedding constant, torsion norms, the lambda*/mu* existence
//! thresholds and the compactness level c*), discretizes the operator on a
//! uniform one-dimensional grid validated against the exact torsion
//! solution, and runs the two-solution experiments: a negative-energy local
//! minimizer plus a positive-energy mountain-pass point below the
//! thresholds, in both the subcritical and the critical-exponent regime.

pub mod cli;
pub mod constants;
pub mod discretization;
pub mod error;
pub mod variational;

pub use error::{Error, Result};
