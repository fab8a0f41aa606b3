//! Quasi-Newton solvers whose BFGS steps need no line search.
//!
//! The adaptive method picks its step from a self-concordant upper model;
//! the smoothness-aided variant also uses the gradient Lipschitz constant to
//! take longer steps. A line-search BFGS baseline is included for
//! comparison. [`diagnostics`] replays the per-iteration inequalities and
//! rate envelopes the methods are known to satisfy.

pub mod data;
pub mod diagnostics;
pub mod error;
pub mod estimator;
pub mod objective;
pub mod solver;
pub mod stepsize;

pub use error::{Error, Result};
