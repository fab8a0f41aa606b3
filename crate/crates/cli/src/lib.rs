//! Experiment harness for the adaptive BFGS solvers: runs configured
//! matrices, writes versioned traces, replays diagnostics over them, and
//! exports plot data.

pub mod check;
pub mod config;
pub mod report;
pub mod run;
pub mod trace;
