//! Scaling-law toolkit for pre-training experiment analysis.
//!
//! The pipeline this crate supports looks like:
//!
//! 1. [`records`] — parse experiment logs (CSV/JSONL), derive total compute,
//!    apply data-hygiene filters (sample caps, warmup, repetition).
//! 2. [`frontier`] — reduce the measurement cloud to minimal-error frontiers,
//!    either by logarithmic binning on the compute axis or by skyline
//!    (non-dominated) selection on the samples axis.
//! 3. [`solver`] — fit saturated power laws `A·(x+B)^(-α) + E` by multistart
//!    Levenberg–Marquardt, or plain power laws `D0·x^a` by log-log regression.
//! 4. [`inference`] — parameter covariance, Student-t prediction intervals,
//!    threshold splits and held-out RMSE validation.
//! 5. [`analysis`] — curve comparison: crossover detection, scalability
//!    derivative tables, prediction tables at target compute, compute-optimal
//!    dataset-size chains, functional-form selection.
//! 6. [`plot`] — standalone SVG renderings of frontiers and fitted curves.

pub mod analysis;
pub mod error;
pub mod frontier;
pub mod inference;
pub mod plot;
pub mod powerlaw;
pub mod records;
pub mod solver;

pub use error::{Error, Result};
