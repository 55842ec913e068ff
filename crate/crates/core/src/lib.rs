//! Estimation of the self-similarity exponent of a time series by minimising
//! the two-sample Kolmogorov–Smirnov distance between the lag-1 increments
//! and the rescaled lag-ā increments, after a random permutation has removed
//! their serial dependence.
//!
//! Modules, bottom up:
//!
//! - [`synthesis`]: fGn covariance and spectrum, exact fBm simulation.
//! - [`decorrelate`]: block and uniform random permutations, sample ACF.
//! - [`ks`]: empirical CDFs, the KS distance, the diameter objective.
//! - [`optimize`]: grid, Brent, Nelder–Mead and annealing minimisers, the
//!   end-to-end estimator and the optimizer benchmark.
//! - [`inference`]: estimator variance, intervals, χ² and z tests.
//! - [`pipeline`]: CSV ingestion, windowing, reports.
//! - [`cli`]: the `hurst-ks` command line.

pub mod cli;
pub mod decorrelate;
pub mod error;
pub mod inference;
pub mod ks;
pub mod optimize;
pub mod pipeline;
pub mod rng;
pub mod special;
pub mod synthesis;

pub use error::{Error, Result};
