//! Scalar minimisation of the diameter over `H ∈ (0, 1]`.
//!
//! Every method works through a [`Tracker`], which counts objective
//! evaluations, enforces the evaluation budget, and keeps the best point seen
//! under the order "smaller value, then smaller H". Reports therefore always
//! satisfy `delta_min == objective(h_hat)`.

mod annealing;
mod bench;
mod brent;
mod estimate;
mod grid;
mod nelder_mead;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use annealing::simulated_annealing;
pub use bench::{bench_optimizers, write_bench_csv, BenchConfig, BenchRow};
pub use brent::brent_min;
pub use estimate::{estimate_from_path, estimate_hurst, EstimationResult};
pub use grid::grid_search;
pub use nelder_mead::{nelder_mead, nelder_mead_simplex};

/// Method names reserved in the bench schema for externally produced results
/// (genetic algorithm, particle swarm, direct search). They are not
/// implemented here.
pub const RESERVED_METHODS: [&str; 3] = ["genetic_algorithm", "particle_swarm", "direct_search"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Grid,
    Brent,
    NelderMead,
    SimulatedAnnealing,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Grid,
        Method::Brent,
        Method::NelderMead,
        Method::SimulatedAnnealing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Grid => "grid",
            Method::Brent => "brent",
            Method::NelderMead => "nelder_mead",
            Method::SimulatedAnnealing => "simulated_annealing",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "grid" | "gs" | "grid_search" => Ok(Method::Grid),
            "brent" | "bm" => Ok(Method::Brent),
            "nelder_mead" | "nm" => Ok(Method::NelderMead),
            "simulated_annealing" | "sa" | "annealing" => Ok(Method::SimulatedAnnealing),
            other if RESERVED_METHODS.contains(&other) => Err(Error::invalid(format!(
                "optimizer {other} is reserved in the bench schema but not implemented"
            ))),
            other => Err(Error::invalid(format!("unknown optimizer {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub method: Method,
    /// Mesh step of the grid search.
    pub grid_step: f64,
    pub tolerance: f64,
    /// Closed search interval `[lower, upper]`, inside `(0, 1]`.
    pub lower: f64,
    pub upper: f64,
    pub max_evals: usize,
    /// Only used by simulated annealing.
    pub seed: u64,
}

impl OptimizerConfig {
    pub fn new(method: Method) -> Self {
        let grid_step = 1e-4;
        OptimizerConfig {
            method,
            grid_step,
            tolerance: 1e-6,
            lower: if method == Method::Grid { grid_step } else { 1e-3 },
            upper: 1.0,
            max_evals: match method {
                Method::Grid => usize::MAX,
                Method::Brent | Method::NelderMead => 2_000,
                Method::SimulatedAnnealing => 3_000,
            },
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_grid_step(mut self, step: f64) -> Self {
        if self.method == Method::Grid && self.lower == self.grid_step {
            self.lower = step;
        }
        self.grid_step = step;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::invalid(format!(
                "tolerance must lie in (0, 1), got {}",
                self.tolerance
            )));
        }
        if !(self.grid_step > 0.0 && self.grid_step < 1.0) {
            return Err(Error::invalid(format!(
                "grid step must lie in (0, 1), got {}",
                self.grid_step
            )));
        }
        if !(self.lower > 0.0 && self.lower < self.upper && self.upper <= 1.0) {
            return Err(Error::invalid(format!(
                "bounds [{}, {}] must satisfy 0 < lower < upper <= 1",
                self.lower, self.upper
            )));
        }
        if self.max_evals == 0 {
            return Err(Error::invalid("max_evals must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerReport {
    pub method: Method,
    pub h_hat: f64,
    pub delta_min: f64,
    pub evaluations: usize,
    pub wall_time_s: f64,
    /// False when the evaluation budget ran out before the stopping rule fired.
    pub converged: bool,
}

/// Dispatch on `config.method`.
pub fn minimize<F>(objective: F, config: &OptimizerConfig) -> Result<OptimizerReport>
where
    F: FnMut(f64) -> Result<f64>,
{
    match config.method {
        Method::Grid => grid_search(objective, config),
        Method::Brent => brent_min(objective, config),
        Method::NelderMead => nelder_mead(objective, config),
        Method::SimulatedAnnealing => simulated_annealing(objective, config),
    }
}

/// Raised inside a method when the budget is spent; never escapes a method.
#[derive(Debug)]
pub(crate) enum Stop {
    Budget,
    Failed(Error),
}

impl From<Error> for Stop {
    fn from(e: Error) -> Self {
        Stop::Failed(e)
    }
}

pub(crate) type Step<T> = std::result::Result<T, Stop>;

/// `(value, h)` strictly precedes `(other_value, other_h)`.
pub(crate) fn precedes(value: f64, h: f64, other_value: f64, other_h: f64) -> bool {
    value < other_value || (value == other_value && h < other_h)
}

pub(crate) struct Tracker<F> {
    objective: F,
    lower: f64,
    upper: f64,
    max_evals: usize,
    evaluations: usize,
    best: Option<(f64, f64)>,
    /// First H at which each objective value was seen, keyed by its bits.
    seen: HashMap<u64, f64>,
    plateau: bool,
}

impl<F> Tracker<F>
where
    F: FnMut(f64) -> Result<f64>,
{
    pub(crate) fn new(objective: F, config: &OptimizerConfig) -> Self {
        Tracker {
            objective,
            lower: config.lower,
            upper: config.upper,
            max_evals: config.max_evals,
            evaluations: 0,
            best: None,
            seen: HashMap::new(),
            plateau: false,
        }
    }

    pub(crate) fn lower(&self) -> f64 {
        self.lower
    }

    pub(crate) fn upper(&self) -> f64 {
        self.upper
    }

    pub(crate) fn clamp(&self, h: f64) -> f64 {
        h.clamp(self.lower, self.upper)
    }

    /// Evaluate at `h` (clamped into the bounds).
    pub(crate) fn eval(&mut self, h: f64) -> Step<f64> {
        if self.evaluations >= self.max_evals {
            return Err(Stop::Budget);
        }
        let h = self.clamp(h);
        let value = (self.objective)(h)?;
        if !value.is_finite() {
            return Err(Stop::Failed(Error::Numerical(format!(
                "objective returned {value} at H = {h}"
            ))));
        }
        self.evaluations += 1;
        if !self.plateau {
            let first = *self.seen.entry(value.to_bits()).or_insert(h);
            self.plateau = first != h;
        }
        match self.best {
            Some((bv, bh)) if !precedes(value, h, bv, bh) => {}
            _ => self.best = Some((value, h)),
        }
        Ok(value)
    }

    pub(crate) fn best(&self) -> Option<(f64, f64)> {
        self.best
    }

    /// Whether the same value has been returned at two different points,
    /// i.e. the objective shows flat stretches.
    pub(crate) fn plateau_seen(&self) -> bool {
        self.plateau
    }

    /// Close out a run started at `start`.
    pub(crate) fn finish(
        self,
        method: Method,
        outcome: Step<()>,
        start: Instant,
    ) -> Result<OptimizerReport> {
        let converged = match outcome {
            Ok(()) => true,
            Err(Stop::Budget) => false,
            Err(Stop::Failed(e)) => return Err(e),
        };
        let (delta_min, h_hat) = self
            .best
            .ok_or_else(|| Error::Numerical("optimizer made no evaluations".into()))?;
        Ok(OptimizerReport {
            method,
            h_hat,
            delta_min,
            evaluations: self.evaluations,
            wall_time_s: start.elapsed().as_secs_f64(),
            converged,
        })
    }
}

/// Evenly spaced pre-scan of the bounds, followed by local restarts in the
/// brackets around the best pre-scan points.
///
/// The empirical diameter is a step function with many shallow local minima,
/// so a single local search frequently settles next to, rather than on, the
/// global minimum. A restart is skipped when its bracket already holds the
/// incumbent and the pre-scan point there is no better than it.
pub(crate) fn prescan_restarts<F, L>(
    tracker: &mut Tracker<F>,
    points: usize,
    restarts: usize,
    mut local: L,
) -> Step<()>
where
    F: FnMut(f64) -> Result<f64>,
    L: FnMut(&mut Tracker<F>, f64, f64) -> Step<()>,
{
    let (lo, hi) = (tracker.lower(), tracker.upper());
    let step = (hi - lo) / (points - 1) as f64;
    let mut scan = Vec::with_capacity(points);
    for k in 0..points {
        let h = if k + 1 == points { hi } else { lo + step * k as f64 };
        scan.push((tracker.eval(h)?, h));
    }
    scan.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    for &(value, h) in scan.iter().take(restarts) {
        let (a, b) = ((h - step).max(lo), (h + step).min(hi));
        if let Some((bv, bh)) = tracker.best() {
            if bh >= a && bh <= b && !precedes(value, h, bv, bh) {
                continue;
            }
        }
        local(tracker, a, b)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert_eq!("BM".parse::<Method>().unwrap(), Method::Brent);
        assert!("particle_swarm".parse::<Method>().is_err());
        assert!("newton".parse::<Method>().is_err());
    }

    #[test]
    fn config_defaults_and_validation() {
        let g = OptimizerConfig::new(Method::Grid);
        assert_eq!(g.lower, 1e-4);
        assert_eq!(g.tolerance, 1e-6);
        let b = OptimizerConfig::new(Method::Brent);
        assert_eq!(b.lower, 1e-3);
        assert!(b.validate().is_ok());
        let mut bad = b;
        bad.tolerance = 0.0;
        assert!(bad.validate().is_err());
        let mut bad = b;
        bad.upper = 1.5;
        assert!(bad.validate().is_err());
        assert_eq!(OptimizerConfig::new(Method::Grid).with_grid_step(0.1).lower, 0.1);
    }

    #[test]
    fn ties_prefer_smaller_h() {
        assert!(precedes(0.1, 0.5, 0.2, 0.1));
        assert!(precedes(0.1, 0.2, 0.1, 0.3));
        assert!(!precedes(0.1, 0.3, 0.1, 0.3));
    }
}
