use std::time::Instant;

use super::{precedes, prescan_restarts, Method, OptimizerConfig, OptimizerReport, Step, Tracker};
use crate::error::{Error, Result};

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

const PRESCAN_POINTS: usize = super::brent::PRESCAN_POINTS;
const RESTARTS: usize = super::brent::RESTARTS;

/// One-dimensional Nelder–Mead from the simplex `{lower + w/4, lower + 3w/4}`,
/// with the same plateau-triggered pre-scan and restarts as
/// [`super::brent_min`].
pub fn nelder_mead<F>(objective: F, config: &OptimizerConfig) -> Result<OptimizerReport>
where
    F: FnMut(f64) -> Result<f64>,
{
    config.validate()?;
    let start = Instant::now();
    let tol = config.tolerance;
    let mut tracker = Tracker::new(objective, config);
    let outcome = (|| {
        let (lo, hi) = (tracker.lower(), tracker.upper());
        let w = hi - lo;
        simplex_run(&mut tracker, lo + 0.25 * w, lo + 0.75 * w, tol)?;
        if !tracker.plateau_seen() {
            return Ok(());
        }
        prescan_restarts(&mut tracker, PRESCAN_POINTS, RESTARTS, |t, a, b| {
            simplex_run(t, a, b, tol)
        })
    })();
    tracker.finish(Method::NelderMead, outcome, start)
}

/// A single Nelder–Mead run from the given two-point simplex.
pub fn nelder_mead_simplex<F>(
    objective: F,
    config: &OptimizerConfig,
    simplex: (f64, f64),
) -> Result<OptimizerReport>
where
    F: FnMut(f64) -> Result<f64>,
{
    config.validate()?;
    if simplex.0 == simplex.1 {
        return Err(Error::invalid("initial simplex vertices must differ"));
    }
    let start = Instant::now();
    let mut tracker = Tracker::new(objective, config);
    let outcome = simplex_run(&mut tracker, simplex.0, simplex.1, config.tolerance);
    tracker.finish(Method::NelderMead, outcome, start)
}

fn simplex_run<F>(tracker: &mut Tracker<F>, x0: f64, x1: f64, tol: f64) -> Step<()>
where
    F: FnMut(f64) -> Result<f64>,
{
    let probe = |tracker: &mut Tracker<F>, h: f64| -> Step<(f64, f64)> {
        let h = tracker.clamp(h);
        Ok((tracker.eval(h)?, h))
    };
    let mut best = probe(tracker, x0)?;
    let mut worst = probe(tracker, x1)?;
    loop {
        if precedes(worst.0, worst.1, best.0, best.1) {
            std::mem::swap(&mut best, &mut worst);
        }
        if (worst.1 - best.1).abs() < tol {
            return Ok(());
        }
        let (fb, xb) = best;
        let (fw, xw) = worst;
        let reflected = probe(tracker, xb + REFLECT * (xb - xw))?;
        if precedes(reflected.0, reflected.1, fb, xb) {
            let expanded = probe(tracker, xb + EXPAND * (reflected.1 - xb))?;
            worst = if precedes(expanded.0, expanded.1, reflected.0, reflected.1) {
                expanded
            } else {
                reflected
            };
            continue;
        }
        let contracted = if precedes(reflected.0, reflected.1, fw, xw) {
            // outside contraction
            let c = probe(tracker, xb + CONTRACT * (reflected.1 - xb))?;
            (!precedes(reflected.0, reflected.1, c.0, c.1)).then_some(c)
        } else {
            // inside contraction
            let c = probe(tracker, xb + CONTRACT * (xw - xb))?;
            precedes(c.0, c.1, fw, xw).then_some(c)
        };
        worst = match contracted {
            Some(c) => c,
            None => probe(tracker, xb + SHRINK * (xw - xb))?,
        };
    }
}
