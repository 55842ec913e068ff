use std::time::Instant;

use super::{Method, OptimizerConfig, OptimizerReport, Step, Tracker};
use crate::error::{Error, Result};

/// Exhaustive search on the mesh `{ΔH, 2ΔH, ..., ⌊1/ΔH⌋·ΔH}` restricted to the
/// bounds. Ties go to the smallest H.
pub fn grid_search<F>(objective: F, config: &OptimizerConfig) -> Result<OptimizerReport>
where
    F: FnMut(f64) -> Result<f64>,
{
    config.validate()?;
    let start = Instant::now();
    let step = config.grid_step;
    let count = (1.0 / step + 1e-9).floor() as usize;
    // i / count is the correctly rounded mesh point when 1/ΔH is an integer
    let exact = ((count as f64) * step - 1.0).abs() < 1e-12;
    let mesh = (1..=count)
        .map(move |i| if exact { i as f64 / count as f64 } else { i as f64 * step })
        .filter(|h| *h >= config.lower - 1e-12 && *h <= config.upper + 1e-12);
    let mut cfg = *config;
    cfg.max_evals = usize::MAX;
    let mut tracker = Tracker::new(objective, &cfg);
    let outcome: Step<()> = (|| {
        for h in mesh {
            tracker.eval(h)?;
        }
        Ok(())
    })();
    if tracker.best().is_none() && outcome.is_ok() {
        return Err(Error::invalid("grid has no points inside the bounds"));
    }
    tracker.finish(Method::Grid, outcome, start)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(step: f64) -> OptimizerConfig {
        OptimizerConfig::new(Method::Grid).with_grid_step(step)
    }

    #[test]
    fn exact_grid_point() {
        let r = grid_search(|h| Ok((h - 0.37).powi(2)), &cfg(1e-2)).unwrap();
        assert_eq!(r.h_hat, 0.37);
        assert_eq!(r.evaluations, 100);
    }

    #[test]
    fn nearest_grid_point() {
        // (0.375-0.4)^2 = 0.000625 < (0.375-0.3)^2 = 0.005625
        let r = grid_search(|h| Ok((h - 0.375).powi(2)), &cfg(1e-1)).unwrap();
        assert_eq!(r.h_hat, 0.4);
        assert_eq!(r.evaluations, 10);
    }

    #[test]
    fn constant_objective_picks_smallest_h() {
        let r = grid_search(|_| Ok(0.25), &cfg(1e-2)).unwrap();
        assert_eq!(r.h_hat, 0.01);
        assert_eq!(r.delta_min, 0.25);
    }

    #[test]
    fn fine_mesh_cardinality() {
        let r = grid_search(|h| Ok((h - 0.5).abs()), &cfg(1e-4)).unwrap();
        assert_eq!(r.evaluations, 10_000);
        assert_eq!(r.h_hat, 0.5);
        assert!(r.converged);
    }

    #[test]
    fn objective_errors_propagate() {
        let r = grid_search(
            |h| {
                if h > 0.5 {
                    Err(Error::Numerical("boom".into()))
                } else {
                    Ok(h)
                }
            },
            &cfg(1e-1),
        );
        assert!(r.is_err());
    }
}
