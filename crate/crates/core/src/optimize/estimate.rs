use serde::{Deserialize, Serialize};

use super::{minimize, Method, OptimizerConfig};
use crate::decorrelate::{permute, PermutationPlan};
use crate::error::{Error, Result};
use crate::inference::{confidence_interval, VarianceInputs};
use crate::ks::{ks_critical, DiameterObjective, RescaledPair};
use crate::rng::derive_seed;
use crate::synthesis::{increments, Path};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub h_hat: f64,
    pub delta_min: f64,
    pub critical_value: f64,
    pub alpha: f64,
    /// `delta_min < critical_value`.
    pub significant: bool,
    pub n: usize,
    pub m: usize,
    pub a_max: usize,
    pub seed: u64,
    pub ci_half_width: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub method: Method,
    pub evaluations: usize,
}

/// Permute both increment samples once, then minimise the frozen diameter.
///
/// The lag-1 and lag-ā samples get independent sub-seeds of `plan.seed`.
pub fn estimate_hurst(
    pair: &RescaledPair,
    plan: &PermutationPlan,
    config: &OptimizerConfig,
    alpha: f64,
) -> Result<EstimationResult> {
    config.validate()?;
    let lag1 = permute(pair.z_lag1(), &plan.with_seed(derive_seed(plan.seed, &[1])))?;
    let lag_a = permute(pair.z_lag_a(), &plan.with_seed(derive_seed(plan.seed, &[2])))?;
    let frozen = RescaledPair::new(lag1, lag_a)?;
    estimate_frozen(&frozen, config, alpha, plan.seed)
}

/// Estimation on a pair whose samples are already decorrelated.
pub(crate) fn estimate_frozen(
    pair: &RescaledPair,
    config: &OptimizerConfig,
    alpha: f64,
    seed: u64,
) -> Result<EstimationResult> {
    let objective = DiameterObjective::new(pair)?;
    let (n, m, a_max) = (pair.n(), pair.m(), pair.a_max());
    let critical_value = ks_critical(n, m, alpha)?;
    let report = minimize(|h| Ok(objective.eval(h)), config)?;
    let ci = confidence_interval(report.h_hat, &VarianceInputs::new(a_max, n, m), alpha)?;
    Ok(EstimationResult {
        h_hat: report.h_hat,
        delta_min: report.delta_min,
        critical_value,
        alpha,
        significant: report.delta_min < critical_value,
        n,
        m,
        a_max,
        seed,
        ci_half_width: ci.half_width,
        ci_lo: ci.lo,
        ci_hi: ci.hi,
        method: report.method,
        evaluations: report.evaluations,
    })
}

/// Build lag-1 / lag-`a_max` increments of a path and run [`estimate_hurst`].
///
/// With a block plan both permuted samples are truncated to `subseq` values,
/// so the two schemes compare samples of equal size.
pub fn estimate_from_path(
    path: &Path,
    a_max: usize,
    subseq: Option<usize>,
    plan: &PermutationPlan,
    config: &OptimizerConfig,
    alpha: f64,
) -> Result<EstimationResult> {
    if a_max < 2 || a_max >= path.len() {
        return Err(Error::invalid(format!(
            "a_max must lie in 2..{}, got {a_max}",
            path.len()
        )));
    }
    let pair = RescaledPair::new(increments(path, 1)?, increments(path, a_max)?)?;
    let subseq = subseq.unwrap_or(path.len() - a_max);
    if subseq < 2 || subseq > path.len() - a_max {
        return Err(Error::invalid(format!(
            "subsequence length must lie in 2..={}, got {subseq}",
            path.len() - a_max
        )));
    }
    match plan.scheme {
        crate::decorrelate::PermutationScheme::UniformSample { .. } => {
            let plan = PermutationPlan::uniform(subseq, plan.seed);
            estimate_hurst(&pair, &plan, config, alpha)
        }
        crate::decorrelate::PermutationScheme::Block { .. } => {
            config.validate()?;
            let truncate = |s: crate::synthesis::IncrementSample| {
                let values = s.values()[..subseq].to_vec();
                s.with_values(values)
            };
            let lag1 = permute(pair.z_lag1(), &plan.with_seed(derive_seed(plan.seed, &[1])))?;
            let lag_a = permute(pair.z_lag_a(), &plan.with_seed(derive_seed(plan.seed, &[2])))?;
            let frozen = RescaledPair::new(truncate(lag1), truncate(lag_a))?;
            estimate_frozen(&frozen, config, alpha, plan.seed)
        }
    }
}
