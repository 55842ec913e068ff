//! Random permutations that break serial dependence in an increment sample
//! while keeping its marginal distribution.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::synthesis::IncrementSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum PermutationScheme {
    /// Block random permutation with random phase, one permutation of
    /// `0..block_length` shared by all blocks.
    Block { block_length: usize },
    /// `subsample_size` values drawn without replacement, in random order.
    UniformSample { subsample_size: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationPlan {
    #[serde(flatten)]
    pub scheme: PermutationScheme,
    pub seed: u64,
}

impl PermutationPlan {
    pub fn block(block_length: usize, seed: u64) -> Self {
        PermutationPlan {
            scheme: PermutationScheme::Block { block_length },
            seed,
        }
    }

    pub fn uniform(subsample_size: usize, seed: u64) -> Self {
        PermutationPlan {
            scheme: PermutationScheme::UniformSample { subsample_size },
            seed,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        PermutationPlan { seed, ..self }
    }

    /// Output length for an input of length `n`.
    pub fn output_len(&self, n: usize) -> usize {
        match self.scheme {
            PermutationScheme::Block { .. } => n,
            PermutationScheme::UniformSample { subsample_size } => subsample_size,
        }
    }
}

/// Apply whichever scheme the plan names.
pub fn permute(sample: &IncrementSample, plan: &PermutationPlan) -> Result<IncrementSample> {
    match plan.scheme {
        PermutationScheme::Block { .. } => block_permute(sample, plan),
        PermutationScheme::UniformSample { .. } => uniform_sample_permute(sample, plan),
    }
}

/// Block random permutation with random phase:
/// `out[l] = in[(⌊l/L⌋·L + b[l mod L] + φ) mod n]`, with `b` a uniform
/// permutation of `0..L` and `φ` uniform on `0..L`.
pub fn block_permute(sample: &IncrementSample, plan: &PermutationPlan) -> Result<IncrementSample> {
    let PermutationScheme::Block { block_length } = plan.scheme else {
        return Err(Error::invalid("block_permute needs a block plan"));
    };
    if block_length < 2 {
        return Err(Error::invalid(format!(
            "block length must be at least 2, got {block_length}"
        )));
    }
    if block_length > sample.len() {
        return Err(Error::invalid(format!(
            "block length {block_length} exceeds sample length {}",
            sample.len()
        )));
    }
    let mut rng = rng::stream(plan.seed);
    let mut order: Vec<usize> = (0..block_length).collect();
    order.shuffle(&mut rng);
    let phase = rng.random_range(0..block_length);
    block_permute_with(sample, &order, phase)
}

/// Deterministic core of [`block_permute`] for a given within-block
/// permutation `order` and phase.
pub fn block_permute_with(
    sample: &IncrementSample,
    order: &[usize],
    phase: usize,
) -> Result<IncrementSample> {
    let block = order.len();
    let n = sample.len();
    if block == 0 || block > n {
        return Err(Error::invalid(format!(
            "block length {block} must lie in 1..={n}"
        )));
    }
    let mut seen = vec![false; block];
    for &b in order {
        if b >= block || std::mem::replace(&mut seen[b], true) {
            return Err(Error::invalid("order is not a permutation of 0..block_length"));
        }
    }
    let input = sample.values();
    // trailing partial block wraps around modulo n
    let values = (0..n)
        .map(|l| input[((l / block) * block + order[l % block] + phase) % n])
        .collect();
    Ok(sample.with_values(values))
}

/// Draw `T` values uniformly without replacement, in uniformly random order.
pub fn uniform_sample_permute(
    sample: &IncrementSample,
    plan: &PermutationPlan,
) -> Result<IncrementSample> {
    let PermutationScheme::UniformSample { subsample_size } = plan.scheme else {
        return Err(Error::invalid("uniform_sample_permute needs a uniform plan"));
    };
    if subsample_size == 0 || subsample_size > sample.len() {
        return Err(Error::invalid(format!(
            "subsample size {subsample_size} must lie in 1..={}",
            sample.len()
        )));
    }
    let mut rng = rng::stream(plan.seed);
    let mut values = sample.values().to_vec();
    let (chosen, _) = values.partial_shuffle(&mut rng, subsample_size);
    Ok(sample.with_values(chosen.to_vec()))
}

/// Sample autocorrelations `r(1..=max_lag)` with the biased (1/n) normalisation.
pub fn sample_acf(values: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = values.len();
    if max_lag == 0 || max_lag >= n {
        return Err(Error::invalid(format!(
            "max_lag must lie in 1..{n}, got {max_lag}"
        )));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let denom: f64 = centred.iter().map(|c| c * c).sum();
    let raw: f64 = values.iter().map(|v| v * v).sum();
    if denom <= 1e-20 * raw || denom == 0.0 {
        return Err(Error::DegenerateSample(
            "autocorrelation of a constant sample is undefined".into(),
        ));
    }
    Ok((1..=max_lag)
        .map(|q| {
            centred[..n - q]
                .iter()
                .zip(&centred[q..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / denom
        })
        .collect())
}
