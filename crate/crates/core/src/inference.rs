//! Closed-form variance of the estimator, confidence intervals, the
//! constancy and two-mean tests used to compare windows and series, and
//! numerical checks of the supporting theory.

use std::f64::consts::{E, PI};

use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::special::{chi2_sf, gamma_fn, norm_quantile, norm_sf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarianceInputs {
    pub a_max: usize,
    pub n: usize,
    pub m: usize,
}

impl VarianceInputs {
    pub fn new(a_max: usize, n: usize, m: usize) -> Self {
        VarianceInputs { a_max, n, m }
    }
}

/// Approximate standard deviation of Ĥ:
/// `sqrt(2πe) / ln(a) · (1/sqrt(n) + 1/sqrt(m))`.
pub fn estimator_sd(inputs: &VarianceInputs) -> Result<f64> {
    if inputs.a_max < 2 {
        return Err(Error::invalid(format!(
            "a_max must be at least 2, got {}",
            inputs.a_max
        )));
    }
    if inputs.n == 0 || inputs.m == 0 {
        return Err(Error::invalid("sample sizes must be positive"));
    }
    let (n, m) = (inputs.n as f64, inputs.m as f64);
    Ok((2.0 * PI * E).sqrt() / (inputs.a_max as f64).ln() * (n.sqrt().recip() + m.sqrt().recip()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lo: f64,
    pub hi: f64,
    /// Half-width before clipping to the unit interval.
    pub half_width: f64,
}

/// `h_hat ± z_{1-α/2}·sd`, clipped to `[0, 1]`.
pub fn confidence_interval(
    h_hat: f64,
    inputs: &VarianceInputs,
    alpha: f64,
) -> Result<ConfidenceInterval> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let half_width = norm_quantile(1.0 - alpha / 2.0) * estimator_sd(inputs)?;
    Ok(ConfidenceInterval {
        lo: (h_hat - half_width).max(0.0),
        hi: (h_hat + half_width).min(1.0),
        half_width,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chi2Result {
    pub stat: f64,
    pub df: u32,
    pub p: f64,
}

/// `Σ((Ĥ_i - mean)/σ)²` against χ² with `count - 1` degrees of freedom.
pub fn chi2_constancy(estimates: &[f64], sigma: f64) -> Result<Chi2Result> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    if estimates.len() < 2 {
        return Err(Error::invalid("constancy test needs at least two estimates"));
    }
    let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
    let stat = estimates
        .iter()
        .map(|h| ((h - mean) / sigma).powi(2))
        .sum::<f64>();
    let df = (estimates.len() - 1) as u32;
    Ok(Chi2Result {
        stat,
        df,
        p: chi2_sf(stat, df),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZTest {
    pub z: f64,
    pub p_one_sided: f64,
}

/// One-sided test of `mean_a > mean_b`, with `z = (mean_a - mean_b)/(σ√2)`:
/// each mean is treated as carrying the single-window variance σ².
pub fn z_test_means(mean_a: f64, mean_b: f64, sigma: f64) -> Result<ZTest> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    let z = (mean_a - mean_b) / (sigma * std::f64::consts::SQRT_2);
    Ok(ZTest {
        z,
        p_one_sided: norm_sf(z),
    })
}

/// `A(H) = Γ(H+½)² / (2H sin(πH) Γ(2H))`, the short-lag conditional variance
/// factor of a multifractional process.
pub fn a_function(h: f64) -> Result<f64> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::invalid(format!("A(H) needs H in (0, 1), got {h}")));
    }
    let g = gamma_fn(h + 0.5);
    Ok(g * g / (2.0 * h * (PI * h).sin() * gamma_fn(2.0 * h)))
}

/// Grid minimiser of [`a_function`] over `[lo, hi]` with spacing `step`.
pub fn a_function_argmin(lo: f64, hi: f64, step: f64) -> Result<(f64, f64)> {
    if !(step > 0.0 && lo > 0.0 && hi < 1.0 && lo < hi) {
        return Err(Error::invalid("A(H) grid must lie inside (0, 1)"));
    }
    let count = ((hi - lo) / step).round() as usize;
    let mut best = (f64::INFINITY, lo);
    for k in 0..=count {
        let h = lo + k as f64 * step;
        let v = a_function(h)?;
        if v < best.0 {
            best = (v, h);
        }
    }
    Ok((best.1, best.0))
}

/// How the coarse information set is formed from the Gaussian driver `G`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partition {
    /// `cells` equal-count cells of the ranked `G` values.
    Quantile { cells: usize },
    /// Every distinct value of `G` is its own cell.
    LevelSets,
}

/// Positive multiplicative noise `E` in `X = exp(G)·E`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Noise {
    /// `E ≡ 1`, so `X` is a function of `G`.
    Unit,
    /// `E ~ Exp(1)`.
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingExperiment {
    pub n_outer: usize,
    pub partition: Partition,
    pub noise: Noise,
    /// Standard deviation of `G`.
    pub log_sd: f64,
    /// Independent batches used for the Monte Carlo standard errors.
    pub batches: usize,
    pub seed: u64,
}

impl OrderingExperiment {
    pub fn new(n_outer: usize, partition: Partition, noise: Noise, seed: u64) -> Self {
        OrderingExperiment {
            n_outer,
            partition,
            noise,
            log_sd: 0.5,
            batches: 20,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingReport {
    pub var_x: f64,
    pub var_v: f64,
    pub var_sqrt_x: f64,
    pub var_sqrt_v: f64,
    /// Batch-means standard error of the `Var(X)` estimate.
    pub se_var_x: f64,
    /// Batch-means standard error of the `Var(√X)` estimate.
    pub se_var_sqrt_x: f64,
    pub variance_ordering: bool,
    pub sqrt_variance_ordering: bool,
}

impl OrderingReport {
    pub fn gap(&self) -> f64 {
        self.var_x - self.var_v
    }

    pub fn sqrt_gap(&self) -> f64 {
        self.var_sqrt_x - self.var_sqrt_v
    }

    /// Gaps in units of the Monte Carlo standard error of the variances.
    pub fn slack(&self) -> (f64, f64) {
        (self.gap() / self.se_var_x, self.sqrt_gap() / self.se_var_sqrt_x)
    }
}

fn variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Conditional mean of `x` given the partition cell of `g`, evaluated per sample.
fn conditional_mean(g: &[f64], x: &[f64], partition: Partition) -> Vec<f64> {
    let n = g.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| g[a].total_cmp(&g[b]));
    let mut cell = vec![0usize; n];
    match partition {
        Partition::Quantile { cells } => {
            for (rank, &i) in order.iter().enumerate() {
                cell[i] = rank * cells / n;
            }
        }
        Partition::LevelSets => {
            let mut id = 0;
            for w in 0..n {
                if w > 0 && g[order[w]] != g[order[w - 1]] {
                    id += 1;
                }
                cell[order[w]] = id;
            }
        }
    }
    let cells = cell.iter().max().map_or(0, |c| c + 1);
    let mut sum = vec![0.0; cells];
    let mut count = vec![0usize; cells];
    for (c, v) in cell.iter().zip(x) {
        sum[*c] += v;
        count[*c] += 1;
    }
    cell.iter().map(|&c| sum[c] / count[c] as f64).collect()
}

/// Monte Carlo check that conditioning on a coarser information set lowers
/// both `Var(X)` and `Var(√X)`. `X = exp(G)·E`, and `V` is the in-sample
/// conditional mean of `X` over the cells of `G`.
pub fn check_variance_ordering(exp: &OrderingExperiment) -> Result<OrderingReport> {
    if exp.batches < 2 || exp.n_outer < 2 * exp.batches {
        return Err(Error::invalid("need at least two batches of two samples"));
    }
    if let Partition::Quantile { cells } = exp.partition {
        if cells == 0 || cells > exp.n_outer / exp.batches {
            return Err(Error::invalid(format!("invalid cell count {cells}")));
        }
    }
    if !(exp.log_sd >= 0.0 && exp.log_sd.is_finite()) {
        return Err(Error::invalid("log_sd must be non-negative"));
    }
    let mut rng = rng::stream(exp.seed);
    let g: Vec<f64> = (0..exp.n_outer)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            exp.log_sd * z
        })
        .collect();
    let x: Vec<f64> = g
        .iter()
        .map(|gi| {
            let e: f64 = match exp.noise {
                Noise::Unit => 1.0,
                Noise::Exponential => Exp1.sample(&mut rng),
            };
            gi.exp() * e
        })
        .collect();

    let size = exp.n_outer / exp.batches;
    let mut per_batch = Vec::with_capacity(exp.batches);
    for b in 0..exp.batches {
        let range = b * size..(b + 1) * size;
        let xb = &x[range.clone()];
        let vb = conditional_mean(&g[range], xb, exp.partition);
        let sx: Vec<f64> = xb.iter().map(|v| v.sqrt()).collect();
        let sv: Vec<f64> = vb.iter().map(|v| v.sqrt()).collect();
        per_batch.push([variance(xb), variance(&vb), variance(&sx), variance(&sv)]);
    }
    let column = |k: usize| -> Vec<f64> { per_batch.iter().map(|r| r[k]).collect() };
    let (var_x, se_var_x) = mean_and_se(&column(0));
    let (var_v, _) = mean_and_se(&column(1));
    let (var_sqrt_x, se_var_sqrt_x) = mean_and_se(&column(2));
    let (var_sqrt_v, _) = mean_and_se(&column(3));
    Ok(OrderingReport {
        var_x,
        var_v,
        var_sqrt_x,
        var_sqrt_v,
        se_var_x,
        se_var_sqrt_x,
        variance_ordering: var_x >= var_v,
        sqrt_variance_ordering: var_sqrt_x >= var_sqrt_v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sd_reference_values() {
        let sd = estimator_sd(&VarianceInputs::new(21, 1491, 1491)).unwrap();
        assert!((sd - 0.07032).abs() < 5e-5, "{sd}");
        assert!((1.96 * sd - 0.1378).abs() < 5e-4);
        let sd = estimator_sd(&VarianceInputs::new(50, 500, 500)).unwrap();
        assert!((sd - 0.0945).abs() < 5e-4, "{sd}");
        assert!(estimator_sd(&VarianceInputs::new(50, 1 << 40, 1 << 40)).unwrap() < 1e-5);
        assert!(estimator_sd(&VarianceInputs::new(1, 10, 10)).is_err());
    }

    #[test]
    fn sd_decreases_in_every_argument() {
        for a in [2usize, 5, 21, 50] {
            for n in [10usize, 100, 1000] {
                for m in [10usize, 100, 1000] {
                    let base = estimator_sd(&VarianceInputs::new(a, n, m)).unwrap();
                    assert!(estimator_sd(&VarianceInputs::new(a + 1, n, m)).unwrap() < base);
                    assert!(estimator_sd(&VarianceInputs::new(a, n + 1, m)).unwrap() < base);
                    assert!(estimator_sd(&VarianceInputs::new(a, n, m + 1)).unwrap() < base);
                }
            }
        }
    }

    #[test]
    fn interval_reference_and_clipping() {
        let ci = confidence_interval(0.4039, &VarianceInputs::new(21, 1491, 1491), 0.05).unwrap();
        assert!((ci.lo - 0.2661).abs() < 5e-4 && (ci.hi - 0.5417).abs() < 5e-4, "{ci:?}");
        let ci = confidence_interval(0.98, &VarianceInputs::new(21, 1491, 1491), 0.05).unwrap();
        assert_eq!(ci.hi, 1.0);
        assert!(confidence_interval(0.5, &VarianceInputs::new(21, 100, 100), 1.0).is_err());
        assert!(confidence_interval(0.5, &VarianceInputs::new(21, 100, 100), 0.0).is_err());
    }

    #[test]
    fn chi2_examples() {
        let r = chi2_constancy(&[0.3, 0.3, 0.3], 0.1).unwrap();
        assert_eq!(r.stat, 0.0);
        assert_eq!(r.p, 1.0);
        assert_eq!(r.df, 2);
        let r = chi2_constancy(&[0.5, 0.7], 0.1).unwrap();
        assert!((r.stat - 2.0).abs() < 1e-12);
        assert_eq!(r.df, 1);
        assert!(chi2_constancy(&[0.5, 0.7], 0.0).is_err());
        assert!(chi2_constancy(&[0.5], 0.1).is_err());
    }

    #[test]
    fn chi2_shift_and_scale() {
        let h = [0.31, 0.42, 0.37, 0.29, 0.45];
        let base = chi2_constancy(&h, 0.07).unwrap().stat;
        let shifted: Vec<f64> = h.iter().map(|v| v + 0.2).collect();
        assert!((chi2_constancy(&shifted, 0.07).unwrap().stat - base).abs() < 1e-10);
        let mean = h.iter().sum::<f64>() / 5.0;
        let stretched: Vec<f64> = h.iter().map(|v| mean + 3.0 * (v - mean)).collect();
        assert!((chi2_constancy(&stretched, 0.07).unwrap().stat - 9.0 * base).abs() < 1e-9);
    }

    #[test]
    fn z_test_examples() {
        let t = z_test_means(0.4039, 0.1391, 0.07032).unwrap();
        assert!((t.z - 2.6636).abs() < 1e-3, "{t:?}");
        assert!((t.p_one_sided - 0.0039).abs() < 1e-4);
        let t = z_test_means(0.3, 0.3, 0.1).unwrap();
        assert_eq!(t.z, 0.0);
        assert!((t.p_one_sided - 0.5).abs() < 1e-15);
        let (a, b) = (
            z_test_means(0.5, 0.2, 0.1).unwrap(),
            z_test_means(0.2, 0.5, 0.1).unwrap(),
        );
        assert_eq!(a.z, -b.z);
        assert!(z_test_means(0.5, 0.2, 0.0).is_err());
    }

    #[test]
    fn z_test_p_is_monotone() {
        let mut last = 1.0;
        for k in 0..50 {
            let p = z_test_means(0.1 + 0.01 * k as f64, 0.3, 0.07).unwrap().p_one_sided;
            assert!(p > 0.0 && p < 1.0 && p < last);
            last = p;
        }
    }

    #[test]
    fn a_function_values() {
        assert!((a_function(0.5).unwrap() - 1.0).abs() < 1e-12);
        let (h_star, _) = a_function_argmin(0.01, 0.99, 1e-4).unwrap();
        assert!((h_star - 0.6729).abs() < 5e-4, "{h_star}");
        let at = a_function(0.6729).unwrap();
        assert!(at < a_function(0.5).unwrap() && at < a_function(0.9).unwrap());
        assert!(a_function(0.0).is_err());
        assert!(a_function(1.0).is_err());
    }

    #[test]
    fn ordering_equality_case() {
        let r = check_variance_ordering(&OrderingExperiment::new(
            20_000,
            Partition::LevelSets,
            Noise::Unit,
            3,
        ))
        .unwrap();
        assert!(r.gap().abs() < 3.0 * r.se_var_x);
        assert!(r.sqrt_gap().abs() < 3.0 * r.se_var_sqrt_x);
    }

    #[test]
    fn ordering_constant_x() {
        let mut e = OrderingExperiment::new(10_000, Partition::Quantile { cells: 10 }, Noise::Unit, 1);
        e.log_sd = 0.0;
        let r = check_variance_ordering(&e).unwrap();
        for v in [r.var_x, r.var_v, r.var_sqrt_x, r.var_sqrt_v] {
            assert!(v.abs() < 1e-20);
        }
    }

    #[test]
    fn ordering_refinement_shrinks_gap() {
        let gap = |cells| {
            check_variance_ordering(&OrderingExperiment::new(
                40_000,
                Partition::Quantile { cells },
                Noise::Exponential,
                8,
            ))
            .unwrap()
        };
        let coarse = gap(5);
        let fine = gap(40);
        assert!(fine.gap() <= coarse.gap() + 1e-9 * coarse.var_x);
        assert!(fine.sqrt_gap() <= coarse.sqrt_gap() + 1e-9 * coarse.var_sqrt_x);
    }
}
