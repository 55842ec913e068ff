//! Empirical CDFs, the two-sample Kolmogorov–Smirnov distance, and the
//! rescaled-increment diameter that the estimator minimises.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::norm_cdf;
use crate::synthesis::IncrementSample;

/// Right-continuous empirical distribution function of a finite sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted_values: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("empirical CDF needs at least one value"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("empirical CDF values must be finite"));
        }
        let mut sorted_values = values.to_vec();
        sorted_values.sort_by(f64::total_cmp);
        Ok(EmpiricalCdf { sorted_values })
    }

    pub fn len(&self) -> usize {
        self.sorted_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted_values.is_empty()
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted_values
    }

    /// `#{values <= x} / size`.
    pub fn eval(&self, x: f64) -> f64 {
        let count = self.sorted_values.partition_point(|&v| v <= x);
        count as f64 / self.len() as f64
    }
}

/// `sup_x |F_a(x) - F_b(scale·x)|`-style walk over two ascending slices, the
/// second multiplied by a positive `scale_b` (which keeps it sorted).
///
/// Both ECDFs are evaluated at every distinct pooled point after absorbing
/// all ties, which is where a difference of step functions attains its sup.
fn ks_sorted(a: &[f64], b: &[f64], scale_b: f64) -> f64 {
    let (n, m) = (a.len(), b.len());
    let (nf, mf) = (n as f64, m as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut sup = 0.0f64;
    while i < n && j < m {
        let x = a[i].min(b[j] * scale_b);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] * scale_b <= x {
            j += 1;
        }
        let diff = (i as f64 / nf - j as f64 / mf).abs();
        if diff > sup {
            sup = diff;
        }
    }
    sup
}

/// Exact two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &EmpiricalCdf, b: &EmpiricalCdf) -> f64 {
    ks_sorted(&a.sorted_values, &b.sorted_values, 1.0)
}

/// Asymptotic Smirnov constant `c(α) = sqrt(-ln(α/2) / 2)`.
pub fn smirnov_constant(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok((-(alpha / 2.0).ln() / 2.0).sqrt())
}

/// Two-sample KS critical value `c(α)·sqrt((n+m)/(n·m))`.
pub fn ks_critical(n: usize, m: usize, alpha: f64) -> Result<f64> {
    if n == 0 || m == 0 {
        return Err(Error::invalid("sample sizes must be positive"));
    }
    let (nf, mf) = (n as f64, m as f64);
    Ok(smirnov_constant(alpha)? * ((nf + mf) / (nf * mf)).sqrt())
}

/// Lag-1 and lag-`a_max` increment samples compared by the estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledPair {
    z_lag1: IncrementSample,
    z_lag_a: IncrementSample,
}

impl RescaledPair {
    pub fn new(z_lag1: IncrementSample, z_lag_a: IncrementSample) -> Result<Self> {
        if z_lag1.lag() != 1 {
            return Err(Error::invalid(format!(
                "first sample must have lag 1, got {}",
                z_lag1.lag()
            )));
        }
        if z_lag_a.lag() < 2 {
            return Err(Error::invalid(format!(
                "second sample must have lag > 1, got {}",
                z_lag_a.lag()
            )));
        }
        if z_lag1.len() < 2 || z_lag_a.len() < 2 {
            return Err(Error::invalid("both samples need at least two values"));
        }
        Ok(RescaledPair { z_lag1, z_lag_a })
    }

    pub fn z_lag1(&self) -> &IncrementSample {
        &self.z_lag1
    }

    pub fn z_lag_a(&self) -> &IncrementSample {
        &self.z_lag_a
    }

    pub fn a_max(&self) -> usize {
        self.z_lag_a.lag()
    }

    pub fn n(&self) -> usize {
        self.z_lag1.len()
    }

    pub fn m(&self) -> usize {
        self.z_lag_a.len()
    }
}

fn check_spread(values: &[f64], what: &str) -> Result<()> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi > lo {
        Ok(())
    } else {
        Err(Error::DegenerateSample(format!("{what} increments are constant")))
    }
}

/// The diameter `H ↦ KS(Z_1, a^{-H} Z_a)` with both samples sorted once, so
/// each evaluation is a single linear merge.
#[derive(Debug, Clone)]
pub struct DiameterObjective {
    lag1_sorted: Vec<f64>,
    lag_a_sorted: Vec<f64>,
    log_a: f64,
}

impl DiameterObjective {
    pub fn new(pair: &RescaledPair) -> Result<Self> {
        check_spread(pair.z_lag1.values(), "lag-1")?;
        check_spread(pair.z_lag_a.values(), "lag-a")?;
        let sort = |v: &[f64]| {
            let mut v = v.to_vec();
            v.sort_by(f64::total_cmp);
            v
        };
        Ok(DiameterObjective {
            lag1_sorted: sort(pair.z_lag1.values()),
            lag_a_sorted: sort(pair.z_lag_a.values()),
            log_a: (pair.a_max() as f64).ln(),
        })
    }

    pub fn eval(&self, hurst: f64) -> f64 {
        ks_sorted(&self.lag1_sorted, &self.lag_a_sorted, (-hurst * self.log_a).exp())
    }

    pub fn n(&self) -> usize {
        self.lag1_sorted.len()
    }

    pub fn m(&self) -> usize {
        self.lag_a_sorted.len()
    }
}

fn check_unit_hurst(hurst: f64) -> Result<()> {
    if hurst > 0.0 && hurst <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("hurst must lie in (0, 1], got {hurst}")))
    }
}

/// Empirical diameter of the rescaled pair at one exponent.
pub fn diameter_objective(pair: &RescaledPair, hurst: f64) -> Result<f64> {
    check_unit_hurst(hurst)?;
    Ok(DiameterObjective::new(pair)?.eval(hurst))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiameterCurvePoint {
    pub hurst: f64,
    pub diameter: f64,
}

pub fn diameter_curve(pair: &RescaledPair, grid: &[f64]) -> Result<Vec<DiameterCurvePoint>> {
    for h in grid {
        check_unit_hurst(*h)?;
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("hurst grid must be strictly increasing"));
    }
    let objective = DiameterObjective::new(pair)?;
    Ok(grid
        .iter()
        .map(|&hurst| DiameterCurvePoint {
            hurst,
            diameter: objective.eval(hurst),
        })
        .collect())
}

/// `sup_x |Φ(x) - Φ(x/√v)|` between centred Gaussians of variance 1 and `v`.
///
/// The sup sits where the two densities cross, `x* = sqrt(ln v / (1 - 1/v))`.
pub fn gaussian_diameter(v: f64) -> Result<f64> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::invalid(format!("variance ratio must be positive, got {v}")));
    }
    if v == 1.0 {
        return Ok(0.0);
    }
    let x = (v.ln() / (1.0 - 1.0 / v)).sqrt();
    Ok((norm_cdf(x) - norm_cdf(x / v.sqrt())).abs())
}

/// Population diameter for exact `h_true`-self-similar Gaussian increments:
/// `D(a^{2(h_true - h)})`.
pub fn population_diameter(h_true: f64, hurst: f64, a_max: f64) -> f64 {
    gaussian_diameter(a_max.powf(2.0 * (h_true - hurst))).unwrap_or(f64::NAN)
}
