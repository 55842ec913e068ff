//! Fractional Gaussian noise: closed-form covariance and spectral density, and
//! exact simulation of fractional Brownian motion by circulant embedding
//! (Wood–Chan).

use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::rng;
use crate::special::gamma_fn;

/// Negative circulant eigenvalues above this are rounding noise and get clipped.
const EIGEN_TOLERANCE: f64 = -1e-8;

/// Default number of aliasing terms kept explicitly in [`fgn_spectrum`].
pub const DEFAULT_SPECTRUM_TRUNCATION: usize = 10_000;

/// An ordered real-valued series: a simulated fBm realisation or a
/// log-volatility series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    values: Vec<f64>,
    origin_zero: bool,
}

impl Path {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("path must contain at least one value"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("path value {i} is not finite")));
        }
        let origin_zero = values[0] == 0.0;
        Ok(Path {
            values,
            origin_zero,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn origin_zero(&self) -> bool {
        self.origin_zero
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Increments `X_{t+lag} - X_t` of a path at one fixed lag.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementSample {
    lag: usize,
    values: Vec<f64>,
}

impl IncrementSample {
    pub fn new(lag: usize, values: Vec<f64>) -> Result<Self> {
        if lag == 0 {
            return Err(Error::invalid("increment lag must be positive"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("increment {i} is not finite")));
        }
        Ok(IncrementSample { lag, values })
    }

    pub fn lag(&self) -> usize {
        self.lag
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same lag, new values (used by the permutation schemes).
    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        IncrementSample {
            lag: self.lag,
            values,
        }
    }
}

/// Parameters of a simulated fGn / fBm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FgnSpec {
    pub hurst: f64,
    /// Standard deviation of a unit-lag increment.
    pub scale: f64,
    /// Number of path values, `X_0 ..= X_{length-1}`.
    pub length: usize,
    pub seed: u64,
}

impl FgnSpec {
    pub fn new(hurst: f64, length: usize, seed: u64) -> Self {
        FgnSpec {
            hurst,
            scale: 1.0,
            length,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_hurst(self.hurst)?;
        check_scale(self.scale)?;
        if self.length < 2 {
            return Err(Error::invalid(format!(
                "fBm length must be at least 2, got {}",
                self.length
            )));
        }
        Ok(())
    }
}

fn check_hurst(hurst: f64) -> Result<()> {
    if hurst > 0.0 && hurst < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("hurst must lie in (0, 1), got {hurst}")))
    }
}

fn check_scale(scale: f64) -> Result<()> {
    if scale > 0.0 && scale.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("scale must be positive, got {scale}")))
    }
}

/// Autocovariance of unit-lag fGn at integer lag `q`:
/// `(scale²/2)(|q+1|^{2H} - 2|q|^{2H} + |q-1|^{2H})`.
pub fn fgn_autocov(hurst: f64, scale: f64, lag: i64) -> f64 {
    let q = lag.unsigned_abs() as f64;
    let two_h = 2.0 * hurst;
    let term = (q + 1.0).powf(two_h) - 2.0 * q.powf(two_h) + (q - 1.0).abs().powf(two_h);
    0.5 * scale * scale * term
}

/// Spectral density of unit-lag fGn on `[-π, π]`, normalised so that
/// `K(q) = ∫ e^{iqω} S(ω) dω`.
///
/// The aliasing sum is kept explicitly for `|j| <= truncation`; the remainder
/// is replaced by its integral, which keeps the result accurate to about 1e-6
/// for `H >= 0.1` at the default truncation.
pub fn fgn_spectrum(hurst: f64, scale: f64, omega: f64, truncation: usize) -> Result<f64> {
    check_hurst(hurst)?;
    check_scale(scale)?;
    if !(-PI..=PI).contains(&omega) {
        return Err(Error::invalid(format!("omega must lie in [-pi, pi], got {omega}")));
    }
    if truncation == 0 {
        return Err(Error::invalid("spectrum truncation must be positive"));
    }
    if omega == 0.0 {
        return Ok(0.0);
    }
    let c_h = scale * scale / (2.0 * PI) * (PI * hurst).sin() * gamma_fn(2.0 * hurst + 1.0);
    let expo = -1.0 - 2.0 * hurst;
    let mut sum = omega.abs().powf(expo);
    // pair j and -j so the sum is symmetric in omega by construction
    for j in (1..=truncation).rev() {
        let base = 2.0 * PI * j as f64;
        sum += (base + omega).powf(expo) + (base - omega).powf(expo);
    }
    // ∫_{K+1/2}^∞ (2πu ± ω)^{-1-2H} du
    let edge = 2.0 * PI * (truncation as f64 + 0.5);
    let tail = ((edge + omega).powf(-2.0 * hurst) + (edge - omega).powf(-2.0 * hurst))
        / (2.0 * PI * 2.0 * hurst);
    Ok(2.0 * c_h * (1.0 - omega.cos()) * (sum + tail))
}

/// Size of the circulant embedding for a path of `length` values.
pub fn embedding_size(length: usize) -> usize {
    (2 * (length.max(2) - 1)).next_power_of_two()
}

/// First row of the circulant matrix embedding the covariance of the
/// `length - 1` increments.
pub fn circulant_row(hurst: f64, scale: f64, length: usize) -> Vec<f64> {
    let m = embedding_size(length);
    (0..m)
        .map(|k| {
            let lag = if k <= m / 2 { k } else { m - k };
            fgn_autocov(hurst, scale, lag as i64)
        })
        .collect()
}

/// Eigenvalues of the circulant embedding, i.e. the DFT of [`circulant_row`].
/// Returned raw, before any clipping.
pub fn circulant_eigenvalues(hurst: f64, scale: f64, length: usize) -> Vec<f64> {
    let row = circulant_row(hurst, scale, length);
    let mut buf: Vec<Complex64> = row.iter().map(|&c| Complex64::new(c, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf.into_iter().map(|z| z.re).collect()
}

/// Simulate fractional Gaussian noise: `spec.length - 1` stationary Gaussian
/// values with covariance [`fgn_autocov`].
pub fn simulate_fgn(spec: &FgnSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let n_incr = spec.length - 1;
    let eig = circulant_eigenvalues(spec.hurst, spec.scale, spec.length);
    let m = eig.len();
    if let Some((k, &lam)) = eig
        .iter()
        .enumerate()
        .find(|(_, &lam)| lam < EIGEN_TOLERANCE)
    {
        return Err(Error::Numerical(format!(
            "circulant embedding has negative eigenvalue {lam:e} at index {k}"
        )));
    }

    let mut rng = rng::stream(spec.seed);
    let re: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
    let im: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut buf: Vec<Complex64> = eig
        .iter()
        .zip(re.iter().zip(&im))
        .map(|(&lam, (&a, &b))| Complex64::new(a, b) * (lam.max(0.0) / m as f64).sqrt())
        .collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    // real and imaginary parts are two independent exact samples; keep the first
    Ok(buf.iter().take(n_incr).map(|z| z.re).collect())
}

/// Simulate fBm with `X_0 = 0` by cumulating [`simulate_fgn`].
pub fn simulate_fbm(spec: &FgnSpec) -> Result<Path> {
    let noise = simulate_fgn(spec)?;
    let mut values = Vec::with_capacity(spec.length);
    values.push(0.0);
    let mut level = 0.0;
    for z in noise {
        level += z;
        values.push(level);
    }
    Path::new(values)
}

/// `values[i] = path[i + lag] - path[i]`.
pub fn increments(path: &Path, lag: usize) -> Result<IncrementSample> {
    if lag == 0 {
        return Err(Error::invalid("increment lag must be positive"));
    }
    if lag >= path.len() {
        return Err(Error::invalid(format!(
            "lag {lag} must be smaller than the path length {}",
            path.len()
        )));
    }
    let v = path.values();
    let values = v[lag..].iter().zip(v).map(|(hi, lo)| hi - lo).collect();
    IncrementSample::new(lag, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lag1_autocorrelation(x: &[f64]) -> f64 {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
        let cov: f64 = x.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
        cov / var
    }

    #[test]
    fn autocov_examples() {
        assert_eq!(fgn_autocov(0.5, 1.0, 0), 1.0);
        assert!(fgn_autocov(0.5, 1.0, 3).abs() < 1e-15);
        let expected = 0.5 * (2f64.powf(1.6) - 2.0);
        assert!((fgn_autocov(0.8, 1.0, 1) - expected).abs() < 1e-15);
        assert!((fgn_autocov(0.8, 1.0, 1) - 0.51572).abs() < 1e-5);
        assert_eq!(fgn_autocov(0.3, 2.0, 7), fgn_autocov(0.3, 2.0, -7));
        assert!((fgn_autocov(0.7, 3.0, 0) - 9.0).abs() < 1e-12);
    }

    #[test]
    fn spectrum_vanishes_at_zero_and_is_even() {
        for h in [0.1, 0.3, 0.5, 0.9] {
            assert_eq!(fgn_spectrum(h, 1.0, 0.0, 100).unwrap(), 0.0);
        }
        let a = fgn_spectrum(0.3, 1.0, 1.0, DEFAULT_SPECTRUM_TRUNCATION).unwrap();
        let b = fgn_spectrum(0.3, 1.0, -1.0, DEFAULT_SPECTRUM_TRUNCATION).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn spectrum_matches_fourier_transform_of_autocov() {
        // S(ω) = (1/2π) Σ_q K(q) cos(qω), summed over |q| <= 1e4
        let oracle = |h: f64, omega: f64| {
            let mut s = fgn_autocov(h, 1.0, 0);
            for q in 1..=10_000i64 {
                s += 2.0 * fgn_autocov(h, 1.0, q) * (q as f64 * omega).cos();
            }
            s / (2.0 * PI)
        };
        let omega = PI / 2.0;
        let got = fgn_spectrum(0.5, 1.0, omega, DEFAULT_SPECTRUM_TRUNCATION).unwrap();
        assert!((got - oracle(0.5, omega)).abs() < 1e-3);
        assert!((got - 1.0 / (2.0 * PI)).abs() < 1e-6);
        // short memory case: the lag sum converges absolutely
        let got = fgn_spectrum(0.3, 1.0, 1.0, DEFAULT_SPECTRUM_TRUNCATION).unwrap();
        assert!((got - oracle(0.3, 1.0)).abs() < 1e-3, "{got} vs {}", oracle(0.3, 1.0));
    }

    #[test]
    fn spectrum_rejects_out_of_range_omega() {
        assert!(fgn_spectrum(0.5, 1.0, 3.2, 10).is_err());
        assert!(fgn_spectrum(1.0, 1.0, 1.0, 10).is_err());
    }

    #[test]
    fn spectrum_nonnegative_and_even_on_grid() {
        for h in [0.1, 0.3, 0.5, 0.7, 0.9] {
            for k in 0..1000 {
                let omega = -PI + 2.0 * PI * k as f64 / 999.0;
                let omega = omega.clamp(-PI, PI);
                let s = fgn_spectrum(h, 1.0, omega, 200).unwrap();
                let t = fgn_spectrum(h, 1.0, -omega, 200).unwrap();
                assert!(s >= 0.0);
                assert_eq!(s, t);
            }
        }
    }

    #[test]
    fn embedding_size_is_power_of_two() {
        assert_eq!(embedding_size(2), 2);
        assert_eq!(embedding_size(4096), 8192);
        assert_eq!(embedding_size(4097), 8192);
        assert_eq!(embedding_size(4098), 16384);
    }

    #[test]
    fn eigenvalues_recover_embedded_row() {
        for h in [0.2, 0.5, 0.8] {
            let length = 1000;
            let row = circulant_row(h, 1.0, length);
            let eig = circulant_eigenvalues(h, 1.0, length);
            let mut buf: Vec<Complex64> = eig.iter().map(|&l| Complex64::new(l, 0.0)).collect();
            FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
            let m = buf.len() as f64;
            let scale = row.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            for (z, c) in buf.iter().zip(&row) {
                assert!(((z.re / m) - c).abs() <= 1e-10 * scale);
                assert!((z.im / m).abs() <= 1e-10 * scale);
            }
            assert!(eig.iter().all(|&l| l > EIGEN_TOLERANCE));
        }
    }

    #[test]
    fn simulation_is_deterministic_and_starts_at_zero() {
        let spec = FgnSpec::new(0.3, 257, 42);
        let a = simulate_fbm(&spec).unwrap();
        let b = simulate_fbm(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 257);
        assert_eq!(a.values()[0], 0.0);
        assert!(a.origin_zero());
        let c = simulate_fbm(&FgnSpec::new(0.3, 257, 43)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn brownian_increments_are_white_and_normal() {
        let n = 1 << 12;
        let path = simulate_fbm(&FgnSpec::new(0.5, n + 1, 3)).unwrap();
        let z = increments(&path, 1).unwrap();
        let r1 = lag1_autocorrelation(z.values());
        assert!(r1.abs() < 3.0 / (n as f64).sqrt(), "r1 = {r1}");
        // one-sample KS against N(0,1) at roughly the 1% level
        let mut sorted = z.values().to_vec();
        sorted.sort_by(f64::total_cmp);
        let d = sorted
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = crate::special::norm_cdf(x);
                (f - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(d < 1.63 / (n as f64).sqrt(), "KS distance {d}");
    }

    #[test]
    fn persistent_increments_have_expected_lag1_correlation() {
        let n = 1 << 12;
        let path = simulate_fbm(&FgnSpec::new(0.8, n + 1, 11)).unwrap();
        let z = increments(&path, 1).unwrap();
        let r1 = lag1_autocorrelation(z.values());
        let target = fgn_autocov(0.8, 1.0, 1) / fgn_autocov(0.8, 1.0, 0);
        assert!((r1 - target).abs() < 3.0 / (n as f64).sqrt(), "r1 = {r1}");
    }

    #[test]
    fn increments_examples() {
        let p = Path::new(vec![0.0, 1.0, 3.0, 6.0]).unwrap();
        assert_eq!(increments(&p, 1).unwrap().values(), &[1.0, 2.0, 3.0]);
        assert_eq!(increments(&p, 2).unwrap().values(), &[3.0, 5.0]);
        assert_eq!(increments(&p, 2).unwrap().lag(), 2);
        let flat = Path::new(vec![2.5; 10]).unwrap();
        assert!(increments(&flat, 4).unwrap().values().iter().all(|&v| v == 0.0));
        assert!(increments(&p, 4).is_err());
        assert!(increments(&p, 0).is_err());
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(simulate_fbm(&FgnSpec::new(0.0, 10, 1)).is_err());
        assert!(simulate_fbm(&FgnSpec::new(1.0, 10, 1)).is_err());
        assert!(simulate_fbm(&FgnSpec::new(0.5, 1, 1)).is_err());
        assert!(Path::new(vec![0.0, f64::NAN]).is_err());
    }
}
