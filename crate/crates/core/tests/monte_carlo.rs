//! Statistical checks over many seeds. Seeds are fixed, so every run sees
//! the same draws.

use hurst_ks::decorrelate::{block_permute, permute, sample_acf, PermutationPlan};
use hurst_ks::inference::{estimator_sd, VarianceInputs};
use hurst_ks::ks::{ks_critical, DiameterObjective, RescaledPair};
use hurst_ks::optimize::{
    bench_optimizers, estimate_from_path, estimate_hurst, minimize, BenchConfig, Method, OptimizerConfig,
};
use hurst_ks::pipeline::{analyze, analyze_series, AnalysisConfig, SeriesData, WindowConfig};
use hurst_ks::rng::derive_seed;
use hurst_ks::synthesis::{fgn_autocov, increments, simulate_fbm, simulate_fgn, FgnSpec, IncrementSample};
use rayon::prelude::*;

const N: usize = 4096;
const A_MAX: usize = 50;
const T: usize = 500;

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn path(h: f64, seed: u64) -> hurst_ks::synthesis::Path {
    simulate_fbm(&FgnSpec::new(h, N, seed)).unwrap()
}

#[test]
fn fgn_covariance_matches_closed_form() {
    let (n, seeds, lags) = (1024usize, 200u64, 20usize);
    for h in [0.3, 0.7] {
        // per-seed uncentred lag covariances (the mean is known to be zero)
        let covs: Vec<Vec<f64>> = (0..seeds)
            .into_par_iter()
            .map(|s| {
                let x = simulate_fgn(&FgnSpec::new(h, n + 1, derive_seed(31, &[s]))).unwrap();
                (0..=lags)
                    .map(|k| x[..n - k].iter().zip(&x[k..]).map(|(a, b)| a * b).sum::<f64>() / (n - k) as f64)
                    .collect()
            })
            .collect();
        for k in 0..=lags {
            let at_k: Vec<f64> = covs.iter().map(|c| c[k]).collect();
            let (mean, sd) = mean_sd(&at_k);
            let se = sd / (seeds as f64).sqrt();
            let exact = fgn_autocov(h, 1.0, k as i64);
            assert!((mean - exact).abs() < 3.0 * se, "H {h} lag {k}: {mean} vs {exact} (se {se})");
        }
    }
}

#[test]
fn increment_variance_scales_as_power_of_lag() {
    for h in [0.3, 0.7] {
        let ratios: Vec<Vec<f64>> = (0..100u64)
            .into_par_iter()
            .map(|s| {
                let p = path(h, derive_seed(32, &[s]));
                let msq = |lag| {
                    let z = increments(&p, lag).unwrap();
                    z.values().iter().map(|v| v * v).sum::<f64>() / z.len() as f64
                };
                let base = msq(1);
                [2usize, 5, 10, 20, 50].iter().map(|&a| msq(a) / base).collect()
            })
            .collect();
        for (i, &a) in [2usize, 5, 10, 20, 50].iter().enumerate() {
            let mean = ratios.iter().map(|r| r[i]).sum::<f64>() / ratios.len() as f64;
            let expected = (a as f64).powf(2.0 * h);
            assert!((mean / expected - 1.0).abs() < 0.1, "H {h}, lag {a}: {mean} vs {expected}");
        }
    }
}

/// Mean over 100 seeds of `max_{1..20} |ACF|` after block permutation, in
/// units of `1/sqrt(n)`, and how often the unpermuted lag-1 ACF exceeds
/// `10/sqrt(n)`.
fn block_decorrelation(h: f64, block: usize) -> (f64, usize) {
    let root_n = (N as f64).sqrt();
    let rows: Vec<(f64, f64)> = (0..100u64)
        .into_par_iter()
        .map(|s| {
            let x = simulate_fgn(&FgnSpec::new(h, N + 1, derive_seed(33, &[s]))).unwrap();
            let raw = sample_acf(&x, 1).unwrap()[0];
            let sample = IncrementSample::new(1, x).unwrap();
            let out = block_permute(&sample, &PermutationPlan::block(block, derive_seed(33, &[s, 1]))).unwrap();
            let acf = sample_acf(out.values(), 20).unwrap();
            (acf.iter().fold(0.0f64, |m, r| m.max(r.abs())) * root_n, raw * root_n)
        })
        .collect();
    let mean = rows.iter().map(|r| r.0).sum::<f64>() / rows.len() as f64;
    (mean, rows.iter().filter(|r| r.1 > 10.0).count())
}

#[test]
fn block_permutation_decorrelates_rough_fgn() {
    let (mean, _) = block_decorrelation(0.2, 128);
    assert!(mean < 2.5, "H 0.2: mean max |ACF| = {mean:.2}/sqrt(n)");
}

#[test]
fn block_permutation_decorrelates_persistent_fgn() {
    let (mean, control) = block_decorrelation(0.8, 128);
    assert!(control >= 95, "unpermuted lag-1 ACF above 10/sqrt(n) in {control}/100");
    assert!(mean < 2.5, "H 0.8: mean max |ACF| = {mean:.2}/sqrt(n)");
}

#[test]
fn permutation_keeps_marginal_scaling() {
    for h in [0.3, 0.5, 0.7] {
        let ratios: Vec<f64> = (0..20u64)
            .into_par_iter()
            .map(|s| {
                let seed = derive_seed(34, &[s]);
                let p = path(h, seed);
                let sd = |lag, tag| {
                    let z = permute(&increments(&p, lag).unwrap(), &PermutationPlan::uniform(T, derive_seed(seed, &[tag])))
                        .unwrap();
                    mean_sd(z.values()).1
                };
                sd(A_MAX, 2) / sd(1, 1)
            })
            .collect();
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let expected = (A_MAX as f64).powf(h);
        assert!((mean / expected - 1.0).abs() < 0.1, "H {h}: {mean} vs {expected}");
    }
}

fn estimates(h0: f64, tag: u64, reps: u64, method: Method) -> Vec<hurst_ks::optimize::EstimationResult> {
    (0..reps)
        .into_par_iter()
        .map(|s| {
            let seed = derive_seed(tag, &[s]);
            let p = path(h0, seed);
            let pair = RescaledPair::new(increments(&p, 1).unwrap(), increments(&p, A_MAX).unwrap()).unwrap();
            estimate_hurst(&pair, &PermutationPlan::uniform(T, derive_seed(seed, &[1])), &OptimizerConfig::new(method), 0.05)
                .unwrap()
        })
        .collect()
}

#[test]
fn estimates_fall_inside_closed_form_band() {
    let sd = estimator_sd(&VarianceInputs::new(A_MAX, T, T)).unwrap();
    let rs = estimates(0.5, 35, 100, Method::Brent);
    let inside = rs.iter().filter(|r| (r.h_hat - 0.5).abs() <= 1.96 * sd).count();
    assert!(inside >= 90, "{inside}/100 inside 0.5 ± {:.4}", 1.96 * sd);
    let k = ks_critical(T, T, 0.05).unwrap();
    let below = rs.iter().filter(|r| r.delta_min < k).count();
    assert!(below >= 90, "delta_min below {k:.4} in {below}/100");
}

#[test]
fn estimates_centre_on_true_exponent() {
    for h0 in [0.2, 0.8] {
        let hs: Vec<f64> = estimates(h0, 36, 100, Method::Brent).iter().map(|r| r.h_hat).collect();
        let (mean, _) = mean_sd(&hs);
        assert!((mean - h0).abs() <= 0.05, "H0 {h0}: mean {mean}");
    }
}

#[test]
fn estimator_spread_matches_closed_form_within_factor_two() {
    let predicted = estimator_sd(&VarianceInputs::new(A_MAX, T, T)).unwrap();
    let hs: Vec<f64> = estimates(0.5, 37, 200, Method::Grid).iter().map(|r| r.h_hat).collect();
    let (_, sd) = mean_sd(&hs);
    let ratio = sd / predicted;
    assert!((0.5..=2.0).contains(&ratio), "empirical sd {sd:.4} = {ratio:.3} x {predicted:.4}");
}

#[test]
fn annealing_tracks_grid_search() {
    let grid = OptimizerConfig::new(Method::Grid);
    let close = (0..100u64)
        .into_par_iter()
        .filter(|&s| {
            let seed = derive_seed(38, &[s]);
            let p = path([0.2, 0.4, 0.6, 0.8][(s % 4) as usize], seed);
            let pair = RescaledPair::new(increments(&p, 1).unwrap(), increments(&p, A_MAX).unwrap()).unwrap();
            let lag1 = permute(pair.z_lag1(), &PermutationPlan::uniform(T, derive_seed(seed, &[1]))).unwrap();
            let lag_a = permute(pair.z_lag_a(), &PermutationPlan::uniform(T, derive_seed(seed, &[2]))).unwrap();
            let obj = DiameterObjective::new(&RescaledPair::new(lag1, lag_a).unwrap()).unwrap();
            let g = minimize(|h| Ok(obj.eval(h)), &grid).unwrap();
            let sa_cfg = OptimizerConfig::new(Method::SimulatedAnnealing).with_seed(seed);
            let sa = minimize(|h| Ok(obj.eval(h)), &sa_cfg).unwrap();
            (sa.h_hat - g.h_hat).abs() <= 5e-3
        })
        .count();
    assert!(close >= 90, "annealing within 5e-3 of grid in {close}/100");
}

#[test]
fn bench_counts_and_determinism() {
    let mut cfg = BenchConfig::standard(77);
    cfg.methods = vec![OptimizerConfig::new(Method::Grid), OptimizerConfig::new(Method::Brent)];
    let a = bench_optimizers(&[0.3, 0.7], 2, &cfg).unwrap();
    let b = bench_optimizers(&[0.3, 0.7], 2, &cfg).unwrap();
    assert_eq!(a.len(), 8);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.h_hat, y.h_hat);
        assert!(x.error.is_none());
        match x.method {
            Method::Grid => assert_eq!(x.evaluations, 10_000),
            _ => assert!(x.evaluations < 1_000, "{x:?}"),
        }
    }
}

fn window_config() -> WindowConfig {
    WindowConfig::default()
}

#[test]
fn windowed_mean_recovers_exponent() {
    let sd = estimator_sd(&VarianceInputs::new(21, 1491, 1491)).unwrap();
    let band = 1.96 * sd / 6f64.sqrt();
    assert!((band - 0.0563).abs() < 5e-4);
    let inside = (0..100u64)
        .into_par_iter()
        .filter(|&s| {
            let p = simulate_fbm(&FgnSpec::new(0.4, 6 * 1512, derive_seed(39, &[s]))).unwrap();
            let cfg = AnalysisConfig::new(window_config(), OptimizerConfig::new(Method::Brent), s);
            let r = analyze_series(&SeriesData::from_path("sim", p), 0, &cfg).unwrap();
            assert_eq!(r.aggregate.window_estimates.len(), 6);
            (r.aggregate.mean_h - 0.4).abs() <= band
        })
        .count();
    assert!(inside >= 90, "{inside}/100 within 0.4 ± {band:.4}");
}

#[test]
fn z_test_size_on_identical_exponents() {
    let rejections = (0..100u64)
        .into_par_iter()
        .filter(|&s| {
            let series = |k: u64| {
                let p = simulate_fbm(&FgnSpec::new(0.3, 2 * 1512, derive_seed(40, &[s, k]))).unwrap();
                SeriesData::from_path(format!("s{k}"), p)
            };
            let cfg = AnalysisConfig::new(window_config(), OptimizerConfig::new(Method::Brent), s);
            let r = analyze(&[series(0), series(1)], &cfg).unwrap();
            r.z_test.unwrap().p_one_sided < 0.05
        })
        .count();
    assert!(rejections <= 10, "rejected in {rejections}/100");
}

#[test]
fn block_scheme_estimates_are_sane() {
    let p = path(0.5, 41);
    let cfg = OptimizerConfig::new(Method::Brent);
    let r = estimate_from_path(&p, A_MAX, Some(T), &PermutationPlan::block(128, 3), &cfg, 0.05).unwrap();
    assert_eq!((r.n, r.m), (T, T));
    assert!((r.h_hat - 0.5).abs() < 0.25, "{r:?}");
}
