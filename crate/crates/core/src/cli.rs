//! `hurst-ks` command line: `simulate`, `estimate`, `analyze`, `bench`.
//!
//! Exit status is 0 on success, 1 for bad input or usage, 2 when the
//! numerics fail (degenerate sample, too few usable windows, ...).

use std::ffi::OsString;
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::optimize::{bench_optimizers, write_bench_csv, BenchConfig, Method, OptimizerConfig};
use crate::pipeline::{
    self, AnalysisConfig, AnalysisReport, PermScheme, RunManifest, WindowConfig,
    DEFAULT_BLOCK_LENGTH, DEFAULT_RV_MIN_OBS,
};
use crate::synthesis::{simulate_fbm, FgnSpec};

#[derive(Debug, Parser)]
#[command(name = "hurst-ks", version, about = "Hurst exponent estimation by KS-distance minimisation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate an fBm path and write it as `date,log_value`.
    Simulate(SimulateArgs),
    /// Estimate H on a whole series (one window).
    Estimate(EstimateArgs),
    /// Windowed estimation with aggregate tests.
    Analyze(AnalyzeArgs),
    /// Compare the optimizers on simulated paths.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    hurst: f64,
    #[arg(long)]
    length: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Standard deviation of one increment.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Date of the first observation; later rows advance one day each.
    #[arg(long, default_value = "2000-01-01")]
    start_date: NaiveDate,
}

#[derive(Debug, Args)]
struct PermArgs {
    #[arg(long, default_value = "uniform")]
    perm_scheme: PermScheme,
    #[arg(long, default_value_t = DEFAULT_BLOCK_LENGTH)]
    block_length: usize,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    amax: usize,
    /// Sample size of both increment sets; defaults to length − amax.
    #[arg(long)]
    subseq: Option<usize>,
    #[arg(long, default_value = "brent")]
    optimizer: Method,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[command(flatten)]
    perm: PermArgs,
    #[arg(long, default_value_t = DEFAULT_RV_MIN_OBS)]
    rv_min_obs: usize,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Key/value manifest; replaces the other options.
    #[arg(long, conflicts_with = "input")]
    manifest: Option<PathBuf>,
    #[arg(long, num_args = 1.., required_unless_present = "manifest")]
    input: Vec<PathBuf>,
    #[arg(long, default_value_t = 1512)]
    window_length: usize,
    #[arg(long, default_value_t = 21)]
    amax: usize,
    #[arg(long)]
    subseq: Option<usize>,
    #[arg(long, default_value = "brent")]
    optimizer: Method,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    #[command(flatten)]
    perm: PermArgs,
    #[arg(long, default_value_t = DEFAULT_RV_MIN_OBS)]
    rv_min_obs: usize,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    h_list: Vec<f64>,
    #[arg(long)]
    reps: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 4096)]
    length: usize,
    #[arg(long, default_value_t = 50)]
    amax: usize,
    #[arg(long, default_value_t = 500)]
    subseq: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated optimizer names; all by default.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<Method>,
}

/// Parse `args` (program name first) and run. Returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Estimate(a) => estimate(a),
        Command::Analyze(a) => analyze(a),
        Command::Bench(a) => bench(a),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let spec = FgnSpec {
        scale: a.scale,
        ..FgnSpec::new(a.hurst, a.length, a.seed)
    };
    let path = simulate_fbm(&spec)?;
    let dates: Vec<NaiveDate> = (0..path.len() as u64)
        .map(|i| a.start_date + chrono::Days::new(i))
        .collect();
    pipeline::write_log_series(&a.out, &dates, path.values())?;
    println!("wrote {} observations to {}", path.len(), a.out.display());
    Ok(())
}

fn estimate(a: EstimateArgs) -> Result<()> {
    let data = pipeline::load_input(&a.input, a.rv_min_obs)?;
    if let Some(w) = &data.warning {
        eprintln!("warning: {w}");
    }
    let window = WindowConfig {
        window_length: data.path.len(),
        a_max: a.amax,
        subseq: a.subseq,
        alpha: a.alpha,
    };
    let mut cfg = AnalysisConfig::new(window, OptimizerConfig::new(a.optimizer).with_seed(a.seed), a.seed);
    cfg.perm_scheme = a.perm.perm_scheme;
    cfg.block_length = a.perm.block_length;
    cfg.validate()?;
    let r = crate::optimize::estimate_from_path(
        &data.path,
        a.amax,
        a.subseq,
        &cfg.plan(a.seed),
        &cfg.optimizer,
        a.alpha,
    )?;
    println!("series       {} ({} observations)", data.name, data.path.len());
    println!("optimizer    {} ({} evaluations)", r.method, r.evaluations);
    println!("n, m         {}, {}", r.n, r.m);
    println!("h_hat        {:.6}", r.h_hat);
    println!("delta_min    {:.6}", r.delta_min);
    println!("critical     {:.6} (alpha = {})", r.critical_value, r.alpha);
    println!("significant  {}", r.significant);
    println!(
        "ci           [{:.6}, {:.6}] (half-width {:.6})",
        r.ci_lo, r.ci_hi, r.ci_half_width
    );
    Ok(())
}

fn analyze(a: AnalyzeArgs) -> Result<()> {
    let manifest = match &a.manifest {
        Some(m) => RunManifest::from_file(m)?,
        None => {
            let window = WindowConfig {
                window_length: a.window_length,
                a_max: a.amax,
                subseq: a.subseq,
                alpha: a.alpha,
            };
            let mut config =
                AnalysisConfig::new(window, OptimizerConfig::new(a.optimizer).with_seed(a.seed), a.seed);
            config.perm_scheme = a.perm.perm_scheme;
            config.block_length = a.perm.block_length;
            config.validate()?;
            RunManifest {
                inputs: a.input.clone(),
                output_dir: a.out_dir.clone(),
                config,
                rv_min_obs: a.rv_min_obs,
            }
        }
    };
    let report = pipeline::run_static_analysis(&manifest)?;
    print_report(&report);
    for f in pipeline::write_outputs(&report, &manifest.output_dir)? {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn print_report(report: &AnalysisReport) {
    for s in &report.series {
        if let Some(w) = &s.load_warning {
            eprintln!("warning: {w}");
        }
        println!(
            "{}: {} observations, {} windows, {} discarded at the end",
            s.name,
            s.observations,
            s.windows.len(),
            s.remainder_discarded
        );
        for w in &s.windows {
            match (&w.result, &w.error) {
                (Some(r), _) => println!(
                    "  window {}  h_hat {:.4}  delta_min {:.4}  critical {:.4}  ci [{:.4}, {:.4}]",
                    w.window_index, r.h_hat, r.delta_min, r.critical_value, r.ci_lo, r.ci_hi
                ),
                (None, Some(e)) => println!("  window {}  failed: {e}", w.window_index),
                (None, None) => {}
            }
        }
        let g = &s.aggregate;
        println!(
            "  mean h_hat {:.4}  sigma {:.5}  chi2({}) = {:.4}  p = {:.4}",
            g.mean_h, g.sigma, g.chi2_df, g.chi2_stat, g.chi2_p
        );
    }
    if let Some(z) = &report.z_test {
        println!(
            "z-test {} vs {}: z = {:.4}, one-sided p = {:.5}",
            z.series_a, z.series_b, z.z, z.p_one_sided
        );
        println!("  note: {}", z.note);
    }
}

fn bench(a: BenchArgs) -> Result<()> {
    let mut cfg = BenchConfig::standard(a.seed);
    cfg.length = a.length;
    cfg.a_max = a.amax;
    cfg.subseq = a.subseq;
    if !a.methods.is_empty() {
        cfg.methods = a.methods.iter().map(|&m| OptimizerConfig::new(m)).collect();
    }
    let rows = bench_optimizers(&a.h_list, a.reps, &cfg)?;
    let file = File::create(&a.out).map_err(|e| Error::io(&a.out, e))?;
    write_bench_csv(&rows, BufWriter::new(file))?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    println!("wrote {} rows to {} ({failed} failed)", rows.len(), a.out.display());
    Ok(())
}
