//! Windowed estimation, aggregation and report output.

use std::fs::File;
use std::io::Write;
use std::path::{Path as FsPath, PathBuf};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{chi2_constancy, estimator_sd, z_test_means, VarianceInputs};
use crate::optimize::{estimate_from_path, EstimationResult};
use crate::pipeline::io::{load_intraday, load_series, log_transform, read_header, realized_vol};
use crate::pipeline::manifest::{AnalysisConfig, RunManifest};
use crate::pipeline::window::window_ranges;
use crate::rng::derive_seed;
use crate::synthesis::Path;

/// A log-scale series ready for windowing.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesData {
    pub name: String,
    pub path: Path,
    /// One date per observation, if known.
    pub dates: Option<Vec<NaiveDate>>,
    pub dropped: usize,
    pub warning: Option<String>,
}

impl SeriesData {
    pub fn from_path(name: impl Into<String>, path: Path) -> Self {
        SeriesData {
            name: name.into(),
            path,
            dates: None,
            dropped: 0,
            warning: None,
        }
    }
}

/// Load a series file, choosing the reader from its header: daily levels
/// (`date,value`), daily logarithms (`date,log_value`) or intraday returns
/// (`date,time,log_return`, converted to log realised volatility).
pub fn load_input(file: &FsPath, rv_min_obs: usize) -> Result<SeriesData> {
    let name = file
        .file_stem()
        .map_or_else(|| "series".to_string(), |s| s.to_string_lossy().into_owned());
    let header = read_header(file)?;
    if header.len() == 3 {
        let days = load_intraday(file)?;
        let total = days.len();
        let rv = realized_vol(&days, rv_min_obs);
        let dropped = rv.dropped_days.len();
        let warning = (dropped as f64 > 0.01 * total as f64).then(|| {
            let msg = format!(
                "{}: dropped {dropped} of {total} days in realised volatility",
                file.display()
            );
            log::warn!("{msg}");
            msg
        });
        if rv.records.is_empty() {
            return Err(Error::invalid(format!(
                "{}: no day has {rv_min_obs} or more intraday returns",
                file.display()
            )));
        }
        return Ok(SeriesData {
            name,
            path: log_transform(&rv.records)?,
            dates: Some(rv.records.iter().map(|r| r.date).collect()),
            dropped,
            warning,
        });
    }
    let loaded = load_series(file)?;
    if loaded.records.is_empty() {
        return Err(Error::invalid(format!("{}: no usable rows", file.display())));
    }
    Ok(SeriesData {
        name,
        path: loaded.log_path()?,
        dates: Some(loaded.dates()),
        dropped: loaded.dropped,
        warning: loaded.warning,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowEstimate {
    pub window_index: usize,
    pub start: usize,
    pub end: usize,
    pub start_date: Option<NaiveDate>,
    pub end_date: Option<NaiveDate>,
    pub result: Option<EstimationResult>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub window_estimates: Vec<EstimationResult>,
    pub mean_h: f64,
    /// Standard deviation of a single window estimate.
    pub sigma: f64,
    pub chi2_stat: f64,
    pub chi2_df: usize,
    pub chi2_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub name: String,
    pub observations: usize,
    pub dropped_rows: usize,
    pub load_warning: Option<String>,
    pub remainder_discarded: usize,
    pub windows: Vec<WindowEstimate>,
    pub aggregate: AggregateReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZTestReport {
    pub series_a: String,
    pub series_b: String,
    pub mean_a: f64,
    pub mean_b: f64,
    pub sigma: f64,
    pub z: f64,
    pub p_one_sided: f64,
    pub note: String,
}

const Z_NOTE: &str = "z = (mean_a - mean_b) / (sigma * sqrt(2)), sigma being the \
    single-window standard deviation; the window count of each series is not used";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub config: AnalysisConfig,
    pub series: Vec<SeriesReport>,
    pub z_test: Option<ZTestReport>,
}

/// Estimate every window of one series and aggregate the successes.
///
/// The window seed is derived from the master seed, the series index and the
/// window index, so results do not depend on thread scheduling.
pub fn analyze_series(
    data: &SeriesData,
    series_index: usize,
    config: &AnalysisConfig,
) -> Result<SeriesReport> {
    config.validate()?;
    let w = &config.window;
    let (ranges, remainder) = window_ranges(data.path.len(), w.window_length)?;
    if remainder > 0 {
        log::info!(
            "{}: {} windows, last {remainder} observations discarded",
            data.name,
            ranges.len()
        );
    }
    let windows: Vec<WindowEstimate> = ranges
        .par_iter()
        .enumerate()
        .map(|(k, r)| {
            let seed = derive_seed(config.seed, &[series_index as u64, k as u64]);
            let outcome = Path::new(data.path.values()[r.clone()].to_vec()).and_then(|p| {
                let opt = config.optimizer.with_seed(derive_seed(seed, &[3]));
                estimate_from_path(&p, w.a_max, Some(w.subseq_len()), &config.plan(seed), &opt, w.alpha)
            });
            let date = |i: usize| data.dates.as_ref().map(|d| d[i]);
            if let Err(e) = &outcome {
                log::warn!("{} window {k}: {e}", data.name);
            }
            WindowEstimate {
                window_index: k,
                start: r.start,
                end: r.end,
                start_date: date(r.start),
                end_date: date(r.end - 1),
                error: outcome.as_ref().err().map(ToString::to_string),
                result: outcome.ok(),
            }
        })
        .collect();

    let estimates: Vec<EstimationResult> = windows.iter().filter_map(|w| w.result.clone()).collect();
    if estimates.len() < 2 {
        return Err(Error::Numerical(format!(
            "{}: {} of {} windows estimated; at least 2 are needed to aggregate",
            data.name,
            estimates.len(),
            windows.len()
        )));
    }
    let t = w.subseq_len();
    let sigma = estimator_sd(&VarianceInputs::new(w.a_max, t, t))?;
    let hs: Vec<f64> = estimates.iter().map(|e| e.h_hat).collect();
    let chi2 = chi2_constancy(&hs, sigma)?;
    let mean_h = hs.iter().sum::<f64>() / hs.len() as f64;
    Ok(SeriesReport {
        name: data.name.clone(),
        observations: data.path.len(),
        dropped_rows: data.dropped,
        load_warning: data.warning.clone(),
        remainder_discarded: remainder,
        windows,
        aggregate: AggregateReport {
            window_estimates: estimates,
            mean_h,
            sigma,
            chi2_stat: chi2.stat,
            chi2_df: chi2.df as usize,
            chi2_p: chi2.p,
        },
    })
}

/// Analyse one or more series; with exactly two, also compare their means.
pub fn analyze(series: &[SeriesData], config: &AnalysisConfig) -> Result<AnalysisReport> {
    let reports = series
        .iter()
        .enumerate()
        .map(|(i, s)| analyze_series(s, i, config))
        .collect::<Result<Vec<_>>>()?;
    let z_test = match reports.as_slice() {
        [a, b] => {
            let sigma = a.aggregate.sigma;
            let z = z_test_means(a.aggregate.mean_h, b.aggregate.mean_h, sigma)?;
            Some(ZTestReport {
                series_a: a.name.clone(),
                series_b: b.name.clone(),
                mean_a: a.aggregate.mean_h,
                mean_b: b.aggregate.mean_h,
                sigma,
                z: z.z,
                p_one_sided: z.p_one_sided,
                note: Z_NOTE.to_string(),
            })
        }
        _ => None,
    };
    Ok(AnalysisReport {
        config: *config,
        series: reports,
        z_test,
    })
}

/// Load the manifest's inputs and analyse them. Nothing is written.
pub fn run_static_analysis(manifest: &RunManifest) -> Result<AnalysisReport> {
    let data = manifest
        .inputs
        .iter()
        .map(|f| load_input(f, manifest.rv_min_obs))
        .collect::<Result<Vec<_>>>()?;
    analyze(&data, &manifest.config)
}

/// Write `report.json` and the per-window CSV(s). A single series goes to
/// `windows.csv`; several series go to `windows_<name>.csv` each. Returns the
/// files written.
pub fn write_outputs(report: &AnalysisReport, out_dir: &FsPath) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    let json_path = out_dir.join("report.json");
    let mut f = File::create(&json_path).map_err(|e| Error::io(&json_path, e))?;
    serde_json::to_writer_pretty(&mut f, report)?;
    writeln!(f).map_err(|e| Error::io(&json_path, e))?;
    written.push(json_path);

    let mut used = std::collections::BTreeSet::new();
    for (i, s) in report.series.iter().enumerate() {
        let file = if report.series.len() == 1 {
            "windows.csv".to_string()
        } else {
            let mut name = format!("windows_{}.csv", s.name);
            if !used.insert(name.clone()) {
                name = format!("windows_{}_{i}.csv", s.name);
            }
            name
        };
        let p = out_dir.join(file);
        write_windows_csv(&p, &s.windows)?;
        written.push(p);
    }
    Ok(written)
}

fn write_windows_csv(path: &FsPath, windows: &[WindowEstimate]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record([
        "window_index",
        "start_date",
        "end_date",
        "h_hat",
        "delta_min",
        "critical",
        "significant",
        "ci_lo",
        "ci_hi",
    ])?;
    let opt_date = |d: Option<NaiveDate>, i: usize| d.map_or_else(|| i.to_string(), |d| d.to_string());
    for win in windows {
        let mut row = vec![
            win.window_index.to_string(),
            opt_date(win.start_date, win.start),
            opt_date(win.end_date, win.end - 1),
        ];
        match &win.result {
            Some(r) => row.extend([
                r.h_hat.to_string(),
                r.delta_min.to_string(),
                r.critical_value.to_string(),
                r.significant.to_string(),
                r.ci_lo.to_string(),
                r.ci_hi.to_string(),
            ]),
            None => row.extend(std::iter::repeat_n(String::new(), 6)),
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
