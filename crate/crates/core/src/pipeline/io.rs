//! CSV ingestion: daily `date,value` series and intraday `date,time,log_return`
//! returns.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path as FsPath;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::synthesis::Path;

/// Share of dropped rows above which a load is flagged.
const DROP_WARNING_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub date: NaiveDate,
    pub value: f64,
}

/// What the value column holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueKind {
    /// Positive levels (`value` column); analysed through their logarithm.
    Level,
    /// Values that already are logarithms (`log_value` column), e.g. a
    /// simulated fBm path.
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSeries {
    pub records: Vec<SeriesRecord>,
    pub kind: ValueKind,
    pub dropped: usize,
    /// Set when more than 1% of rows were dropped.
    pub warning: Option<String>,
}

impl LoadedSeries {
    /// The series on the log scale, in date order.
    pub fn log_path(&self) -> Result<Path> {
        match self.kind {
            ValueKind::Level => log_transform(&self.records),
            ValueKind::Log => Path::new(self.records.iter().map(|r| r.value).collect()),
        }
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.records.iter().map(|r| r.date).collect()
    }
}

fn open(path: &FsPath) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn parse_err(path: &FsPath, line: u64, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn parse_date(path: &FsPath, line: u64, field: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(field, "%Y-%m-%d")
        .map_err(|e| parse_err(path, line, format!("bad date {field:?}: {e}")))
}

/// Header of a CSV file, lower-cased.
pub fn read_header(path: &FsPath) -> Result<Vec<String>> {
    let mut reader = open(path)?;
    Ok(reader
        .headers()?
        .iter()
        .map(|h| h.to_ascii_lowercase())
        .collect())
}

/// Load a `date,value` (levels) or `date,log_value` (logarithms) series.
///
/// Rows are sorted by date; a repeated date is an error. Rows with an empty
/// value, or a non-positive level, are dropped and counted.
pub fn load_series(path: &FsPath) -> Result<LoadedSeries> {
    let mut reader = open(path)?;
    let header: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.to_ascii_lowercase())
        .collect();
    let kind = match header.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["date", "value"] => ValueKind::Level,
        ["date", "log_value"] => ValueKind::Log,
        other => {
            return Err(parse_err(
                path,
                1,
                format!("expected header date,value or date,log_value, got {}", other.join(",")),
            ))
        }
    };

    let mut records = Vec::new();
    let mut dropped = 0usize;
    let mut rows = 0usize;
    for result in reader.records() {
        let row = result?;
        let line = row.position().map_or(0, |p| p.line());
        rows += 1;
        if row.len() != 2 {
            return Err(parse_err(path, line, format!("expected 2 fields, got {}", row.len())));
        }
        let date = parse_date(path, line, &row[0])?;
        let raw = &row[1];
        if raw.is_empty() || raw.eq_ignore_ascii_case("na") || raw.eq_ignore_ascii_case("nan") {
            dropped += 1;
            continue;
        }
        let value: f64 = raw
            .parse()
            .map_err(|e| parse_err(path, line, format!("bad value {raw:?}: {e}")))?;
        if !value.is_finite() || (kind == ValueKind::Level && value <= 0.0) {
            dropped += 1;
            continue;
        }
        records.push(SeriesRecord { date, value });
    }

    records.sort_by_key(|r| r.date);
    if let Some(w) = records.windows(2).find(|w| w[0].date == w[1].date) {
        return Err(Error::DuplicateDate {
            path: path.to_path_buf(),
            date: w[0].date.to_string(),
        });
    }
    if dropped > 0 {
        log::info!("{}: dropped {dropped} of {rows} rows", path.display());
    }
    let warning = (rows > 0 && dropped as f64 > DROP_WARNING_FRACTION * rows as f64).then(|| {
        let msg = format!(
            "{}: dropped {dropped} of {rows} rows (more than 1%)",
            path.display()
        );
        log::warn!("{msg}");
        msg
    });
    Ok(LoadedSeries {
        records,
        kind,
        dropped,
        warning,
    })
}

/// Natural logarithm of every value, in record order.
pub fn log_transform(records: &[SeriesRecord]) -> Result<Path> {
    if let Some(r) = records.iter().find(|r| r.value <= 0.0) {
        return Err(Error::invalid(format!(
            "non-positive value {} on {}",
            r.value, r.date
        )));
    }
    Path::new(records.iter().map(|r| r.value.ln()).collect())
}

/// Write a `date,log_value` file with values printed to 17 significant digits.
pub fn write_log_series(path: &FsPath, dates: &[NaiveDate], values: &[f64]) -> Result<()> {
    if dates.len() != values.len() {
        return Err(Error::invalid("dates and values differ in length"));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["date", "log_value"])?;
    for (d, v) in dates.iter().zip(values) {
        w.write_record([d.to_string(), format!("{v:.16e}")])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Intraday log returns grouped by day, in date order.
pub type IntradayReturns = BTreeMap<NaiveDate, Vec<f64>>;

/// Load `date,time,log_return` rows. The time column only orders rows within
/// a day and is not otherwise interpreted.
pub fn load_intraday(path: &FsPath) -> Result<IntradayReturns> {
    let mut reader = open(path)?;
    let header: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.to_ascii_lowercase())
        .collect();
    if header != ["date", "time", "log_return"] {
        return Err(parse_err(
            path,
            1,
            format!("expected header date,time,log_return, got {}", header.join(",")),
        ));
    }
    let mut days = IntradayReturns::new();
    for result in reader.records() {
        let row = result?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != 3 {
            return Err(parse_err(path, line, format!("expected 3 fields, got {}", row.len())));
        }
        let date = parse_date(path, line, &row[0])?;
        let raw = &row[2];
        if raw.is_empty() {
            continue;
        }
        let r: f64 = raw
            .parse()
            .map_err(|e| parse_err(path, line, format!("bad return {raw:?}: {e}")))?;
        if !r.is_finite() {
            return Err(parse_err(path, line, "return is not finite"));
        }
        days.entry(date).or_default().push(r);
    }
    Ok(days)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealizedVolOutput {
    pub records: Vec<SeriesRecord>,
    pub dropped_days: Vec<NaiveDate>,
}

/// Daily realised volatility `sqrt(Σ r²)`. Days with fewer than `min_obs`
/// returns, or with zero realised volatility, are dropped.
pub fn realized_vol(days: &IntradayReturns, min_obs: usize) -> RealizedVolOutput {
    let mut records = Vec::with_capacity(days.len());
    let mut dropped_days = Vec::new();
    for (&date, returns) in days {
        if returns.len() < min_obs.max(1) {
            log::info!("{date}: {} intraday returns, below {min_obs}; dropped", returns.len());
            dropped_days.push(date);
            continue;
        }
        let rv = returns.iter().map(|r| r * r).sum::<f64>().sqrt();
        if rv > 0.0 {
            records.push(SeriesRecord { date, value: rv });
        } else {
            log::info!("{date}: zero realised volatility; dropped");
            dropped_days.push(date);
        }
    }
    RealizedVolOutput {
        records,
        dropped_days,
    }
}
