//! Data workflow: CSV ingestion, log-volatility, realised volatility,
//! windowing, per-window estimation and aggregate reports.

mod analysis;
mod io;
mod manifest;
mod window;

pub use analysis::{
    analyze, analyze_series, load_input, run_static_analysis, write_outputs, AggregateReport,
    AnalysisReport, SeriesData, SeriesReport, WindowEstimate, ZTestReport,
};
pub use io::{
    load_intraday, load_series, log_transform, read_header, realized_vol, write_log_series,
    IntradayReturns, LoadedSeries, RealizedVolOutput, SeriesRecord, ValueKind,
};
pub use manifest::{
    AnalysisConfig, PermScheme, RunManifest, DEFAULT_BLOCK_LENGTH, DEFAULT_RV_MIN_OBS,
};
pub use window::{window_partition, window_ranges, WindowConfig};
