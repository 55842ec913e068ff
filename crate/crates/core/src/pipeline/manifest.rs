//! Flat key/value run manifest (TOML syntax).
//!
//! ```toml
//! inputs = ["vix.csv", "rv5.csv"]
//! output_dir = "out"
//! seed = 42
//! window_length = 1512
//! a_max = 21
//! optimizer = "brent"
//! perm_scheme = "uniform"
//! ```

use std::path::{Path as FsPath, PathBuf};

use serde::{Deserialize, Serialize};

use crate::decorrelate::PermutationPlan;
use crate::error::{Error, Result};
use crate::optimize::{Method, OptimizerConfig};
use crate::pipeline::window::WindowConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PermScheme {
    #[default]
    Uniform,
    Block,
}

impl std::str::FromStr for PermScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" | "uniform_sample" => Ok(PermScheme::Uniform),
            "block" => Ok(PermScheme::Block),
            other => Err(Error::invalid(format!("unknown permutation scheme {other:?}"))),
        }
    }
}

pub const DEFAULT_BLOCK_LENGTH: usize = 128;
pub const DEFAULT_RV_MIN_OBS: usize = 30;

/// Everything a windowed run needs besides the data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub window: WindowConfig,
    pub optimizer: OptimizerConfig,
    pub perm_scheme: PermScheme,
    pub block_length: usize,
    pub seed: u64,
}

impl AnalysisConfig {
    pub fn new(window: WindowConfig, optimizer: OptimizerConfig, seed: u64) -> Self {
        AnalysisConfig {
            window,
            optimizer,
            perm_scheme: PermScheme::Uniform,
            block_length: DEFAULT_BLOCK_LENGTH,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.window.validate()?;
        self.optimizer.validate()?;
        if self.perm_scheme == PermScheme::Block && self.block_length == 0 {
            return Err(Error::invalid("block_length must be positive"));
        }
        Ok(())
    }

    /// Permutation plan for one window.
    pub fn plan(&self, seed: u64) -> PermutationPlan {
        match self.perm_scheme {
            PermScheme::Uniform => PermutationPlan::uniform(self.window.subseq_len(), seed),
            PermScheme::Block => PermutationPlan::block(self.block_length, seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub inputs: Vec<PathBuf>,
    pub output_dir: PathBuf,
    pub config: AnalysisConfig,
    /// Minimum intraday returns per day for realised volatility inputs.
    pub rv_min_obs: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    #[serde(default)]
    inputs: Vec<PathBuf>,
    input: Option<PathBuf>,
    output_dir: Option<PathBuf>,
    #[serde(default)]
    seed: u64,
    window_length: Option<usize>,
    a_max: Option<usize>,
    subseq: Option<usize>,
    alpha: Option<f64>,
    optimizer: Option<String>,
    grid_step: Option<f64>,
    tolerance: Option<f64>,
    max_evals: Option<usize>,
    perm_scheme: Option<String>,
    block_length: Option<usize>,
    rv_min_obs: Option<usize>,
}

impl RunManifest {
    /// Parse manifest text. Relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &FsPath, origin: &FsPath) -> Result<Self> {
        let bad = |msg: String| Error::Manifest {
            path: origin.to_path_buf(),
            msg,
        };
        let raw: RawManifest = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        let mut inputs = raw.inputs;
        inputs.extend(raw.input);
        if inputs.is_empty() {
            return Err(bad("no inputs given".into()));
        }
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
        let defaults = WindowConfig::default();
        let window = WindowConfig {
            window_length: raw.window_length.unwrap_or(defaults.window_length),
            a_max: raw.a_max.unwrap_or(defaults.a_max),
            subseq: raw.subseq,
            alpha: raw.alpha.unwrap_or(defaults.alpha),
        };
        let method: Method = raw
            .optimizer
            .as_deref()
            .unwrap_or("brent")
            .parse()
            .map_err(|e: Error| bad(e.to_string()))?;
        let mut optimizer = OptimizerConfig::new(method).with_seed(raw.seed);
        if let Some(step) = raw.grid_step {
            optimizer = optimizer.with_grid_step(step);
        }
        if let Some(tol) = raw.tolerance {
            optimizer.tolerance = tol;
        }
        if let Some(n) = raw.max_evals {
            optimizer.max_evals = n;
        }
        let perm_scheme = match raw.perm_scheme {
            Some(s) => s.parse().map_err(|e: Error| bad(e.to_string()))?,
            None => PermScheme::Uniform,
        };
        let config = AnalysisConfig {
            window,
            optimizer,
            perm_scheme,
            block_length: raw.block_length.unwrap_or(DEFAULT_BLOCK_LENGTH),
            seed: raw.seed,
        };
        config.validate().map_err(|e| bad(e.to_string()))?;
        Ok(RunManifest {
            inputs: inputs.into_iter().map(resolve).collect(),
            output_dir: resolve(raw.output_dir.unwrap_or_else(|| PathBuf::from("out"))),
            config,
            rv_min_obs: raw.rv_min_obs.unwrap_or(DEFAULT_RV_MIN_OBS),
        })
    }

    pub fn from_file(path: &FsPath) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| FsPath::new(""));
        Self::parse(&text, base, path)
    }
}
