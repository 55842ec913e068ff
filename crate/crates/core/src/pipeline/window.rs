//! Non-overlapping windows anchored at the first observation.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::synthesis::Path;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowConfig {
    /// Observations per window (ν).
    pub window_length: usize,
    /// Largest lag (ā).
    pub a_max: usize,
    /// Sample size per increment set (T); defaults to ν − ā.
    pub subseq: Option<usize>,
    pub alpha: f64,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            window_length: 1512,
            a_max: 21,
            subseq: None,
            alpha: 0.05,
        }
    }
}

impl WindowConfig {
    pub fn subseq_len(&self) -> usize {
        self.subseq
            .unwrap_or(self.window_length.saturating_sub(self.a_max))
    }

    pub fn validate(&self) -> Result<()> {
        if self.a_max < 2 || self.a_max >= self.window_length {
            return Err(Error::invalid(format!(
                "a_max must lie in 2..{}, got {}",
                self.window_length, self.a_max
            )));
        }
        let t = self.subseq_len();
        if t < 2 || t > self.window_length - self.a_max {
            return Err(Error::invalid(format!(
                "subseq must lie in 2..={}, got {t}",
                self.window_length - self.a_max
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Index ranges of the full windows and the size of the discarded tail.
pub fn window_ranges(len: usize, window_length: usize) -> Result<(Vec<Range<usize>>, usize)> {
    if window_length == 0 {
        return Err(Error::invalid("window_length must be positive"));
    }
    if len < window_length {
        return Err(Error::invalid(format!(
            "series has {len} observations, fewer than one window of {window_length}"
        )));
    }
    let count = len / window_length;
    let ranges = (0..count)
        .map(|k| k * window_length..(k + 1) * window_length)
        .collect();
    Ok((ranges, len % window_length))
}

pub fn window_partition(path: &Path, config: &WindowConfig) -> Result<Vec<Path>> {
    let (ranges, remainder) = window_ranges(path.len(), config.window_length)?;
    if remainder > 0 {
        log::info!("discarding the last {remainder} observations");
    }
    ranges
        .into_iter()
        .map(|r| Path::new(path.values()[r].to_vec()))
        .collect()
}
