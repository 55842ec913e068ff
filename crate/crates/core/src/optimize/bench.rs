use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{minimize, Method, OptimizerConfig};
use crate::decorrelate::{permute, PermutationPlan};
use crate::error::{Error, Result};
use crate::ks::{DiameterObjective, RescaledPair};
use crate::rng::derive_seed;
use crate::synthesis::{increments, simulate_fbm, FgnSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    /// fBm path length N.
    pub length: usize,
    pub a_max: usize,
    /// Subsequence length T of both permuted samples.
    pub subseq: usize,
    pub methods: Vec<OptimizerConfig>,
    pub master_seed: u64,
}

impl BenchConfig {
    /// N = 2¹², ā = 50, T = 500 with every implemented method at defaults.
    pub fn standard(master_seed: u64) -> Self {
        BenchConfig {
            length: 1 << 12,
            a_max: 50,
            subseq: 500,
            methods: Method::ALL.iter().map(|&m| OptimizerConfig::new(m)).collect(),
            master_seed,
        }
    }
}

/// One CSV row: `method, h_true, rep, h_hat, delta_min, evaluations, wall_time_s`.
/// Failed cells keep the row with `error` set and NaN numerics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: Method,
    pub h_true: f64,
    pub rep: usize,
    pub h_hat: f64,
    pub delta_min: f64,
    pub evaluations: usize,
    pub wall_time_s: f64,
    pub error: Option<String>,
}

fn frozen_objective(h_true: f64, cell_seed: u64, cfg: &BenchConfig) -> Result<DiameterObjective> {
    let path = simulate_fbm(&FgnSpec::new(h_true, cfg.length, derive_seed(cell_seed, &[0])))?;
    let plan = PermutationPlan::uniform(cfg.subseq, 0);
    let lag1 = permute(&increments(&path, 1)?, &plan.with_seed(derive_seed(cell_seed, &[1])))?;
    let lag_a = permute(
        &increments(&path, cfg.a_max)?,
        &plan.with_seed(derive_seed(cell_seed, &[2])),
    )?;
    DiameterObjective::new(&RescaledPair::new(lag1, lag_a)?)
}

/// Simulate, freeze and minimise with every configured method, for each
/// `H₀` and replication. Cells run in parallel; each owns RNG streams derived
/// from `(master seed, H₀ index, rep)` and, for annealing, the method index.
/// Rows come back sorted by `(h_true, method, rep)`.
pub fn bench_optimizers(h_values: &[f64], reps: usize, cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if reps == 0 {
        return Err(Error::invalid("bench needs at least one replication"));
    }
    if cfg.methods.is_empty() {
        return Err(Error::invalid("bench needs at least one method"));
    }
    for m in &cfg.methods {
        m.validate()?;
    }
    let cells: Vec<(usize, usize)> = (0..h_values.len())
        .flat_map(|hi| (0..reps).map(move |rep| (hi, rep)))
        .collect();
    let mut rows: Vec<BenchRow> = cells
        .par_iter()
        .flat_map_iter(|&(hi, rep)| {
            let h_true = h_values[hi];
            let cell_seed = derive_seed(cfg.master_seed, &[hi as u64, rep as u64]);
            let objective = frozen_objective(h_true, cell_seed, cfg);
            cfg.methods
                .iter()
                .enumerate()
                .map(|(mi, method_cfg)| {
                    let method_cfg =
                        method_cfg.with_seed(derive_seed(cell_seed, &[100 + mi as u64]));
                    let outcome = objective
                        .as_ref()
                        .map_err(|e| e.to_string())
                        .and_then(|obj| {
                            minimize(|h| Ok(obj.eval(h)), &method_cfg).map_err(|e| e.to_string())
                        });
                    match outcome {
                        Ok(r) => BenchRow {
                            method: r.method,
                            h_true,
                            rep,
                            h_hat: r.h_hat,
                            delta_min: r.delta_min,
                            evaluations: r.evaluations,
                            wall_time_s: r.wall_time_s,
                            error: None,
                        },
                        Err(msg) => BenchRow {
                            method: method_cfg.method,
                            h_true,
                            rep,
                            h_hat: f64::NAN,
                            delta_min: f64::NAN,
                            evaluations: 0,
                            wall_time_s: 0.0,
                            error: Some(msg),
                        },
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    rows.sort_by(|a, b| {
        a.h_true
            .total_cmp(&b.h_true)
            .then(a.method.cmp(&b.method))
            .then(a.rep.cmp(&b.rep))
    });
    Ok(rows)
}

pub fn write_bench_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "method",
        "h_true",
        "rep",
        "h_hat",
        "delta_min",
        "evaluations",
        "wall_time_s",
    ])?;
    for r in rows {
        w.write_record([
            r.method.name().to_string(),
            r.h_true.to_string(),
            r.rep.to_string(),
            r.h_hat.to_string(),
            r.delta_min.to_string(),
            r.evaluations.to_string(),
            format!("{:.6}", r.wall_time_s),
        ])?;
    }
    w.flush().map_err(|e| Error::io("bench csv", e))?;
    Ok(())
}
