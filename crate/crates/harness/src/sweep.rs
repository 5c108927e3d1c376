//! Parameter grids: every cell of the product of the sweep axes is run for
//! every seed, replicas in parallel, then reduced to per-cell mean and
//! spread.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::Result;
use rayon::prelude::*;
use toml::Value;

use crate::config::Scenario;
use crate::output::Summary;
use crate::scenarios;

/// One cell's outcome for one seed.
#[derive(Debug, Clone)]
pub struct Replica {
    pub cell: usize,
    pub seed: u64,
    pub result: std::result::Result<Summary, String>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub axes: Vec<String>,
    pub cells: Vec<Vec<(String, Value)>>,
    pub replicas: Vec<Replica>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellStat {
    pub cell: usize,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
    pub failed: usize,
}

pub fn cell_dir(out: &Path, cell: usize, seed: u64) -> PathBuf {
    out.join(format!("cell_{cell:03}")).join(format!("seed_{seed}"))
}

/// Run the whole grid under `out`. Failed replicas are recorded, not
/// fatal; an empty grid is.
pub fn run_sweep(sc: &Scenario, out: &Path) -> Result<SweepResult> {
    let cells = sc.grid()?;
    let jobs: Vec<(usize, u64)> = (0..cells.len()).flat_map(|c| sc.seeds.iter().map(move |&s| (c, s))).collect();
    let mut replicas: Vec<Replica> = jobs
        .par_iter()
        .map(|&(cell, seed)| {
            let result = (|| -> Result<Summary> {
                let mut local = sc.clone();
                local.sweep.clear();
                for (k, v) in &cells[cell] {
                    local.params.set(k, v.clone())?;
                }
                scenarios::run(&local, seed, &cell_dir(out, cell, seed))
            })()
            .map_err(|e| format!("{e:#}"));
            Replica { cell, seed, result }
        })
        .collect();
    replicas.sort_by_key(|r| (r.cell, r.seed));
    let res = SweepResult { axes: sc.sweep.iter().map(|(k, _)| k.clone()).collect(), cells, replicas };
    std::fs::write(out.join("aggregate.csv"), aggregate_csv(&res))?;
    std::fs::write(out.join("failures.csv"), failures_csv(&res))?;
    crate::plot::plot_sweep(&res, out)?;
    Ok(res)
}

impl SweepResult {
    pub fn metrics(&self) -> Vec<String> {
        let mut keys = BTreeSet::new();
        for r in &self.replicas {
            if let Ok(s) = &r.result {
                keys.extend(s.values.keys().filter(|k| k.as_str() != "seed").cloned());
            }
        }
        keys.into_iter().collect()
    }

    /// Mean and sample standard deviation of every metric in every cell,
    /// ignoring non-finite values.
    pub fn stats(&self) -> Vec<CellStat> {
        let metrics = self.metrics();
        let mut out = Vec::new();
        for cell in 0..self.cells.len() {
            let reps: Vec<&Replica> = self.replicas.iter().filter(|r| r.cell == cell).collect();
            let failed = reps.iter().filter(|r| r.result.is_err()).count();
            for m in &metrics {
                let xs: Vec<f64> = reps
                    .iter()
                    .filter_map(|r| r.result.as_ref().ok().and_then(|s| s.get(m)))
                    .filter(|x| x.is_finite())
                    .collect();
                let (mean, std) = mean_std(&xs);
                out.push(CellStat { cell, metric: m.clone(), mean, std, n: xs.len(), failed });
            }
        }
        out
    }

    pub fn stat(&self, cell: usize, metric: &str) -> Option<CellStat> {
        self.stats().into_iter().find(|s| s.cell == cell && s.metric == metric)
    }
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let std = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

fn value_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn aggregate_csv(res: &SweepResult) -> String {
    let mut out = String::from("cell");
    for a in &res.axes {
        out.push(',');
        out.push_str(a);
    }
    out.push_str(",metric,mean,std,n,failed\n");
    for s in res.stats() {
        out.push_str(&s.cell.to_string());
        for (_, v) in &res.cells[s.cell] {
            out.push(',');
            out.push_str(&value_text(v));
        }
        out.push_str(&format!(",{},{},{},{},{}\n", s.metric, s.mean, s.std, s.n, s.failed));
    }
    out
}

fn failures_csv(res: &SweepResult) -> String {
    let mut out = String::from("cell,seed,error\n");
    for r in &res.replicas {
        if let Err(e) = &r.result {
            out.push_str(&format!("{},{},\"{}\"\n", r.cell, r.seed, e.replace('"', "'").replace('\n', " ")));
        }
    }
    out
}
