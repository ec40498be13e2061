//! Optimizer benchmark: seeded runs per (optimizer, profile, mode) cell.
//!
//! Initial points depend only on the run index, so every cell starts run `r`
//! from the same draw and the two modes stay paired. Everything else a run
//! consumes (noisy evaluations, the annealer's stream, the final
//! re-evaluation) comes from a per-run seed derived from the cell's name, so a
//! cell's results do not depend on which other cells are configured.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::noise::{NamedProfile, ProfileSpec};
use crate::optim::{Objective, OptimizerSpec, Termination};
use crate::qaoa::{canonical_bounds, ParamMask, QaoaParams, QaoaProblem};
use crate::rng::{derive_seed, derive_seed_path, RngStream};

pub const DEFAULT_RUNS: usize = 10;

pub const SUMMARY_HEADER: &str = "optimizer,profile,mode,mean,ci95_lo,ci95_hi,mean_nfev,best_value,worst_value";

// stream tags below a run seed
const TAG_X0: u64 = 0;
const TAG_EVAL: u64 = 1;
const TAG_OPTIMIZER: u64 = 2;
const TAG_FINAL: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Optimize every parameter.
    Standard,
    /// Hold the γ angles at their initial draw and optimize the β angles.
    Filtered,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Standard => "standard",
            Mode::Filtered => "filtered",
        }
    }

    pub fn both() -> Vec<Mode> {
        vec![Mode::Standard, Mode::Filtered]
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub problem: QaoaProblem,
    pub optimizers: Vec<OptimizerSpec>,
    pub profiles: Vec<NamedProfile>,
    pub modes: Vec<Mode>,
    pub runs_per_cell: usize,
    pub base_seed: u64,
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs_per_cell < 2 {
            return Err(Error::config(format!(
                "runs_per_cell must be >= 2 for a confidence interval, got {}",
                self.runs_per_cell
            )));
        }
        for spec in &self.optimizers {
            spec.validate()?;
        }
        if let Some(name) = first_duplicate(self.optimizers.iter().map(|o| o.name())) {
            return Err(Error::config(format!("optimizer `{name}` listed twice")));
        }
        if let Some(name) = first_duplicate(self.profiles.iter().map(|p| p.name.as_str())) {
            return Err(Error::config(format!("profile `{name}` listed twice")));
        }
        if let Some(mode) = first_duplicate(self.modes.iter().map(|m| m.name())) {
            return Err(Error::config(format!("mode `{mode}` listed twice")));
        }
        Ok(())
    }

    /// Cells in report order: optimizer, then profile, then mode, each in
    /// configuration order.
    fn cells(&self) -> Vec<(usize, usize, Mode)> {
        let mut cells = Vec::new();
        for o in 0..self.optimizers.len() {
            for p in 0..self.profiles.len() {
                for &m in &self.modes {
                    cells.push((o, p, m));
                }
            }
        }
        cells
    }
}

fn first_duplicate<'a>(names: impl Iterator<Item = &'a str>) -> Option<&'a str> {
    let mut seen = std::collections::BTreeSet::new();
    names.into_iter().find(|n| !seen.insert(*n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub x0: Vec<f64>,
    /// Full parameter vector, fixed entries included.
    pub best_x: Vec<f64>,
    /// Fresh evaluation of `best_x` under the cell's profile.
    pub best_value: f64,
    /// The optimizer's own record of its best evaluation.
    pub optimizer_value: f64,
    pub nfev: usize,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub optimizer: String,
    pub profile: String,
    pub mode: Mode,
    pub runs: Vec<RunRecord>,
    pub mean: f64,
    pub ci95_lo: f64,
    pub ci95_hi: f64,
    pub mean_nfev: f64,
    pub best_value: f64,
    pub worst_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub base_seed: u64,
    pub runs_per_cell: usize,
    pub optimizers: Vec<OptimizerSpec>,
    pub profiles: Vec<ProfileSpec>,
    pub cells: Vec<CellRecord>,
}

/// Student-t 95% interval `mean ± t₀.₉₇₅,N−1 · s/√N`.
pub fn ci95(samples: &[f64]) -> Result<(f64, f64)> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::usage(format!(
            "a confidence interval needs >= 2 samples, got {n}"
        )));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .map_err(|e| Error::Internal(e.to_string()))?
        .inverse_cdf(0.975);
    let half = t * var.sqrt() / (n as f64).sqrt();
    Ok((mean - half, mean + half))
}

/// Stable 64-bit FNV-1a hash; keys a cell's seeds by its names.
fn fnv1a(text: &str) -> u64 {
    text.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn cell_key(optimizer: &str, profile: &str, mode: Mode) -> u64 {
    fnv1a(&format!("{optimizer}/{profile}/{}", mode.name()))
}

/// Initial point of run `r`, uniform over the canonical box.
pub fn initial_point(base_seed: u64, p: usize, r: usize) -> Vec<f64> {
    let mut rng = RngStream::new(derive_seed_path(base_seed, &[TAG_X0, r as u64]));
    canonical_bounds(p)
        .iter()
        .map(|&(lo, hi)| rng.uniform_in(lo, hi))
        .collect()
}

fn run_one(
    problem: &QaoaProblem,
    spec: &OptimizerSpec,
    profile: &NamedProfile,
    mode: Mode,
    base_seed: u64,
    r: usize,
) -> Result<RunRecord> {
    let p = problem.geometry().p();
    let x0 = initial_point(base_seed, p, r);
    let seed = derive_seed_path(base_seed, &[cell_key(spec.name(), &profile.name, mode), r as u64]);
    let mask = match mode {
        Mode::Standard => ParamMask::none(2 * p),
        Mode::Filtered => ParamMask::fix_gammas(&x0[..p]),
    };
    let evaluate = |theta: &[f64], rng: &mut RngStream| -> Result<f64> {
        let params = QaoaParams::from_flat(theta)?;
        Ok(problem.evaluate(&params, &profile.profile, rng)?.value)
    };
    let eval_root = RngStream::new(derive_seed(seed, TAG_EVAL));
    let mut calls = 0u64;
    let mut obj = Objective::new(mask.restrict_bounds(&canonical_bounds(p)), |free: &[f64]| {
        let mut rng = eval_root.child(calls);
        calls += 1;
        evaluate(&mask.expand(free)?, &mut rng)
    })?;
    let result = spec.run(&mut obj, &mask.restrict(&x0), derive_seed(seed, TAG_OPTIMIZER))?;
    drop(obj);
    let best_x = mask.expand(&result.best_x)?;
    let best_value = evaluate(&best_x, &mut RngStream::new(derive_seed(seed, TAG_FINAL)))?;
    Ok(RunRecord {
        run: r,
        seed,
        x0,
        best_x,
        best_value,
        optimizer_value: result.best_value,
        nfev: result.nfev,
        termination: result.termination,
    })
}

fn summarize(optimizer: &str, profile: &str, mode: Mode, runs: Vec<RunRecord>) -> Result<CellRecord> {
    let values: Vec<f64> = runs.iter().map(|r| r.best_value).collect();
    let (ci95_lo, ci95_hi) = ci95(&values)?;
    let n = values.len() as f64;
    Ok(CellRecord {
        optimizer: optimizer.to_string(),
        profile: profile.to_string(),
        mode,
        mean: values.iter().sum::<f64>() / n,
        ci95_lo,
        ci95_hi,
        mean_nfev: runs.iter().map(|r| r.nfev as f64).sum::<f64>() / n,
        best_value: values.iter().copied().fold(f64::INFINITY, f64::min),
        worst_value: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        runs,
    })
}

/// All runs of one cell. `optimizer` and `profile` must be part of `config`.
pub fn run_cell(
    config: &BenchConfig,
    optimizer: &OptimizerSpec,
    profile: &NamedProfile,
    mode: Mode,
) -> Result<CellRecord> {
    config.validate()?;
    if !config.optimizers.contains(optimizer) {
        return Err(Error::config(format!(
            "optimizer `{}` is not part of the configuration",
            optimizer.name()
        )));
    }
    if !config.profiles.contains(profile) {
        return Err(Error::config(format!(
            "profile `{}` is not part of the configuration",
            profile.name
        )));
    }
    let runs = (0..config.runs_per_cell)
        .into_par_iter()
        .map(|r| run_one(&config.problem, optimizer, profile, mode, config.base_seed, r))
        .collect::<Result<Vec<_>>>()?;
    summarize(optimizer.name(), &profile.name, mode, runs)
}

/// Every cell of the configuration; runs of all cells share one task pool.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    let cells = config.cells();
    let tasks: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..config.runs_per_cell).map(move |r| (c, r)))
        .collect();
    let mut records = tasks
        .into_par_iter()
        .map(|(c, r)| {
            let (o, p, mode) = cells[c];
            run_one(
                &config.problem,
                &config.optimizers[o],
                &config.profiles[p],
                mode,
                config.base_seed,
                r,
            )
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter();
    let cells = cells
        .iter()
        .map(|&(o, p, mode)| {
            let runs = records.by_ref().take(config.runs_per_cell).collect();
            summarize(config.optimizers[o].name(), &config.profiles[p].name, mode, runs)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchReport {
        base_seed: config.base_seed,
        runs_per_cell: config.runs_per_cell,
        optimizers: config.optimizers.clone(),
        profiles: config.profiles.iter().map(ProfileSpec::from_named).collect(),
        cells,
    })
}

impl BenchReport {
    pub fn summary_csv(&self) -> String {
        let mut out = format!("{SUMMARY_HEADER}\n");
        for c in &self.cells {
            writeln!(
                out,
                "{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                c.optimizer,
                c.profile,
                c.mode.name(),
                c.mean,
                c.ci95_lo,
                c.ci95_hi,
                c.mean_nfev,
                c.best_value,
                c.worst_value
            )
            .unwrap();
        }
        out
    }

    pub fn cell(&self, optimizer: &str, profile: &str, mode: Mode) -> Option<&CellRecord> {
        self.cells
            .iter()
            .find(|c| c.optimizer == optimizer && c.profile == profile && c.mode == mode)
    }
}

/// Write `report.json` and `summary.csv` into `dir`.
pub fn emit_report(report: &BenchReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let json = dir.join("report.json");
    let csv = dir.join("summary.csv");
    fs::write(&json, serde_json::to_string_pretty(report)? + "\n")?;
    fs::write(&csv, report.summary_csv())?;
    Ok(vec![json, csv])
}
