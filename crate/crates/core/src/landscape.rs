//! Pairwise cost-landscape scans.
//!
//! A scan sweeps two parameters over their canonical ranges on a square
//! lattice while holding the others at a reference vector θ*. Every cell
//! evaluates under its own child stream `(seed, a, b)`, so noisy grids are
//! reproducible and independent of evaluation order.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::noise::{NamedProfile, ProfileSpec};
use crate::qaoa::{canonical_bounds, param_name, QaoaParams, QaoaProblem};
use crate::rng::RngStream;

pub const DEFAULT_RESOLUTION: usize = 50;

/// Number of filled level bands in the SVG rendering.
const SVG_BANDS: usize = 12;
const SVG_CELL: f64 = 8.0;

/// Cost values over a lattice of two parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeGrid {
    pub param_i: usize,
    pub param_j: usize,
    pub axis_i: Vec<f64>,
    pub axis_j: Vec<f64>,
    /// Row-major: `values[a * axis_j.len() + b]` is the cost at
    /// `(axis_i[a], axis_j[b])`.
    pub values: Vec<f64>,
    pub fixed_params: Vec<f64>,
    pub profile: String,
    pub seed: u64,
}

/// Location and value of the smallest grid entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridMinimum {
    pub index_i: usize,
    pub index_j: usize,
    pub value_i: f64,
    pub value_j: f64,
    pub cost: f64,
}

impl LandscapeGrid {
    pub fn resolution(&self) -> usize {
        self.axis_i.len()
    }

    pub fn at(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.axis_j.len() + b]
    }

    /// Mean absolute difference over all horizontally and vertically
    /// adjacent lattice pairs.
    pub fn roughness(&self) -> f64 {
        let (ni, nj) = (self.axis_i.len(), self.axis_j.len());
        let mut sum = 0.0;
        let mut count = 0usize;
        for a in 0..ni {
            for b in 0..nj {
                if a + 1 < ni {
                    sum += (self.at(a + 1, b) - self.at(a, b)).abs();
                    count += 1;
                }
                if b + 1 < nj {
                    sum += (self.at(a, b + 1) - self.at(a, b)).abs();
                    count += 1;
                }
            }
        }
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    }

    /// First smallest entry in row-major order.
    pub fn argmin(&self) -> GridMinimum {
        let (k, &cost) = self
            .values
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.total_cmp(y.1))
            .expect("grid is non-empty");
        let (a, b) = (k / self.axis_j.len(), k % self.axis_j.len());
        GridMinimum {
            index_i: a,
            index_j: b,
            value_i: self.axis_i[a],
            value_j: self.axis_j[b],
            cost,
        }
    }

    /// Sample variance of the values along the `j` axis for each fixed row.
    pub fn row_variances(&self) -> Vec<f64> {
        let nj = self.axis_j.len();
        self.values
            .chunks(nj)
            .map(|row| {
                let mean = row.iter().sum::<f64>() / nj as f64;
                row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nj as f64 - 1.0)
            })
            .collect()
    }

    pub fn name_i(&self) -> String {
        param_name(self.param_i, self.fixed_params.len() / 2)
    }

    pub fn name_j(&self) -> String {
        param_name(self.param_j, self.fixed_params.len() / 2)
    }

    /// `landscape_<pi>_<pj>_<profile>` without extension.
    pub fn file_stem(&self) -> String {
        format!("landscape_{}_{}_{}", self.name_i(), self.name_j(), self.profile)
    }

    /// One row per cell, `a` outer and `b` inner.
    pub fn to_csv(&self) -> String {
        let (ni, nj) = (self.name_i(), self.name_j());
        let mut out = String::from("param_i,param_j,value_i,value_j,cost\n");
        for (a, &vi) in self.axis_i.iter().enumerate() {
            for (b, &vj) in self.axis_j.iter().enumerate() {
                writeln!(out, "{ni},{nj},{vi:.16e},{vj:.16e},{:.16e}", self.at(a, b)).unwrap();
            }
        }
        out
    }

    /// Filled level bands: each band is one path made of the cells whose
    /// value falls in it, shaded from dark (low cost) to light.
    pub fn to_svg(&self) -> String {
        let (ni, nj) = (self.axis_i.len(), self.axis_j.len());
        let lo = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = if hi > lo { hi - lo } else { 1.0 };
        let band_of = |v: f64| (((v - lo) / span * SVG_BANDS as f64) as usize).min(SVG_BANDS - 1);
        let mut paths = vec![String::new(); SVG_BANDS];
        // parameter j runs along x, parameter i along y (upwards)
        for a in 0..ni {
            for b in 0..nj {
                let x = b as f64 * SVG_CELL;
                let y = (ni - 1 - a) as f64 * SVG_CELL;
                write!(
                    paths[band_of(self.at(a, b))],
                    "M{x} {y}h{SVG_CELL}v{SVG_CELL}h-{SVG_CELL}z"
                )
                .unwrap();
            }
        }
        let (w, h) = (nj as f64 * SVG_CELL, ni as f64 * SVG_CELL);
        let mut out = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{}\" viewBox=\"0 0 {w} {}\">\n",
            h + 24.0,
            h + 24.0
        );
        for (k, d) in paths.iter().enumerate().filter(|(_, d)| !d.is_empty()) {
            let shade = 40 + (k * 200) / (SVG_BANDS - 1);
            let band_lo = lo + span * k as f64 / SVG_BANDS as f64;
            writeln!(
                out,
                "<path fill=\"rgb({shade},{shade},255)\" data-band-min=\"{band_lo:.6e}\" d=\"{d}\"/>"
            )
            .unwrap();
        }
        writeln!(
            out,
            "<text x=\"2\" y=\"{}\" font-size=\"11\" font-family=\"monospace\">{} (x) vs {} (y), {}: [{lo:.4}, {hi:.4}]</text>",
            h + 16.0,
            self.name_j(),
            self.name_i(),
            self.profile
        )
        .unwrap();
        out.push_str("</svg>\n");
        out
    }
}

/// Evenly spaced points covering `[lo, hi]` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|k| if k + 1 == n { hi } else { lo + step * k as f64 })
        .collect()
}

/// Scan parameters `pair = (i, j)` on a `resolution × resolution` lattice,
/// holding the rest at `theta_star`.
pub fn scan_pair(
    problem: &QaoaProblem,
    pair: (usize, usize),
    resolution: usize,
    theta_star: &[f64],
    profile: &NamedProfile,
    seed: u64,
) -> Result<LandscapeGrid> {
    let (i, j) = pair;
    let dim = problem.geometry().num_params();
    if theta_star.len() != dim {
        return Err(Error::usage(format!(
            "reference vector has {} entries, circuit has {dim} parameters",
            theta_star.len()
        )));
    }
    if i == j || i >= dim || j >= dim {
        return Err(Error::usage(format!(
            "invalid parameter pair ({i}, {j}) for {dim} parameters"
        )));
    }
    if resolution < 2 {
        return Err(Error::usage(format!("resolution must be >= 2, got {resolution}")));
    }
    let bounds = canonical_bounds(problem.geometry().p());
    let axis_i = linspace(bounds[i].0, bounds[i].1, resolution);
    let axis_j = linspace(bounds[j].0, bounds[j].1, resolution);
    let root = RngStream::new(seed);
    let values = (0..resolution * resolution)
        .into_par_iter()
        .map(|k| {
            let (a, b) = (k / resolution, k % resolution);
            let mut theta = theta_star.to_vec();
            theta[i] = axis_i[a];
            theta[j] = axis_j[b];
            let mut rng = root.child_path(&[a as u64, b as u64]);
            let params = QaoaParams::from_flat(&theta)?;
            Ok(problem.evaluate(&params, &profile.profile, &mut rng)?.value)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(LandscapeGrid {
        param_i: i,
        param_j: j,
        axis_i,
        axis_j,
        values,
        fixed_params: theta_star.to_vec(),
        profile: profile.name.clone(),
        seed,
    })
}

/// The six pairs of a two-layer circuit as flat indices, in the order
/// β₁β₂, β₁γ₁, β₁γ₂, β₂γ₁, β₂γ₂, γ₁γ₂.
pub const PAIRS_P2: [(usize, usize); 6] = [(2, 3), (2, 0), (2, 1), (3, 0), (3, 1), (0, 1)];

/// All six pairwise grids of a two-layer circuit.
pub fn scan_all_pairs(
    problem: &QaoaProblem,
    resolution: usize,
    theta_star: &[f64],
    profile: &NamedProfile,
    seed: u64,
) -> Result<Vec<LandscapeGrid>> {
    if problem.geometry().p() != 2 {
        return Err(Error::config(format!(
            "pairwise scans need p = 2, circuit has p = {}",
            problem.geometry().p()
        )));
    }
    PAIRS_P2
        .iter()
        .map(|&pair| scan_pair(problem, pair, resolution, theta_star, profile, seed))
        .collect()
}

#[derive(Serialize)]
struct Sidecar<'a> {
    param_i: String,
    param_j: String,
    index_i: usize,
    index_j: usize,
    resolution: usize,
    seed: u64,
    profile: ProfileSpec,
    fixed_params: &'a [f64],
    roughness: f64,
    minimum: GridMinimum,
}

/// Write `<stem>.csv`, `<stem>.json` and, if asked, `<stem>.svg` into `dir`.
/// Returns the paths written.
pub fn write_grid(grid: &LandscapeGrid, profile: &NamedProfile, dir: &Path, svg: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let stem = grid.file_stem();
    let sidecar = Sidecar {
        param_i: grid.name_i(),
        param_j: grid.name_j(),
        index_i: grid.param_i,
        index_j: grid.param_j,
        resolution: grid.resolution(),
        seed: grid.seed,
        profile: ProfileSpec::from_named(profile),
        fixed_params: &grid.fixed_params,
        roughness: grid.roughness(),
        minimum: grid.argmin(),
    };
    let mut written = vec![dir.join(format!("{stem}.csv")), dir.join(format!("{stem}.json"))];
    fs::write(&written[0], grid.to_csv())?;
    fs::write(&written[1], serde_json::to_string_pretty(&sidecar)? + "\n")?;
    if svg {
        let path = dir.join(format!("{stem}.svg"));
        fs::write(&path, grid.to_svg())?;
        written.push(path);
    }
    Ok(written)
}
