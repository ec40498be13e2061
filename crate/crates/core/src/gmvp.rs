//! Generalized mean-variance problem: instances, decoding and the exhaustive
//! classical oracle.
//!
//! Asset `t` owns qubits `t·l .. t·l + l`. Its weight is the Hamming weight of
//! that block divided by the excitation budget `m`, so a basis state is
//! feasible exactly when its total Hamming weight is `m`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sim::MAX_QUBITS;

/// Portfolio weights decoded from a feasible basis state.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(pub Vec<f64>);

impl WeightVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// On-disk instance layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    n: usize,
    l: usize,
    m: usize,
    seed: u64,
    sigma: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmvpInstance {
    n: usize,
    l: usize,
    m: usize,
    seed: u64,
    sigma: Vec<f64>,
    infeasible_cost: f64,
}

impl GmvpInstance {
    /// Validate and build an instance from a row-major `n·n` matrix.
    pub fn new(n: usize, l: usize, m: usize, seed: u64, sigma: Vec<f64>) -> Result<Self> {
        if n < 1 || l < 1 {
            return Err(Error::config("instance needs n >= 1 and l >= 1"));
        }
        if n * l > MAX_QUBITS {
            return Err(Error::config(format!(
                "n·l = {} exceeds the {MAX_QUBITS}-qubit limit",
                n * l
            )));
        }
        if m < 1 || m > n * l {
            return Err(Error::config(format!("budget m = {m} outside 1..={}", n * l)));
        }
        if sigma.len() != n * n {
            return Err(Error::config(format!(
                "sigma has {} entries, expected {}",
                sigma.len(),
                n * n
            )));
        }
        if sigma.iter().any(|x| !x.is_finite()) {
            return Err(Error::config("sigma contains non-finite entries"));
        }
        for i in 0..n {
            if sigma[i * n + i] <= 0.0 {
                return Err(Error::config(format!("sigma[{i}][{i}] must be positive")));
            }
            for j in 0..i {
                if (sigma[i * n + j] - sigma[j * n + i]).abs() > 1e-12 {
                    return Err(Error::config(format!("sigma is not symmetric at ({i}, {j})")));
                }
            }
        }
        let mut inst = Self {
            n,
            l,
            m,
            seed,
            sigma,
            infeasible_cost: 0.0,
        };
        let max_feasible = feasible_indices(n, l, m)
            .into_iter()
            .map(|idx| inst.feasible_cost(idx))
            .fold(f64::NEG_INFINITY, f64::max);
        inst.infeasible_cost = max_feasible + 1.0;
        Ok(inst)
    }

    /// Seeded random correlation matrix: the Gram matrix of a `2n × n`
    /// standard-normal sample, rescaled to unit diagonal.
    pub fn random_instance(seed: u64, n: usize, l: usize, m: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::config(format!("random instances need n >= 2, got {n}")));
        }
        let rows = 2 * n;
        let mut rng = RngStream::new(seed);
        let g: Vec<f64> = (0..rows * n).map(|_| rng.standard_normal()).collect();
        let mut cov = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let s: f64 = (0..rows).map(|r| g[r * n + i] * g[r * n + j]).sum::<f64>() / rows as f64;
                cov[i * n + j] = s;
                cov[j * n + i] = s;
            }
        }
        let d: Vec<f64> = (0..n).map(|i| cov[i * n + i].sqrt()).collect();
        let mut sigma = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                sigma[i * n + j] = if i == j { 1.0 } else { cov[i * n + j] / (d[i] * d[j]) };
            }
        }
        Self::new(n, l, m, seed, sigma)
    }

    /// The shipped reference instance: seed 42, four assets, three qubits each, budget 3.
    pub fn default_instance() -> Self {
        Self::random_instance(42, 4, 3, 3).expect("default instance parameters are valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: InstanceFile = serde_json::from_str(text)?;
        Self::new(f.n, f.l, f.m, f.seed, f.sigma)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let f = InstanceFile {
            n: self.n,
            l: self.l,
            m: self.m,
            seed: self.seed,
            sigma: self.sigma.clone(),
        };
        let mut s = serde_json::to_string_pretty(&f).expect("instance serializes");
        s.push('\n');
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn num_qubits(&self) -> usize {
        self.n * self.l
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn sigma_at(&self, i: usize, j: usize) -> f64 {
        self.sigma[i * self.n + j]
    }

    /// Cost assigned to basis states that violate the budget.
    pub fn infeasible_cost(&self) -> f64 {
        self.infeasible_cost
    }

    /// `wᵀΣw`.
    pub fn quadratic_form(&self, w: &[f64]) -> f64 {
        let n = self.n;
        (0..n)
            .map(|i| w[i] * (0..n).map(|j| self.sigma[i * n + j] * w[j]).sum::<f64>())
            .sum()
    }

    fn feasible_cost(&self, index: usize) -> f64 {
        let w = decode(index, self.n, self.l, self.m).expect("feasible index");
        self.quadratic_form(w.as_slice())
    }

    pub fn cost_of_index(&self, index: usize) -> f64 {
        match decode(index, self.n, self.l, self.m) {
            Some(w) => self.quadratic_form(w.as_slice()),
            None => self.infeasible_cost,
        }
    }

    /// Cost of every basis index of the `n·l`-qubit register.
    pub fn cost_table(&self) -> Vec<f64> {
        (0..1usize << self.num_qubits())
            .map(|i| self.cost_of_index(i))
            .collect()
    }

    /// Exact minimizer over the feasible set; ties go to the lowest index.
    pub fn brute_force_optimum(&self) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for idx in feasible_indices(self.n, self.l, self.m) {
            let v = self.feasible_cost(idx);
            if v < best.1 {
                best = (idx, v);
            }
        }
        best
    }
}

/// Per-block Hamming weights of a basis index.
pub fn block_weights(index: usize, n: usize, l: usize) -> Vec<u32> {
    let mask = (1usize << l) - 1;
    (0..n).map(|t| ((index >> (t * l)) & mask).count_ones()).collect()
}

/// Decode a basis index into portfolio weights, or `None` if its total
/// Hamming weight differs from `m`.
pub fn decode(index: usize, n: usize, l: usize, m: usize) -> Option<WeightVector> {
    if m == 0 || (index >> (n * l)) != 0 || index.count_ones() as usize != m {
        return None;
    }
    let mf = m as f64;
    Some(WeightVector(
        block_weights(index, n, l).into_iter().map(|h| h as f64 / mf).collect(),
    ))
}

/// All basis indices of Hamming weight `m`, ascending.
pub fn feasible_indices(n: usize, l: usize, m: usize) -> Vec<usize> {
    let q = n * l;
    if m > q {
        return Vec::new();
    }
    (0..1usize << q).filter(|i| i.count_ones() as usize == m).collect()
}
