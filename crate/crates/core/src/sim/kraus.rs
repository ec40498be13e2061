use num_complex::Complex64;

use super::matrix::{CMatrix, ZERO};
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Single-qubit channel given by Kraus operators (row-major 2x2).
///
/// Operator 0 is expected to be the "no-jump" branch; trajectory sampling is
/// correct for any order but shares more work when branch 0 dominates.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    operators: Vec<[Complex64; 4]>,
    duration: f64,
}

impl KrausSet {
    pub fn new(operators: Vec<[Complex64; 4]>, duration: f64) -> Result<Self> {
        if operators.is_empty() {
            return Err(Error::config("a Kraus set needs at least one operator"));
        }
        let set = Self { operators, duration };
        let err = set.completeness_error();
        if err >= 1e-12 {
            return Err(Error::config(format!(
                "Kraus operators are not complete (max |ΣK†K − I| = {err:e})"
            )));
        }
        Ok(set)
    }

    pub fn identity(duration: f64) -> Self {
        let one = Complex64::new(1.0, 0.0);
        Self {
            operators: vec![[one, ZERO, ZERO, one]],
            duration,
        }
    }

    pub fn operators(&self) -> &[[Complex64; 4]] {
        &self.operators
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn completeness_error(&self) -> f64 {
        let mut sum = CMatrix::zeros(2);
        for k in &self.operators {
            let m = CMatrix::from_vec(2, k.to_vec()).expect("2x2");
            sum = sum.add(&m.adjoint().matmul(&m));
        }
        sum.max_abs_diff(&CMatrix::identity(2))
    }

    /// `‖K_i ψ‖²` for every operator, from the qubit's reduced density matrix.
    pub fn branch_probabilities(&self, state: &StateVector, qubit: usize) -> Vec<f64> {
        let (p0, p1, c01) = state.reduced_qubit(qubit);
        let rho = [Complex64::new(p0, 0.0), c01, c01.conj(), Complex64::new(p1, 0.0)];
        self.operators
            .iter()
            .map(|k| {
                // Tr(K ρ K†) = Σ_{r} Σ_{a,b} K_ra ρ_ab conj(K_rb)
                let mut t = 0.0;
                for r in 0..2 {
                    for a in 0..2 {
                        for b in 0..2 {
                            t += (k[r * 2 + a] * rho[a * 2 + b] * k[r * 2 + b].conj()).re;
                        }
                    }
                }
                t.max(0.0)
            })
            .collect()
    }

    /// Pick a branch index from a single uniform draw in [0, 1).
    pub fn choose_branch(probabilities: &[f64], u: f64) -> Result<usize> {
        let total: f64 = probabilities.iter().sum();
        if probabilities.iter().all(|&p| p < 1e-15) {
            return Err(Error::Internal("every Kraus branch has vanishing norm".into()));
        }
        let target = u * total;
        let mut acc = 0.0;
        let mut chosen = None;
        for (i, &p) in probabilities.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            acc += p;
            chosen = Some(i);
            if target < acc {
                break;
            }
        }
        Ok(chosen.expect("some branch has positive weight"))
    }

    /// Apply branch `index` and renormalize with its probability.
    pub fn apply_branch(&self, state: &mut StateVector, qubit: usize, index: usize, probability: f64) {
        state.apply_single_scaled(qubit, &self.operators[index], 1.0 / probability.sqrt());
    }
}

/// One quantum-trajectory step: select `K_i` with probability `‖K_i ψ‖²` and
/// replace ψ by `K_i ψ / ‖K_i ψ‖`. Returns the selected branch.
///
/// Consumes exactly one uniform draw from `rng`.
pub fn apply_kraus_trajectory(
    state: &mut StateVector,
    qubit: usize,
    kraus: &KrausSet,
    rng: &mut RngStream,
) -> Result<usize> {
    if qubit >= state.num_qubits() {
        return Err(Error::usage(format!("qubit {qubit} out of range")));
    }
    let probs = kraus.branch_probabilities(state, qubit);
    let u = rng.uniform();
    let i = KrausSet::choose_branch(&probs, u)?;
    kraus.apply_branch(state, qubit, i, probs[i]);
    Ok(i)
}
