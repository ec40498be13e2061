use num_complex::Complex64;

use super::matrix::{CMatrix, ONE, ZERO};
use crate::error::{Error, Result};

/// A 1-, 2- or 3-qubit gate matrix.
///
/// Local index convention: for targets `[t0, t1, .., t_{k-1}]` the first
/// target is the most significant bit of the local index, i.e. the matrix is
/// written in tensor order `t0 ⊗ t1 ⊗ ..`.
///
/// The gate also records the local basis states on which it differs from the
/// identity; application only touches those amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct GateMatrix {
    arity: usize,
    matrix: CMatrix,
    active: Vec<usize>,
}

impl GateMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let arity = match matrix.dim() {
            2 => 1,
            4 => 2,
            8 => 3,
            d => {
                return Err(Error::usage(format!(
                    "gate matrix must be 2x2, 4x4 or 8x8, got {d}x{d}"
                )))
            }
        };
        let dim = matrix.dim();
        let active = (0..dim)
            .filter(|&i| {
                (0..dim).any(|j| {
                    let e = if i == j { ONE } else { ZERO };
                    matrix.get(i, j) != e || matrix.get(j, i) != e
                })
            })
            .collect();
        Ok(Self { arity, matrix, active })
    }

    pub fn identity(arity: usize) -> Result<Self> {
        Self::new(CMatrix::identity(1 << arity))
    }

    /// `exp(-i·angle·generator)` for a Hermitian generator.
    pub fn exp_hermitian(generator: &CMatrix, angle: f64) -> Result<Self> {
        Self::new(generator.scale(Complex64::new(0.0, -angle)).expm())
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Local basis states the gate acts on non-trivially.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn is_identity(&self) -> bool {
        self.active.is_empty()
    }

    /// `max |M†M − I|` over all entries.
    pub fn unitarity_error(&self) -> f64 {
        self.matrix
            .adjoint()
            .matmul(&self.matrix)
            .max_abs_diff(&CMatrix::identity(self.matrix.dim()))
    }
}
