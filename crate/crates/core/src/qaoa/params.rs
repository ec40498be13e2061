use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Circuit angles. Flat order is `(γ₁, …, γ_p, β₁, …, β_p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QaoaParams {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl QaoaParams {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.len() != betas.len() || gammas.is_empty() {
            return Err(Error::usage(format!(
                "need equally many gammas and betas (got {} and {})",
                gammas.len(),
                betas.len()
            )));
        }
        Ok(Self { gammas, betas })
    }

    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if flat.is_empty() || !flat.len().is_multiple_of(2) {
            return Err(Error::usage(format!(
                "flat parameter vector needs an even, nonzero length, got {}",
                flat.len()
            )));
        }
        let p = flat.len() / 2;
        Self::new(flat[..p].to_vec(), flat[p..].to_vec())
    }

    pub fn zeros(p: usize) -> Self {
        Self {
            gammas: vec![0.0; p],
            betas: vec![0.0; p],
        }
    }

    pub fn p(&self) -> usize {
        self.gammas.len()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }
}

/// Canonical search box: `γ ∈ [0, 2π]`, `β ∈ [0, π]`, in flat order.
pub fn canonical_bounds(p: usize) -> Vec<(f64, f64)> {
    let mut b = vec![(0.0, 2.0 * PI); p];
    b.extend(std::iter::repeat_n((0.0, PI), p));
    b
}

/// Short name of a flat parameter index, e.g. `gamma1` or `beta2`.
pub fn param_name(index: usize, p: usize) -> String {
    if index < p {
        format!("gamma{}", index + 1)
    } else {
        format!("beta{}", index - p + 1)
    }
}

/// Holds some parameters at fixed values and exposes the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamMask {
    total: usize,
    fixed: BTreeMap<usize, f64>,
    free: Vec<usize>,
}

impl ParamMask {
    pub fn new(total: usize, fixed: BTreeMap<usize, f64>) -> Result<Self> {
        if let Some((&i, _)) = fixed.iter().find(|(&i, _)| i >= total) {
            return Err(Error::usage(format!("fixed index {i} out of range {total}")));
        }
        let free = (0..total).filter(|i| !fixed.contains_key(i)).collect();
        Ok(Self { total, fixed, free })
    }

    pub fn none(total: usize) -> Self {
        Self::new(total, BTreeMap::new()).expect("empty mask")
    }

    /// Fix every γ at the given values; β stays free.
    pub fn fix_gammas(gammas: &[f64]) -> Self {
        let p = gammas.len();
        Self::new(2 * p, gammas.iter().copied().enumerate().collect()).expect("in range")
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn free(&self) -> &[usize] {
        &self.free
    }

    pub fn fixed(&self) -> &BTreeMap<usize, f64> {
        &self.fixed
    }

    pub fn dimension(&self) -> usize {
        self.free.len()
    }

    /// Insert free values into the full vector.
    pub fn expand(&self, free_values: &[f64]) -> Result<Vec<f64>> {
        if free_values.len() != self.free.len() {
            return Err(Error::usage(format!(
                "masked objective expects {} arguments, got {}",
                self.free.len(),
                free_values.len()
            )));
        }
        let mut full = vec![0.0; self.total];
        for (&i, &v) in &self.fixed {
            full[i] = v;
        }
        for (&i, &v) in self.free.iter().zip(free_values) {
            full[i] = v;
        }
        Ok(full)
    }

    /// Project a full vector onto the free coordinates.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&i| full[i]).collect()
    }

    pub fn restrict_bounds(&self, bounds: &[(f64, f64)]) -> Vec<(f64, f64)> {
        self.free.iter().map(|&i| bounds[i]).collect()
    }
}

/// An objective over the free coordinates that delegates to `base` with the
/// fixed coordinates filled in. Each call reaches `base` exactly once.
pub struct MaskedObjective<F> {
    mask: ParamMask,
    base: F,
}

pub fn masked_objective<F: FnMut(&[f64]) -> f64>(mask: ParamMask, base: F) -> MaskedObjective<F> {
    MaskedObjective { mask, base }
}

impl<F: FnMut(&[f64]) -> f64> MaskedObjective<F> {
    pub fn dimension(&self) -> usize {
        self.mask.dimension()
    }

    pub fn mask(&self) -> &ParamMask {
        &self.mask
    }

    pub fn call(&mut self, free_values: &[f64]) -> Result<f64> {
        let full = self.mask.expand(free_values)?;
        Ok((self.base)(&full))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_order_is_gammas_then_betas() {
        let p = QaoaParams::from_flat(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(p.gammas, vec![1.0, 2.0]);
        assert_eq!(p.betas, vec![3.0, 4.0]);
        assert_eq!(p.to_flat(), vec![1.0, 2.0, 3.0, 4.0]);
        assert!(QaoaParams::from_flat(&[1.0, 2.0, 3.0]).is_err());
        assert_eq!(param_name(0, 2), "gamma1");
        assert_eq!(param_name(3, 2), "beta2");
    }

    #[test]
    fn empty_mask_is_transparent() {
        let mut calls = 0;
        let mut m = masked_objective(ParamMask::none(4), |x: &[f64]| {
            calls += 1;
            x.iter().sum()
        });
        assert_eq!(m.call(&[1.0, 2.0, 3.0, 4.0]).unwrap(), 10.0);
        assert_eq!(m.dimension(), 4);
        drop(m);
        assert_eq!(calls, 1);
    }

    #[test]
    fn gamma_mask_fills_fixed_values() {
        let seen = std::cell::RefCell::new(Vec::new());
        let mut m = masked_objective(ParamMask::fix_gammas(&[0.0, 0.0]), |x: &[f64]| {
            seen.borrow_mut().push(x.to_vec());
            0.0
        });
        assert_eq!(m.dimension(), 2);
        m.call(&[0.14286, 0.85714]).unwrap();
        assert!(m.call(&[1.0]).is_err());
        drop(m);
        assert_eq!(seen.borrow().as_slice(), &[vec![0.0, 0.0, 0.14286, 0.85714]]);
    }

    #[test]
    fn mask_rejects_out_of_range() {
        let fixed = [(5usize, 1.0)].into_iter().collect();
        assert!(ParamMask::new(4, fixed).is_err());
    }
}
