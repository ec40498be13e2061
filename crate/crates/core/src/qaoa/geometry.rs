use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::MAX_QUBITS;

/// Which block pairs `(t, t′)` the mixer couples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// `(t, (t+1) mod n)` for ascending `t`.
    #[default]
    Ring,
    /// Every ordered pair `t < t′`, lexicographic.
    AllPairs,
    Custom(Vec<(usize, usize)>),
}

/// The index sets `K1 = {2c mod l : 1 ≤ c ≤ ⌊l/2⌋}` and
/// `K2 = {(2c − 1) mod l : 1 ≤ c ≤ ⌈l/2⌉}`, each sorted ascending.
pub fn index_sets(l: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    if l < 1 {
        return Err(Error::config("qubits per block must be >= 1"));
    }
    let mut k1: Vec<usize> = (1..=l / 2).map(|c| (2 * c) % l).collect();
    let mut k2: Vec<usize> = (1..=l.div_ceil(2)).map(|c| (2 * c - 1) % l).collect();
    k1.sort_unstable();
    k1.dedup();
    k2.sort_unstable();
    k2.dedup();
    Ok((k1, k2))
}

/// Shape of the hard-constrained ansatz: `n` blocks of `l` qubits, `p` layers.
/// Qubit `q` of block `t` is global qubit `t·l + q`.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitGeometry {
    n: usize,
    l: usize,
    p: usize,
    couplings: Vec<(usize, usize)>,
    k1: Vec<usize>,
    k2: Vec<usize>,
}

impl CircuitGeometry {
    pub fn new(n: usize, l: usize, p: usize, coupling: &Coupling) -> Result<Self> {
        if n < 2 {
            return Err(Error::config(format!("need at least two blocks, got {n}")));
        }
        // with one qubit per block the three-qubit term would target one qubit twice
        if l < 2 {
            return Err(Error::config(format!("need at least two qubits per block, got {l}")));
        }
        if n * l > MAX_QUBITS {
            return Err(Error::config(format!("n·l = {} exceeds {MAX_QUBITS}", n * l)));
        }
        if p < 1 {
            return Err(Error::config("need at least one layer"));
        }
        let couplings = match coupling {
            Coupling::Ring => (0..n).map(|t| (t, (t + 1) % n)).collect(),
            Coupling::AllPairs => (0..n).flat_map(|t| (t + 1..n).map(move |u| (t, u))).collect(),
            Coupling::Custom(pairs) => pairs.clone(),
        };
        for &(t, u) in &couplings {
            if t == u || t >= n || u >= n {
                return Err(Error::config(format!("invalid coupling pair ({t}, {u})")));
            }
        }
        let (k1, k2) = index_sets(l)?;
        Ok(Self {
            n,
            l,
            p,
            couplings,
            k1,
            k2,
        })
    }

    /// Four blocks of three qubits, two layers, ring coupling.
    pub fn default_geometry() -> Self {
        Self::new(4, 3, 2, &Coupling::Ring).expect("valid default geometry")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn num_qubits(&self) -> usize {
        self.n * self.l
    }

    pub fn num_params(&self) -> usize {
        2 * self.p
    }

    pub fn couplings(&self) -> &[(usize, usize)] {
        &self.couplings
    }

    pub fn k1(&self) -> &[usize] {
        &self.k1
    }

    pub fn k2(&self) -> &[usize] {
        &self.k2
    }

    pub fn qubit(&self, block: usize, k: usize) -> usize {
        block * self.l + k
    }

    /// Gate applications emitted per mixer layer.
    pub fn gates_per_mixer_layer(&self) -> usize {
        self.couplings.len() * (2 * self.l + self.k1.len() + self.k2.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_sets_small_l() {
        assert_eq!(index_sets(3).unwrap(), (vec![2], vec![0, 1]));
        assert_eq!(index_sets(2).unwrap(), (vec![0], vec![1]));
        assert_eq!(index_sets(1).unwrap(), (vec![], vec![0]));
        assert!(index_sets(0).is_err());
    }

    #[test]
    fn index_sets_stay_in_range() {
        for l in 1..12 {
            let (k1, k2) = index_sets(l).unwrap();
            assert!(k1.iter().chain(&k2).all(|&k| k < l));
        }
    }

    #[test]
    fn ring_and_all_pairs() {
        let g = CircuitGeometry::new(4, 3, 2, &Coupling::Ring).unwrap();
        assert_eq!(g.couplings(), &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert_eq!(g.gates_per_mixer_layer(), 36);
        let g = CircuitGeometry::new(3, 2, 1, &Coupling::AllPairs).unwrap();
        assert_eq!(g.couplings(), &[(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn invalid_geometries() {
        assert!(CircuitGeometry::new(1, 3, 2, &Coupling::Ring).is_err());
        assert!(CircuitGeometry::new(4, 1, 2, &Coupling::Ring).is_err());
        assert!(CircuitGeometry::new(4, 3, 0, &Coupling::Ring).is_err());
        assert!(CircuitGeometry::new(9, 3, 1, &Coupling::Ring).is_err());
        assert!(CircuitGeometry::new(3, 3, 1, &Coupling::Custom(vec![(1, 1)])).is_err());
    }
}
