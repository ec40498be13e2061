use std::collections::BTreeMap;

use num_complex::Complex64;

use super::gate::GateMatrix;
use super::matrix::{ONE, ZERO};
use crate::error::{Error, Result};
use crate::rng::RngStream;

pub const MAX_QUBITS: usize = 24;

/// Dense statevector. Qubit 0 is the least significant bit of the basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

fn check_qubits(num_qubits: usize) -> Result<()> {
    if !(1..=MAX_QUBITS).contains(&num_qubits) {
        return Err(Error::config(format!(
            "qubit count must be in 1..={MAX_QUBITS}, got {num_qubits}"
        )));
    }
    Ok(())
}

/// A real diagonal scaling not yet applied to the amplitudes.
pub(crate) enum PendingScale<'a> {
    None,
    /// `table[local index over targets]`, first target most significant
    Local {
        targets: &'a [usize],
        table: &'a [f64],
    },
    /// `table[basis index]`
    Full(&'a [f64]),
}

#[inline]
fn extract_local(targets: &[usize], index: usize) -> usize {
    targets.iter().fold(0, |l, &q| (l << 1) | ((index >> q) & 1))
}

/// Enumerates the groups of amplitudes a gate on `targets` mixes.
struct GroupIndexer {
    sorted: [usize; 3],
    arity: usize,
    count: usize,
    /// offset of every local index inside a group
    offsets: Vec<usize>,
}

impl GroupIndexer {
    fn new(targets: &[usize], dim: usize) -> Self {
        let arity = targets.len();
        let mut sorted = [0usize; 3];
        sorted[..arity].copy_from_slice(targets);
        sorted[..arity].sort_unstable();
        let offsets = (0..1usize << arity)
            .map(|local| {
                (0..arity)
                    .filter(|p| (local >> (arity - 1 - p)) & 1 == 1)
                    .map(|p| 1usize << targets[p])
                    .sum()
            })
            .collect();
        Self {
            sorted,
            arity,
            count: dim >> arity,
            offsets,
        }
    }

    /// Bases of all groups in increasing order.
    #[inline]
    fn bases(&self) -> impl Iterator<Item = usize> {
        let mask: usize = self.sorted[..self.arity].iter().map(|&t| 1usize << t).sum();
        let mut next = 0usize;
        (0..self.count).map(move |_| {
            let base = next;
            next = ((next | mask) + 1) & !mask;
            base
        })
    }
}

impl StateVector {
    /// The all-zero reference state |0…0⟩.
    pub fn new_zero_state(num_qubits: usize) -> Result<Self> {
        Self::basis_state(num_qubits, 0)
    }

    pub fn basis_state(num_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::usage(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(Self { num_qubits, amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::usage(format!(
                "amplitude count must be a power of two >= 2, got {len}"
            )));
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_qubits(num_qubits)?;
        Ok(Self { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            let inv = 1.0 / n;
            self.amps.iter_mut().for_each(|a| *a *= inv);
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Apply `gate` to `targets` (tensor order, first target most significant).
    pub fn apply_gate(&mut self, targets: &[usize], gate: &GateMatrix) -> Result<()> {
        if targets.len() != gate.arity() {
            return Err(Error::usage(format!(
                "gate of arity {} given {} targets",
                gate.arity(),
                targets.len()
            )));
        }
        for (i, &t) in targets.iter().enumerate() {
            if t >= self.num_qubits {
                return Err(Error::usage(format!(
                    "target qubit {t} out of range for {} qubits",
                    self.num_qubits
                )));
            }
            if targets[..i].contains(&t) {
                return Err(Error::usage(format!("duplicate target qubit {t}")));
            }
        }
        if gate.is_identity() {
            return Ok(());
        }
        self.apply_gate_unchecked(targets, gate);
        Ok(())
    }

    /// Kernel behind [`Self::apply_gate`]: only the gate's active local
    /// indices are read and written.
    fn apply_gate_unchecked(&mut self, targets: &[usize], gate: &GateMatrix) {
        let groups = GroupIndexer::new(targets, self.amps.len());
        let active = gate.active();
        let m = gate.matrix();
        let offs = &groups.offsets;
        if active.len() == 2 {
            let (r0, r1) = (active[0], active[1]);
            let (m00, m01, m10, m11) = (m.get(r0, r0), m.get(r0, r1), m.get(r1, r0), m.get(r1, r1));
            let (o0, o1) = (offs[r0], offs[r1]);
            if [m00, m01, m10, m11].iter().all(|z| z.im == 0.0) {
                // real rotation: half the multiplications
                let (a00, a01, a10, a11) = (m00.re, m01.re, m10.re, m11.re);
                for base in groups.bases() {
                    let (i0, i1) = (base | o0, base | o1);
                    let (a, b) = (self.amps[i0], self.amps[i1]);
                    self.amps[i0] = Complex64::new(a00 * a.re + a01 * b.re, a00 * a.im + a01 * b.im);
                    self.amps[i1] = Complex64::new(a10 * a.re + a11 * b.re, a10 * a.im + a11 * b.im);
                }
            } else {
                for base in groups.bases() {
                    let (i0, i1) = (base | o0, base | o1);
                    let (a, b) = (self.amps[i0], self.amps[i1]);
                    self.amps[i0] = m00 * a + m01 * b;
                    self.amps[i1] = m10 * a + m11 * b;
                }
            }
            return;
        }
        let k = active.len();
        let mut sub = [ZERO; 64];
        for (r, &ar) in active.iter().enumerate() {
            for (c, &ac) in active.iter().enumerate() {
                sub[r * k + c] = m.get(ar, ac);
            }
        }
        let mut gathered = [ZERO; 8];
        for base in groups.bases() {
            for (slot, &local) in gathered.iter_mut().zip(active) {
                *slot = self.amps[base | offs[local]];
            }
            for r in 0..k {
                let row = &sub[r * k..(r + 1) * k];
                let mut acc = ZERO;
                for c in 0..k {
                    acc += row[c] * gathered[c];
                }
                self.amps[base | offs[active[r]]] = acc;
            }
        }
    }

    /// Noise-path kernel: multiply every amplitude by its `pending` factor,
    /// apply the gate, and store the post-gate populations of `targets` in
    /// `pop`.
    pub(crate) fn apply_gate_scaled(
        &mut self,
        targets: &[usize],
        gate: &GateMatrix,
        pending: &PendingScale,
        pop: &mut [f64],
    ) {
        match targets.len() {
            1 => self.gate_scaled_kernel::<2>(targets, gate, pending, pop),
            2 => self.gate_scaled_kernel::<4>(targets, gate, pending, pop),
            _ => self.gate_scaled_kernel::<8>(targets, gate, pending, pop),
        }
    }

    fn gate_scaled_kernel<const D: usize>(
        &mut self,
        targets: &[usize],
        gate: &GateMatrix,
        pending: &PendingScale,
        pop: &mut [f64],
    ) {
        let groups = GroupIndexer::new(targets, self.amps.len());
        let active = gate.active();
        let m = gate.matrix();
        let mut offs = [0usize; D];
        offs.copy_from_slice(&groups.offsets[..D]);
        let mut acc = [0.0f64; D];
        let k = active.len();
        let mut sub = [ZERO; 64];
        for (r, &ar) in active.iter().enumerate() {
            for (c, &ac) in active.iter().enumerate() {
                sub[r * k + c] = m.get(ar, ac);
            }
        }
        let real2 = k == 2 && sub[..4].iter().all(|z| z.im == 0.0);
        let (r0, r1) = if k == 2 { (active[0], active[1]) } else { (0, 0) };
        let (m00, m01, m10, m11) = (sub[0].re, sub[1].re, sub[2].re, sub[3].re);
        // pending local index of base|offset = local(base) | local(offset)
        let mut off_local = [0usize; D];
        if let PendingScale::Local { targets: pt, .. } = pending {
            for (ol, &o) in off_local.iter_mut().zip(&offs) {
                *ol = extract_local(pt, o);
            }
        }
        let amps = &mut self.amps[..];
        let n = amps.len();
        for base in groups.bases() {
            let mut buf = [ZERO; D];
            for l in 0..D {
                debug_assert!(base | offs[l] < n);
                // SAFETY: base has zero bits at the targets and offsets only
                // set target bits, so the index stays below the dimension
                buf[l] = unsafe { *amps.get_unchecked(base | offs[l]) };
            }
            match pending {
                PendingScale::None => {}
                PendingScale::Local { targets: pt, table } => {
                    let bl = extract_local(pt, base);
                    for l in 0..D {
                        buf[l] *= table[bl | off_local[l]];
                    }
                }
                PendingScale::Full(table) => {
                    for l in 0..D {
                        buf[l] *= table[base | offs[l]];
                    }
                }
            }
            if real2 {
                let (a, b) = (buf[r0], buf[r1]);
                buf[r0] = Complex64::new(m00 * a.re + m01 * b.re, m00 * a.im + m01 * b.im);
                buf[r1] = Complex64::new(m10 * a.re + m11 * b.re, m10 * a.im + m11 * b.im);
            } else if k > 0 {
                let mut tmp = [ZERO; 8];
                for (t, &local) in tmp.iter_mut().zip(active) {
                    *t = buf[local];
                }
                for (r, &local) in active.iter().enumerate() {
                    let row = &sub[r * k..(r + 1) * k];
                    buf[local] = row.iter().zip(&tmp[..k]).map(|(m, a)| m * a).sum();
                }
            }
            for l in 0..D {
                // SAFETY: as above
                unsafe { *amps.get_unchecked_mut(base | offs[l]) = buf[l] };
                acc[l] += buf[l].norm_sqr();
            }
        }
        pop[..D].copy_from_slice(&acc);
    }

    /// Diagonal counterpart of [`Self::apply_gate_scaled`]; `pop` receives
    /// the full probability vector.
    pub(crate) fn apply_diagonal_scaled(&mut self, factors: &[Complex64], pending: &PendingScale, pop: &mut [f64]) {
        let amps = self.amps.iter_mut().zip(factors).zip(pop.iter_mut());
        match pending {
            PendingScale::None => {
                for ((a, f), p) in amps {
                    *a *= f;
                    *p = a.norm_sqr();
                }
            }
            PendingScale::Full(table) => {
                for (((a, f), p), &t) in amps.zip(*table) {
                    *a *= f * t;
                    *p = a.norm_sqr();
                }
            }
            PendingScale::Local { targets, table } => {
                for (i, ((a, f), p)) in amps.enumerate() {
                    *a *= f * table[extract_local(targets, i)];
                    *p = a.norm_sqr();
                }
            }
        }
    }

    pub(crate) fn apply_pending(&mut self, pending: &PendingScale) {
        match pending {
            PendingScale::None => {}
            PendingScale::Full(table) => self.scale_all(table),
            PendingScale::Local { targets, table } => {
                for (i, a) in self.amps.iter_mut().enumerate() {
                    *a *= table[extract_local(targets, i)];
                }
            }
        }
    }

    /// Populations of `targets` by local index, without changing the state.
    pub(crate) fn local_populations(&self, targets: &[usize]) -> Vec<f64> {
        let groups = GroupIndexer::new(targets, self.amps.len());
        let mut pop = vec![0.0; 1 << targets.len()];
        for base in groups.bases() {
            for (local, p) in pop.iter_mut().enumerate() {
                *p += self.amps[base | groups.offsets[local]].norm_sqr();
            }
        }
        pop
    }

    pub(crate) fn scale_all(&mut self, table: &[f64]) {
        for (a, &f) in self.amps.iter_mut().zip(table) {
            *a *= f;
        }
    }

    /// `a_j ← exp(−i·phase_j)·a_j`.
    pub fn apply_diagonal_phase(&mut self, phases: &[f64]) -> Result<()> {
        if phases.len() != self.amps.len() {
            return Err(Error::usage(format!(
                "phase table has {} entries, state has {}",
                phases.len(),
                self.amps.len()
            )));
        }
        for (a, &ph) in self.amps.iter_mut().zip(phases) {
            *a *= Complex64::from_polar(1.0, -ph);
        }
        Ok(())
    }

    /// Multiply by precomputed diagonal factors.
    pub fn apply_diagonal(&mut self, factors: &[Complex64]) -> Result<()> {
        if factors.len() != self.amps.len() {
            return Err(Error::usage("diagonal length does not match state"));
        }
        for (a, f) in self.amps.iter_mut().zip(factors) {
            *a *= f;
        }
        Ok(())
    }

    /// `Σ_j |a_j|² · values_j`.
    pub fn expectation_of_diagonal(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.amps.len() {
            return Err(Error::usage("value table length does not match state"));
        }
        Ok(self.amps.iter().zip(values).map(|(a, v)| a.norm_sqr() * v).sum())
    }

    /// Reduced density matrix of one qubit: (ρ00, ρ11, ρ01).
    pub fn reduced_qubit(&self, qubit: usize) -> (f64, f64, Complex64) {
        let bit = 1usize << qubit;
        let (mut p0, mut p1, mut c01) = (0.0, 0.0, ZERO);
        for hi in (0..self.amps.len()).step_by(bit << 1) {
            for i in hi..hi + bit {
                let a0 = self.amps[i];
                let a1 = self.amps[i | bit];
                p0 += a0.norm_sqr();
                p1 += a1.norm_sqr();
                c01 += a0 * a1.conj();
            }
        }
        (p0, p1, c01)
    }

    /// Apply a 2x2 operator to one qubit, then multiply everything by `scale`.
    pub(crate) fn apply_single_scaled(&mut self, qubit: usize, op: &[Complex64; 4], scale: f64) {
        let bit = 1usize << qubit;
        let [m00, m01, m10, m11] = op.map(|x| x * scale);
        for hi in (0..self.amps.len()).step_by(bit << 1) {
            for i in hi..hi + bit {
                let a0 = self.amps[i];
                let a1 = self.amps[i | bit];
                self.amps[i] = m00 * a0 + m01 * a1;
                self.amps[i | bit] = m10 * a0 + m11 * a1;
            }
        }
    }

    pub(crate) fn check_normalized(&self) -> Result<f64> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() > 1e-6 {
            return Err(Error::Internal(format!(
                "cannot sample an unnormalized state (norm² = {n})"
            )));
        }
        Ok(n)
    }

    /// Running sums of `|a_j|²`; the last entry is the squared norm.
    pub fn cumulative_probabilities(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.amps
            .iter()
            .map(|a| {
                acc += a.norm_sqr();
                acc
            })
            .collect()
    }

    /// Map a uniform draw `u ∈ [0, 1)` to a basis index through `cdf`.
    pub fn index_from_cdf(&self, cdf: &[f64], u: f64) -> usize {
        let total = cdf[cdf.len() - 1];
        let target = u * total;
        let mut i = cdf.partition_point(|&c| c <= target).min(cdf.len() - 1);
        // rounding at the tail must not land on a zero-probability index
        while i > 0 && self.amps[i].norm_sqr() == 0.0 {
            i -= 1;
        }
        i
    }

    /// Draw one measurement outcome (one uniform draw).
    pub fn sample_index(&self, rng: &mut RngStream) -> Result<usize> {
        self.check_normalized()?;
        let cdf = self.cumulative_probabilities();
        Ok(self.index_from_cdf(&cdf, rng.uniform()))
    }

    /// Multinomial histogram of `shots` measurements in the computational basis.
    pub fn sample_counts(&self, shots: usize, rng: &mut RngStream) -> Result<BTreeMap<usize, usize>> {
        let mut counts = BTreeMap::new();
        for idx in self.sample_many(shots, rng)? {
            *counts.entry(idx).or_insert(0) += 1;
        }
        Ok(counts)
    }

    /// `shots` measurement outcomes in draw order.
    pub fn sample_many(&self, shots: usize, rng: &mut RngStream) -> Result<Vec<usize>> {
        if shots == 0 {
            return Err(Error::usage("shots must be >= 1"));
        }
        self.check_normalized()?;
        let cdf = self.cumulative_probabilities();
        Ok((0..shots).map(|_| self.index_from_cdf(&cdf, rng.uniform())).collect())
    }
}
