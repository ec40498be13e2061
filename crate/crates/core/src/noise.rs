//! Noise profiles and shot-based cost estimation.
//!
//! Thermal relaxation is simulated with Monte Carlo quantum trajectories:
//! every shot is its own pure-state trajectory that picks one Kraus branch at
//! each noise location and is measured once at the end. Idle qubits accrue no
//! noise; gate participants relax for the gate's duration. The diagonal cost
//! layer counts as one multi-qubit gate of two-qubit duration on every qubit.

use std::sync::Arc;

use num_complex::Complex64;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qaoa::{Op, QaoaParams, QaoaProblem};
use crate::rng::RngStream;
use crate::sim::{KrausSet, PendingScale, StateVector};

pub const DEFAULT_SHOTS: usize = 1024;
pub const DEFAULT_T_1Q: f64 = 50e-9;
pub const DEFAULT_T_2Q: f64 = 150e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalParams {
    pub t1: f64,
    pub t2: f64,
    pub t_1q: f64,
    pub t_2q: f64,
    pub shots: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseProfile {
    Noiseless,
    Sampling { shots: usize },
    Thermal(ThermalParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Noiseless,
    Sampling,
    Thermal,
}

impl NoiseProfile {
    pub fn sampling(shots: usize) -> Result<Self> {
        if shots == 0 {
            return Err(Error::config("shots must be >= 1"));
        }
        Ok(NoiseProfile::Sampling { shots })
    }

    pub fn thermal(t1: f64, t2: f64, t_1q: f64, t_2q: f64, shots: usize) -> Result<Self> {
        if shots == 0 {
            return Err(Error::config("shots must be >= 1"));
        }
        if !(t1 > 0.0 && t2 > 0.0 && t_1q > 0.0 && t_2q > 0.0) {
            return Err(Error::config("relaxation times and gate durations must be positive"));
        }
        if t2 > 2.0 * t1 {
            return Err(Error::Physicality(format!(
                "T2 = {t2:e} s exceeds 2·T1 = {:e} s",
                2.0 * t1
            )));
        }
        Ok(NoiseProfile::Thermal(ThermalParams {
            t1,
            t2,
            t_1q,
            t_2q,
            shots,
        }))
    }

    /// T1 = 380 µs, T2 = 400 µs, 50/150 ns gates, 1024 shots.
    pub fn thermal_a() -> Self {
        Self::thermal(380e-6, 400e-6, DEFAULT_T_1Q, DEFAULT_T_2Q, DEFAULT_SHOTS).expect("physical")
    }

    /// T1 = 80 µs, T2 = 100 µs, 50/150 ns gates, 1024 shots.
    pub fn thermal_b() -> Self {
        Self::thermal(80e-6, 100e-6, DEFAULT_T_1Q, DEFAULT_T_2Q, DEFAULT_SHOTS).expect("physical")
    }

    pub fn kind(&self) -> ProfileKind {
        match self {
            NoiseProfile::Noiseless => ProfileKind::Noiseless,
            NoiseProfile::Sampling { .. } => ProfileKind::Sampling,
            NoiseProfile::Thermal(_) => ProfileKind::Thermal,
        }
    }

    /// Shots per estimate; 0 for exact evaluation.
    pub fn shots(&self) -> usize {
        match self {
            NoiseProfile::Noiseless => 0,
            NoiseProfile::Sampling { shots } => *shots,
            NoiseProfile::Thermal(t) => t.shots,
        }
    }
}

/// A profile together with the name used in file names and reports.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedProfile {
    pub name: String,
    pub profile: NoiseProfile,
}

impl NamedProfile {
    /// `noiseless`, `sampling`, `thermal_a`, `thermal_b`.
    pub fn standard_set() -> Vec<NamedProfile> {
        vec![
            NamedProfile::preset("noiseless").unwrap(),
            NamedProfile::preset("sampling").unwrap(),
            NamedProfile::preset("thermal_a").unwrap(),
            NamedProfile::preset("thermal_b").unwrap(),
        ]
    }

    pub fn preset(name: &str) -> Option<NamedProfile> {
        let profile = match name {
            "noiseless" => NoiseProfile::Noiseless,
            "sampling" => NoiseProfile::Sampling { shots: DEFAULT_SHOTS },
            "thermal_a" => NoiseProfile::thermal_a(),
            "thermal_b" => NoiseProfile::thermal_b(),
            _ => return None,
        };
        Some(NamedProfile {
            name: name.to_string(),
            profile,
        })
    }
}

/// Profile block of a configuration file. Times are in µs (T1, T2) and ns
/// (gate durations).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    #[serde(rename = "type")]
    pub kind: ProfileKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1_us: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2_us: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_1q_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_2q_ns: Option<f64>,
}

impl ProfileSpec {
    pub fn build(&self) -> Result<NamedProfile> {
        let shots = self.shots.unwrap_or(DEFAULT_SHOTS);
        let profile = match self.kind {
            ProfileKind::Noiseless => NoiseProfile::Noiseless,
            ProfileKind::Sampling => NoiseProfile::sampling(shots)?,
            ProfileKind::Thermal => {
                let t1 = self.t1_us.ok_or_else(|| Error::config("thermal profile needs t1_us"))?;
                let t2 = self.t2_us.ok_or_else(|| Error::config("thermal profile needs t2_us"))?;
                NoiseProfile::thermal(
                    t1 / 1e6,
                    t2 / 1e6,
                    self.t_1q_ns.map_or(DEFAULT_T_1Q, |t| t / 1e9),
                    self.t_2q_ns.map_or(DEFAULT_T_2Q, |t| t / 1e9),
                    shots,
                )?
            }
        };
        let name = self.name.clone().unwrap_or_else(|| {
            match self.kind {
                ProfileKind::Noiseless => "noiseless",
                ProfileKind::Sampling => "sampling",
                ProfileKind::Thermal => "thermal",
            }
            .to_string()
        });
        Ok(NamedProfile { name, profile })
    }

    pub fn from_named(p: &NamedProfile) -> Self {
        let mut spec = ProfileSpec {
            kind: p.profile.kind(),
            name: Some(p.name.clone()),
            shots: None,
            t1_us: None,
            t2_us: None,
            t_1q_ns: None,
            t_2q_ns: None,
        };
        match p.profile {
            NoiseProfile::Noiseless => {}
            NoiseProfile::Sampling { shots } => spec.shots = Some(shots),
            NoiseProfile::Thermal(t) => {
                spec.shots = Some(t.shots);
                spec.t1_us = Some(t.t1 * 1e6);
                spec.t2_us = Some(t.t2 * 1e6);
                spec.t_1q_ns = Some(t.t_1q * 1e9);
                spec.t_2q_ns = Some(t.t_2q * 1e9);
            }
        }
        spec
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostEstimate {
    pub value: f64,
    /// 0 for exact (noiseless) evaluation.
    pub shots_used: usize,
    pub profile: ProfileKind,
}

/// Amplitude damping `γ = 1 − e^{−d/T1}` followed by phase damping
/// `λ = 1 − e^{−2d(1/T2 − 1/(2T1))}`, composed into one Kraus set.
/// Branch 0 is the no-jump operator; the zero product term is dropped.
pub fn thermal_kraus(t1: f64, t2: f64, duration: f64) -> Result<KrausSet> {
    if !(duration > 0.0) {
        return Err(Error::config(format!("duration must be positive, got {duration}")));
    }
    if !(t1 > 0.0 && t2 > 0.0) {
        return Err(Error::config("T1 and T2 must be positive"));
    }
    if t2 > 2.0 * t1 {
        return Err(Error::Physicality(format!(
            "T2 = {t2:e} s exceeds 2·T1 = {:e} s",
            2.0 * t1
        )));
    }
    let gamma = -(-duration / t1).exp_m1();
    let rate = (1.0 / t2 - 0.5 / t1).max(0.0);
    let lambda = -(-2.0 * duration * rate).exp_m1();
    let (z, r) = (Complex64::new(0.0, 0.0), |x: f64| Complex64::new(x, 0.0));
    let mut ops = vec![[r(1.0), z, z, r(((1.0 - lambda) * (1.0 - gamma)).sqrt())]];
    if lambda > 0.0 {
        ops.push([z, z, z, r((lambda * (1.0 - gamma)).sqrt())]);
    }
    if gamma > 0.0 {
        ops.push([z, r(gamma.sqrt()), z, z]);
    }
    KrausSet::new(ops, duration)
}

/// Estimate the circuit cost under `profile`.
///
/// Noiseless returns the exact expectation. Sampling draws `shots`
/// measurements of the exact final state. Thermal runs one trajectory per
/// shot.
pub fn estimate_cost(
    problem: &QaoaProblem,
    params: &QaoaParams,
    profile: &NoiseProfile,
    rng: &mut RngStream,
) -> Result<CostEstimate> {
    let costs = problem.costs();
    let (value, shots_used) = match profile {
        NoiseProfile::Noiseless => {
            let state = problem.final_state(params)?;
            (state.expectation_of_diagonal(costs)?, 0)
        }
        NoiseProfile::Sampling { shots } => {
            let state = problem.final_state(params)?;
            let outcomes = state.sample_many(*shots, rng)?;
            (mean_cost(costs, &outcomes), *shots)
        }
        NoiseProfile::Thermal(t) => {
            let program = NoisyProgram::compile(problem, params, t)?;
            let outcomes = program.sample_outcomes(t.shots, rng)?;
            (mean_cost(costs, &outcomes), t.shots)
        }
    };
    Ok(CostEstimate {
        value,
        shots_used,
        profile: profile.kind(),
    })
}

fn mean_cost(costs: &[f64], outcomes: &[usize]) -> f64 {
    outcomes.iter().map(|&i| costs[i]).sum::<f64>() / outcomes.len() as f64
}

/// One op followed by relaxation on each of its participants, in order.
#[derive(Debug, Clone)]
struct Block {
    op: Op,
    participants: Vec<usize>,
    kraus: Arc<KrausSet>,
    fast: Option<PopulationKraus>,
}

impl Block {
    /// Bit of participant `j` inside the block's local index.
    fn local_bit(&self, j: usize) -> usize {
        match &self.op {
            Op::Gate(g) => g.targets.len() - 1 - j,
            Op::Diagonal(_) => self.participants[j],
        }
    }

    /// Apply the op, folding in the previous block's deferred scaling, and
    /// return the post-op populations of the participants.
    fn apply_op(&self, state: &mut StateVector, pending: &PendingScale) -> Vec<f64> {
        match &self.op {
            Op::Gate(g) => {
                let mut pop = vec![0.0; 1 << g.targets.len()];
                state.apply_gate_scaled(&g.targets, &g.gate, pending, &mut pop);
                pop
            }
            Op::Diagonal(f) => {
                let mut pop = vec![0.0; state.dim()];
                state.apply_diagonal_scaled(f, pending, &mut pop);
                pop
            }
        }
    }

    fn populations(&self, state: &StateVector) -> Vec<f64> {
        match &self.op {
            Op::Gate(g) => state.local_populations(&g.targets),
            Op::Diagonal(_) => state.probabilities(),
        }
    }

    /// Targets addressed by a local index; `None` means the full basis index.
    fn local_targets(&self) -> Option<&[usize]> {
        match &self.op {
            Op::Gate(g) => Some(&g.targets),
            Op::Diagonal(_) => None,
        }
    }
}

/// Branch-0 scaling of one block, held back until the next op's pass.
struct Pending<'a> {
    targets: Option<&'a [usize]>,
    table: Vec<f64>,
}

impl Pending<'_> {
    fn scale(&self) -> PendingScale<'_> {
        match self.targets {
            Some(targets) => PendingScale::Local {
                targets,
                table: &self.table,
            },
            None => PendingScale::Full(&self.table),
        }
    }
}

/// A Kraus set whose branch probabilities depend only on the qubit's
/// populations and whose branch 0 is a real diagonal.
#[derive(Debug, Clone)]
struct PopulationKraus {
    /// diagonal of K_i†K_i per branch
    weights: Vec<[f64; 2]>,
    k0: [f64; 2],
}

impl PopulationKraus {
    fn new(kraus: &KrausSet) -> Option<Self> {
        let ops = kraus.operators();
        let k0 = ops[0];
        if k0[1] != ZERO_C || k0[2] != ZERO_C || k0[0].im != 0.0 || k0[3].im != 0.0 {
            return None;
        }
        let mut weights = Vec::with_capacity(ops.len());
        for k in ops {
            // (K†K)_01 = conj(K_00) K_01 + conj(K_10) K_11
            if k[0].conj() * k[1] + k[2].conj() * k[3] != ZERO_C {
                return None;
            }
            weights.push([k[0].norm_sqr() + k[2].norm_sqr(), k[1].norm_sqr() + k[3].norm_sqr()]);
        }
        Some(Self {
            weights,
            k0: [k0[0].re, k0[3].re],
        })
    }
}

const ZERO_C: Complex64 = Complex64::new(0.0, 0.0);

/// A circuit with relaxation channels inserted after every gate.
#[derive(Debug, Clone)]
pub struct NoisyProgram {
    initial: StateVector,
    blocks: Vec<Block>,
}

impl NoisyProgram {
    pub fn compile(problem: &QaoaProblem, params: &QaoaParams, t: &ThermalParams) -> Result<Self> {
        let k1q = Arc::new(thermal_kraus(t.t1, t.t2, t.t_1q)?);
        let k2q = Arc::new(thermal_kraus(t.t1, t.t2, t.t_2q)?);
        let nq = problem.geometry().num_qubits();
        let ops = problem.ops(params)?;
        Self::from_ops(problem.initial_state(), ops, nq, &k1q, &k2q)
    }

    fn from_ops(
        initial: StateVector,
        ops: Vec<Op>,
        nq: usize,
        k1q: &Arc<KrausSet>,
        k2q: &Arc<KrausSet>,
    ) -> Result<Self> {
        let (f1, f2) = (PopulationKraus::new(k1q), PopulationKraus::new(k2q));
        let blocks = ops
            .into_iter()
            .map(|op| {
                let (participants, kraus, fast) = match &op {
                    Op::Gate(g) if g.targets.len() == 1 => (g.targets.clone(), k1q, &f1),
                    Op::Gate(g) => (g.targets.clone(), k2q, &f2),
                    Op::Diagonal(_) => ((0..nq).collect(), k2q, &f2),
                };
                Block {
                    op,
                    participants,
                    kraus: Arc::clone(kraus),
                    fast: fast.clone(),
                }
            })
            .collect();
        Ok(Self { initial, blocks })
    }

    pub fn noise_locations(&self) -> usize {
        self.blocks.iter().map(|b| b.participants.len()).sum()
    }

    fn shot_streams(shots: usize, rng: &mut RngStream) -> Vec<RngStream> {
        let base = RngStream::new(rng.next_u64());
        (0..shots as u64).map(|s| base.child(s)).collect()
    }

    /// Reference implementation: every shot simulates its full trajectory.
    pub fn sample_outcomes_naive(&self, shots: usize, rng: &mut RngStream) -> Result<Vec<usize>> {
        Self::shot_streams(shots, rng)
            .iter_mut()
            .map(|r| {
                let mut state = self.initial.clone();
                for block in &self.blocks {
                    block.op.apply(&mut state)?;
                    for &q in &block.participants {
                        crate::sim::apply_kraus_trajectory(&mut state, q, &block.kraus, r)?;
                    }
                }
                state.sample_index(r)
            })
            .collect()
    }

    /// Same trajectories as [`Self::sample_outcomes_naive`], draw for draw,
    /// but shots that keep taking branch 0 share one evolved state; a shot is
    /// split off only where it first takes another branch. Branch
    /// probabilities come from the participants' joint populations, which the
    /// gate kernel accumulates while it runs.
    pub fn sample_outcomes(&self, shots: usize, rng: &mut RngStream) -> Result<Vec<usize>> {
        if self.blocks.iter().any(|b| b.fast.is_none()) {
            return self.sample_outcomes_naive(shots, rng);
        }
        let mut streams = Self::shot_streams(shots, rng);
        let mut outcomes = vec![usize::MAX; shots];
        let group = (0..shots).collect();
        self.run_group(self.initial.clone(), 0, None, group, &mut streams, &mut outcomes)?;
        Ok(outcomes)
    }

    /// Advance `shots`, which share `state`, from block `start`. With
    /// `resume = Some(j)` the op of block `start` and its first `j` noise
    /// locations have already been applied.
    fn run_group(
        &self,
        mut state: StateVector,
        start: usize,
        resume: Option<usize>,
        mut shots: Vec<usize>,
        streams: &mut [RngStream],
        outcomes: &mut [usize],
    ) -> Result<()> {
        let mut pending: Option<Pending> = None;
        for (b, block) in self.blocks.iter().enumerate().skip(start) {
            let fk = block.fast.as_ref().expect("checked by caller");
            let (first, mut pop) = match resume {
                Some(j) if b == start => (j, block.populations(&state)),
                _ => {
                    let pop = match pending.take() {
                        Some(p) => block.apply_op(&mut state, &p.scale()),
                        None => block.apply_op(&mut state, &PendingScale::None),
                    };
                    (0, pop)
                }
            };
            let mut probs_at = Vec::with_capacity(block.participants.len());
            let mut splits = Vec::new();
            let mut applied = first;
            for j in first..block.participants.len() {
                let bit = block.local_bit(j);
                let (mut w1, mut total) = (0.0, 0.0);
                for (local, &p) in pop.iter().enumerate() {
                    total += p;
                    w1 += p * ((local >> bit) & 1) as f64;
                }
                let w0 = total - w1;
                let probs: Vec<f64> = fk
                    .weights
                    .iter()
                    .map(|w| ((w[0] * w0 + w[1] * w1) / total).max(0.0))
                    .collect();
                let mut stay = Vec::with_capacity(shots.len());
                for &s in &shots {
                    let branch = KrausSet::choose_branch(&probs, streams[s].uniform())?;
                    if branch == 0 {
                        stay.push(s);
                    } else {
                        splits.push((s, j, branch));
                    }
                }
                shots = stay;
                probs_at.push(probs);
                if shots.is_empty() {
                    break;
                }
                let p0 = probs_at.last().expect("pushed")[0];
                if !(p0 > 0.0) {
                    return Err(Error::Internal("shot stayed on a zero-probability branch".into()));
                }
                let f = [fk.k0[0] * fk.k0[0] / p0, fk.k0[1] * fk.k0[1] / p0];
                for (local, p) in pop.iter_mut().enumerate() {
                    *p *= f[(local >> bit) & 1];
                }
                applied = j + 1;
            }
            let snapshot = (!splits.is_empty()).then(|| state.clone());
            if !shots.is_empty() && applied > first {
                // every participant's K0 = diag(d0, d1): the product only
                // depends on how many applied participants are excited
                let mut mask = 0usize;
                let mut norm = 1.0;
                for (j, probs) in (first..applied).zip(&probs_at) {
                    mask |= 1 << block.local_bit(j);
                    norm *= probs[0];
                }
                let count = applied - first;
                let inv = 1.0 / norm.sqrt();
                let by_ones: Vec<f64> = (0..=count)
                    .map(|ones| fk.k0[1].powi(ones as i32) * fk.k0[0].powi((count - ones) as i32) * inv)
                    .collect();
                let table: Vec<f64> = (0..pop.len())
                    .map(|local| by_ones[(local & mask).count_ones() as usize])
                    .collect();
                pending = Some(Pending {
                    targets: block.local_targets(),
                    table,
                });
            }
            if let Some(snapshot) = snapshot {
                for (s, j, branch) in splits {
                    let mut split = snapshot.clone();
                    for (jj, probs) in (first..j).zip(&probs_at) {
                        block
                            .kraus
                            .apply_branch(&mut split, block.participants[jj], 0, probs[0]);
                    }
                    let p = probs_at[j - first][branch];
                    block.kraus.apply_branch(&mut split, block.participants[j], branch, p);
                    self.run_group(split, b, Some(j + 1), vec![s], streams, outcomes)?;
                }
            }
            if shots.is_empty() {
                return Ok(());
            }
        }
        if let Some(p) = pending {
            state.apply_pending(&p.scale());
        }
        state.check_normalized()?;
        let cdf = state.cumulative_probabilities();
        for s in shots {
            outcomes[s] = state.index_from_cdf(&cdf, streams[s].uniform());
        }
        Ok(())
    }
}
