use std::sync::Arc;

use num_complex::Complex64;

use super::generators::{p_generator, s_generator};
use super::geometry::CircuitGeometry;
use super::params::QaoaParams;
use crate::error::{Error, Result};
use crate::gmvp::GmvpInstance;
use crate::noise::{self, CostEstimate, NoiseProfile};
use crate::rng::RngStream;
use crate::sim::{GateMatrix, StateVector};

/// A gate bound to its target qubits.
#[derive(Debug, Clone)]
pub struct GateApplication {
    pub targets: Vec<usize>,
    pub gate: Arc<GateMatrix>,
}

/// Diagonal cost unitary `exp(−iγ·f(j))` stored as its phases `γ·f(j)`.
#[derive(Debug, Clone)]
pub struct DiagonalPhase {
    phases: Vec<f64>,
}

impl DiagonalPhase {
    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn factors(&self) -> Vec<Complex64> {
        self.phases.iter().map(|&ph| Complex64::from_polar(1.0, -ph)).collect()
    }
}

/// One step of a compiled circuit.
#[derive(Debug, Clone)]
pub enum Op {
    Gate(GateApplication),
    Diagonal(Arc<Vec<Complex64>>),
}

impl Op {
    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        match self {
            Op::Gate(g) => state.apply_gate(&g.targets, &g.gate),
            Op::Diagonal(f) => state.apply_diagonal(f),
        }
    }
}

/// Ordered gate applications of one mixer layer `Û(c, β)`.
///
/// For each coupling `(t, t′)`: `exp(−iβŜᵏ)` for `k = 0..l`, then `exp(−iβP̂ᵏ)`
/// for `k ∈ K1`, then for `k ∈ K2`, then `exp(−iβŜᵏ)` for `k = 0..l` again.
pub fn build_mixer_layer(geometry: &CircuitGeometry, beta: f64) -> Result<Vec<GateApplication>> {
    if !beta.is_finite() {
        return Err(Error::usage(format!("mixer angle must be finite, got {beta}")));
    }
    let s_gate = Arc::new(GateMatrix::exp_hermitian(&s_generator(), beta)?);
    let p_gate = Arc::new(GateMatrix::exp_hermitian(&p_generator(), beta)?);
    let l = geometry.l();
    let mut out = Vec::with_capacity(geometry.gates_per_mixer_layer());
    for &(t, u) in geometry.couplings() {
        let s_sweep = |out: &mut Vec<GateApplication>| {
            for k in 0..l {
                out.push(GateApplication {
                    targets: vec![geometry.qubit(t, k), geometry.qubit(u, k)],
                    gate: Arc::clone(&s_gate),
                });
            }
        };
        s_sweep(&mut out);
        for &k in geometry.k1().iter().chain(geometry.k2()) {
            out.push(GateApplication {
                targets: vec![
                    geometry.qubit(t, (k + 1) % l),
                    geometry.qubit(t, k),
                    geometry.qubit(u, k),
                ],
                gate: Arc::clone(&p_gate),
            });
        }
        s_sweep(&mut out);
    }
    Ok(out)
}

/// Cost layer `exp(−iγ·f)` over a full cost table.
pub fn build_cost_layer(cost_values: &[f64], gamma: f64) -> DiagonalPhase {
    DiagonalPhase {
        phases: cost_values.iter().map(|&c| gamma * c).collect(),
    }
}

/// Initial feasible state: the `m` lowest qubits of block 0 excited.
pub fn prepare_initial(geometry: &CircuitGeometry, m: usize) -> Result<StateVector> {
    let q = geometry.num_qubits();
    if m == 0 || m > q {
        return Err(Error::config(format!("budget m = {m} outside 1..={q}")));
    }
    StateVector::basis_state(q, (1usize << m) - 1)
}

/// A geometry bound to an instance and its precomputed cost table.
#[derive(Debug, Clone)]
pub struct QaoaProblem {
    geometry: CircuitGeometry,
    instance: GmvpInstance,
    costs: Arc<Vec<f64>>,
    /// distinct cost values; most infeasible entries share one
    levels: Arc<Vec<f64>>,
    level_of: Arc<Vec<u32>>,
}

impl QaoaProblem {
    pub fn new(geometry: CircuitGeometry, instance: GmvpInstance) -> Result<Self> {
        if geometry.n() != instance.n() || geometry.l() != instance.l() {
            return Err(Error::config(format!(
                "geometry is {}x{} but instance is {}x{}",
                geometry.n(),
                geometry.l(),
                instance.n(),
                instance.l()
            )));
        }
        let costs = instance.cost_table();
        let mut index = std::collections::HashMap::new();
        let mut levels = Vec::new();
        let level_of = costs
            .iter()
            .map(|&c| {
                *index.entry(c.to_bits()).or_insert_with(|| {
                    levels.push(c);
                    levels.len() as u32 - 1
                })
            })
            .collect();
        Ok(Self {
            geometry,
            instance,
            costs: Arc::new(costs),
            levels: Arc::new(levels),
            level_of: Arc::new(level_of),
        })
    }

    pub fn default_problem() -> Self {
        Self::new(CircuitGeometry::default_geometry(), GmvpInstance::default_instance())
            .expect("default problem is consistent")
    }

    pub fn geometry(&self) -> &CircuitGeometry {
        &self.geometry
    }

    pub fn instance(&self) -> &GmvpInstance {
        &self.instance
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn initial_state(&self) -> StateVector {
        prepare_initial(&self.geometry, self.instance.m()).expect("budget validated by instance")
    }

    fn check_params(&self, params: &QaoaParams) -> Result<()> {
        if params.p() != self.geometry.p() {
            return Err(Error::usage(format!(
                "circuit has {} layers but parameters describe {}",
                self.geometry.p(),
                params.p()
            )));
        }
        Ok(())
    }

    /// `exp(−iγ·f(j))` for every basis index; bitwise equal to
    /// `build_cost_layer(costs, γ).factors()`.
    pub fn cost_factors(&self, gamma: f64) -> Vec<Complex64> {
        let per_level: Vec<Complex64> = self
            .levels
            .iter()
            .map(|&c| Complex64::from_polar(1.0, -(gamma * c)))
            .collect();
        self.level_of.iter().map(|&k| per_level[k as usize]).collect()
    }

    /// The circuit after `Û_I`, as alternating cost and mixer layers.
    pub fn ops(&self, params: &QaoaParams) -> Result<Vec<Op>> {
        self.check_params(params)?;
        let mut ops = Vec::new();
        for (&gamma, &beta) in params.gammas.iter().zip(&params.betas) {
            ops.push(Op::Diagonal(Arc::new(self.cost_factors(gamma))));
            ops.extend(build_mixer_layer(&self.geometry, beta)?.into_iter().map(Op::Gate));
        }
        Ok(ops)
    }

    /// Noiseless final state.
    pub fn final_state(&self, params: &QaoaParams) -> Result<StateVector> {
        let mut state = self.initial_state();
        for op in self.ops(params)? {
            op.apply(&mut state)?;
        }
        Ok(state)
    }

    /// Cost estimate under `profile`: exact for noiseless, shot-based otherwise.
    pub fn evaluate(&self, params: &QaoaParams, profile: &NoiseProfile, rng: &mut RngStream) -> Result<CostEstimate> {
        noise::estimate_cost(self, params, profile, rng)
    }

    /// Exact noiseless cost of a flat parameter vector.
    pub fn exact_cost(&self, flat: &[f64]) -> Result<f64> {
        let state = self.final_state(&QaoaParams::from_flat(flat)?)?;
        state.expectation_of_diagonal(&self.costs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_beta_mixer_is_identity() {
        let g = CircuitGeometry::default_geometry();
        let layer = build_mixer_layer(&g, 0.0).unwrap();
        assert_eq!(layer.len(), 36);
        assert!(layer.iter().all(|a| a.gate.is_identity()));
    }

    #[test]
    fn mixer_targets_follow_block_layout() {
        let g = CircuitGeometry::default_geometry();
        let layer = build_mixer_layer(&g, 0.4).unwrap();
        // coupling (0, 1): S sweep, P for k1 = {2}, then k2 = {0, 1}
        assert_eq!(layer[0].targets, vec![0, 3]);
        assert_eq!(layer[2].targets, vec![2, 5]);
        assert_eq!(layer[3].targets, vec![0, 2, 5]);
        assert_eq!(layer[4].targets, vec![1, 0, 3]);
        assert_eq!(layer[5].targets, vec![2, 1, 4]);
        assert_eq!(layer[6].targets, vec![0, 3]);
        // last coupling (3, 0)
        assert_eq!(layer[27].targets, vec![9, 0]);
    }

    #[test]
    fn initial_state_is_lowest_block_zero_bits() {
        let g = CircuitGeometry::default_geometry();
        let s = prepare_initial(&g, 3).unwrap();
        assert_eq!(s.amplitudes()[7].re, 1.0);
        assert_eq!(s.norm_sqr(), 1.0);
        assert!(prepare_initial(&g, 0).is_err());
        assert!(prepare_initial(&g, 13).is_err());
    }

    #[test]
    fn zero_params_give_initial_cost() {
        let prob = QaoaProblem::default_problem();
        let v = prob.exact_cost(&[0.0; 4]).unwrap();
        assert_eq!(v, prob.instance().cost_of_index(7));
    }

    #[test]
    fn param_dimension_mismatch() {
        let prob = QaoaProblem::default_problem();
        assert!(matches!(prob.ops(&QaoaParams::zeros(3)), Err(Error::Usage(_))));
    }

    #[test]
    fn cost_factors_match_direct_layer() {
        let prob = QaoaProblem::default_problem();
        for gamma in [0.0, 0.37, -2.1] {
            assert_eq!(
                prob.cost_factors(gamma),
                build_cost_layer(prob.costs(), gamma).factors()
            );
        }
    }

    #[test]
    fn cost_layer_cases() {
        let c = [0.25, 1.0, 3.0, 0.5];
        assert!(build_cost_layer(&c, 0.0).phases().iter().all(|&x| x == 0.0));
        let d = build_cost_layer(&c, 2.0);
        assert_eq!(d.phases(), &[0.5, 2.0, 6.0, 1.0]);
    }
}
