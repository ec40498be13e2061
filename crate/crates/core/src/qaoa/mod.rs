//! Hard-constrained QAOA ansatz.

mod circuit;
mod generators;
mod geometry;
mod params;

pub use circuit::{
    build_cost_layer, build_mixer_layer, prepare_initial, DiagonalPhase, GateApplication, Op, QaoaProblem,
};
pub use generators::{p_generator, pauli_x, pauli_y, s_generator};
pub use geometry::{index_sets, CircuitGeometry, Coupling};
pub use params::{canonical_bounds, masked_objective, param_name, MaskedObjective, ParamMask, QaoaParams};
