//! Dense statevector simulation.

mod gate;
mod kraus;
mod matrix;
mod state;

pub use gate::GateMatrix;
pub use kraus::{apply_kraus_trajectory, KrausSet};
pub use matrix::CMatrix;
pub(crate) use state::PendingScale;
pub use state::{StateVector, MAX_QUBITS};
