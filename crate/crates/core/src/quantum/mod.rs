//! Two-qubit polarization states, local unitaries and figures of merit.

pub mod basis;
pub mod matrix;
pub mod state;

pub use basis::{Basis, Pol};
pub use matrix::ComplexMatrix;
pub use state::{
    apply_waveplate, bell_phi_plus, bell_psi_minus, concurrence, concurrence_lower_bound,
    fidelity, purity, state_fidelity, PureState, TwoQubitState, Waveplate,
};
