//! Fusion channel models: the parity check, the χ-parameterized experimental
//! channel, phase damping and their composition.

pub mod dephasing;
pub mod kraus;
pub mod process;

pub use dephasing::{phase_damp_two_qubit, DephasingFunction};
pub use kraus::{ChiIndex, KrausLabel, KrausSet, PhaseDampParams};
pub use process::{
    basis_fidelity_channel, basis_fidelity_model, compose_total_chi, experimental_fusion,
    ideal_fusion, process_fidelity_from_basis, BasisMap, ChiDiagJson, ChiJson, FusionChannel, FusionOutcome,
    ProcessFidelity, ProcessMatrix,
};
