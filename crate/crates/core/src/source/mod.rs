//! Heralded four-wave-mixing sources with higher-order emission: Fock-space
//! bookkeeping through the FPBS and its effect on visibility and fidelity.

pub mod bounds;
pub mod fock;
pub mod params;

pub use bounds::{
    brute_force_visibility, coincidence_table, coincidence_table_for, fidelity_from_probabilities,
    higher_order_fidelity_bound, higher_order_report, higher_order_visibility, term_coincidences,
    FidelityBound, HigherOrderReport,
};
pub use fock::{fpbs_fock_transform, fwm_state, heralded_signal, two_source_heralded, FockMode, FockTerm, Side};
pub use params::{gamma, DetectorModel, SourceParams, DEFAULT_ETA};
