//! Count tables, synthetic data, state and process estimation, and Monte
//! Carlo error bars.

pub mod montecarlo;
pub mod process;
pub mod reconstruct;
pub mod report;
pub mod simulate;
pub mod table;

pub use montecarlo::{monte_carlo, monte_carlo_errors, Estimator, McSummary, Metric, DEFAULT_N_MC};
pub use process::{basis_fidelity_from_counts, process_from_basis_fidelities, process_reconstruction, ProcessEstimate};
pub use reconstruct::{linear_inversion, reconstruct_state, Reconstruction};
pub use report::{process_report, state_report, ProcessReport, StateReport};
pub use simulate::{
    all_settings, process_probabilities, sample_state_table, simulate_counts, simulate_process_counts, state_probabilities_table,
};
pub use table::{ingest_counts, write_counts, CountTable, Ingested, OutcomeTable, ProbabilityTable, Tally, STATE_PREP};
