//! Modelling and characterization of a polarization-parity fusion gate fed by
//! heralded photon-pair sources.
//!
//! * [`quantum`]: two-qubit states, waveplates, fidelity, purity, concurrence.
//! * [`channel`]: Kraus and χ-matrix description of the fusion channel,
//!   phase damping and their composition.
//! * [`interference`]: spectral-temporal coincidence model of the antidip and
//!   its least-squares fit.
//! * [`source`]: higher-order four-wave-mixing emission and its effect on
//!   visibility and fidelity.
//! * [`tomography`]: synthetic counts, maximum-likelihood state
//!   reconstruction, count-ratio process estimation, Monte Carlo errors.
//! * [`pipeline`]: source → channel → tomography chains used by the CLI.

pub mod channel;
pub mod error;
pub mod interference;
pub mod numfmt;
pub mod pipeline;
pub mod quantum;
pub mod source;
pub mod tomography;

pub use error::{FusionError, Result};
