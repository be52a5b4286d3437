//! Two-photon interference at the fusion beamsplitter: wavepackets,
//! coincidence densities, the antidip curve and its fit, and the
//! creation-operator transform chain.

pub mod antidip;
pub mod chain;
pub mod fit;
pub mod mode;

pub use antidip::{
    antidip_curve, antidip_probability, antidip_probability_mismatch,
    antidip_probability_mismatch_closed, expected_counts, integrate_delay_density,
    synthetic_antidip_counts, write_curve_csv, CurvePoint, CurveSpec, DelayGrid,
};
pub use chain::{mode_transform_chain, ChainOutput, ModeLabel, Port, Stage, TwoPhotonExpr};
pub use fit::{fit_antidip, AntidipFit};
pub use mode::{
    coincidence_density, coincidence_density_delay, delta_omega_from_lambda, DetectionWindow,
    ModeFunction,
};
