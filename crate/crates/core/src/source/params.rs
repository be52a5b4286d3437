use serde::{Deserialize, Serialize};

use crate::error::{FusionError, Result};

pub const DEFAULT_FOCK_CUTOFF: u32 = 2;
/// Lumped detector efficiency used when none is given.
pub const DEFAULT_ETA: f64 = 0.1;

/// Four-wave-mixing source and detection parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceParams {
    /// Mean pairs per pulse, `n̄ = |α|²`.
    pub mean_pairs: f64,
    pub eta: f64,
    #[serde(default = "default_cutoff")]
    pub fock_cutoff: u32,
    /// Keep only terms up to first order in `n̄`.
    #[serde(default = "default_first_order")]
    pub first_order: bool,
}

fn default_cutoff() -> u32 {
    DEFAULT_FOCK_CUTOFF
}

fn default_first_order() -> bool {
    true
}

impl SourceParams {
    pub fn new(mean_pairs: f64, eta: f64) -> Result<Self> {
        Self {
            mean_pairs,
            eta,
            fock_cutoff: DEFAULT_FOCK_CUTOFF,
            first_order: true,
        }
        .validated()
    }

    pub fn with_cutoff(mut self, fock_cutoff: u32, first_order: bool) -> Result<Self> {
        self.fock_cutoff = fock_cutoff;
        self.first_order = first_order;
        self.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.mean_pairs >= 0.0 && self.mean_pairs.is_finite()) {
            return Err(FusionError::Domain(format!("mean pairs {} must be >= 0", self.mean_pairs)));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(FusionError::Domain(format!("eta {} outside (0, 1]", self.eta)));
        }
        if self.fock_cutoff < 2 {
            return Err(FusionError::Domain(format!("fock cutoff {} < 2", self.fock_cutoff)));
        }
        Ok(self)
    }

    /// `α`, taken real and non-negative.
    pub fn alpha(&self) -> f64 {
        self.mean_pairs.sqrt()
    }

    /// Click probability `1 - (1-η)^n` for `n` photons.
    pub fn eta_n(&self, n: u32) -> f64 {
        -(f64::from(n) * (-self.eta).ln_1p()).exp_m1()
    }

    /// `γ = η₂ / 2η₁`.
    pub fn gamma(&self) -> f64 {
        gamma(self.eta)
    }
}

/// `γ = η₂ / 2η₁ = 1 - η/2`.
pub fn gamma(eta: f64) -> f64 {
    1.0 - 0.5 * eta
}

/// How a detector port holding several photons is weighted against the
/// single-photon coincidence.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorModel {
    /// Weight `η_k / (k η₁)`: the click probability of a `k`-photon port
    /// shared over its photons, `γ` for two photons.
    #[default]
    HeraldMatched,
    /// A single threshold detector per port, weight `η_k / η₁`.
    Threshold,
}

impl DetectorModel {
    /// Relative weight of an event with `k ≥ 1` photons at one port.
    pub fn port_weight(self, params: &SourceParams, k: u32) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let ratio = params.eta_n(k) / params.eta_n(1);
        match self {
            DetectorModel::HeraldMatched => ratio / k as f64,
            DetectorModel::Threshold => ratio,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_limits() {
        assert!((gamma(1.0) - 0.5).abs() < 1e-15);
        assert!((gamma(0.1) - 0.95).abs() < 1e-12);
        assert!((gamma(1e-9) - 1.0).abs() < 1e-8);
        for eta in [1e-6, 0.05, 0.1, 0.5, 0.9, 1.0] {
            let p = SourceParams::new(0.1, eta).unwrap();
            assert!((p.eta_n(2) / (2.0 * p.eta_n(1)) - p.gamma()).abs() < 1e-12);
        }
    }

    #[test]
    fn validation() {
        assert!(SourceParams::new(-0.1, 0.5).is_err());
        assert!(SourceParams::new(0.1, 0.0).is_err());
        assert!(SourceParams::new(0.1, 1.2).is_err());
        assert!(SourceParams::new(0.1, 0.5).unwrap().with_cutoff(1, true).is_err());
        let p: SourceParams = serde_json::from_str(r#"{"mean_pairs":0.037,"eta":0.1}"#).unwrap();
        assert_eq!(p.fock_cutoff, 2);
        assert!(p.first_order);
    }

    #[test]
    fn port_weights() {
        let p = SourceParams::new(0.037, 0.1).unwrap();
        assert_eq!(DetectorModel::HeraldMatched.port_weight(&p, 1), 1.0);
        assert!((DetectorModel::HeraldMatched.port_weight(&p, 2) - 0.95).abs() < 1e-12);
        assert!((DetectorModel::Threshold.port_weight(&p, 2) - 1.9).abs() < 1e-12);
    }
}
