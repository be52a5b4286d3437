use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::BasisMap;
use crate::error::{FusionError, Result};
use crate::quantum::{bell_phi_plus, concurrence, fidelity, purity};
use crate::tomography::process::{basis_fidelity_from_counts, process_reconstruction};
use crate::tomography::reconstruct::reconstruct_state;
use crate::tomography::table::CountTable;

pub const DEFAULT_N_MC: usize = 1000;
pub const MIN_N_MC: usize = 100;

/// A value with its Monte Carlo standard deviation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub value: f64,
    #[serde(rename = "±")]
    pub err: f64,
}

/// Poisson resample of every count.
pub fn poisson_resample(table: &CountTable, seed: u64) -> CountTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    table.map_values(|n| {
        if n == 0 {
            0
        } else {
            Poisson::new(n as f64).expect("positive mean").sample(&mut rng) as u64
        }
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct McSummary {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub n_mc: usize,
    pub seed: u64,
}

/// Re-runs `estimator` on `n_mc` Poisson resamples, resample `i` seeded
/// with `seed + i`, and returns the sample mean and standard deviation of
/// every output component.
pub fn monte_carlo<F>(table: &CountTable, n_mc: usize, seed: u64, estimator: F) -> Result<McSummary>
where
    F: Fn(&CountTable) -> Result<Vec<f64>> + Sync,
{
    if n_mc < MIN_N_MC {
        return Err(FusionError::Domain(format!("n_mc = {n_mc}, need at least {MIN_N_MC}")));
    }
    let samples: Vec<Vec<f64>> = (0..n_mc as u64)
        .into_par_iter()
        .map(|i| estimator(&poisson_resample(table, seed.wrapping_add(i))))
        .collect::<Result<_>>()?;
    // Shifted by the first sample so a constant estimator gives exactly 0.
    let dim = samples[0].len();
    let n = samples.len() as f64;
    let mut mean = vec![0.0; dim];
    let mut std = vec![0.0; dim];
    for k in 0..dim {
        let shift = samples[0][k];
        let (s1, s2) = samples.iter().fold((0.0, 0.0), |(a, b), s| {
            let d = s[k] - shift;
            (a + d, b + d * d)
        });
        mean[k] = shift + s1 / n;
        std[k] = ((s2 - s1 * s1 / n) / (n - 1.0)).max(0.0).sqrt();
    }
    Ok(McSummary {
        mean,
        std,
        n_mc,
        seed,
    })
}

/// Scalar estimators available by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    BasisFidelity(BasisMap),
    ProcessFidelity,
    EntanglementCapability,
    StateFidelity,
    Purity,
    Concurrence,
}

impl Estimator {
    pub fn evaluate(self, table: &CountTable) -> Result<f64> {
        match self {
            Estimator::BasisFidelity(m) => basis_fidelity_from_counts(table, m),
            Estimator::ProcessFidelity => Ok(process_reconstruction(table)?.process_fidelity),
            Estimator::EntanglementCapability => Ok(process_reconstruction(table)?.entanglement_capability),
            Estimator::StateFidelity => fidelity(&reconstruct_state(table)?.rho, &bell_phi_plus()),
            Estimator::Purity => purity(&reconstruct_state(table)?.rho),
            Estimator::Concurrence => concurrence(&reconstruct_state(table)?.rho),
        }
    }
}

/// Point estimate on the original table with its Monte Carlo spread.
pub fn monte_carlo_errors(table: &CountTable, estimator: Estimator, n_mc: usize, seed: u64) -> Result<Metric> {
    let value = estimator.evaluate(table)?;
    let mc = monte_carlo(table, n_mc, seed, |t| Ok(vec![estimator.evaluate(t)?]))?;
    Ok(Metric { value, err: mc.std[0] })
}
