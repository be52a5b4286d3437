use std::collections::BTreeMap;

use serde::Serialize;

use crate::channel::{BasisMap, ChiDiagJson};
use crate::error::Result;
use crate::quantum::state::DensityJson;
use crate::quantum::{bell_phi_plus, concurrence, fidelity, purity, TwoQubitState};
use crate::tomography::montecarlo::{monte_carlo, Metric};
use crate::tomography::process::{process_reconstruction, ProcessEstimate};
use crate::tomography::reconstruct::reconstruct_state;
use crate::tomography::table::CountTable;

#[derive(Clone, Debug, Serialize)]
pub struct StateReport {
    pub rho: DensityJson,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    pub fidelity_phi_plus: Metric,
    pub purity: Metric,
    pub concurrence: Metric,
    pub n_mc: usize,
    pub seed: u64,
}

fn state_metrics(rho: &TwoQubitState) -> Result<Vec<f64>> {
    Ok(vec![fidelity(rho, &bell_phi_plus())?, purity(rho)?, concurrence(rho)?])
}

/// Maximum-likelihood state with Monte Carlo errors on its figures of merit.
pub fn state_report(table: &CountTable, n_mc: usize, seed: u64) -> Result<StateReport> {
    let rec = reconstruct_state(table)?;
    let point = state_metrics(&rec.rho)?;
    let mc = monte_carlo(table, n_mc, seed, |t| state_metrics(&reconstruct_state(t)?.rho))?;
    let m = |i: usize| Metric {
        value: point[i],
        err: mc.std[i],
    };
    Ok(StateReport {
        rho: DensityJson::from(rec.rho.rho()),
        log_likelihood: rec.log_likelihood,
        iterations: rec.iterations,
        converged: rec.converged,
        fidelity_phi_plus: m(0),
        purity: m(1),
        concurrence: m(2),
        n_mc,
        seed,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ProcessReport {
    pub basis_fidelities: BTreeMap<String, Metric>,
    pub process_fidelity: Metric,
    pub entanglement_capability: Metric,
    pub chi_diag: ChiDiagJson,
    pub chi_sum_deviation: f64,
    pub warnings: Vec<String>,
    pub n_mc: usize,
    pub seed: u64,
}

fn process_metrics(e: &ProcessEstimate) -> Vec<f64> {
    vec![e.f_zz, e.f_xx, e.f_xy, e.process_fidelity, e.entanglement_capability]
}

/// Count-ratio process estimate with Monte Carlo errors.
pub fn process_report(table: &CountTable, n_mc: usize, seed: u64) -> Result<ProcessReport> {
    let est = process_reconstruction(table)?;
    let point = process_metrics(&est);
    let mc = monte_carlo(table, n_mc, seed, |t| Ok(process_metrics(&process_reconstruction(t)?)))?;
    let m = |i: usize| Metric {
        value: point[i],
        err: mc.std[i],
    };
    let basis_fidelities = BasisMap::ALL
        .iter()
        .enumerate()
        .map(|(i, b)| (b.name().to_string(), m(i)))
        .collect();
    Ok(ProcessReport {
        basis_fidelities,
        process_fidelity: m(3),
        entanglement_capability: m(4),
        chi_diag: ChiDiagJson::from(&est.chi),
        chi_sum_deviation: est.sum_deviation,
        warnings: est.warnings,
        n_mc,
        seed,
    })
}
