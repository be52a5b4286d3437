use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{FusionError, Result};
use crate::quantum::basis::{pauli_i, product_ket};
use crate::quantum::{Basis, ComplexMatrix, TwoQubitState};
use crate::tomography::table::{missing_state_settings, OutcomeTable, Pair, Setting, Tally};

pub const MAX_ITERATIONS: usize = 5000;
/// Stop once the log-likelihood gain per detected event drops below this.
pub const GAIN_TOL: f64 = 1e-10;
const MIN_DILUTION: f64 = 1e-6;

struct Observation {
    projector: ComplexMatrix,
    ket: [Complex64; 4],
    count: f64,
}

/// Settings of one table, validated for state tomography.
struct StateData {
    observations: Vec<Observation>,
    settings: Vec<Setting>,
    prep: Pair,
    total: f64,
}

fn state_data<V: Tally>(table: &OutcomeTable<V>) -> Result<StateData> {
    let preps = table.preps();
    if preps.len() > 1 {
        return Err(FusionError::Inconsistent(format!(
            "state tomography expects one preparation, found {}",
            preps.len()
        )));
    }
    let Some(&prep) = preps.iter().next() else {
        return Err(FusionError::ZeroCounts);
    };
    let missing = missing_state_settings(table, prep);
    if !missing.is_empty() {
        return Err(FusionError::IncompleteSettings(missing));
    }
    let total = table.total();
    if !(total > 0.0) {
        return Err(FusionError::ZeroCounts);
    }
    let mut empty = Vec::new();
    let mut settings = Vec::new();
    let mut observations = Vec::new();
    for a in Basis::ALL {
        for b in Basis::ALL {
            let values = table.setting_values(prep, (a, b));
            if values.iter().sum::<f64>() <= 0.0 {
                empty.push(format!("{a}{b}"));
                continue;
            }
            settings.push((a, b));
            let [a0, a1] = a.outcomes();
            let [b0, b1] = b.outcomes();
            for ((x, y), count) in [(a0, b0), (a0, b1), (a1, b0), (a1, b1)].into_iter().zip(values) {
                let ket = product_ket(x, y);
                observations.push(Observation {
                    projector: ComplexMatrix::outer(&ket, &ket),
                    ket,
                    count,
                });
            }
        }
    }
    if !empty.is_empty() {
        return Err(FusionError::IncompleteSettings(empty));
    }
    Ok(StateData {
        observations,
        settings,
        prep,
        total,
    })
}

/// Linear-inversion estimate `¼ Σ ⟨σi⊗σj⟩ σi⊗σj`. The result is Hermitian
/// with unit trace but need not be positive.
pub fn linear_inversion<V: Tally>(table: &OutcomeTable<V>) -> Result<ComplexMatrix> {
    let data = state_data(table)?;
    let mut sums: BTreeMap<(Option<Basis>, Option<Basis>), (f64, usize)> = BTreeMap::new();
    for &(a, b) in &data.settings {
        let v = table.setting_values(data.prep, (a, b));
        let n: f64 = v.iter().sum();
        let f = v.map(|x| x / n);
        for (key, e) in [
            ((Some(a), Some(b)), f[0] - f[1] - f[2] + f[3]),
            ((Some(a), None), f[0] + f[1] - f[2] - f[3]),
            ((None, Some(b)), f[0] - f[1] + f[2] - f[3]),
        ] {
            let s = sums.entry(key).or_default();
            s.0 += e;
            s.1 += 1;
        }
    }
    let op = |b: Option<Basis>| b.map_or_else(pauli_i, Basis::pauli);
    let mut rho = ComplexMatrix::identity(4);
    for ((a, b), (s, n)) in sums {
        rho = &rho + &op(a).kron(&op(b)).scale_real(s / n as f64);
    }
    Ok(rho.scale_real(0.25))
}

/// Maximum-likelihood estimate.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub rho: TwoQubitState,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Log-likelihood after each accepted iteration, starting value first.
    pub likelihood_trace: Vec<f64>,
}

fn log_likelihood(obs: &[Observation], rho: &ComplexMatrix) -> f64 {
    obs.iter()
        .filter(|o| o.count > 0.0)
        .map(|o| {
            let p = rho.expectation(&o.ket).re;
            if p > 0.0 {
                o.count * p.ln()
            } else {
                f64::NEG_INFINITY
            }
        })
        .sum()
}

fn r_operator(obs: &[Observation], rho: &ComplexMatrix, total: f64) -> ComplexMatrix {
    let mut r = ComplexMatrix::zeros(4, 4);
    for o in obs.iter().filter(|o| o.count > 0.0) {
        let p = rho.expectation(&o.ket).re.max(1e-300);
        r = &r + &o.projector.scale_real(o.count / (p * total));
    }
    r
}

fn rrho(op: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    let m = &(op * rho) * op;
    let h = (&m + &m.adjoint()).scale_real(0.5);
    let tr = h.trace().re;
    h.scale_real(1.0 / tr)
}

/// Iterative maximum-likelihood reconstruction (`ρ → RρR`, diluted when a
/// full step would lower the likelihood) starting from `I/4`. Every iterate
/// is positive by construction and the likelihood never decreases.
pub fn reconstruct_state<V: Tally>(table: &OutcomeTable<V>) -> Result<Reconstruction> {
    let data = state_data(table)?;
    let obs = &data.observations;
    let mut rho = ComplexMatrix::identity(4).scale_real(0.25);
    let mut ll = log_likelihood(obs, &rho);
    let mut trace = vec![ll];
    let mut converged = false;
    let mut iterations = 0;
    let id = ComplexMatrix::identity(4);
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let r = r_operator(obs, &rho, data.total);
        let mut candidate = rrho(&r, &rho);
        let mut cand_ll = log_likelihood(obs, &candidate);
        let mut eps = 1.0;
        while !(cand_ll >= ll) && eps >= MIN_DILUTION {
            let op = (&id + &r.scale_real(eps)).scale_real(1.0 / (1.0 + eps));
            candidate = rrho(&op, &rho);
            cand_ll = log_likelihood(obs, &candidate);
            eps *= 0.5;
        }
        if !(cand_ll >= ll) {
            converged = true;
            break;
        }
        let gain = (cand_ll - ll) / data.total;
        rho = candidate;
        ll = cand_ll;
        trace.push(ll);
        if gain < GAIN_TOL {
            converged = true;
            break;
        }
    }
    let (state, _) = TwoQubitState::clamp_physical(&rho)?;
    Ok(Reconstruction {
        rho: state,
        log_likelihood: ll,
        iterations,
        converged,
        likelihood_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{bell_phi_plus, fidelity, purity, state_fidelity, Pol};
    use crate::tomography::simulate::{all_settings, simulate_counts, state_probabilities_table};
    use crate::tomography::table::CountTable;

    #[test]
    fn linear_inversion_is_exact_on_probabilities() {
        let rho = TwoQubitState::werner(0.7).unwrap();
        let t = state_probabilities_table(&rho, &all_settings());
        let li = linear_inversion(&t).unwrap();
        assert!(li.approx_eq(rho.rho(), 1e-12));
    }

    #[test]
    fn noiseless_phi_plus() {
        let t = state_probabilities_table(&bell_phi_plus().density(), &all_settings()).map_values(|p| p * 1e4);
        let rec = reconstruct_state(&t).unwrap();
        let f = fidelity(&rec.rho, &bell_phi_plus()).unwrap();
        assert!(f >= 0.9999, "{f} after {}", rec.iterations);
    }

    #[test]
    fn maximally_mixed_counts() {
        let t = simulate_counts(&TwoQubitState::maximally_mixed(), &all_settings(), 100_000, 3, 1.0).unwrap();
        let rec = reconstruct_state(&t).unwrap();
        assert!((purity(&rec.rho).unwrap() - 0.25).abs() < 1e-3);
    }

    #[test]
    fn likelihood_is_monotone() {
        let rho = TwoQubitState::werner(0.9).unwrap();
        let t = simulate_counts(&rho, &all_settings(), 2000, 5, 1.0).unwrap();
        let rec = reconstruct_state(&t).unwrap();
        for w in rec.likelihood_trace.windows(2) {
            assert!(w[1] >= w[0]);
        }
        assert!(state_fidelity(&rec.rho, &rho).unwrap() > 0.97);
    }

    #[test]
    fn missing_yy_is_reported() {
        let settings: Vec<_> = all_settings().into_iter().filter(|s| *s != (Basis::Y, Basis::Y)).collect();
        let t = simulate_counts(&bell_phi_plus().density(), &settings, 100, 1, 1.0).unwrap();
        match reconstruct_state(&t) {
            Err(FusionError::IncompleteSettings(m)) => assert_eq!(m, vec!["YY".to_string()]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_and_mixed_tables() {
        let zero = state_probabilities_table(&bell_phi_plus().density(), &all_settings()).map_values(|_| 0u64);
        assert!(matches!(reconstruct_state(&zero), Err(FusionError::ZeroCounts)));
        assert!(matches!(reconstruct_state(&CountTable::new()), Err(FusionError::ZeroCounts)));
        let mut two = simulate_counts(&bell_phi_plus().density(), &all_settings(), 100, 1, 1.0).unwrap();
        two.insert((Pol::H, Pol::H), (Pol::H, Pol::H), 1, 1.0);
        assert!(matches!(reconstruct_state(&two), Err(FusionError::Inconsistent(_))));
    }
}
