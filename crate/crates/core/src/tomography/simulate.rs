use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::channel::BasisMap;
use crate::error::{FusionError, Result};
use crate::quantum::basis::product_ket;
use crate::quantum::{Basis, ComplexMatrix, TwoQubitState};
use crate::tomography::table::{CountTable, Pair, ProbabilityTable, Setting, STATE_PREP};

/// Every combination of two single-qubit Pauli bases.
pub fn all_settings() -> Vec<Setting> {
    Basis::ALL
        .iter()
        .flat_map(|&a| Basis::ALL.iter().map(move |&b| (a, b)))
        .collect()
}

/// Draws one multinomial sample by sequential binomial splitting.
pub fn multinomial(rng: &mut ChaCha8Rng, trials: u64, probs: &[f64]) -> Vec<u64> {
    let mut left = trials;
    let mut mass = 1.0;
    let last = probs.len().saturating_sub(1);
    probs
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            if i == last {
                let k = left;
                left = 0;
                return k;
            }
            let q = if mass > 0.0 { (p.max(0.0) / mass).clamp(0.0, 1.0) } else { 0.0 };
            mass -= p.max(0.0);
            let k = if left == 0 || q == 0.0 {
                0
            } else if q == 1.0 {
                left
            } else {
                Binomial::new(left, q).expect("valid binomial").sample(rng)
            };
            left -= k;
            k
        })
        .collect()
}

fn born(rho: &ComplexMatrix, proj: Pair) -> f64 {
    rho.expectation(&product_ket(proj.0, proj.1)).re.max(0.0)
}

fn state_probabilities(rho: &ComplexMatrix, setting: Setting) -> ([Pair; 4], [f64; 4]) {
    let [a0, a1] = setting.0.outcomes();
    let [b0, b1] = setting.1.outcomes();
    let projs = [(a0, b0), (a0, b1), (a1, b0), (a1, b1)];
    let mut p = projs.map(|x| born(rho, x));
    let s: f64 = p.iter().sum();
    if s > 0.0 {
        p.iter_mut().for_each(|v| *v /= s);
    }
    (projs, p)
}

/// Born-rule multinomial counts, `total_per_setting` per basis setting.
pub fn simulate_counts(
    rho: &TwoQubitState,
    settings: &[Setting],
    total_per_setting: u64,
    seed: u64,
    duration_s: f64,
) -> Result<CountTable> {
    if !rho.is_trace_normalized() {
        return Err(FusionError::UnnormalizedState { trace: rho.trace() });
    }
    if total_per_setting == 0 {
        return Err(FusionError::Domain("total_per_setting must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = CountTable::new();
    for &setting in settings {
        let (projs, p) = state_probabilities(rho.rho(), setting);
        let k = multinomial(&mut rng, total_per_setting, &p);
        for (proj, n) in projs.into_iter().zip(k) {
            table.insert(STATE_PREP, proj, n, duration_s);
        }
    }
    Ok(table)
}

/// Multinomial counts from a state-tomography probability table, each
/// setting renormalized and sampled with `trials_per_setting` events.
pub fn sample_state_table(
    probs: &ProbabilityTable,
    trials_per_setting: u64,
    seed: u64,
    duration_s: f64,
) -> Result<CountTable> {
    if trials_per_setting == 0 {
        return Err(FusionError::Domain("trials_per_setting must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = CountTable::new();
    for prep in probs.preps() {
        for setting in probs.complete_settings(prep) {
            let p = probs.setting_values(prep, setting);
            let s: f64 = p.iter().sum();
            if !(s > 0.0) {
                return Err(FusionError::ZeroTransmitted(format!("{}{}", setting.0, setting.1)));
            }
            let k = multinomial(&mut rng, trials_per_setting, &p.map(|x| x / s));
            let [a0, a1] = setting.0.outcomes();
            let [b0, b1] = setting.1.outcomes();
            for (proj, n) in [(a0, b0), (a0, b1), (a1, b0), (a1, b1)].into_iter().zip(k) {
                table.insert(prep, proj, n, duration_s);
            }
        }
    }
    Ok(table)
}

/// Exact outcome probabilities for state tomography, one unit per setting.
pub fn state_probabilities_table(rho: &TwoQubitState, settings: &[Setting]) -> ProbabilityTable {
    let mut table = ProbabilityTable::new();
    for &setting in settings {
        let (projs, p) = state_probabilities(rho.rho(), setting);
        for (proj, v) in projs.into_iter().zip(p) {
            table.insert(STATE_PREP, proj, v, 1.0);
        }
    }
    table
}

/// Preparation and output-basis pairs needed to estimate the basis
/// fidelities.
pub fn process_settings() -> Vec<(Pair, Basis)> {
    let mut out = Vec::new();
    for map in BasisMap::ALL {
        for (prep, _) in map.cases() {
            out.push((prep, map.output_basis()));
        }
    }
    out
}

fn transmitted(channel: &impl Fn(&ComplexMatrix) -> ComplexMatrix, prep: Pair, basis: Basis) -> ([Pair; 4], [f64; 4]) {
    let ket = product_ket(prep.0, prep.1);
    let out = channel(&ComplexMatrix::outer(&ket, &ket));
    let [a0, a1] = basis.outcomes();
    let projs = [(a0, a0), (a0, a1), (a1, a0), (a1, a1)];
    (projs, projs.map(|x| born(&out, x)))
}

/// Exact per-trial probabilities for every process setting. The missing
/// mass in each row is the probability that the gate rejects the input.
pub fn process_probabilities(channel: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> ProbabilityTable {
    let mut table = ProbabilityTable::new();
    for (prep, basis) in process_settings() {
        let (projs, p) = transmitted(&channel, prep, basis);
        for (proj, v) in projs.into_iter().zip(p) {
            table.insert(prep, proj, v, 1.0);
        }
    }
    table
}

/// Counts from `trials` input photon pairs per process setting: five-way
/// multinomial over the four transmitted outcomes and rejection.
pub fn simulate_process_counts(
    channel: impl Fn(&ComplexMatrix) -> ComplexMatrix,
    trials: u64,
    seed: u64,
    duration_s: f64,
) -> Result<CountTable> {
    if trials == 0 {
        return Err(FusionError::Domain("trials must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = CountTable::new();
    for (prep, basis) in process_settings() {
        let (projs, p) = transmitted(&channel, prep, basis);
        let kept: f64 = p.iter().sum();
        if kept > 1.0 + 1e-9 {
            return Err(FusionError::InvalidChi(format!("transmission {kept} exceeds 1")));
        }
        let probs = [p[0], p[1], p[2], p[3], (1.0 - kept).max(0.0)];
        let k = multinomial(&mut rng, trials, &probs);
        for (proj, n) in projs.into_iter().zip(k) {
            table.insert(prep, proj, n, duration_s);
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::FusionChannel;
    use crate::quantum::{bell_phi_plus, Pol, PureState};

    #[test]
    fn hh_in_zz_is_deterministic() {
        let rho = PureState::product(Pol::H, Pol::H).density();
        let t = simulate_counts(&rho, &[(Basis::Z, Basis::Z)], 1000, 1, 1.0).unwrap();
        assert_eq!(t.get(STATE_PREP, (Pol::H, Pol::H)), Some(1000));
        assert_eq!(t.total(), 1000.0);
    }

    #[test]
    fn phi_plus_in_xx_splits_evenly() {
        let rho = bell_phi_plus().density();
        let n = 100_000;
        let t = simulate_counts(&rho, &[(Basis::X, Basis::X)], n, 7, 1.0).unwrap();
        let pp = t.value(STATE_PREP, (Pol::P, Pol::P));
        let mm = t.value(STATE_PREP, (Pol::M, Pol::M));
        assert_eq!(pp + mm, n as f64);
        let sd = (n as f64 * 0.25).sqrt();
        assert!((pp - 0.5 * n as f64).abs() < 4.0 * sd);
    }

    fn three_sigma_misses(rho: &TwoQubitState, n: u64, seed: u64) -> usize {
        let t = simulate_counts(rho, &all_settings(), n, seed, 1.0).unwrap();
        let exact = state_probabilities_table(rho, &all_settings());
        exact
            .iter()
            .filter(|(prep, proj, e)| {
                let p = e.value;
                let sd = (p * (1.0 - p) / n as f64).sqrt();
                (t.value(*prep, *proj) / n as f64 - p).abs() > 3.0 * sd + 1e-12
            })
            .count()
    }

    #[test]
    fn frequencies_approach_born_probabilities() {
        // 36 outcomes at 3σ: more than two misses has probability ~2e-4.
        let rho = TwoQubitState::werner(0.6).unwrap();
        assert!(three_sigma_misses(&rho, 1_000_000, 11) <= 2);
    }

    #[test]
    fn three_sigma_miss_rate_is_gaussian() {
        let rho = TwoQubitState::werner(0.6).unwrap();
        let misses: usize = (0..300).map(|s| three_sigma_misses(&rho, 10_000, s)).sum();
        let rate = misses as f64 / (300.0 * 36.0);
        assert!((0.001..0.005).contains(&rate), "{rate}");
    }

    #[test]
    fn seeded_reproducibility() {
        let rho = TwoQubitState::werner(0.3).unwrap();
        let a = simulate_counts(&rho, &all_settings(), 500, 99, 1.0).unwrap();
        let b = simulate_counts(&rho, &all_settings(), 500, 99, 1.0).unwrap();
        assert_eq!(a, b);
        let c = simulate_counts(&rho, &all_settings(), 500, 100, 1.0).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn ideal_process_transmits_half_of_each_basis() {
        let ch = FusionChannel::ideal();
        let p = process_probabilities(|r| ch.apply(r));
        assert_eq!(p.len(), 48);
        let z_total: f64 = [(Pol::H, Pol::H), (Pol::H, Pol::V), (Pol::V, Pol::H), (Pol::V, Pol::V)]
            .iter()
            .map(|&prep| p.setting_values(prep, (Basis::Z, Basis::Z)).iter().sum::<f64>())
            .sum();
        assert!((z_total - 2.0).abs() < 1e-12);
    }
}
