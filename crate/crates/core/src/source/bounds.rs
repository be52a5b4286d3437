use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::interference::Port;
use crate::quantum::{bell_phi_plus, fidelity, Basis, Pol, TwoQubitState};
use crate::source::fock::{fpbs_polynomial, two_source_heralded, FockMode, Polynomial, Side};
use crate::source::params::{DetectorModel, SourceParams};
use crate::tomography::simulate::all_settings;
use crate::quantum::state::POSITIVITY_TOL;
use crate::tomography::{linear_inversion, reconstruct_state};
use crate::tomography::table::{ProbabilityTable, Setting, STATE_PREP};

/// Closed-form antidip visibility limit
/// `(1 - 4n̄γ + 6n̄γ²) / (1 + 6n̄γ + 3n̄γ²)`.
pub fn higher_order_visibility(params: &SourceParams) -> f64 {
    let (n, g) = (params.mean_pairs, params.gamma());
    (1.0 - 4.0 * n * g + 6.0 * n * g * g) / (1.0 + 6.0 * n * g + 3.0 * n * g * g)
}

fn analyze(p: &Polynomial, setting: Setting) -> Polynomial {
    let mut out = Polynomial::new();
    for (mono, c) in p {
        let mut acc = Polynomial::from([(Vec::new(), *c)]);
        for mode in mono {
            let FockMode::Output { port, pol, bin } = *mode else {
                unreachable!("analyzer acts on FPBS outputs only")
            };
            let basis = if port == Port::Out1 { setting.0 } else { setting.1 };
            let rows = basis.analyzer();
            let j = usize::from(pol == Pol::V);
            let factor = [
                (rows[0][j], FockMode::Detector { port, side: Side::A, bin }),
                (rows[1][j], FockMode::Detector { port, side: Side::B, bin }),
            ];
            let mut next = Polynomial::new();
            for (m, a) in &acc {
                for &(d, f) in &factor {
                    if d.norm_sqr() == 0.0 {
                        continue;
                    }
                    let mut mm = m.clone();
                    let pos = mm.partition_point(|x| *x <= f);
                    mm.insert(pos, f);
                    *next.entry(mm).or_default() += a * d;
                }
            }
            acc = next;
        }
        for (m, a) in acc {
            *out.entry(m).or_default() += a;
        }
    }
    out
}

/// Weighted coincidence probabilities `[aa, ab, ba, bb]` for `n`, `m`
/// photons from sources 1, 2 arriving in `bins`. Outcome `(p₁, p₂)` needs
/// at least one photon at port `p₁` of `1'` and one at port `p₂` of `2'`.
pub fn term_coincidences(
    params: &SourceParams,
    model: DetectorModel,
    n: u32,
    m: u32,
    bins: (u8, u8),
    setting: Setting,
) -> Result<[f64; 4]> {
    let p = analyze(&fpbs_polynomial(n, m, bins)?, setting);
    let mut out = [0.0; 4];
    for (mono, c) in &p {
        let mut occ: BTreeMap<FockMode, u32> = BTreeMap::new();
        for &x in mono {
            *occ.entry(x).or_default() += 1;
        }
        let fact: f64 = occ.values().map(|&k| (1..=k).map(f64::from).product::<f64>()).product();
        let prob = c.norm_sqr() * fact;
        if prob == 0.0 {
            continue;
        }
        let at = |port: Port, side: Side| -> u32 {
            occ.iter()
                .filter(|(mode, _)| matches!(mode, FockMode::Detector { port: p, side: s, .. } if *p == port && *s == side))
                .map(|(_, k)| k)
                .sum()
        };
        for (i, (s1, s2)) in [(Side::A, Side::A), (Side::A, Side::B), (Side::B, Side::A), (Side::B, Side::B)]
            .into_iter()
            .enumerate()
        {
            let (k1, k2) = (at(Port::Out1, s1), at(Port::Out2, s2));
            if k1 > 0 && k2 > 0 {
                out[i] += prob * model.port_weight(params, k1) * model.port_weight(params, k2);
            }
        }
    }
    Ok(out)
}

fn source_terms(params: &SourceParams) -> Vec<(u32, u32, f64)> {
    two_source_heralded(params)
        .into_iter()
        .map(|t| {
            let n = t.count(FockMode::Signal { source: 1, pol: Pol::H });
            let m = t.count(FockMode::Signal { source: 2, pol: Pol::H });
            (n, m, t.coefficient.re)
        })
        .collect()
}

/// Post-selected coincidence probabilities over all nine settings for the
/// weighted photon-number terms `(n, m, weight)`.
pub fn coincidence_table_for(
    params: &SourceParams,
    model: DetectorModel,
    terms: &[(u32, u32, f64)],
) -> Result<ProbabilityTable> {
    let rows: Vec<(Setting, [f64; 4])> = all_settings()
        .into_par_iter()
        .map(|setting| {
            let mut acc = [0.0; 4];
            for &(n, m, w) in terms {
                let v = term_coincidences(params, model, n, m, (0, 0), setting)?;
                acc.iter_mut().zip(v).for_each(|(a, x)| *a += w * x);
            }
            Ok((setting, acc))
        })
        .collect::<Result<_>>()?;
    let mut table = ProbabilityTable::new();
    for ((a, b), v) in rows {
        let [a0, a1] = a.outcomes();
        let [b0, b1] = b.outcomes();
        for (proj, x) in [(a0, b0), (a0, b1), (a1, b0), (a1, b1)].into_iter().zip(v) {
            table.insert(STATE_PREP, proj, x, 1.0);
        }
    }
    Ok(table)
}

/// Coincidence probabilities of the heralded two-source mixture.
pub fn coincidence_table(params: &SourceParams, model: DetectorModel) -> Result<ProbabilityTable> {
    coincidence_table_for(params, model, &source_terms(params))
}

/// `(P₀ - P∞)/P∞` for the `|++⟩` outcome, with `P∞` from photons of the
/// two sources in separate time bins.
pub fn brute_force_visibility(params: &SourceParams, model: DetectorModel) -> Result<f64> {
    let xx = (Basis::X, Basis::X);
    let (mut p0, mut pinf) = (0.0, 0.0);
    for (n, m, w) in source_terms(params) {
        p0 += w * term_coincidences(params, model, n, m, (0, 0), xx)?[0];
        pinf += w * term_coincidences(params, model, n, m, (0, 1), xx)?[0];
    }
    Ok((p0 - pinf) / pinf)
}

#[derive(Clone, Debug)]
pub struct FidelityBound {
    pub fidelity: f64,
    pub rho: TwoQubitState,
    /// Linear inversion of the table had negative eigenvalues, i.e. the
    /// post-selected statistics are not those of a single two-qubit state.
    pub clamped: bool,
}

/// Maximum-likelihood state for a table of post-selected probabilities and
/// its fidelity to `|φ+⟩`, the infinite-count limit of the estimator applied
/// to sampled counts. A physical linear inversion reproduces the table and
/// is then the maximum itself.
pub fn fidelity_from_probabilities(table: &ProbabilityTable) -> Result<FidelityBound> {
    let raw = linear_inversion(table)?;
    let clamped = raw.hermitian_eigenvalues().iter().any(|&e| e < POSITIVITY_TOL);
    let rho = if clamped {
        reconstruct_state(table)?.rho
    } else {
        TwoQubitState::clamp_physical(&raw)?.0
    };
    Ok(FidelityBound {
        fidelity: fidelity(&rho, &bell_phi_plus())?,
        rho,
        clamped,
    })
}

/// Fidelity with `|φ+⟩` of the post-selected state when the only
/// imperfection is higher-order emission.
pub fn higher_order_fidelity_bound(params: &SourceParams, model: DetectorModel) -> Result<FidelityBound> {
    fidelity_from_probabilities(&coincidence_table(params, model)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct HigherOrderReport {
    pub n_bar: f64,
    pub eta: f64,
    pub gamma: f64,
    pub p0_limit: f64,
    pub p0_brute_force: f64,
    pub fidelity_bound: f64,
    pub detector_model: DetectorModel,
    pub first_order: bool,
    pub fock_cutoff: u32,
}

pub fn higher_order_report(params: &SourceParams, model: DetectorModel) -> Result<HigherOrderReport> {
    Ok(HigherOrderReport {
        n_bar: params.mean_pairs,
        eta: params.eta,
        gamma: params.gamma(),
        p0_limit: higher_order_visibility(params),
        p0_brute_force: brute_force_visibility(params, model)?,
        fidelity_bound: higher_order_fidelity_bound(params, model)?.fidelity,
        detector_model: model,
        first_order: params.first_order,
        fock_cutoff: params.fock_cutoff,
    })
}
