use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{FusionError, Result};
use crate::interference::Port;
use crate::quantum::matrix::{I, ONE};
use crate::quantum::Pol;
use crate::source::params::SourceParams;

/// Largest total photon number pushed through the FPBS expansion.
pub const MAX_FPBS_PHOTONS: u32 = 4;

/// Detector side of an analyzing PBS.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Side {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum FockMode {
    Signal { source: u8, pol: Pol },
    Idler { source: u8, pol: Pol },
    /// FPBS output `1'` or `2'`; `bin` separates fully distinguishable
    /// arrival times.
    Output { port: Port, pol: Pol, bin: u8 },
    Detector { port: Port, side: Side, bin: u8 },
}

/// Occupation-number term. For pure states `coefficient` is the amplitude;
/// for mixtures it is a real, non-negative weight.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FockTerm {
    pub occupation: BTreeMap<FockMode, u32>,
    pub coefficient: Complex64,
}

impl FockTerm {
    pub fn new(occupation: impl IntoIterator<Item = (FockMode, u32)>, coefficient: Complex64) -> Self {
        Self {
            occupation: occupation.into_iter().filter(|&(_, n)| n > 0).collect(),
            coefficient,
        }
    }

    pub fn photons(&self) -> u32 {
        self.occupation.values().sum()
    }

    pub fn count(&self, mode: FockMode) -> u32 {
        self.occupation.get(&mode).copied().unwrap_or(0)
    }

    pub fn probability(&self) -> f64 {
        self.coefficient.norm_sqr()
    }
}

fn signal(source: u8) -> FockMode {
    FockMode::Signal { source, pol: Pol::H }
}

fn idler(source: u8) -> FockMode {
    FockMode::Idler { source, pol: Pol::H }
}

/// `N Σ αᵏ |kH, kH⟩` up to `fock_cutoff` pairs.
pub fn fwm_state(params: &SourceParams) -> Vec<FockTerm> {
    let alpha = params.alpha();
    let amps: Vec<f64> = (0..=params.fock_cutoff).map(|k| alpha.powi(k as i32)).collect();
    let norm = amps.iter().map(|a| a * a).sum::<f64>().sqrt();
    amps.iter()
        .enumerate()
        .filter(|(k, a)| *k == 0 || **a > 0.0)
        .map(|(k, a)| {
            let k = k as u32;
            FockTerm::new([(signal(1), k), (idler(1), k)], Complex64::new(a / norm, 0.0))
        })
        .collect()
}

/// Signal state after an idler click, as unnormalized weights
/// `η_k n̄^{k-1}` on `|kH⟩` (`η₁`, `n̄η₂`, ...).
pub fn heralded_signal(params: &SourceParams) -> Vec<FockTerm> {
    let max = if params.first_order { 2 } else { params.fock_cutoff };
    (1..=max)
        .map(|k| {
            let w = params.eta_n(k) * params.mean_pairs.powi(k as i32 - 1);
            FockTerm::new([(signal(1), k)], Complex64::new(w, 0.0))
        })
        .filter(|t| t.coefficient.re > 0.0)
        .collect()
}

/// Normalized two-source mixture `∝ |H,H⟩⟨H,H| + 2n̄γ(|H,2H⟩⟨H,2H| + |2H,H⟩⟨2H,H|)`.
/// With `first_order` unset every product up to the cutoff is kept.
pub fn two_source_heralded(params: &SourceParams) -> Vec<FockTerm> {
    let single = heralded_signal(params);
    let w1 = single[0].coefficient.re;
    let mut terms = Vec::new();
    for a in &single {
        for b in &single {
            let (n, m) = (a.photons(), b.photons());
            if params.first_order && n + m > 3 {
                continue;
            }
            let w = a.coefficient.re * b.coefficient.re / (w1 * w1);
            terms.push(FockTerm::new([(signal(1), n), (signal(2), m)], Complex64::new(w, 0.0)));
        }
    }
    let total: f64 = terms.iter().map(|t| t.coefficient.re).sum();
    for t in &mut terms {
        t.coefficient /= total;
    }
    terms
}

type Monomial = Vec<FockMode>;
pub(crate) type Polynomial = BTreeMap<Monomial, Complex64>;

fn multiply(p: &Polynomial, factor: &[(Complex64, FockMode)]) -> Polynomial {
    let mut out = Polynomial::new();
    for (mono, c) in p {
        for &(d, mode) in factor {
            let mut m = mono.clone();
            let pos = m.partition_point(|x| *x <= mode);
            m.insert(pos, mode);
            *out.entry(m).or_default() += c * d;
        }
    }
    out
}

/// Creation-operator polynomial after the FPBS for `n` and `m` photons from
/// sources 1 and 2, arriving in time bins `bins`.
pub(crate) fn fpbs_polynomial(n: u32, m: u32, bins: (u8, u8)) -> Result<Polynomial> {
    if n + m > MAX_FPBS_PHOTONS {
        return Err(FusionError::Unsupported(format!(
            "{} photons exceed the expansion limit of {MAX_FPBS_PHOTONS}",
            n + m
        )));
    }
    let out = |port, pol, bin| FockMode::Output { port, pol, bin };
    let a = [(ONE, out(Port::Out2, Pol::H, bins.0)), (I, out(Port::Out1, Pol::V, bins.0))];
    let b = [(ONE, out(Port::Out1, Pol::H, bins.1)), (-I, out(Port::Out2, Pol::V, bins.1))];
    let mut p = Polynomial::from([(Vec::new(), ONE)]);
    for _ in 0..n {
        p = multiply(&p, &a);
    }
    for _ in 0..m {
        p = multiply(&p, &b);
    }
    let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
    let norm = 2f64.powf(f64::from(n + m) / 2.0) * (fact(n) * fact(m)).sqrt();
    p.values_mut().for_each(|c| *c /= norm);
    Ok(p)
}

/// Converts monomials to normalized occupation terms, `|amp|² = |c|² Π kᵢ!`.
pub(crate) fn to_terms(p: &Polynomial) -> Vec<FockTerm> {
    p.iter()
        .filter(|(_, c)| c.norm_sqr() > 0.0)
        .map(|(mono, c)| {
            let mut occ: BTreeMap<FockMode, u32> = BTreeMap::new();
            for &m in mono {
                *occ.entry(m).or_default() += 1;
            }
            let f: f64 = occ.values().map(|&k| (1..=k).map(f64::from).product::<f64>()).product();
            FockTerm {
                occupation: occ,
                coefficient: c * f.sqrt(),
            }
        })
        .collect()
}

/// Expands `|nH, mH⟩` on the two signal inputs over the FPBS outputs.
pub fn fpbs_fock_transform(term: &FockTerm) -> Result<Vec<FockTerm>> {
    let n = term.count(signal(1));
    let m = term.count(signal(2));
    if term.photons() != n + m {
        return Err(FusionError::Unsupported(
            "only horizontally polarized signal photons enter the FPBS expansion".into(),
        ));
    }
    let mut out = to_terms(&fpbs_polynomial(n, m, (0, 0))?);
    for t in &mut out {
        t.coefficient *= term.coefficient;
    }
    Ok(out)
}
