use serde::Serialize;

use crate::channel::{process_fidelity_from_basis, BasisMap, ChiIndex, ProcessMatrix};
use crate::error::{FusionError, Result};
use crate::quantum::concurrence_lower_bound;
use crate::tomography::table::{OutcomeTable, Tally};

/// Diagonals between this and zero are treated as noise and clamped.
pub const NEGATIVE_CHI_TOL: f64 = 0.02;

/// Count-ratio basis fidelity: correct outcomes over all transmitted
/// outcomes, summed across the four inputs of the basis.
pub fn basis_fidelity_from_counts<V: Tally>(table: &OutcomeTable<V>, which: BasisMap) -> Result<f64> {
    let out = which.output_basis();
    let mut missing = Vec::new();
    let (mut correct, mut total) = (0.0, 0.0);
    for (prep, good) in which.cases() {
        let [a0, a1] = out.outcomes();
        let all = [(a0, a0), (a0, a1), (a1, a0), (a1, a1)];
        for proj in all {
            match table.get(prep, proj) {
                Some(v) => {
                    total += v.as_f64();
                    if good.contains(&proj) {
                        correct += v.as_f64();
                    }
                }
                None => missing.push(format!("{}{}->{}{}", prep.0, prep.1, proj.0, proj.1)),
            }
        }
    }
    if !missing.is_empty() {
        return Err(FusionError::IncompleteSettings(missing));
    }
    if !(total > 0.0) {
        return Err(FusionError::ZeroTransmitted(which.name().into()));
    }
    Ok(correct / total)
}

/// Diagonal process estimate from the three basis fidelities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProcessEstimate {
    pub f_zz: f64,
    pub f_xx: f64,
    pub f_xy: f64,
    pub process_fidelity: f64,
    pub entanglement_capability: f64,
    /// Inverted diagonals `(00, zz, xy, xx)` before clamping.
    pub raw_diag: [f64; 4],
    /// Renormalized, non-negative diagonals.
    #[serde(skip)]
    pub chi: ProcessMatrix,
    /// Sum of the clamped diagonals minus one, removed by renormalization.
    pub sum_deviation: f64,
    pub warnings: Vec<String>,
}

pub fn process_from_basis_fidelities(f_zz: f64, f_xx: f64, f_xy: f64) -> Result<ProcessEstimate> {
    for (name, f) in [("Z->Z", f_zz), ("X->X", f_xx), ("X->Y", f_xy)] {
        if !(0.0..=1.0).contains(&f) {
            return Err(FusionError::Domain(format!("basis fidelity {name} = {f}")));
        }
    }
    let fp = process_fidelity_from_basis(f_zz, f_xx, f_xy);
    let raw_diag = [fp.raw, f_zz - fp.raw, f_xy - fp.raw, f_xx - fp.raw];
    let mut warnings = Vec::new();
    let mut diag = raw_diag;
    for (idx, v) in ChiIndex::ALL.into_iter().zip(diag.iter_mut()) {
        if *v < -NEGATIVE_CHI_TOL {
            return Err(FusionError::Inconsistent(format!(
                "chi_{} = {:.6} is below -{NEGATIVE_CHI_TOL}",
                idx.name(),
                *v
            )));
        }
        if *v < 0.0 {
            warnings.push(format!("chi_{} = {:.3e} clamped to 0", idx.name(), *v));
            *v = 0.0;
        }
    }
    let sum: f64 = diag.iter().sum();
    let sum_deviation = sum - 1.0;
    let chi = ProcessMatrix::new(diag.map(|v| (v / sum).min(1.0)))?;
    Ok(ProcessEstimate {
        f_zz,
        f_xx,
        f_xy,
        process_fidelity: fp.value,
        entanglement_capability: concurrence_lower_bound(fp.value)?,
        raw_diag,
        chi,
        sum_deviation,
        warnings,
    })
}

/// Count-ratio process estimate from a table covering all three basis maps.
pub fn process_reconstruction<V: Tally>(table: &OutcomeTable<V>) -> Result<ProcessEstimate> {
    let f = |m| basis_fidelity_from_counts(table, m);
    process_from_basis_fidelities(f(BasisMap::ZtoZ)?, f(BasisMap::XtoX)?, f(BasisMap::XtoY)?)
}
