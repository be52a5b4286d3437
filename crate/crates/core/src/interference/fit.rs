use serde::{Deserialize, Serialize};

use crate::error::{FusionError, Result};
use crate::interference::antidip::expected_counts;

pub const MAX_ITERATIONS: usize = 200;
pub const STEP_TOL: f64 = 1e-10;
/// Upper bound on the fitted visibility, leaving room for noise above 1.
pub const P0_MAX: f64 = 1.05;
/// Points with `|δτ| ≥ WING_SIGMAS·σt` are used to seed `N_av`.
pub const WING_SIGMAS: f64 = 2.0;

/// Result of the least-squares antidip fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AntidipFit {
    #[serde(rename = "N_av")]
    pub n_av: f64,
    pub p0: f64,
    pub residual: f64,
    #[serde(skip)]
    pub iterations: usize,
}

/// Gauss–Newton fit of `(N_av, p0)` to `(delay_ps, counts)` points. `p0` is
/// kept in `[0, 1.05]` by projecting each step.
pub fn fit_antidip(points: &[(f64, f64)], sigma_t: f64) -> Result<AntidipFit> {
    if points.len() < 5 {
        return Err(FusionError::Fit(format!("need at least 5 points, got {}", points.len())));
    }
    if !(sigma_t > 0.0) {
        return Err(FusionError::Domain(format!("sigma_t {sigma_t} ps")));
    }
    if points.iter().any(|(d, c)| !d.is_finite() || !c.is_finite() || *c < 0.0) {
        return Err(FusionError::Fit("non-finite or negative data".into()));
    }
    let shapes: Vec<f64> = points.iter().map(|(d, _)| (-(d / sigma_t).powi(2)).exp()).collect();
    let (gmin, gmax) = shapes
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &g| (a.min(g), b.max(g)));
    if gmax - gmin < 1e-9 {
        return Err(FusionError::Fit("all delays equivalent; dip and wings not both sampled".into()));
    }

    let wings: Vec<f64> = points
        .iter()
        .filter(|(d, _)| d.abs() >= WING_SIGMAS * sigma_t)
        .map(|&(_, c)| c)
        .collect();
    let wing_mean = if wings.is_empty() {
        points.iter().map(|&(_, c)| c).sum::<f64>() / points.len() as f64
    } else {
        wings.iter().sum::<f64>() / wings.len() as f64
    };
    if wing_mean <= 0.0 {
        return Err(FusionError::Fit("zero counts in the wings".into()));
    }
    let mut n = 8.0 * wing_mean;
    let mut p = 0.5;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        // Normal equations J^T J δ = J^T r for the two parameters.
        let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&(_, y), &g) in points.iter().zip(&shapes) {
            let jn = (p * g + 1.0) / 8.0;
            let jp = n * g / 8.0;
            let r = y - n * jn;
            a11 += jn * jn;
            a12 += jn * jp;
            a22 += jp * jp;
            b1 += jn * r;
            b2 += jp * r;
        }
        let det = a11 * a22 - a12 * a12;
        if !(det.abs() > 1e-300) {
            return Err(FusionError::Fit("singular normal equations".into()));
        }
        let dn = (a22 * b1 - a12 * b2) / det;
        let dp = (a11 * b2 - a12 * b1) / det;
        let n_new = n + dn;
        let p_new = (p + dp).clamp(0.0, P0_MAX);
        let step = ((n_new - n) / n.max(1.0)).hypot(p_new - p);
        n = n_new;
        p = p_new;
        if !(n > 0.0) {
            return Err(FusionError::Fit("N_av left the positive domain".into()));
        }
        if step < STEP_TOL {
            break;
        }
    }
    let residual = points
        .iter()
        .map(|&(d, y)| (y - expected_counts(d, n, p, sigma_t)).powi(2))
        .sum();
    Ok(AntidipFit {
        n_av: n,
        p0: p,
        residual,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        (0..31).map(|i| -3.0 + 0.2 * i as f64).collect()
    }

    #[test]
    fn noiseless_round_trip() {
        let pts: Vec<_> = grid()
            .into_iter()
            .map(|d| (d, expected_counts(d, 401.0, 0.61, 1.0)))
            .collect();
        let fit = fit_antidip(&pts, 1.0).unwrap();
        assert!((fit.n_av - 401.0).abs() < 1e-6);
        assert!((fit.p0 - 0.61).abs() < 1e-6);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn flat_data_gives_no_visibility() {
        let pts: Vec<_> = grid().into_iter().map(|d| (d, 50.0)).collect();
        let fit = fit_antidip(&pts, 1.0).unwrap();
        assert!(fit.p0.abs() < 1e-9);
        assert!((fit.n_av - 400.0).abs() < 1e-6);
    }

    #[test]
    fn degenerate_inputs() {
        let same: Vec<_> = (0..8).map(|_| (0.5, 60.0)).collect();
        assert!(matches!(fit_antidip(&same, 1.0), Err(FusionError::Fit(_))));
        let few: Vec<_> = grid().into_iter().take(4).map(|d| (d, 50.0)).collect();
        assert!(fit_antidip(&few, 1.0).is_err());
    }

    #[test]
    fn deterministic() {
        let pts: Vec<_> = grid().into_iter().map(|d| (d, 50.0 + 30.0 * (-d * d).exp() + d)).collect();
        assert_eq!(fit_antidip(&pts, 1.0).unwrap(), fit_antidip(&pts, 1.0).unwrap());
    }

    #[test]
    fn report_keys() {
        let fit = AntidipFit {
            n_av: 1.0,
            p0: 0.5,
            residual: 0.0,
            iterations: 3,
        };
        let v = serde_json::to_value(&fit).unwrap();
        assert!(v.get("N_av").is_some() && v.get("iterations").is_none());
    }
}
