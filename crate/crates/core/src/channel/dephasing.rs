use serde::{Deserialize, Serialize};

use crate::channel::kraus::PhaseDampParams;
use crate::error::{FusionError, Result};
use crate::quantum::TwoQubitState;

/// Default signal pulse duration, picoseconds.
pub const DEFAULT_SIGMA_T_PS: f64 = 1.0;

/// Dephasing factor `f(δτ)` applied per σz flip.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum DephasingFunction {
    /// `exp(-(δτ/σt)²/2)`, the form matched to the antidip.
    #[serde(rename = "gaussian_hom")]
    GaussianHom { sigma_t_ps: f64 },
    #[serde(rename = "constant")]
    Constant { value: f64 },
    /// Piecewise-linear in `|δτ|` through `(delay_ps, f)` points sorted by
    /// delay; clamped to the end values outside the table.
    #[serde(rename = "custom-tabulated")]
    Tabulated { points: Vec<(f64, f64)> },
}

impl Default for DephasingFunction {
    fn default() -> Self {
        DephasingFunction::GaussianHom {
            sigma_t_ps: DEFAULT_SIGMA_T_PS,
        }
    }
}

impl DephasingFunction {
    pub fn gaussian(sigma_t_ps: f64) -> Result<Self> {
        if !(sigma_t_ps > 0.0 && sigma_t_ps.is_finite()) {
            return Err(FusionError::Domain(format!("sigma_t {sigma_t_ps} ps")));
        }
        Ok(DephasingFunction::GaussianHom { sigma_t_ps })
    }

    pub fn tabulated(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(FusionError::Domain("empty dephasing table".into()));
        }
        if points.iter().any(|&(d, f)| d < 0.0 || !(0.0..=1.0).contains(&f)) {
            return Err(FusionError::Domain(
                "table delays must be >= 0 and values in [0, 1]".into(),
            ));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(DephasingFunction::Tabulated { points })
    }

    pub fn value(&self, delta_tau_ps: f64) -> f64 {
        let d = delta_tau_ps.abs();
        match self {
            DephasingFunction::GaussianHom { sigma_t_ps } => (-0.5 * (d / sigma_t_ps).powi(2)).exp(),
            DephasingFunction::Constant { value } => *value,
            DephasingFunction::Tabulated { points } => {
                let first = points[0];
                let last = points[points.len() - 1];
                if d <= first.0 {
                    return first.1;
                }
                if d >= last.0 {
                    return last.1;
                }
                let k = points.partition_point(|p| p.0 <= d);
                let (x0, y0) = points[k - 1];
                let (x1, y1) = points[k];
                y0 + (y1 - y0) * (d - x0) / (x1 - x0)
            }
        }
    }

    pub fn sigma_t_ps(&self) -> Option<f64> {
        match self {
            DephasingFunction::GaussianHom { sigma_t_ps } => Some(*sigma_t_ps),
            _ => None,
        }
    }
}

/// Applies the joint two-qubit phase-damping channel. Populations are kept;
/// coherences differing by one σz flip are scaled by `f`, the `HH`–`VV`
/// and `HV`–`VH` coherences by `f²`.
pub fn phase_damp_two_qubit(rho: &TwoQubitState, f_value: f64) -> Result<TwoQubitState> {
    let set = PhaseDampParams::new(f_value)?.kraus_set();
    Ok(TwoQubitState::from_parts_unchecked(
        set.apply(rho.rho()),
        rho.is_trace_normalized(),
    ))
}
