use std::io::Write;

use quadrature::double_exponential::integrate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FusionError, Result};
use crate::interference::mode::{delta_omega_from_lambda, DetectionWindow};
use crate::numfmt::fmt_sig;

/// Absolute tolerance for τ quadrature.
pub const QUAD_TOL: f64 = 1e-10;
/// Gaussian half-width (in σt) kept around each peak of the delay density.
pub const GAUSS_SPAN: f64 = 8.0;

fn check_sigma(sigma_t: f64) -> Result<()> {
    if sigma_t > 0.0 && sigma_t.is_finite() {
        Ok(())
    } else {
        Err(FusionError::Domain(format!("sigma_t {sigma_t} ps")))
    }
}

/// `(e^{-(δτ/σt)²} + 1)/8`.
pub fn antidip_probability(delta_tau: f64, sigma_t: f64) -> Result<f64> {
    check_sigma(sigma_t)?;
    Ok(((-(delta_tau / sigma_t).powi(2)).exp() + 1.0) / 8.0)
}

/// Integrates the delay density over `|τ| ≤ half_window` (all in σt units).
/// Each Gaussian lobe is integrated over its own ±8σt support, clipped to the
/// window, so large delays keep full accuracy. The oscillating beat term is
/// split into pieces no longer than a quarter period.
pub fn integrate_delay_density(delta_tau: f64, delta_omega: f64, half_window: f64) -> f64 {
    let norm = (64.0 * std::f64::consts::PI).sqrt();
    let piece = if delta_omega == 0.0 {
        f64::INFINITY
    } else {
        0.5 * std::f64::consts::PI / delta_omega.abs()
    };
    let lobe = |center: f64, f: &dyn Fn(f64) -> f64| {
        let a = (center - GAUSS_SPAN).max(-half_window);
        let b = (center + GAUSS_SPAN).min(half_window);
        if a >= b {
            return 0.0;
        }
        let n = ((b - a) / piece).ceil().max(1.0) as usize;
        let h = (b - a) / n as f64;
        (0..n)
            .map(|k| {
                let lo = a + h * k as f64;
                let hi = if k + 1 == n { b } else { lo + h };
                integrate(f, lo, hi, QUAD_TOL / n as f64).integral
            })
            .sum()
    };
    let dt2 = delta_tau * delta_tau;
    let beat = if dt2 < 700.0 {
        lobe(0.0, &|t: f64| (-dt2 - t * t).exp() * (delta_omega * t).cos())
    } else {
        0.0
    };
    let plus = lobe(delta_tau, &|t: f64| 0.5 * (-(t - delta_tau).powi(2)).exp());
    let minus = lobe(-delta_tau, &|t: f64| 0.5 * (-(t + delta_tau).powi(2)).exp());
    (beat + plus + minus) / norm
}

/// Window-integrated coincidence probability with a carrier mismatch
/// `Δλ` around `center_lambda` (nm). Without mismatch the Gaussian integrals
/// are done analytically.
pub fn antidip_probability_mismatch(
    delta_tau: f64,
    sigma_t: f64,
    delta_lambda: f64,
    center_lambda: f64,
    window: &DetectionWindow,
) -> Result<f64> {
    check_sigma(sigma_t)?;
    if !(center_lambda > 0.0) || delta_lambda < 0.0 {
        return Err(FusionError::Domain(format!(
            "wavelengths: delta {delta_lambda} nm, center {center_lambda} nm"
        )));
    }
    if delta_lambda == 0.0 {
        return antidip_probability(delta_tau, sigma_t);
    }
    let dw = delta_omega_from_lambda(delta_lambda, center_lambda) * sigma_t;
    Ok(integrate_delay_density(
        delta_tau / sigma_t,
        dw,
        window.half_width_ps() / sigma_t,
    ))
}

/// Analytic mismatch curve `(e^{-(δτ/σt)² - (Δω σt)²/4} + 1)/8` for a window
/// much longer than the pulse.
pub fn antidip_probability_mismatch_closed(delta_tau: f64, sigma_t: f64, delta_omega: f64) -> f64 {
    let x = delta_tau / sigma_t;
    let w = delta_omega * sigma_t;
    ((-x * x - 0.25 * w * w).exp() + 1.0) / 8.0
}

/// Fit model `N_av (p0 e^{-(δτ/σt)²} + 1)/8`.
pub fn expected_counts(delta_tau: f64, n_av: f64, p0: f64, sigma_t: f64) -> f64 {
    n_av * (p0 * (-(delta_tau / sigma_t).powi(2)).exp() + 1.0) / 8.0
}

/// Inclusive uniform delay grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelayGrid {
    pub start_ps: f64,
    pub stop_ps: f64,
    pub points: usize,
}

impl DelayGrid {
    pub fn new(start_ps: f64, stop_ps: f64, points: usize) -> Result<Self> {
        if points < 2 || !(stop_ps > start_ps) || !start_ps.is_finite() || !stop_ps.is_finite() {
            return Err(FusionError::Domain(format!(
                "bad grid: {points} points over [{start_ps}, {stop_ps}] ps"
            )));
        }
        Ok(Self {
            start_ps,
            stop_ps,
            points,
        })
    }

    pub fn values(&self) -> Vec<f64> {
        let step = (self.stop_ps - self.start_ps) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.stop_ps
                } else {
                    self.start_ps + step * i as f64
                }
            })
            .collect()
    }
}

/// Inputs to a tabulated antidip curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub sigma_t_ps: f64,
    pub n_av: f64,
    pub p0: f64,
    pub delta_lambda_nm: f64,
    pub center_lambda_nm: f64,
    pub window: DetectionWindow,
    pub grid: DelayGrid,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub delta_tau_ps: f64,
    pub p_coinc: f64,
    pub expected_counts: f64,
    pub p_coinc_mismatch: Option<f64>,
}

/// Evaluates the curve over the grid, in parallel per point.
pub fn antidip_curve(spec: &CurveSpec) -> Result<Vec<CurvePoint>> {
    check_sigma(spec.sigma_t_ps)?;
    if spec.n_av <= 0.0 || !(0.0..=1.0).contains(&spec.p0) {
        return Err(FusionError::Domain(format!(
            "N_av {} and p0 {} (need N_av > 0, p0 in [0, 1])",
            spec.n_av, spec.p0
        )));
    }
    spec.grid
        .values()
        .into_par_iter()
        .map(|dt| -> Result<CurvePoint> {
            let p = antidip_probability(dt, spec.sigma_t_ps)?;
            let mismatch = if spec.delta_lambda_nm > 0.0 {
                Some(antidip_probability_mismatch(
                    dt,
                    spec.sigma_t_ps,
                    spec.delta_lambda_nm,
                    spec.center_lambda_nm,
                    &spec.window,
                )?)
            } else {
                None
            };
            Ok(CurvePoint {
                delta_tau_ps: dt,
                p_coinc: p,
                expected_counts: expected_counts(dt, spec.n_av, spec.p0, spec.sigma_t_ps),
                p_coinc_mismatch: mismatch,
            })
        })
        .collect()
}

/// Writes `delta_tau_ps,p_coinc,expected_counts[,p_coinc_mismatch]`.
pub fn write_curve_csv<W: Write>(points: &[CurvePoint], out: W) -> Result<()> {
    let with_mismatch = points.iter().any(|p| p.p_coinc_mismatch.is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["delta_tau_ps", "p_coinc", "expected_counts"];
    if with_mismatch {
        header.push("p_coinc_mismatch");
    }
    w.write_record(&header)?;
    for p in points {
        let mut row = vec![fmt_sig(p.delta_tau_ps), fmt_sig(p.p_coinc), fmt_sig(p.expected_counts)];
        if with_mismatch {
            row.push(p.p_coinc_mismatch.map(fmt_sig).unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Poisson counts with mean `expected_counts` at each delay.
pub fn synthetic_antidip_counts(
    delays: &[f64],
    n_av: f64,
    p0: f64,
    sigma_t: f64,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    delays
        .iter()
        .map(|&dt| {
            let mean = expected_counts(dt, n_av, p0, sigma_t);
            let k = if mean > 0.0 {
                Poisson::new(mean)
                    .map_err(|e| FusionError::Domain(format!("Poisson mean {mean}: {e}")))?
                    .sample(&mut rng)
            } else {
                0.0
            };
            Ok((dt, k))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints() {
        assert_eq!(antidip_probability(0.0, 1.0).unwrap(), 0.25);
        assert_eq!(antidip_probability(1e6, 1.0).unwrap(), 0.125);
        let one = antidip_probability(1.0, 1.0).unwrap();
        assert!((one - 0.170_984_930_146).abs() < 1e-12);
        assert!(antidip_probability(0.0, 0.0).is_err());
    }

    #[test]
    fn quadrature_matches_closed_form() {
        for k in 0..=16 {
            let dt = 0.25 * k as f64;
            let q = integrate_delay_density(dt, 0.0, 1500.0);
            assert!((q - antidip_probability(dt, 1.0).unwrap()).abs() < 1e-9, "{dt}");
        }
    }

    #[test]
    fn large_delay_keeps_both_lobes() {
        let q = integrate_delay_density(200.0, 0.0, 1500.0);
        assert!((q - 0.125).abs() < 1e-12);
    }

    #[test]
    fn mismatch_reduces_peak() {
        let w = DetectionWindow::default();
        let m = antidip_probability_mismatch(0.0, 1.0, 0.06, 625.0, &w).unwrap();
        assert!(m < 0.25 && m > 0.24);
        let dw = delta_omega_from_lambda(0.06, 625.0);
        assert!((m - antidip_probability_mismatch_closed(0.0, 1.0, dw)).abs() < 1e-10);
        let huge = antidip_probability_mismatch(0.0, 1.0, 50.0, 625.0, &w).unwrap();
        assert!((huge - 0.125).abs() < 1e-9);
        assert_eq!(antidip_probability_mismatch(0.0, 1.0, 0.0, 625.0, &w).unwrap(), 0.25);
    }

    #[test]
    fn expected_count_examples() {
        assert!((expected_counts(0.0, 401.0, 0.61, 1.0) - 401.0 * 1.61 / 8.0).abs() < 1e-12);
        assert!((expected_counts(50.0, 401.0, 0.61, 1.0) - 50.125).abs() < 1e-12);
        assert_eq!(expected_counts(0.3, 401.0, 0.0, 1.0), 401.0 / 8.0);
    }

    #[test]
    fn curve_csv_columns() {
        let spec = CurveSpec {
            sigma_t_ps: 1.0,
            n_av: 401.0,
            p0: 1.0,
            delta_lambda_nm: 0.06,
            center_lambda_nm: 625.0,
            window: DetectionWindow::default(),
            grid: DelayGrid::new(-4.0, 4.0, 9).unwrap(),
        };
        let pts = antidip_curve(&spec).unwrap();
        let mut buf = Vec::new();
        write_curve_csv(&pts, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("delta_tau_ps,p_coinc,expected_counts,p_coinc_mismatch\n"));
        assert_eq!(text.lines().count(), 10);
        assert!(DelayGrid::new(1.0, -1.0, 5).is_err());
    }

    #[test]
    fn synthetic_counts_are_seeded() {
        let d: Vec<f64> = (0..31).map(|i| -3.0 + 0.2 * i as f64).collect();
        let a = synthetic_antidip_counts(&d, 401.0, 0.61, 1.0, 7).unwrap();
        let b = synthetic_antidip_counts(&d, 401.0, 0.61, 1.0, 7).unwrap();
        assert_eq!(a, b);
    }
}
