use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FusionError, Result};

/// Speed of light in nm/ps.
pub const SPEED_OF_LIGHT_NM_PER_PS: f64 = 299_792.458;

/// Gaussian single-photon wavepacket
/// `ζ(t) = (2/π)^{1/4} σ^{-1/2} exp(-((t - d)/σ)² - iωt)` with `t` in ps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeFunction {
    /// Carrier frequency, rad/ps.
    pub center_frequency: f64,
    /// Pulse duration σt, ps.
    pub pulse_duration: f64,
    /// Peak position, ps.
    pub delay: f64,
}

impl ModeFunction {
    pub fn new(center_frequency: f64, pulse_duration: f64, delay: f64) -> Result<Self> {
        if !(pulse_duration > 0.0 && pulse_duration.is_finite()) {
            return Err(FusionError::Domain(format!("pulse duration {pulse_duration} ps")));
        }
        if !center_frequency.is_finite() || !delay.is_finite() {
            return Err(FusionError::Domain("non-finite mode parameters".into()));
        }
        Ok(Self {
            center_frequency,
            pulse_duration,
            delay,
        })
    }

    /// The pair used for a relative delay `δτ`: pulse 1 at `+δτ/2`, pulse 2
    /// at `-δτ/2`, carriers differing by `Δω`.
    pub fn delayed_pair(sigma_t: f64, delta_tau: f64, delta_omega: f64) -> Result<(Self, Self)> {
        Ok((
            Self::new(0.5 * delta_omega, sigma_t, 0.5 * delta_tau)?,
            Self::new(-0.5 * delta_omega, sigma_t, -0.5 * delta_tau)?,
        ))
    }

    pub fn amplitude(&self, t: f64) -> Complex64 {
        let x = (t - self.delay) / self.pulse_duration;
        let env = (2.0 / PI).powf(0.25) / self.pulse_duration.sqrt() * (-x * x).exp();
        Complex64::from_polar(env, -self.center_frequency * t)
    }
}

/// Coincidence timing parameters, in ns.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionWindow {
    pub tau_coinc: f64,
    pub tau_rep: f64,
}

impl Default for DetectionWindow {
    fn default() -> Self {
        Self {
            tau_coinc: 3.0,
            tau_rep: 12.5,
        }
    }
}

impl DetectionWindow {
    pub fn new(tau_coinc: f64, tau_rep: f64) -> Result<Self> {
        if !(tau_coinc > 0.0 && tau_rep > tau_coinc) {
            return Err(FusionError::Domain(format!(
                "need tau_rep > tau_coinc > 0, got {tau_coinc} ns / {tau_rep} ns"
            )));
        }
        Ok(Self { tau_coinc, tau_rep })
    }

    /// Half the coincidence window, ps.
    pub fn half_width_ps(&self) -> f64 {
        500.0 * self.tau_coinc
    }
}

/// Density (per ps²) for a detection in `1a` at `t0` and in `2a` at `t0 + τ`.
pub fn coincidence_density(zeta1: &ModeFunction, zeta2: &ModeFunction, t0: f64, tau: f64) -> f64 {
    let a = zeta1.amplitude(t0 + tau) * zeta2.amplitude(t0);
    let b = zeta1.amplitude(t0) * zeta2.amplitude(t0 + tau);
    (a + b).norm_sqr() / 16.0
}

/// Dimensionless delay density in units of σt:
/// `e^{-δτ² - τ²}/√(64π) · (cos(Δω τ) + cosh(2 δτ τ))`.
pub fn delay_density_reduced(tau: f64, delta_tau: f64, delta_omega: f64) -> f64 {
    // cosh term expanded so large delays do not overflow.
    let shifted = 0.5 * ((-(tau - delta_tau).powi(2)).exp() + (-(tau + delta_tau).powi(2)).exp());
    let beat = (-delta_tau * delta_tau - tau * tau).exp() * (delta_omega * tau).cos();
    (beat + shifted) / (64.0 * PI).sqrt()
}

/// Density (per ps) of the detection-time difference `τ` after integrating
/// over `t0`. `delta_omega` is `ω1 - ω2` in rad/ps.
pub fn coincidence_density_delay(tau: f64, delta_tau: f64, delta_omega: f64, sigma_t: f64) -> f64 {
    delay_density_reduced(tau / sigma_t, delta_tau / sigma_t, delta_omega * sigma_t) / sigma_t
}

/// `Δω = 2πcΔλ/λ²` in rad/ps.
pub fn delta_omega_from_lambda(delta_lambda_nm: f64, center_lambda_nm: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT_NM_PER_PS * delta_lambda_nm / (center_lambda_nm * center_lambda_nm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use quadrature::double_exponential::integrate;

    #[test]
    fn mode_function_is_normalized() {
        for (sigma, d, w) in [(1.0, 0.0, 0.0), (0.7, 1.3, 3.0), (2.5, -4.0, -1.0)] {
            let z = ModeFunction::new(w, sigma, d).unwrap();
            let n = integrate(|t| z.amplitude(t).norm_sqr(), d - 10.0 * sigma, d + 10.0 * sigma, 1e-12);
            assert!((n.integral - 1.0).abs() < 1e-9, "{}", n.integral);
        }
    }

    #[test]
    fn equal_pulses_double_constructively() {
        let (z1, z2) = ModeFunction::delayed_pair(1.0, 0.0, 0.0).unwrap();
        let t0 = 0.3;
        let expected = 4.0 * z1.amplitude(t0).norm_sqr().powi(2) / 16.0;
        assert!((coincidence_density(&z1, &z2, t0, 0.0) - expected).abs() < 1e-15);
    }

    #[test]
    fn swap_symmetry() {
        let (z1, z2) = ModeFunction::delayed_pair(1.2, 0.8, 0.4).unwrap();
        for (t0, tau) in [(0.1, 0.5), (-1.0, 2.0), (0.7, -0.3)] {
            let a = coincidence_density(&z1, &z2, t0, tau);
            let b = coincidence_density(&z2, &z1, t0 + tau, -tau);
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn delay_density_at_origin() {
        let v = coincidence_density_delay(0.0, 0.0, 0.0, 1.0);
        assert!((v - 2.0 / (64.0 * PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn delay_density_is_the_t0_marginal() {
        for (dt, dw) in [(0.0, 0.0), (0.7, 0.0), (1.5, 0.9), (0.3, 2.0)] {
            let (z1, z2) = ModeFunction::delayed_pair(1.0, dt, dw).unwrap();
            for tau in [-1.1, 0.0, 0.4, 2.0] {
                let m = integrate(|t0| coincidence_density(&z1, &z2, t0, tau), -12.0, 12.0, 1e-13);
                let d = coincidence_density_delay(tau, dt, dw, 1.0);
                assert!((m.integral - d).abs() < 1e-8, "{dt} {dw} {tau}: {} vs {d}", m.integral);
            }
        }
    }

    #[test]
    fn double_integral_at_zero_delay_is_a_quarter() {
        let (z1, z2) = ModeFunction::delayed_pair(1.0, 0.0, 0.0).unwrap();
        let total = integrate(
            |tau| integrate(|t0| coincidence_density(&z1, &z2, t0, tau), -8.0, 8.0, 1e-13).integral,
            -8.0,
            8.0,
            1e-12,
        );
        assert!((total.integral - 0.25).abs() < 1e-9);
    }

    #[test]
    fn window_validation() {
        assert!(DetectionWindow::new(3.0, 12.5).is_ok());
        assert!(DetectionWindow::new(13.0, 12.5).is_err());
        assert_eq!(DetectionWindow::default().half_width_ps(), 1500.0);
    }
}
