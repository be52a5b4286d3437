use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FusionError, Result};
use crate::quantum::basis::{half_wave_plate, pauli_i, product_ket, quarter_wave_plate, Pol};
use crate::quantum::matrix::{c, ComplexMatrix, ZERO};

/// Eigenvalues below this are treated as a genuine positivity violation.
pub const POSITIVITY_TOL: f64 = -1e-9;
pub const TRACE_TOL: f64 = 1e-9;
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Normalized two-qubit pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: [Complex64; 4],
}

impl PureState {
    pub fn new(amplitudes: [Complex64; 4]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(FusionError::Domain(format!("state norm {norm} is not 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes an arbitrary non-zero vector.
    pub fn normalized(amplitudes: [Complex64; 4]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(FusionError::Domain("zero vector".into()));
        }
        Ok(Self {
            amplitudes: amplitudes.map(|a| a / norm),
        })
    }

    pub fn product(a: Pol, b: Pol) -> Self {
        Self {
            amplitudes: product_ket(a, b),
        }
    }

    pub fn amplitudes(&self) -> &[Complex64; 4] {
        &self.amplitudes
    }

    pub fn overlap(&self, other: &PureState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn density(&self) -> TwoQubitState {
        TwoQubitState {
            rho: ComplexMatrix::outer(&self.amplitudes, &self.amplitudes),
            trace_normalized: true,
        }
    }
}

/// `(|HH> + |VV>)/√2`.
pub fn bell_phi_plus() -> PureState {
    let s = c(FRAC_1_SQRT_2, 0.0);
    PureState {
        amplitudes: [s, ZERO, ZERO, s],
    }
}

/// `(|HV> - |VH>)/√2`.
pub fn bell_psi_minus() -> PureState {
    let s = FRAC_1_SQRT_2;
    PureState {
        amplitudes: [ZERO, c(s, 0.0), c(-s, 0.0), ZERO],
    }
}

/// Two-qubit density matrix in the `(HH, HV, VH, VV)` basis.
///
/// A state with `trace_normalized == false` is a post-selected output whose
/// trace is the probability of that post-selection.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoQubitState {
    rho: ComplexMatrix,
    trace_normalized: bool,
}

impl TwoQubitState {
    /// Validates Hermiticity, positivity and unit trace.
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        let state = Self::unnormalized(rho)?;
        let tr = state.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(FusionError::UnnormalizedState { trace: tr });
        }
        Ok(Self {
            rho: state.rho,
            trace_normalized: true,
        })
    }

    /// Validates Hermiticity and positivity and requires `Tr ρ ∈ [0, 1]`.
    pub fn unnormalized(rho: ComplexMatrix) -> Result<Self> {
        check_shape(&rho)?;
        let defect = rho.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(FusionError::InvalidState(format!("not Hermitian (defect {defect:e})")));
        }
        let min = rho.hermitian_eigenvalues()[0];
        if min < POSITIVITY_TOL {
            return Err(FusionError::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        let tr = rho.trace().re;
        if !(-TRACE_TOL..=1.0 + TRACE_TOL).contains(&tr) {
            return Err(FusionError::InvalidState(format!("trace {tr} outside [0, 1]")));
        }
        let trace_normalized = (tr - 1.0).abs() <= TRACE_TOL;
        Ok(Self { rho, trace_normalized })
    }

    /// Projects a Hermitian matrix with small negative eigenvalues onto the
    /// physical set: negative eigenvalues are clamped to zero and the result
    /// is renormalized. The flag reports whether clamping happened.
    pub fn clamp_physical(rho: &ComplexMatrix) -> Result<(Self, bool)> {
        check_shape(rho)?;
        let (values, _) = rho.hermitian_eigen();
        let clamped = values.iter().any(|&v| v < 0.0);
        let fixed = rho.hermitian_map(|v| v.max(0.0));
        let tr = fixed.trace().re;
        if tr <= 0.0 {
            return Err(FusionError::InvalidState("no positive spectrum".into()));
        }
        let state = Self {
            rho: fixed.scale_real(1.0 / tr),
            trace_normalized: true,
        };
        Ok((state, clamped))
    }

    pub fn maximally_mixed() -> Self {
        Self {
            rho: ComplexMatrix::identity(4).scale_real(0.25),
            trace_normalized: true,
        }
    }

    /// Werner state `p |φ+><φ+| + (1 - p) I/4`.
    pub fn werner(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(FusionError::Domain(format!("Werner weight {p} outside [0, 1]")));
        }
        let bell = bell_phi_plus().density();
        let rho = &bell.rho.scale_real(p) + &ComplexMatrix::identity(4).scale_real((1.0 - p) / 4.0);
        Ok(Self {
            rho,
            trace_normalized: true,
        })
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn into_rho(self) -> ComplexMatrix {
        self.rho
    }

    pub fn is_trace_normalized(&self) -> bool {
        self.trace_normalized
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    /// Normalized copy of a post-selected state.
    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace();
        if tr <= 0.0 {
            return Err(FusionError::UnnormalizedState { trace: tr });
        }
        Ok(Self {
            rho: self.rho.scale_real(1.0 / tr),
            trace_normalized: true,
        })
    }

    /// `<ψ|ρ|ψ>` without any normalization requirement.
    pub fn population(&self, psi: &[Complex64; 4]) -> f64 {
        self.rho.expectation(psi).re
    }

    pub(crate) fn from_parts_unchecked(rho: ComplexMatrix, trace_normalized: bool) -> Self {
        Self { rho, trace_normalized }
    }

    fn require_normalized(&self) -> Result<()> {
        if self.trace_normalized {
            Ok(())
        } else {
            Err(FusionError::UnnormalizedState { trace: self.trace() })
        }
    }

    /// Checks the three state invariants; used by tests after every operation.
    pub fn check_invariants(&self) -> Result<()> {
        Self::unnormalized(self.rho.clone()).map(|_| ())
    }
}

fn check_shape(rho: &ComplexMatrix) -> Result<()> {
    if rho.rows() != 4 || rho.cols() != 4 {
        return Err(FusionError::Dimension {
            expected: "4x4".into(),
            got: format!("{}x{}", rho.rows(), rho.cols()),
        });
    }
    Ok(())
}

/// `<ψ|ρ|ψ>` for a normalized state.
pub fn fidelity(rho: &TwoQubitState, target: &PureState) -> Result<f64> {
    rho.require_normalized()?;
    Ok(rho.population(target.amplitudes()).clamp(0.0, 1.0))
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²` between two normalized states.
pub fn state_fidelity(rho: &TwoQubitState, sigma: &TwoQubitState) -> Result<f64> {
    rho.require_normalized()?;
    sigma.require_normalized()?;
    let s = rho.rho.hermitian_map(|v| v.max(0.0).sqrt());
    let inner = &(&s * &sigma.rho) * &s;
    let root: f64 = inner.hermitian_eigenvalues().into_iter().map(|v| v.max(0.0).sqrt()).sum();
    Ok((root * root).clamp(0.0, 1.0))
}

/// `Tr ρ²`.
pub fn purity(rho: &TwoQubitState) -> Result<f64> {
    rho.require_normalized()?;
    Ok(rho.rho.hs_norm_sqr().clamp(0.0, 1.0))
}

/// Eigenvalues of ρ below this are treated as exact zeros when taking `√ρ`
/// for the concurrence; rounding there would otherwise enter as its square
/// root.
pub const SPECTRAL_FLOOR: f64 = 1e-14;

/// Wootters concurrence `max(0, λ1 - λ2 - λ3 - λ4)`, where `λi` are the
/// decreasing square roots of the eigenvalues of `ρ (σy⊗σy) ρ* (σy⊗σy)`,
/// obtained here as the singular values of `√ρ (σy⊗σy) √ρ*`.
pub fn concurrence(rho: &TwoQubitState) -> Result<f64> {
    rho.require_normalized()?;
    let yy = {
        let y = ComplexMatrix::from_row_major(2, 2, vec![ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO])
            .expect("2x2");
        y.kron(&y)
    };
    let sqrt_rho = rho
        .rho
        .hermitian_map(|v| if v > SPECTRAL_FLOOR { v.sqrt() } else { 0.0 });
    let lambdas = (&(&sqrt_rho * &yy) * &sqrt_rho.conj()).singular_values();
    let c = lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3];
    // Cancellation between equal singular values leaves rounding noise.
    Ok(if c <= SPECTRAL_FLOOR { 0.0 } else { c.min(1.0) })
}

/// `max(0, 2F - 1)`, the concurrence lower bound implied by a fidelity `F`
/// with respect to `|φ+>`.
pub fn concurrence_lower_bound(fidelity_phi_plus: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&fidelity_phi_plus) {
        return Err(FusionError::Domain(format!(
            "fidelity {fidelity_phi_plus} outside [0, 1]"
        )));
    }
    Ok((2.0 * fidelity_phi_plus - 1.0).max(0.0))
}

/// Waveplate type for [`apply_waveplate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Waveplate {
    Half,
    Quarter,
}

impl Waveplate {
    pub fn jones(self, angle: f64) -> ComplexMatrix {
        match self {
            Waveplate::Half => half_wave_plate(angle),
            Waveplate::Quarter => quarter_wave_plate(angle),
        }
    }
}

/// Lifts a single-qubit operator onto qubit 1 or 2.
pub fn lift_local(op: &ComplexMatrix, qubit: usize) -> Result<ComplexMatrix> {
    match qubit {
        1 => Ok(op.kron(&pauli_i())),
        2 => Ok(pauli_i().kron(op)),
        q => Err(FusionError::InvalidQubit(q)),
    }
}

/// Something a local unitary can act on.
pub trait LocalUnitary: Sized {
    fn apply_two_qubit(&self, u: &ComplexMatrix) -> Self;
}

impl LocalUnitary for PureState {
    fn apply_two_qubit(&self, u: &ComplexMatrix) -> Self {
        let v = u.mat_vec(&self.amplitudes);
        PureState {
            amplitudes: [v[0], v[1], v[2], v[3]],
        }
    }
}

impl LocalUnitary for TwoQubitState {
    fn apply_two_qubit(&self, u: &ComplexMatrix) -> Self {
        TwoQubitState {
            rho: self.rho.conjugate_by(u),
            trace_normalized: self.trace_normalized,
        }
    }
}

/// Applies a waveplate with fast axis at `angle` (radians from horizontal)
/// to qubit 1 or 2.
pub fn apply_waveplate<S: LocalUnitary>(
    state: &S,
    plate: Waveplate,
    angle: f64,
    qubit: usize,
) -> Result<S> {
    if !angle.is_finite() {
        return Err(FusionError::Domain(format!("waveplate angle {angle}")));
    }
    let u = lift_local(&plate.jones(angle), qubit)?;
    Ok(state.apply_two_qubit(&u))
}

/// JSON form `{"re": [[...]], "im": [[...]]}` in the fixed basis order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&ComplexMatrix> for DensityJson {
    fn from(m: &ComplexMatrix) -> Self {
        let rows = |f: fn(&Complex64) -> f64| {
            (0..m.rows())
                .map(|r| (0..m.cols()).map(|col| f(&m[(r, col)])).collect())
                .collect()
        };
        DensityJson {
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }
}

impl DensityJson {
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let n = self.re.len();
        let well_formed = self.im.len() == n
            && self.re.iter().chain(&self.im).all(|row| row.len() == n);
        if !well_formed {
            return Err(FusionError::Dimension {
                expected: "square re/im arrays of equal size".into(),
                got: format!("{} re rows, {} im rows", n, self.im.len()),
            });
        }
        Ok(ComplexMatrix::from_fn(n, n, |r, col| c(self.re[r][col], self.im[r][col])))
    }
}

impl Serialize for TwoQubitState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DensityJson::from(&self.rho).serialize(s)
    }
}

impl<'de> Deserialize<'de> for TwoQubitState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = DensityJson::deserialize(d)?;
        let m = json.to_matrix().map_err(serde::de::Error::custom)?;
        TwoQubitState::unnormalized(m).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::basis::{HH, HV, VV};
    use crate::quantum::matrix::ONE;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

    fn basis_state(i: usize) -> PureState {
        let mut a = [ZERO; 4];
        a[i] = ONE;
        PureState::new(a).unwrap()
    }

    fn incoherent_mixture() -> TwoQubitState {
        TwoQubitState::new(ComplexMatrix::from_real_diagonal(&[0.5, 0.0, 0.0, 0.5])).unwrap()
    }

    #[test]
    fn phi_plus_amplitudes() {
        let a = bell_phi_plus();
        let a = a.amplitudes();
        assert!((a[HH].re - FRAC_1_SQRT_2).abs() < 1e-15 && (a[VV].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(a[1], ZERO);
        assert_eq!(bell_phi_plus().overlap(&basis_state(HV)), ZERO);
        let rho = bell_phi_plus().density();
        assert!((fidelity(&rho, &bell_phi_plus()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fidelity_examples() {
        let phi = bell_phi_plus();
        let mixed = TwoQubitState::maximally_mixed();
        assert!((fidelity(&mixed, &phi).unwrap() - 0.25).abs() < 1e-12);
        assert!((fidelity(&incoherent_mixture(), &phi).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fidelity_rejects_unnormalized() {
        let half = TwoQubitState::unnormalized(ComplexMatrix::from_real_diagonal(&[0.5, 0.0, 0.0, 0.0]))
            .unwrap();
        assert!(matches!(
            fidelity(&half, &bell_phi_plus()),
            Err(FusionError::UnnormalizedState { .. })
        ));
        assert!(purity(&half).is_err());
        assert!(concurrence(&half).is_err());
    }

    #[test]
    fn purity_examples() {
        assert!((purity(&bell_phi_plus().density()).unwrap() - 1.0).abs() < 1e-12);
        assert!((purity(&TwoQubitState::maximally_mixed()).unwrap() - 0.25).abs() < 1e-12);
        assert!((purity(&incoherent_mixture()).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn concurrence_examples() {
        assert!((concurrence(&bell_phi_plus().density()).unwrap() - 1.0).abs() < 1e-9);
        assert!(concurrence(&basis_state(HH).density()).unwrap().abs() < 1e-9);
        let werner = TwoQubitState::werner(0.8).unwrap();
        assert!((concurrence(&werner).unwrap() - 0.7).abs() < 1e-9);
    }

    #[test]
    fn lower_bound_examples() {
        assert!((concurrence_lower_bound(0.743).unwrap() - 0.486).abs() < 1e-12);
        assert_eq!(concurrence_lower_bound(0.5).unwrap(), 0.0);
        let b = concurrence_lower_bound(0.74).unwrap();
        assert!((b - 0.48).abs() < 1e-12 && b <= 0.55);
        assert!(concurrence_lower_bound(1.2).is_err());
        assert!(concurrence_lower_bound(-0.1).is_err());
    }

    #[test]
    fn hwp_at_22_5_degrees_makes_plus() {
        let h = PureState::product(Pol::H, Pol::H);
        let out = apply_waveplate(&h, Waveplate::Half, FRAC_PI_8, 1).unwrap();
        let expected = PureState::product(Pol::P, Pol::H);
        assert!((out.overlap(&expected).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hwp_at_zero_fixes_h() {
        let h = PureState::product(Pol::H, Pol::V);
        let out = apply_waveplate(&h, Waveplate::Half, 0.0, 1).unwrap();
        assert!((out.overlap(&h).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qwp_hwp_qwp_compensator_keeps_populations() {
        for theta in [0.0, 0.3, 1.1] {
            let u = &(&quarter_wave_plate(FRAC_PI_4) * &half_wave_plate(theta)) * &quarter_wave_plate(FRAC_PI_4);
            assert!(u[(0, 1)].norm() < 1e-12 && u[(1, 0)].norm() < 1e-12);
            assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn waveplate_rejects_bad_inputs() {
        let rho = TwoQubitState::maximally_mixed();
        assert!(matches!(
            apply_waveplate(&rho, Waveplate::Half, 0.1, 3),
            Err(FusionError::InvalidQubit(3))
        ));
        assert!(apply_waveplate(&rho, Waveplate::Quarter, f64::NAN, 1).is_err());
    }

    #[test]
    fn clamp_physical_flags_negative_eigenvalues() {
        let m = ComplexMatrix::from_real_diagonal(&[0.6, 0.41, -1e-3, 0.0]);
        let (fixed, clamped) = TwoQubitState::clamp_physical(&m).unwrap();
        assert!(clamped);
        assert!((fixed.trace() - 1.0).abs() < 1e-12);
        fixed.check_invariants().unwrap();
    }

    #[test]
    fn validation_rejects_non_hermitian() {
        let mut m = ComplexMatrix::identity(4).scale_real(0.25);
        m[(0, 1)] = c(0.1, 0.0);
        assert!(TwoQubitState::new(m).is_err());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let rho = TwoQubitState::werner(0.3141592653589793).unwrap();
        let rho = apply_waveplate(&rho, Waveplate::Quarter, 0.123456789, 2).unwrap();
        let text = serde_json::to_string(&rho).unwrap();
        let back: TwoQubitState = serde_json::from_str(&text).unwrap();
        assert_eq!(back.rho(), rho.rho());
    }
}
