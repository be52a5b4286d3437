use serde::{Deserialize, Serialize};

use crate::channel::dephasing::{phase_damp_two_qubit, DephasingFunction};
use crate::channel::kraus::{operator_basis, parity_check, ChiIndex};
use crate::error::{FusionError, Result};
use crate::quantum::basis::product_ket;
use crate::quantum::matrix::ComplexMatrix;
use crate::quantum::state::DensityJson;
use crate::quantum::{Basis, Pol, TwoQubitState};

/// Tolerance on `Σ χnn = 1`.
pub const CHI_SUM_TOL: f64 = 1e-9;

/// χ matrix over `(E0, Ezz, Exy, Exx)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessMatrix {
    chi_diag: [f64; 4],
    chi_offdiag: Option<ComplexMatrix>,
}

impl ProcessMatrix {
    /// Diagonal model; entries ordered `(00, zz, xy, xx)`.
    pub fn new(chi_diag: [f64; 4]) -> Result<Self> {
        for (k, &v) in chi_diag.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(FusionError::InvalidChi(format!(
                    "chi_{} = {v} outside [0, 1]",
                    ChiIndex::ALL[k].name()
                )));
            }
        }
        let sum: f64 = chi_diag.iter().sum();
        if (sum - 1.0).abs() > CHI_SUM_TOL {
            return Err(FusionError::InvalidChi(format!("diagonal sums to {sum}")));
        }
        Ok(Self {
            chi_diag,
            chi_offdiag: None,
        })
    }

    pub fn ideal() -> Self {
        Self {
            chi_diag: [1.0, 0.0, 0.0, 0.0],
            chi_offdiag: None,
        }
    }

    /// Adds off-diagonal coherences. The matrix must be Hermitian with a zero
    /// diagonal and the full χ must be positive semidefinite.
    pub fn with_offdiag(mut self, offdiag: ComplexMatrix) -> Result<Self> {
        if offdiag.rows() != 4 || offdiag.cols() != 4 {
            return Err(FusionError::Dimension {
                expected: "4x4".into(),
                got: format!("{}x{}", offdiag.rows(), offdiag.cols()),
            });
        }
        if offdiag.hermiticity_defect() > 1e-12 || (0..4).any(|i| offdiag[(i, i)].norm() > 1e-12) {
            return Err(FusionError::InvalidChi(
                "off-diagonal part must be Hermitian with zero diagonal".into(),
            ));
        }
        let full = &ComplexMatrix::from_real_diagonal(&self.chi_diag) + &offdiag;
        if full.hermitian_eigenvalues()[0] < -1e-9 {
            return Err(FusionError::InvalidChi("chi is not positive semidefinite".into()));
        }
        self.chi_offdiag = Some(offdiag);
        Ok(self)
    }

    pub fn diag(&self) -> [f64; 4] {
        self.chi_diag
    }

    pub fn get(&self, idx: ChiIndex) -> f64 {
        self.chi_diag[idx.position()]
    }

    pub fn offdiag(&self) -> Option<&ComplexMatrix> {
        self.chi_offdiag.as_ref()
    }

    /// The process fidelity `χ00`.
    pub fn process_fidelity(&self) -> f64 {
        self.chi_diag[0]
    }

    /// `Σ_mn χmn Em ρ En†`.
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let ops = operator_basis();
        let mut out = ComplexMatrix::zeros(4, 4);
        for (m, em) in ops.iter().enumerate() {
            if self.chi_diag[m] != 0.0 {
                out = &out + &rho.conjugate_by(em).scale_real(self.chi_diag[m]);
            }
        }
        if let Some(off) = &self.chi_offdiag {
            for (m, em) in ops.iter().enumerate() {
                for (n, en) in ops.iter().enumerate() {
                    let w = off[(m, n)];
                    if m != n && w.norm() > 0.0 {
                        out = &out + &(&(em * rho) * &en.adjoint()).scale(w);
                    }
                }
            }
        }
        out
    }
}

impl ChiIndex {
    /// JSON key of the element.
    pub fn name(self) -> &'static str {
        match self {
            ChiIndex::Zero => "00",
            ChiIndex::Zz => "zz",
            ChiIndex::Xy => "xy",
            ChiIndex::Xx => "xx",
        }
    }
}

/// Post-selected output of a fusion channel.
#[derive(Clone, Debug, PartialEq)]
pub struct FusionOutcome {
    /// Unnormalized output whose trace is `success_prob`.
    pub state: TwoQubitState,
    pub success_prob: f64,
    /// Probability of leaving the coincidence basis.
    pub leak_prob: f64,
}

impl FusionOutcome {
    fn from_output(rho_in: &TwoQubitState, out: ComplexMatrix) -> Self {
        let p = out.trace().re;
        FusionOutcome {
            state: TwoQubitState::from_parts_unchecked(out, (p - 1.0).abs() <= 1e-9),
            success_prob: p,
            leak_prob: (rho_in.trace() - p).max(0.0),
        }
    }

    pub fn normalized(&self) -> Result<TwoQubitState> {
        if self.success_prob <= 0.0 {
            return Err(FusionError::ZeroTransmitted("fusion output".into()));
        }
        self.state.normalized()
    }
}

/// `E0 ρ E0†` with success probability `Tr(E0 ρ E0†)`.
pub fn ideal_fusion(rho_in: &TwoQubitState) -> Result<FusionOutcome> {
    if !rho_in.is_trace_normalized() {
        return Err(FusionError::UnnormalizedState { trace: rho_in.trace() });
    }
    let out = rho_in.rho().conjugate_by(&parity_check());
    Ok(FusionOutcome::from_output(rho_in, out))
}

/// `Σn χnn En ρ En†` (plus any off-diagonal χ terms).
pub fn experimental_fusion(rho_in: &TwoQubitState, chi: &ProcessMatrix) -> FusionOutcome {
    FusionOutcome::from_output(rho_in, chi.apply(rho_in.rho()))
}

/// χ of the fused-then-dephased channel. Only the diagonal model composes in
/// closed form; χ with coherences returns `Unsupported`.
pub fn compose_total_chi(chi_f: &ProcessMatrix, f_value: f64) -> Result<ProcessMatrix> {
    if !(0.0..=1.0).contains(&f_value) {
        return Err(FusionError::Domain(format!("dephasing value {f_value} outside [0, 1]")));
    }
    if chi_f.offdiag().is_some() {
        return Err(FusionError::Unsupported(
            "composition of a chi matrix with off-diagonal terms".into(),
        ));
    }
    let [c00, czz, cxy, cxx] = chi_f.diag();
    // Written as transfers between partners so that f = 1 and vanishing
    // odd-parity weights are reproduced without rounding.
    let loss = 0.5 * (1.0 - f_value * f_value);
    let even = loss * (c00 - czz);
    let odd = loss * (cxx - cxy);
    let mut d = [c00 - even, czz + even, cxy + odd, cxx - odd];
    for v in &mut d {
        *v = v.clamp(0.0, 1.0);
    }
    Ok(ProcessMatrix {
        chi_diag: d,
        chi_offdiag: None,
    })
}

/// A fusion channel followed by phase damping with a fixed `f`.
#[derive(Clone, Debug, PartialEq)]
pub struct FusionChannel {
    pub chi: ProcessMatrix,
    pub f_value: f64,
}

impl FusionChannel {
    pub fn new(chi: ProcessMatrix, f_value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&f_value) {
            return Err(FusionError::Domain(format!("dephasing value {f_value} outside [0, 1]")));
        }
        Ok(Self { chi, f_value })
    }

    pub fn ideal() -> Self {
        Self {
            chi: ProcessMatrix::ideal(),
            f_value: 1.0,
        }
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let fused = TwoQubitState::from_parts_unchecked(self.chi.apply(rho), false);
        phase_damp_two_qubit(&fused, self.f_value)
            .expect("f validated at construction")
            .into_rho()
    }
}

/// The three input/output basis pairings used to characterize the channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BasisMap {
    ZtoZ,
    XtoX,
    XtoY,
}

impl BasisMap {
    pub const ALL: [BasisMap; 3] = [BasisMap::ZtoZ, BasisMap::XtoX, BasisMap::XtoY];

    pub fn input_basis(self) -> Basis {
        match self {
            BasisMap::ZtoZ => Basis::Z,
            BasisMap::XtoX | BasisMap::XtoY => Basis::X,
        }
    }

    pub fn output_basis(self) -> Basis {
        match self {
            BasisMap::ZtoZ => Basis::Z,
            BasisMap::XtoX => Basis::X,
            BasisMap::XtoY => Basis::Y,
        }
    }

    /// The four input product states, each with its set of correct outputs.
    pub fn cases(self) -> Vec<((Pol, Pol), Vec<(Pol, Pol)>)> {
        use Pol::*;
        match self {
            BasisMap::ZtoZ => [(H, H), (H, V), (V, H), (V, V)]
                .into_iter()
                .map(|i| (i, vec![(H, H), (V, V)]))
                .collect(),
            BasisMap::XtoX => vec![
                ((P, P), vec![(P, P), (M, M)]),
                ((M, M), vec![(P, P), (M, M)]),
                ((P, M), vec![(P, M), (M, P)]),
                ((M, P), vec![(P, M), (M, P)]),
            ],
            BasisMap::XtoY => vec![
                ((P, P), vec![(L, R), (R, L)]),
                ((M, M), vec![(L, R), (R, L)]),
                ((P, M), vec![(L, L), (R, R)]),
                ((M, P), vec![(L, L), (R, R)]),
            ],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BasisMap::ZtoZ => "Z->Z",
            BasisMap::XtoX => "X->X",
            BasisMap::XtoY => "X->Y",
        }
    }
}

/// Basis fidelity read off χ.
pub fn basis_fidelity_model(chi: &ProcessMatrix, which: BasisMap) -> f64 {
    let partner = match which {
        BasisMap::ZtoZ => ChiIndex::Zz,
        BasisMap::XtoX => ChiIndex::Xx,
        BasisMap::XtoY => ChiIndex::Xy,
    };
    chi.get(ChiIndex::Zero) + chi.get(partner)
}

/// Basis fidelity computed by sending each input state through `channel` and
/// summing the correct-output populations, halved.
pub fn basis_fidelity_channel(
    channel: impl Fn(&ComplexMatrix) -> ComplexMatrix,
    which: BasisMap,
) -> f64 {
    let total: f64 = which
        .cases()
        .iter()
        .map(|((a, b), outs)| {
            let ket = product_ket(*a, *b);
            let out = channel(&ComplexMatrix::outer(&ket, &ket));
            outs.iter()
                .map(|(x, y)| out.expectation(&product_ket(*x, *y)).re)
                .sum::<f64>()
        })
        .sum();
    0.5 * total
}

/// Process fidelity from the three basis fidelities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProcessFidelity {
    pub value: f64,
    pub raw: f64,
    pub clamped: bool,
}

pub fn process_fidelity_from_basis(f_zz: f64, f_xx: f64, f_xy: f64) -> ProcessFidelity {
    let raw = 0.5 * (f_zz + f_xx + f_xy - 1.0);
    let value = raw.clamp(0.0, 1.0);
    ProcessFidelity {
        value,
        raw,
        clamped: value != raw,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiDiagJson {
    #[serde(rename = "00")]
    pub c00: f64,
    pub zz: f64,
    pub xy: f64,
    pub xx: f64,
}

impl From<&ProcessMatrix> for ChiDiagJson {
    fn from(chi: &ProcessMatrix) -> Self {
        let [c00, zz, xy, xx] = chi.diag();
        ChiDiagJson { c00, zz, xy, xx }
    }
}

/// χ document `{"chi_diag": {...}, "f_model": {...}}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChiJson {
    pub chi_diag: ChiDiagJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_offdiag: Option<DensityJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_model: Option<DephasingFunction>,
}

impl ChiJson {
    pub fn from_chi(chi: &ProcessMatrix, f_model: Option<DephasingFunction>) -> Self {
        ChiJson {
            chi_diag: ChiDiagJson::from(chi),
            chi_offdiag: chi.offdiag().map(DensityJson::from),
            f_model,
        }
    }

    pub fn to_chi(&self) -> Result<ProcessMatrix> {
        let d = &self.chi_diag;
        let chi = ProcessMatrix::new([d.c00, d.zz, d.xy, d.xx])?;
        match &self.chi_offdiag {
            Some(off) => chi.with_offdiag(off.to_matrix()?),
            None => Ok(chi),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{bell_phi_plus, fidelity, PureState};

    fn measured_chi() -> ProcessMatrix {
        ProcessMatrix::new([0.7425, 0.2155, 0.0165, 0.0255]).unwrap()
    }

    #[test]
    fn plus_plus_fuses_to_phi_plus_half_the_time() {
        let out = ideal_fusion(&PureState::product(Pol::P, Pol::P).density()).unwrap();
        assert!((out.success_prob - 0.5).abs() < 1e-15);
        assert!((out.leak_prob - 0.5).abs() < 1e-15);
        let f = fidelity(&out.normalized().unwrap(), &bell_phi_plus()).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parity_eigenstates() {
        let hh = ideal_fusion(&PureState::product(Pol::H, Pol::H).density()).unwrap();
        assert_eq!(hh.success_prob, 1.0);
        let hv = ideal_fusion(&PureState::product(Pol::H, Pol::V).density()).unwrap();
        assert_eq!(hv.success_prob, 0.0);
        assert!(hv.state.rho().approx_eq(&ComplexMatrix::zeros(4, 4), 0.0));
        assert!(hv.normalized().is_err());
    }

    #[test]
    fn ideal_unnormalized_input_rejected() {
        let half = TwoQubitState::unnormalized(ComplexMatrix::identity(4).scale_real(0.1)).unwrap();
        assert!(ideal_fusion(&half).is_err());
    }

    #[test]
    fn ideal_chi_reduces_to_ideal_fusion() {
        let rho = PureState::product(Pol::P, Pol::P).density();
        let a = experimental_fusion(&rho, &ProcessMatrix::ideal());
        let b = ideal_fusion(&rho).unwrap();
        assert!(a.state.rho().approx_eq(b.state.rho(), 1e-15));
    }

    #[test]
    fn measured_chi_output_fidelity() {
        let rho = PureState::product(Pol::P, Pol::P).density();
        let out = experimental_fusion(&rho, &measured_chi()).normalized().unwrap();
        let f = fidelity(&out, &bell_phi_plus()).unwrap();
        // Every non-ideal operator maps |++> onto a Bell state orthogonal to
        // |φ+>, so the fidelity is exactly χ00.
        assert!((f - 0.7425).abs() < 1e-12, "{f}");
    }

    #[test]
    fn maximally_mixed_transmits_half() {
        for chi in [ProcessMatrix::ideal(), measured_chi(), ProcessMatrix::new([0.25; 4]).unwrap()] {
            let out = experimental_fusion(&TwoQubitState::maximally_mixed(), &chi);
            assert!((out.success_prob - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn chi_validation() {
        assert!(ProcessMatrix::new([0.5, 0.5, 0.1, 0.0]).is_err());
        assert!(ProcessMatrix::new([1.1, -0.1, 0.0, 0.0]).is_err());
    }

    #[test]
    fn composition_examples() {
        let chi = measured_chi();
        assert_eq!(compose_total_chi(&chi, 1.0).unwrap().diag(), chi.diag());
        let t = compose_total_chi(&ProcessMatrix::ideal(), 0.0).unwrap();
        assert_eq!(t.diag(), [0.5, 0.5, 0.0, 0.0]);
        for f in [0.0, 0.2, 0.9] {
            let t = compose_total_chi(&ProcessMatrix::ideal(), f).unwrap();
            assert_eq!(t.get(ChiIndex::Xx), 0.0);
            assert_eq!(t.get(ChiIndex::Xy), 0.0);
        }
    }

    #[test]
    fn composition_with_coherences_unsupported() {
        let mut off = ComplexMatrix::zeros(4, 4);
        off[(0, 1)] = crate::quantum::matrix::re(0.1);
        off[(1, 0)] = crate::quantum::matrix::re(0.1);
        let chi = ProcessMatrix::new([0.5, 0.5, 0.0, 0.0]).unwrap().with_offdiag(off).unwrap();
        assert!(matches!(compose_total_chi(&chi, 0.5), Err(FusionError::Unsupported(_))));
    }

    #[test]
    fn basis_fidelity_examples() {
        for w in BasisMap::ALL {
            assert_eq!(basis_fidelity_model(&ProcessMatrix::ideal(), w), 1.0);
            let uniform = ProcessMatrix::new([0.25; 4]).unwrap();
            assert_eq!(basis_fidelity_model(&uniform, w), 0.5);
        }
        let chi = measured_chi();
        assert!((basis_fidelity_model(&chi, BasisMap::ZtoZ) - 0.958).abs() < 1e-12);
        assert!((basis_fidelity_model(&chi, BasisMap::XtoX) - 0.768).abs() < 1e-12);
        assert!((basis_fidelity_model(&chi, BasisMap::XtoY) - 0.759).abs() < 1e-12);
    }

    #[test]
    fn both_basis_fidelity_routes_agree_per_operator() {
        for idx in ChiIndex::ALL {
            let mut d = [0.0; 4];
            d[idx.position()] = 1.0;
            let chi = ProcessMatrix::new(d).unwrap();
            for w in BasisMap::ALL {
                let a = basis_fidelity_model(&chi, w);
                let b = basis_fidelity_channel(|r| chi.apply(r), w);
                assert!((a - b).abs() < 1e-12, "{idx:?} {w:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn process_fidelity_examples() {
        assert!((process_fidelity_from_basis(0.958, 0.768, 0.759).value - 0.7425).abs() < 1e-12);
        assert_eq!(process_fidelity_from_basis(1.0, 1.0, 1.0).value, 1.0);
        assert_eq!(process_fidelity_from_basis(1.0, 0.5, 0.5).value, 0.5);
        let low = process_fidelity_from_basis(0.2, 0.2, 0.2);
        assert!(low.clamped && low.value == 0.0 && low.raw < 0.0);
    }

    #[test]
    fn json_shape_and_round_trip() {
        let doc = ChiJson::from_chi(&measured_chi(), Some(DephasingFunction::default()));
        let v = serde_json::to_value(&doc).unwrap();
        assert_eq!(v["chi_diag"]["00"], 0.7425);
        assert_eq!(v["f_model"]["kind"], "gaussian_hom");
        let back: ChiJson = serde_json::from_value(v).unwrap();
        assert_eq!(back.to_chi().unwrap(), measured_chi());
    }
}
