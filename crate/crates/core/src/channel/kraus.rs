use serde::{Deserialize, Serialize};

use crate::error::{FusionError, Result};
use crate::quantum::basis::{pauli_i, pauli_z, HH, HV, VH, VV};
use crate::quantum::matrix::{ComplexMatrix, ONE};

/// Names for the operators used by the channel models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KrausLabel {
    E0,
    Ezz,
    Exy,
    Exx,
    K0,
    K1,
    K2,
    K3,
    E1Leak,
}

/// Operator-sum representation of a channel.
#[derive(Clone, Debug)]
pub struct KrausSet {
    operators: Vec<ComplexMatrix>,
    labels: Vec<KrausLabel>,
}

impl KrausSet {
    pub fn new(operators: Vec<ComplexMatrix>, labels: Vec<KrausLabel>) -> Result<Self> {
        if operators.is_empty() || operators.len() != labels.len() {
            return Err(FusionError::Domain(format!(
                "{} operators with {} labels",
                operators.len(),
                labels.len()
            )));
        }
        let n = operators[0].rows();
        if operators.iter().any(|k| k.rows() != n || k.cols() != n) {
            return Err(FusionError::Dimension {
                expected: format!("{n}x{n} operators"),
                got: "mixed shapes".into(),
            });
        }
        Ok(Self { operators, labels })
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn labels(&self) -> &[KrausLabel] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.operators[0].rows()
    }

    /// `Σ K†K`.
    pub fn completeness(&self) -> ComplexMatrix {
        let n = self.dim();
        self.operators
            .iter()
            .fold(ComplexMatrix::zeros(n, n), |acc, k| &acc + &(&k.adjoint() * k))
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.completeness().approx_eq(&ComplexMatrix::identity(self.dim()), tol)
    }

    /// `Σ K ρ K†`.
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let n = self.dim();
        self.operators
            .iter()
            .fold(ComplexMatrix::zeros(n, n), |acc, k| &acc + &rho.conjugate_by(k))
    }
}

/// Index of a χ element in the operator basis `(E0, Ezz, Exy, Exx)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChiIndex {
    Zero,
    Zz,
    Xy,
    Xx,
}

impl ChiIndex {
    pub const ALL: [ChiIndex; 4] = [ChiIndex::Zero, ChiIndex::Zz, ChiIndex::Xy, ChiIndex::Xx];

    pub fn position(self) -> usize {
        self as usize
    }

    pub fn label(self) -> KrausLabel {
        match self {
            ChiIndex::Zero => KrausLabel::E0,
            ChiIndex::Zz => KrausLabel::Ezz,
            ChiIndex::Xy => KrausLabel::Exy,
            ChiIndex::Xx => KrausLabel::Exx,
        }
    }

    /// Diagonal of the operator over `(HH, HV, VH, VV)`.
    ///
    /// The odd-parity pair is labelled so that the leakage operator which
    /// keeps X-basis correlations (`|HV><HV| + |VH><VH|`) carries the `xx`
    /// index and the one that converts them into Y-basis correlations
    /// (`|HV><HV| - |VH><VH|`) carries `xy`. With these labels
    /// `F(X→X) = χ00 + χxx` and `F(X→Y) = χ00 + χxy`.
    pub fn diagonal(self) -> [f64; 4] {
        match self {
            ChiIndex::Zero => [1.0, 0.0, 0.0, 1.0],
            ChiIndex::Zz => [1.0, 0.0, 0.0, -1.0],
            ChiIndex::Xy => [0.0, 1.0, -1.0, 0.0],
            ChiIndex::Xx => [0.0, 1.0, 1.0, 0.0],
        }
    }

    pub fn operator(self) -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&self.diagonal())
    }
}

/// The four-element orthogonal operator basis `(E0, Ezz, Exy, Exx)`.
pub fn operator_basis() -> [ComplexMatrix; 4] {
    ChiIndex::ALL.map(ChiIndex::operator)
}

/// Dimension of the reduced two-photon space used by [`fusion_kraus_full`]:
/// `(HH, HV, VH, VV, (HV)0, 0(HV))`.
pub const TWO_PHOTON_DIM: usize = 6;
pub const HV_IN_FIRST: usize = 4;
pub const HV_IN_SECOND: usize = 5;

/// Kraus pair `{E0, E1}` of the monitored beamsplitter on the six-state
/// two-photon space. `E1` moves odd-parity inputs to two photons in one
/// output mode.
pub fn fusion_kraus_full() -> KrausSet {
    let mut e0 = ComplexMatrix::zeros(TWO_PHOTON_DIM, TWO_PHOTON_DIM);
    e0[(HH, HH)] = ONE;
    e0[(VV, VV)] = ONE;
    e0[(HV, HV_IN_SECOND)] = ONE;
    e0[(VH, HV_IN_FIRST)] = ONE;
    let mut e1 = ComplexMatrix::zeros(TWO_PHOTON_DIM, TWO_PHOTON_DIM);
    e1[(HV_IN_SECOND, HV)] = ONE;
    e1[(HV_IN_FIRST, VH)] = ONE;
    KrausSet::new(vec![e0, e1], vec![KrausLabel::E0, KrausLabel::E1Leak]).expect("fusion set")
}

/// The parity-check operator on the coincidence basis.
pub fn parity_check() -> ComplexMatrix {
    ChiIndex::Zero.operator()
}

/// Two-qubit phase-damping Kraus amplitudes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseDampParams {
    pub alpha: f64,
    pub beta: f64,
}

impl PhaseDampParams {
    pub fn new(f_value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&f_value) {
            return Err(FusionError::Domain(format!("dephasing value {f_value} outside [0, 1]")));
        }
        Ok(Self {
            alpha: ((1.0 + f_value) / 2.0).sqrt(),
            beta: ((1.0 - f_value) / 2.0).sqrt(),
        })
    }

    /// `{α² I⊗I, αβ I⊗σz, αβ σz⊗I, β² σz⊗σz}`.
    pub fn kraus_set(&self) -> KrausSet {
        let (i, z) = (pauli_i(), pauli_z());
        let (a, b) = (self.alpha, self.beta);
        KrausSet::new(
            vec![
                i.kron(&i).scale_real(a * a),
                i.kron(&z).scale_real(a * b),
                z.kron(&i).scale_real(a * b),
                z.kron(&z).scale_real(b * b),
            ],
            vec![KrausLabel::K0, KrausLabel::K1, KrausLabel::K2, KrausLabel::K3],
        )
        .expect("phase damping set")
    }
}
