//! Polarization conventions shared by every module.
//!
//! Two-qubit vectors and density matrices are always ordered
//! `(|HH>, |HV>, |VH>, |VV>)`, qubit 1 being the most significant index.
//! Single-qubit states are `H = (1, 0)`, `V = (0, 1)`,
//! `P = |+> = (H + V)/√2`, `M = |-> = (H - V)/√2`,
//! `R = (H + iV)/√2` and `L = (H - iV)/√2`.
//!
//! Waveplate angles are the fast-axis angle measured from horizontal, in
//! radians. Jones matrices are the standard ones with the global phase
//! dropped:
//!
//! ```text
//! HWP(θ) = [[cos 2θ,  sin 2θ],
//!           [sin 2θ, -cos 2θ]]
//! QWP(θ) = [[cos²θ + i sin²θ, (1 - i) sinθ cosθ],
//!           [(1 - i) sinθ cosθ, sin²θ + i cos²θ]]
//! ```

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::FusionError;
use crate::quantum::matrix::{c, ComplexMatrix, ONE, ZERO};

/// Index of each two-qubit basis element in the fixed ordering.
pub const HH: usize = 0;
pub const HV: usize = 1;
pub const VH: usize = 2;
pub const VV: usize = 3;

/// Single-qubit polarization labels. `P`/`M` stand for `+`/`-`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pol {
    H,
    V,
    P,
    M,
    R,
    L,
}

impl Pol {
    pub const ALL: [Pol; 6] = [Pol::H, Pol::V, Pol::P, Pol::M, Pol::R, Pol::L];

    pub fn ket(self) -> [Complex64; 2] {
        let s = FRAC_1_SQRT_2;
        match self {
            Pol::H => [ONE, ZERO],
            Pol::V => [ZERO, ONE],
            Pol::P => [c(s, 0.0), c(s, 0.0)],
            Pol::M => [c(s, 0.0), c(-s, 0.0)],
            Pol::R => [c(s, 0.0), c(0.0, s)],
            Pol::L => [c(s, 0.0), c(0.0, -s)],
        }
    }

    pub fn projector(self) -> ComplexMatrix {
        let k = self.ket();
        ComplexMatrix::outer(&k, &k)
    }

    pub fn basis(self) -> Basis {
        match self {
            Pol::H | Pol::V => Basis::Z,
            Pol::P | Pol::M => Basis::X,
            Pol::R | Pol::L => Basis::Y,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pol::H => 'H',
            Pol::V => 'V',
            Pol::P => 'P',
            Pol::M => 'M',
            Pol::R => 'R',
            Pol::L => 'L',
        }
    }
}

impl fmt::Display for Pol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl FromStr for Pol {
    type Err = FusionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "H" => Ok(Pol::H),
            "V" => Ok(Pol::V),
            "P" | "+" => Ok(Pol::P),
            "M" | "-" => Ok(Pol::M),
            "R" => Ok(Pol::R),
            "L" => Ok(Pol::L),
            other => Err(FusionError::UnknownLabel(other.to_string())),
        }
    }
}

/// Single-qubit measurement basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
    Y,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::Z, Basis::X, Basis::Y];

    /// The two outcomes, "port a" first.
    pub fn outcomes(self) -> [Pol; 2] {
        match self {
            Basis::Z => [Pol::H, Pol::V],
            Basis::X => [Pol::P, Pol::M],
            Basis::Y => [Pol::R, Pol::L],
        }
    }

    /// Projector pair for this basis.
    pub fn projectors(self) -> [ComplexMatrix; 2] {
        let [a, b] = self.outcomes();
        [a.projector(), b.projector()]
    }

    /// Pauli operator whose eigenbasis this is.
    pub fn pauli(self) -> ComplexMatrix {
        let [a, b] = self.projectors();
        &a - &b
    }

    /// Analyzer rows: `row[port][pol]` is the amplitude `<e_port|pol>`, so a
    /// photon in `pol` exits port `a` or `b` of the analyzing PBS with the
    /// given amplitudes.
    pub fn analyzer(self) -> [[Complex64; 2]; 2] {
        let [a, b] = self.outcomes();
        let (ka, kb) = (a.ket(), b.ket());
        [
            [ka[0].conj(), ka[1].conj()],
            [kb[0].conj(), kb[1].conj()],
        ]
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Basis::Z => "Z",
            Basis::X => "X",
            Basis::Y => "Y",
        };
        f.write_str(s)
    }
}

/// Product ket `|a>|b>` in the fixed two-qubit ordering.
pub fn product_ket(a: Pol, b: Pol) -> [Complex64; 4] {
    let (x, y) = (a.ket(), b.ket());
    [x[0] * y[0], x[0] * y[1], x[1] * y[0], x[1] * y[1]]
}

pub fn pauli_i() -> ComplexMatrix {
    ComplexMatrix::identity(2)
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real_diagonal(&[1.0, -1.0])
}

pub fn half_wave_plate(angle: f64) -> ComplexMatrix {
    let (s, co) = (2.0 * angle).sin_cos();
    ComplexMatrix::from_row_major(2, 2, vec![c(co, 0.0), c(s, 0.0), c(s, 0.0), c(-co, 0.0)])
        .expect("2x2")
}

pub fn quarter_wave_plate(angle: f64) -> ComplexMatrix {
    let (s, co) = angle.sin_cos();
    let off = c(s * co, -s * co);
    ComplexMatrix::from_row_major(
        2,
        2,
        vec![c(co * co, s * s), off, off, c(s * s, co * co)],
    )
    .expect("2x2")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::matrix::DEFAULT_TOL;

    #[test]
    fn projector_pairs_resolve_identity() {
        for b in Basis::ALL {
            let [p, q] = b.projectors();
            assert!((&p + &q).approx_eq(&ComplexMatrix::identity(2), DEFAULT_TOL));
            assert!((&p * &p).approx_eq(&p, DEFAULT_TOL));
            let vals = p.hermitian_eigenvalues();
            assert!(vals[0].abs() < 1e-12 && (vals[1] - 1.0).abs() < 1e-12, "rank one");
        }
    }

    #[test]
    fn labels_parse_both_spellings() {
        assert_eq!("+".parse::<Pol>().unwrap(), Pol::P);
        assert_eq!("M".parse::<Pol>().unwrap(), Pol::M);
        assert!("Q".parse::<Pol>().is_err());
    }

    #[test]
    fn waveplates_are_unitary() {
        for k in 0..16 {
            let a = k as f64 * 0.37;
            for u in [half_wave_plate(a), quarter_wave_plate(a)] {
                assert!((&u.adjoint() * &u).approx_eq(&ComplexMatrix::identity(2), 1e-12));
            }
        }
    }
}
