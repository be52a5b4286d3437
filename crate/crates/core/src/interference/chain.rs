//! Creation-operator bookkeeping through the fusion optics: input rotation,
//! the FPBS with its phase-correcting waveplates, the analysis rotation and
//! the analyzing PBSs.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_8;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{FusionError, Result};
use crate::quantum::basis::half_wave_plate;
use crate::quantum::matrix::{ComplexMatrix, I, ONE};
use crate::quantum::Pol;

/// Spatial modes: the two FPBS inputs, its outputs `1'`/`2'` and the four
/// detector ports behind the analyzing PBSs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Port {
    In1,
    In2,
    Out1,
    Out2,
    D1a,
    D1b,
    D2a,
    D2b,
}

impl Port {
    fn name(self) -> &'static str {
        match self {
            Port::In1 => "1",
            Port::In2 => "2",
            Port::Out1 => "1'",
            Port::Out2 => "2'",
            Port::D1a => "1a",
            Port::D1b => "1b",
            Port::D2a => "2a",
            Port::D2b => "2b",
        }
    }
}

/// A creation operator `a†_{pol, port}`; `pol` is `H` or `V`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ModeLabel {
    pub port: Port,
    pub pol: Pol,
}

impl ModeLabel {
    pub fn new(port: Port, pol: Pol) -> Result<Self> {
        match pol {
            Pol::H | Pol::V => Ok(Self { port, pol }),
            other => Err(FusionError::Unsupported(format!(
                "mode labels carry H or V, got {other}"
            ))),
        }
    }

    fn at(port: Port, pol: Pol) -> Self {
        Self { port, pol }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.pol, self.port.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Stage {
    InputRotation,
    Fpbs,
    AnalysisRotation,
    Pbs,
}

impl Stage {
    pub const CHAIN: [Stage; 4] = [Stage::InputRotation, Stage::Fpbs, Stage::AnalysisRotation, Stage::Pbs];

    /// Image of one creation operator under this stage.
    pub fn transform(self, label: ModeLabel) -> Result<Vec<(Complex64, ModeLabel)>> {
        use Pol::{H, V};
        use Port::*;
        let out = match (self, label.port, label.pol) {
            (Stage::InputRotation, p @ (In1 | In2), pol) => rotate(p, pol),
            (Stage::Fpbs, In1, H) => vec![(ONE, ModeLabel::at(Out2, H))],
            (Stage::Fpbs, In1, V) => vec![(I, ModeLabel::at(Out1, V))],
            (Stage::Fpbs, In2, H) => vec![(ONE, ModeLabel::at(Out1, H))],
            (Stage::Fpbs, In2, V) => vec![(-I, ModeLabel::at(Out2, V))],
            (Stage::AnalysisRotation, p @ (Out1 | Out2), pol) => rotate(p, pol),
            (Stage::Pbs, Out1, H) => vec![(ONE, ModeLabel::at(D1a, H))],
            (Stage::Pbs, Out1, V) => vec![(I, ModeLabel::at(D1b, V))],
            (Stage::Pbs, Out2, H) => vec![(ONE, ModeLabel::at(D2a, H))],
            (Stage::Pbs, Out2, V) => vec![(-I, ModeLabel::at(D2b, V))],
            _ => {
                return Err(FusionError::Unsupported(format!(
                    "{label} is not an input of stage {self:?}"
                )))
            }
        };
        Ok(out)
    }
}

fn diagonal_rotation() -> ComplexMatrix {
    half_wave_plate(FRAC_PI_8)
}

/// `a†_j → Σ_i U_ij a†_i` for the diagonal half-wave plate.
fn rotate(port: Port, pol: Pol) -> Vec<(Complex64, ModeLabel)> {
    let u = diagonal_rotation();
    let j = if pol == Pol::H { 0 } else { 1 };
    vec![
        (u[(0, j)], ModeLabel::at(port, Pol::H)),
        (u[(1, j)], ModeLabel::at(port, Pol::V)),
    ]
}

/// Applies stages in order to a single creation operator.
pub fn transform_operator(label: ModeLabel, stages: &[Stage]) -> Result<Vec<(Complex64, ModeLabel)>> {
    let mut terms = vec![(ONE, label)];
    for &stage in stages {
        let mut next: BTreeMap<ModeLabel, Complex64> = BTreeMap::new();
        for (c, l) in terms {
            for (d, m) in stage.transform(l)? {
                *next.entry(m).or_default() += c * d;
            }
        }
        terms = next.into_iter().map(|(l, c)| (c, l)).collect();
    }
    Ok(terms)
}

/// A superposition of ordered products `a†_{first}(ω1) a†_{second}(ω2)`,
/// the first operator carrying the spectral amplitude of source 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoPhotonExpr {
    pub terms: Vec<(Complex64, ModeLabel, ModeLabel)>,
}

impl TwoPhotonExpr {
    /// `a†_{a,1}(ω1) a†_{b,2}(ω2)` with `a`, `b` ∈ {H, V}.
    pub fn product(a: Pol, b: Pol) -> Result<Self> {
        Ok(Self {
            terms: vec![(ONE, ModeLabel::new(Port::In1, a)?, ModeLabel::new(Port::In2, b)?)],
        })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.iter().map(|(c, _, _)| c.norm_sqr()).sum()
    }
}

/// Coefficients over detector mode pairs after the full chain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainOutput {
    pub terms: Vec<(Complex64, ModeLabel, ModeLabel)>,
}

impl ChainOutput {
    pub fn norm_sqr(&self) -> f64 {
        self.terms.iter().map(|(c, _, _)| c.norm_sqr()).sum()
    }

    pub fn amplitude(&self, first: ModeLabel, second: ModeLabel) -> Complex64 {
        self.terms
            .iter()
            .filter(|(_, a, b)| *a == first && *b == second)
            .map(|(c, _, _)| *c)
            .sum()
    }

    /// Probability of one photon in `x` and one in `y` (`x ≠ y`). For
    /// indistinguishable wavepackets the two orderings interfere; for fully
    /// distinguishable ones they add in probability.
    pub fn coincidence(&self, x: ModeLabel, y: ModeLabel, indistinguishable: bool) -> f64 {
        let (a, b) = (self.amplitude(x, y), self.amplitude(y, x));
        if indistinguishable {
            (a + b).norm_sqr()
        } else {
            a.norm_sqr() + b.norm_sqr()
        }
    }
}

/// Pushes a two-photon input with one photon in each FPBS input through
/// every stage of the chain.
pub fn mode_transform_chain(input: &TwoPhotonExpr) -> Result<ChainOutput> {
    let mut acc: BTreeMap<(ModeLabel, ModeLabel), Complex64> = BTreeMap::new();
    for &(c, a, b) in &input.terms {
        let in_ports = [Port::In1, Port::In2];
        if !in_ports.contains(&a.port) || !in_ports.contains(&b.port) {
            return Err(FusionError::Unsupported(format!("{a}{b}: inputs must enter ports 1 and 2")));
        }
        if a.port == b.port {
            return Err(FusionError::Unsupported(format!(
                "{a}{b}: more than one photon in input mode {}",
                a.port.name()
            )));
        }
        let ta = transform_operator(a, &Stage::CHAIN)?;
        let tb = transform_operator(b, &Stage::CHAIN)?;
        for (ca, la) in &ta {
            for (cb, lb) in &tb {
                *acc.entry((*la, *lb)).or_default() += c * ca * cb;
            }
        }
    }
    Ok(ChainOutput {
        terms: acc.into_iter().map(|((a, b), c)| (c, a, b)).collect(),
    })
}
