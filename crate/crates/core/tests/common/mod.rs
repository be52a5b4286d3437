#![allow(dead_code)]

use num_complex::Complex64;
use photonic_fusion::channel::ProcessMatrix;
use photonic_fusion::quantum::{ComplexMatrix, PureState, TwoQubitState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_c(r: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(r.sample(StandardNormal), r.sample(StandardNormal))
}

/// `G G† / Tr` for a 4×rank complex Gaussian `G`: a purification of
/// dimension `rank` traced down.
pub fn random_density(seed: u64, rank: usize) -> TwoQubitState {
    let mut r = rng(seed);
    let g = ComplexMatrix::from_fn(4, rank, |_, _| gaussian_c(&mut r));
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    TwoQubitState::new(m.scale_real(1.0 / tr)).unwrap()
}

pub fn random_pure(seed: u64) -> PureState {
    let mut r = rng(seed);
    PureState::normalized([gaussian_c(&mut r), gaussian_c(&mut r), gaussian_c(&mut r), gaussian_c(&mut r)]).unwrap()
}

/// Haar-random element of U(2).
pub fn random_unitary_2(r: &mut ChaCha8Rng) -> ComplexMatrix {
    let (a, b) = (gaussian_c(r), gaussian_c(r));
    let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let (a, b) = (a / n, b / n);
    let phase = Complex64::from_polar(1.0, r.random_range(0.0..std::f64::consts::TAU));
    ComplexMatrix::from_row_major(2, 2, vec![a * phase, -b.conj() * phase, b * phase, a.conj() * phase]).unwrap()
}

/// Uniform point on the probability simplex.
pub fn random_chi(seed: u64) -> ProcessMatrix {
    let mut r = rng(seed);
    let e: Vec<f64> = (0..4).map(|_| -r.random::<f64>().max(1e-300).ln()).collect();
    let s: f64 = e.iter().sum();
    let mut d = [e[0] / s, e[1] / s, e[2] / s, 0.0];
    d[3] = (1.0 - d[0] - d[1] - d[2]).max(0.0);
    ProcessMatrix::new(d).unwrap()
}
