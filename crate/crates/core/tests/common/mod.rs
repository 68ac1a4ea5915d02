//! Dense first-quantized oracles shared by the integration tests.
#![allow(dead_code)]

use meanfield::linalg::{self, CMat};
use meanfield::{LatticeModel, Shape, C64};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn cosine(amplitude: f64) -> Shape {
    Shape::Cosine {
        amplitude,
        harmonic: 1,
        offset: 0.0,
    }
}

/// Normalized Gaussian wavepacket with momentum 0.9 per site.
pub fn packet(d: usize) -> Vec<C64> {
    let raw: Vec<C64> = (0..d)
        .map(|p| {
            let x = p as f64 - d as f64 / 3.0;
            C64::from_polar((-x * x / 3.0).exp(), 0.9 * p as f64)
        })
        .collect();
    let n = linalg::norm(&raw);
    raw.into_iter().map(|c| c / n).collect()
}

pub fn random_vector<R: Rng>(dim: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let n = linalg::norm(&v);
    v.into_iter().map(|c| c / n).collect()
}

pub fn random_hermitian<R: Rng>(dim: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    linalg::hermitian_part(&g)
}

/// Random model with nonzero `U` and an even random `V`.
pub fn random_model<R: Rng>(d: usize, rng: &mut R) -> LatticeModel {
    let u: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut v = vec![0.0; d];
    for r in 0..=d / 2 {
        let x = rng.random_range(-1.0..1.0);
        v[r] = x;
        v[(d - r) % d] = x;
    }
    LatticeModel::from_samples(d as f64 * 0.8, u, v).unwrap()
}

/// `I^{⊗before} ⊗ m ⊗ I^{⊗after}`
pub fn embed(m: &CMat, d: usize, before: usize, after: usize) -> CMat {
    let mut out = linalg::identity(1);
    for _ in 0..before {
        out = linalg::kron(&out, &linalg::identity(d));
    }
    out = linalg::kron(&out, m);
    for _ in 0..after {
        out = linalg::kron(&out, &linalg::identity(d));
    }
    out
}

/// `Σ_j h_j + (1/N) Σ_{i<j} V(x_i - x_j)` on `(C^d)^{⊗N}`, built literally.
pub fn dense_hamiltonian(model: &LatticeModel, n: usize) -> CMat {
    let d = model.d();
    let dim = d.pow(n as u32);
    let mut h = CMat::zeros(dim, dim);
    for j in 0..n {
        h = &h + &embed(model.kinetic(), d, j, n - j - 1);
    }
    let mut digits = vec![0usize; n];
    for x in 0..dim {
        meanfield::fock::decompose(x, d, &mut digits);
        let mut e = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                e += model.v_between(digits[i], digits[j]);
            }
        }
        h[(x, x)] += C64::new(e / n as f64, 0.0);
    }
    h
}

/// `exp(-i H t)` from a dense eigendecomposition.
pub fn dense_propagator(h: &CMat, t: f64) -> CMat {
    let (values, u) = linalg::hermitian_eigen(h).unwrap();
    let n = h.nrows();
    let phases = CMat::from_fn(n, n, |i, j| {
        if i == j {
            C64::from_polar(1.0, -values[i] * t)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    &(&u * &phases) * &linalg::adjoint(&u)
}

pub fn apply(m: &CMat, x: &[C64]) -> Vec<C64> {
    let mut y = vec![C64::new(0.0, 0.0); x.len()];
    linalg::matvec(m, x, &mut y);
    y
}

/// `<x, M y>`
pub fn form(x: &[C64], m: &CMat, y: &[C64]) -> C64 {
    linalg::dot(x, &apply(m, y))
}
