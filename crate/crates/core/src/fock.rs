//! Occupation-number representation of the bosonic symmetric subspace.
//!
//! Basis states are occupation vectors `(n_0, ..., n_{d-1})` with
//! `Σ n_p = N`, ordered reverse-lexicographically: `(N, 0, ..., 0)` has rank
//! 0 and `(0, ..., 0, N)` has the last rank. Ranking uses stars-and-bars
//! counting and costs `O(d)`.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::LatticeModel;
use crate::linalg::{self, CMat, CsrMatrix, LinearOperator, C64, ZERO};

/// Dimension above which the Hamiltonian is applied matrix-free instead of
/// through an assembled sparse matrix.
pub const SPARSE_ASSEMBLY_LIMIT: usize = 200_000;

/// Largest full tensor-space dimension `d^N` the embedding helpers accept.
pub const FULL_EMBEDDING_LIMIT: usize = 2_000_000;

/// `C(d + n - 1, n)`, the number of ways to place `n` bosons on `d` sites.
pub fn basis_dimension(d: usize, n: usize) -> Result<usize> {
    if d == 0 {
        return Err(Error::InvalidArgument("basis needs at least one site".into()));
    }
    let k = n.min(d - 1) as u128;
    let top = (d + n - 1) as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (top - i) / (i + 1) stays integral at every step
        acc = acc
            .checked_mul(top - i)
            .ok_or(Error::Overflow("basis dimension"))?
            / (i + 1);
    }
    usize::try_from(acc).map_err(|_| Error::Overflow("basis dimension"))
}

#[derive(Debug)]
pub struct OccupationBasis {
    d: usize,
    n: usize,
    dim: usize,
    occupations: Vec<u32>,
    /// `binom[a * stride + b] = C(a, b)`, zero when `b > a`.
    binom: Vec<usize>,
    stride: usize,
}

impl PartialEq for OccupationBasis {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.n == other.n
    }
}

impl OccupationBasis {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        let dim = basis_dimension(d, n)?;
        let stride = d + n + 1;
        let mut binom = vec![0usize; stride * stride];
        for a in 0..stride {
            binom[a * stride] = 1;
            for b in 1..=a {
                let left = binom[(a - 1) * stride + b - 1];
                let right = if b < a { binom[(a - 1) * stride + b] } else { 0 };
                // saturate: entries beyond the basis dimension are never queried
                binom[a * stride + b] = left.saturating_add(right);
            }
        }

        let mut occupations = Vec::with_capacity(dim * d);
        let mut current = vec![0u32; d];
        current[0] = n as u32;
        loop {
            occupations.extend_from_slice(&current);
            // successor in reverse-lexicographic order
            let Some(p) = (0..d.saturating_sub(1)).rev().find(|&p| current[p] > 0) else {
                break;
            };
            let tail: u32 = current[p + 1..].iter().sum();
            current[p] -= 1;
            current[p + 1..].iter_mut().for_each(|x| *x = 0);
            current[p + 1] = tail + 1;
        }
        debug_assert_eq!(occupations.len(), dim * d);

        Ok(Self {
            d,
            n,
            dim,
            occupations,
            binom,
            stride,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_particles(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn choose(&self, a: usize, b: usize) -> usize {
        self.binom[a * self.stride + b]
    }

    /// Occupation vector of basis state `index`.
    #[inline]
    pub fn unrank(&self, index: usize) -> &[u32] {
        &self.occupations[index * self.d..(index + 1) * self.d]
    }

    /// Index of an occupation vector. The vector must have `d` entries
    /// summing to `N`.
    #[inline]
    pub fn rank(&self, occ: &[u32]) -> usize {
        debug_assert_eq!(occ.len(), self.d);
        let mut remaining = self.n;
        let mut index = 0;
        for p in 0..self.d - 1 {
            let np = occ[p] as usize;
            if remaining > np {
                let sites_after = self.d - p - 1;
                let m = remaining - np - 1;
                index += self.choose(sites_after + m, m);
            }
            remaining -= np;
        }
        index
    }

    pub fn states(&self) -> impl Iterator<Item = &[u32]> {
        self.occupations.chunks_exact(self.d)
    }

    /// `N! / Π_p n_p!` for basis state `index`.
    pub fn multinomial(&self, index: usize) -> f64 {
        let log = ln_factorial(self.n)
            - self
                .unrank(index)
                .iter()
                .map(|&k| ln_factorial(k as usize))
                .sum::<f64>();
        log.exp().round()
    }
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// A normalized (or about-to-be-normalized) vector in the symmetric subspace.
#[derive(Debug, Clone)]
pub struct SymmetricState {
    basis: Arc<OccupationBasis>,
    amplitudes: Vec<C64>,
}

impl SymmetricState {
    pub fn new(basis: Arc<OccupationBasis>, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: amplitudes.len(),
            });
        }
        Ok(Self { basis, amplitudes })
    }

    /// The basis vector `|n_0, ..., n_{d-1}>`.
    pub fn fock(basis: Arc<OccupationBasis>, occ: &[u32]) -> Result<Self> {
        if occ.len() != basis.d() || occ.iter().map(|&x| x as usize).sum::<usize>() != basis.n_particles() {
            return Err(Error::InvalidArgument(format!(
                "occupation {occ:?} does not belong to the d={}, N={} basis",
                basis.d(),
                basis.n_particles()
            )));
        }
        let mut amplitudes = vec![ZERO; basis.dim()];
        amplitudes[basis.rank(occ)] = linalg::ONE;
        Ok(Self { basis, amplitudes })
    }

    /// Normalized complex-Gaussian random state.
    pub fn random<R: Rng>(basis: Arc<OccupationBasis>, rng: &mut R) -> Self {
        let mut amplitudes: Vec<C64> = (0..basis.dim())
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let nrm = linalg::norm(&amplitudes);
        linalg::scale(&mut amplitudes, C64::new(1.0 / nrm, 0.0));
        Self { basis, amplitudes }
    }

    pub fn basis(&self) -> &Arc<OccupationBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.amplitudes)
    }

    /// Renormalizes when the norm drifted more than `tol` from one and
    /// returns the drift that was observed.
    pub fn renormalize_if_drifted(&mut self, tol: f64) -> f64 {
        let nrm = self.norm();
        let drift = (nrm - 1.0).abs();
        if drift > tol {
            log::warn!("renormalizing symmetric state: norm drift {drift:e}");
            linalg::scale(&mut self.amplitudes, C64::new(1.0 / nrm, 0.0));
        }
        drift
    }

    /// Amplitudes on the full tensor space `(C^d)^{⊗N}`, particle 1 being the
    /// most significant digit of the index.
    pub fn to_full(&self) -> Result<Vec<C64>> {
        let b = &self.basis;
        let full_dim = checked_pow(b.d(), b.n_particles())?;
        if full_dim > FULL_EMBEDDING_LIMIT {
            return Err(Error::Budget {
                guard: "d^N (full embedding)",
                required: full_dim as u128,
                limit: FULL_EMBEDDING_LIMIT as u128,
            });
        }
        let weights: Vec<f64> = (0..b.dim()).map(|i| b.multinomial(i).sqrt().recip()).collect();
        let mut occ = vec![0u32; b.d()];
        let mut digits = vec![0usize; b.n_particles()];
        let mut out = vec![ZERO; full_dim];
        for (x, slot) in out.iter_mut().enumerate() {
            decompose(x, b.d(), &mut digits);
            occ.iter_mut().for_each(|o| *o = 0);
            for &p in &digits {
                occ[p] += 1;
            }
            let i = b.rank(&occ);
            *slot = self.amplitudes[i] * weights[i];
        }
        Ok(out)
    }
}

/// `base^exp` with overflow reported as an error.
pub fn checked_pow(base: usize, exp: usize) -> Result<usize> {
    let mut acc: usize = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base).ok_or(Error::Overflow("d^N"))?;
    }
    Ok(acc)
}

/// Writes the base-`d` digits of `x` into `digits`, most significant first.
#[inline]
pub fn decompose(mut x: usize, d: usize, digits: &mut [usize]) {
    for slot in digits.iter_mut().rev() {
        *slot = x % d;
        x /= d;
    }
}

/// `sqrt(N! / Π n_p!) Π phi_p^{n_p}` on every basis state.
pub fn product_state(phi: &[C64], basis: Arc<OccupationBasis>) -> Result<SymmetricState> {
    if phi.len() != basis.d() {
        return Err(Error::DimensionMismatch {
            expected: basis.d(),
            found: phi.len(),
        });
    }
    let nrm = linalg::norm(phi);
    if (nrm - 1.0).abs() > 1e-12 {
        return Err(Error::NotNormalized { norm: nrm });
    }
    let amplitudes = (0..basis.dim())
        .map(|i| {
            let occ = basis.unrank(i);
            let mono: C64 = occ
                .iter()
                .zip(phi)
                .map(|(&k, &c)| c.powu(k))
                .product();
            mono * basis.multinomial(i).sqrt()
        })
        .collect();
    Ok(SymmetricState { basis, amplitudes })
}

/// `Σ_pq K_pq a†_p a_q + (1/2N) Σ_{p≠q} V(p-q) n_p n_q + (1/2N) V(0) Σ_p n_p (n_p - 1)`
/// on the symmetric subspace.
#[derive(Debug)]
pub struct FockHamiltonian {
    basis: Arc<OccupationBasis>,
    /// Off-diagonal single-particle couplings `(p, q, K_pq)`.
    hops: Vec<(usize, usize, C64)>,
    diagonal: Vec<f64>,
    real: bool,
    sparse: Option<CsrMatrix>,
}

pub fn hamiltonian(model: &LatticeModel, basis: Arc<OccupationBasis>) -> Result<FockHamiltonian> {
    FockHamiltonian::new(model, basis, SPARSE_ASSEMBLY_LIMIT)
}

impl FockHamiltonian {
    /// Assembles the sparse matrix when the basis dimension is at most
    /// `sparse_limit`; larger bases are applied matrix-free.
    pub fn new(model: &LatticeModel, basis: Arc<OccupationBasis>, sparse_limit: usize) -> Result<Self> {
        let d = model.d();
        if basis.d() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: basis.d(),
            });
        }
        let n = basis.n_particles();
        if n == 0 {
            return Err(Error::InvalidArgument("Hamiltonian needs N >= 1".into()));
        }
        let k = model.kinetic();
        let mut hops = Vec::new();
        for p in 0..d {
            for q in 0..d {
                if p != q && k[(p, q)] != ZERO {
                    hops.push((p, q, k[(p, q)]));
                }
            }
        }
        let real = (0..d).all(|p| (0..d).all(|q| k[(p, q)].im == 0.0));
        let inv2n = 0.5 / n as f64;
        let v0 = model.v_samples()[0];
        let diagonal = basis
            .states()
            .map(|occ| {
                let mut e = 0.0;
                for p in 0..d {
                    let np = occ[p] as f64;
                    e += k[(p, p)].re * np;
                    e += inv2n * v0 * np * (np - 1.0);
                    for q in 0..d {
                        if q != p {
                            e += inv2n * model.v_between(p, q) * np * occ[q] as f64;
                        }
                    }
                }
                e
            })
            .collect();

        let mut h = Self {
            basis,
            hops,
            diagonal,
            real,
            sparse: None,
        };
        if h.basis.dim() <= sparse_limit {
            let rows = (0..h.basis.dim())
                .into_par_iter()
                .map(|i| h.row(i))
                .collect();
            h.sparse = Some(CsrMatrix::from_rows(h.basis.dim(), rows));
        }
        Ok(h)
    }

    pub fn basis(&self) -> &Arc<OccupationBasis> {
        &self.basis
    }

    pub fn is_assembled(&self) -> bool {
        self.sparse.is_some()
    }

    pub fn sparse(&self) -> Option<&CsrMatrix> {
        self.sparse.as_ref()
    }

    fn row(&self, i: usize) -> Vec<(usize, C64)> {
        let occ = self.basis.unrank(i);
        let mut target = occ.to_vec();
        let mut out = vec![(i, C64::new(self.diagonal[i], 0.0))];
        for &(p, q, kpq) in &self.hops {
            if occ[p] == 0 {
                continue;
            }
            let amp = ((occ[p] as f64) * (occ[q] as f64 + 1.0)).sqrt();
            target[p] -= 1;
            target[q] += 1;
            out.push((self.basis.rank(&target), kpq * amp));
            target[p] += 1;
            target[q] -= 1;
        }
        out
    }

    fn apply_matrix_free(&self, x: &[C64], y: &mut [C64]) {
        y.par_iter_mut()
            .enumerate()
            .with_min_len(128)
            .for_each_init(
                || vec![0u32; self.basis.d()],
                |target, (i, yi)| {
                    let occ = self.basis.unrank(i);
                    target.copy_from_slice(occ);
                    let mut acc = x[i] * self.diagonal[i];
                    for &(p, q, kpq) in &self.hops {
                        if occ[p] == 0 {
                            continue;
                        }
                        let amp = ((occ[p] as f64) * (occ[q] as f64 + 1.0)).sqrt();
                        target[p] -= 1;
                        target[q] += 1;
                        acc += kpq * amp * x[self.basis.rank(target)];
                        target[p] += 1;
                        target[q] -= 1;
                    }
                    *yi = acc;
                },
            );
    }
}

impl LinearOperator for FockHamiltonian {
    fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        match &self.sparse {
            Some(csr) => csr.apply(x, y),
            None => self.apply_matrix_free(x, y),
        }
    }

    fn is_real(&self) -> bool {
        self.real
    }

    fn to_dense(&self) -> CMat {
        match &self.sparse {
            Some(csr) => csr.to_dense(),
            None => {
                let n = self.basis.dim();
                let mut out = CMat::zeros(n, n);
                for i in 0..n {
                    for (j, v) in self.row(i) {
                        out[(i, j)] += v;
                    }
                }
                out
            }
        }
    }
}

/// `H ψ`, not normalized.
pub fn apply_hamiltonian(h: &FockHamiltonian, state: &SymmetricState) -> Result<Vec<C64>> {
    if **state.basis() != *h.basis {
        return Err(Error::DimensionMismatch {
            expected: h.basis.dim(),
            found: state.basis().dim(),
        });
    }
    let mut out = vec![ZERO; h.basis.dim()];
    h.apply(state.amplitudes(), &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, Shape};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn brute_force_states(d: usize, n: usize) -> Vec<Vec<u32>> {
        // every composition of n into d parts, sorted descending lexicographically
        let mut out = Vec::new();
        let total = (n + 1).pow(d as u32);
        for mut code in 0..total {
            let mut occ = vec![0u32; d];
            for slot in occ.iter_mut() {
                *slot = (code % (n + 1)) as u32;
                code /= n + 1;
            }
            if occ.iter().sum::<u32>() as usize == n {
                out.push(occ);
            }
        }
        out.sort_by(|a, b| b.cmp(a));
        out
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(basis_dimension(2, 2).unwrap(), 3);
        assert_eq!(basis_dimension(1, 7).unwrap(), 1);
        assert_eq!(basis_dimension(4, 4).unwrap(), 35);
        assert_eq!(brute_force_states(4, 4).len(), 35);
        assert_eq!(basis_dimension(5, 0).unwrap(), 1);
        assert!(basis_dimension(0, 3).is_err());
    }

    #[test]
    fn dimension_overflow_is_an_error() {
        assert!(matches!(basis_dimension(1000, 1000), Err(Error::Overflow(_))));
        assert!(matches!(basis_dimension(200, 100), Err(Error::Overflow(_))));
    }

    #[test]
    fn ordering_is_reverse_lexicographic() {
        for (d, n) in [(1, 3), (2, 2), (3, 2), (4, 4), (3, 0), (5, 3)] {
            let b = OccupationBasis::new(d, n).unwrap();
            let brute = brute_force_states(d, n);
            assert_eq!(b.dim(), brute.len());
            for (i, occ) in brute.iter().enumerate() {
                assert_eq!(b.unrank(i), occ.as_slice());
                assert_eq!(b.rank(occ), i);
            }
        }
    }

    #[test]
    fn product_state_examples() {
        let b = Arc::new(OccupationBasis::new(2, 3).unwrap());
        let s = product_state(&[linalg::ONE, ZERO], b).unwrap();
        assert_eq!(s.amplitudes()[0], linalg::ONE);
        assert!(s.amplitudes()[1..].iter().all(|a| a.norm() == 0.0));

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let b = Arc::new(OccupationBasis::new(2, 2).unwrap());
        let s = product_state(&[C64::new(h, 0.0), C64::new(h, 0.0)], b).unwrap();
        let want = [0.5, h, 0.5];
        for (a, w) in s.amplitudes().iter().zip(want) {
            assert!((a - C64::new(w, 0.0)).norm() < 1e-15);
        }

        let phi = [C64::new(0.6, 0.0), C64::new(0.0, 0.48), C64::new(0.0, -0.64)];
        let b = Arc::new(OccupationBasis::new(3, 1).unwrap());
        let s = product_state(&phi, b).unwrap();
        for (a, p) in s.amplitudes().iter().zip(phi) {
            assert!((a - p).norm() < 1e-15);
        }

        let b = Arc::new(OccupationBasis::new(2, 1).unwrap());
        assert!(matches!(
            product_state(&[linalg::ONE, linalg::ONE], b),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn product_state_is_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (d, n) in [(3, 5), (4, 6), (6, 3)] {
            let b = Arc::new(OccupationBasis::new(d, 1).unwrap());
            let phi = SymmetricState::random(b, &mut rng).into_amplitudes();
            let b = Arc::new(OccupationBasis::new(d, n).unwrap());
            let s = product_state(&phi, b).unwrap();
            assert!((s.norm() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn single_particle_hamiltonian_is_kinetic() {
        let u = Shape::Cosine {
            amplitude: 0.4,
            harmonic: 2,
            offset: 0.1,
        };
        let m = build_lattice(5, 3.0, &u, &Shape::Zero).unwrap();
        let b = Arc::new(OccupationBasis::new(5, 1).unwrap());
        let h = hamiltonian(&m, b).unwrap();
        let dense = h.to_dense();
        // the N = 1 basis is (1,0,..),(0,1,..),...: site order
        assert!(linalg::max_abs_diff(&dense, m.kinetic()) < 1e-15);
    }

    #[test]
    fn constant_interaction_two_particles_two_sites() {
        let c = 0.8;
        let mut m = build_lattice(2, 1.0, &Shape::Zero, &Shape::Constant { value: c }).unwrap();
        // switch the kinetic part off by hand
        m = LatticeModel::from_samples(1e300, vec![0.0; 2], m.v_samples().to_vec()).unwrap();
        let b = Arc::new(OccupationBasis::new(2, 2).unwrap());
        let h = hamiltonian(&m, b).unwrap();
        let dense = h.to_dense();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { c / 2.0 } else { 0.0 };
                assert!((dense[(i, j)] - C64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let m = build_lattice(3, 1.0, &Shape::Zero, &Shape::Zero).unwrap();
        let b = Arc::new(OccupationBasis::new(4, 2).unwrap());
        assert!(matches!(hamiltonian(&m, b), Err(Error::DimensionMismatch { .. })));

        let b3 = Arc::new(OccupationBasis::new(3, 2).unwrap());
        let h = hamiltonian(&m, b3).unwrap();
        let other = SymmetricState::fock(Arc::new(OccupationBasis::new(3, 3).unwrap()), &[3, 0, 0]).unwrap();
        assert!(apply_hamiltonian(&h, &other).is_err());
    }

    #[test]
    fn matrix_free_matches_sparse() {
        let v = Shape::Gaussian {
            amplitude: 0.7,
            width: 1.1,
        };
        let u = Shape::Cosine {
            amplitude: -0.3,
            harmonic: 1,
            offset: 0.0,
        };
        let m = build_lattice(4, 4.0, &u, &v).unwrap();
        let b = Arc::new(OccupationBasis::new(4, 5).unwrap());
        let assembled = FockHamiltonian::new(&m, b.clone(), usize::MAX).unwrap();
        let free = FockHamiltonian::new(&m, b.clone(), 0).unwrap();
        assert!(assembled.is_assembled() && !free.is_assembled());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let psi = SymmetricState::random(b, &mut rng);
        let y1 = apply_hamiltonian(&assembled, &psi).unwrap();
        let y2 = apply_hamiltonian(&free, &psi).unwrap();
        assert!(linalg::distance(&y1, &y2) < 1e-13);
        assert!(linalg::max_abs_diff(&assembled.to_dense(), &free.to_dense()) < 1e-14);
    }

    #[test]
    fn embedding_preserves_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = Arc::new(OccupationBasis::new(3, 4).unwrap());
        let s = SymmetricState::random(b, &mut rng);
        let full = s.to_full().unwrap();
        assert_eq!(full.len(), 81);
        assert!((linalg::norm(&full) - 1.0).abs() < 1e-13);
    }
}
