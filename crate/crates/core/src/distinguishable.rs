//! The full tensor-product space `(C^d)^{⊗N}` without symmetry restriction.
//!
//! Needed wherever an observable sits on specific particle slots, which
//! breaks permutation symmetry: commutator growth between observables on
//! disjoint slots, and the covariance of slot observables. Slot indices are
//! zero-based; slot 0 is the most significant digit of a full-space index.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{checked_pow, SymmetricState};
use crate::lattice::LatticeModel;
use crate::linalg::{self, CMat, LinearOperator, C64, ZERO};
use crate::propagate::{Propagator, PropagatorConfig};
use crate::rdm::k_rdm;

/// Largest `d^N` handled by the full-space engine.
pub const FULL_DIM_LIMIT: usize = 2_000_000;
/// Largest `d^N` for which a dense matrix may be formed.
pub const FULL_DENSE_LIMIT: usize = 200_000;

/// `H_N` on the full tensor space: one-body sweeps over every slot plus the
/// diagonal pair interaction `(1/N) Σ_{i<j} V(x_i - x_j)`.
#[derive(Debug, Clone)]
pub struct FullHamiltonian {
    d: usize,
    n: usize,
    kinetic: CMat,
    interaction: Vec<f64>,
    strides: Vec<usize>,
    real: bool,
}

impl FullHamiltonian {
    pub fn new(model: &LatticeModel, n: usize) -> Result<Self> {
        let d = model.d();
        if n == 0 {
            return Err(Error::InvalidArgument("Hamiltonian needs N >= 1".into()));
        }
        let dim = checked_pow(d, n)?;
        if dim > FULL_DIM_LIMIT {
            return Err(Error::Budget {
                guard: "d^N (full space)",
                required: dim as u128,
                limit: FULL_DIM_LIMIT as u128,
            });
        }
        let strides: Vec<usize> = (0..n).map(|j| d.pow((n - 1 - j) as u32)).collect();
        let inv_n = 1.0 / n as f64;
        let interaction = (0..dim)
            .into_par_iter()
            .map(|x| {
                let digits: Vec<usize> = strides.iter().map(|s| (x / s) % d).collect();
                let mut e = 0.0;
                for i in 0..n {
                    for j in i + 1..n {
                        e += model.v_between(digits[i], digits[j]);
                    }
                }
                e * inv_n
            })
            .collect();
        let kinetic = model.kinetic().clone();
        let real = (0..d).all(|p| (0..d).all(|q| kinetic[(p, q)].im == 0.0));
        Ok(Self {
            d,
            n,
            kinetic,
            interaction,
            strides,
            real,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_particles(&self) -> usize {
        self.n
    }
}

impl LinearOperator for FullHamiltonian {
    fn dim(&self) -> usize {
        self.interaction.len()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let d = self.d;
        y.par_iter_mut().enumerate().with_min_len(256).for_each(|(idx, yi)| {
            let mut acc = x[idx] * self.interaction[idx];
            for &s in &self.strides {
                let a = (idx / s) % d;
                let base = idx - a * s;
                for b in 0..d {
                    acc += self.kinetic[(a, b)] * x[base + b * s];
                }
            }
            *yi = acc;
        });
    }

    fn is_real(&self) -> bool {
        self.real
    }

    fn to_dense(&self) -> CMat {
        assert!(self.dim() <= FULL_DENSE_LIMIT, "dense full-space matrix beyond guard");
        let n = self.dim();
        let d = self.d;
        let mut out = CMat::zeros(n, n);
        for idx in 0..n {
            out[(idx, idx)] += C64::new(self.interaction[idx], 0.0);
            for &s in &self.strides {
                let a = (idx / s) % d;
                let base = idx - a * s;
                for b in 0..d {
                    out[(idx, base + b * s)] += self.kinetic[(a, b)];
                }
            }
        }
        out
    }
}

/// Unit vector on `(C^d)^{⊗N}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    d: usize,
    n: usize,
    amplitudes: Vec<C64>,
}

impl FullState {
    pub fn new(d: usize, n: usize, amplitudes: Vec<C64>) -> Result<Self> {
        let dim = checked_pow(d, n)?;
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: amplitudes.len(),
            });
        }
        let nrm = linalg::norm(&amplitudes);
        if (nrm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized { norm: nrm });
        }
        Ok(Self { d, n, amplitudes })
    }

    pub fn from_symmetric(state: &SymmetricState) -> Result<Self> {
        let b = state.basis();
        Self::new(b.d(), b.n_particles(), state.to_full()?)
    }

    /// `φ_1 ⊗ ... ⊗ φ_N`
    pub fn product(factors: &[Vec<C64>]) -> Result<Self> {
        let Some(first) = factors.first() else {
            return Err(Error::InvalidArgument("product of zero factors".into()));
        };
        let d = first.len();
        let mut amps = vec![linalg::ONE];
        for f in factors {
            if f.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: f.len(),
                });
            }
            amps = amps.iter().flat_map(|a| f.iter().map(move |b| a * b)).collect();
        }
        Self::new(d, factors.len(), amps)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_particles(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }
}

/// `e^{-i H_N t}` applied on the full space.
pub fn full_evolve(model: &LatticeModel, state: &FullState, t: f64, cfg: &PropagatorConfig) -> Result<FullState> {
    let h = FullHamiltonian::new(model, state.n)?;
    let prop = Propagator::new(&h, *cfg)?;
    full_evolve_with(&prop, state, t)
}

/// Like [`full_evolve`] with a prebuilt propagator over a [`FullHamiltonian`].
pub fn full_evolve_with(prop: &Propagator<'_>, state: &FullState, t: f64) -> Result<FullState> {
    let mut out = prop.evolve_vec(&state.amplitudes, t)?;
    let nrm = linalg::norm(&out);
    if (nrm - 1.0).abs() > crate::propagate::NORM_DRIFT_TOL {
        log::warn!("renormalizing full state: norm drift {:e}", (nrm - 1.0).abs());
        linalg::scale(&mut out, C64::new(1.0 / nrm, 0.0));
    }
    Ok(FullState {
        d: state.d,
        n: state.n,
        amplitudes: out,
    })
}

/// An `m`-particle operator attached to particle slots `i_1 < ... < i_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotObservable {
    d: usize,
    matrix: CMat,
    op_norm: f64,
    slots: Vec<usize>,
}

impl SlotObservable {
    pub fn new(d: usize, matrix: CMat, slots: Vec<usize>) -> Result<Self> {
        if slots.is_empty() {
            return Err(Error::InvalidArgument("observable needs at least one slot".into()));
        }
        if slots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!("slots {slots:?} must be strictly increasing")));
        }
        let size = checked_pow(d, slots.len())?;
        if matrix.nrows() != size || matrix.ncols() != size {
            return Err(Error::DimensionMismatch {
                expected: size,
                found: matrix.nrows(),
            });
        }
        let op_norm = linalg::spectral_norm(&matrix)?;
        Ok(Self {
            d,
            matrix,
            op_norm,
            slots,
        })
    }

    pub fn arity(&self) -> usize {
        self.slots.len()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn op_norm(&self) -> f64 {
        self.op_norm
    }

    pub fn slots(&self) -> &[usize] {
        &self.slots
    }

    pub fn with_slots(&self, slots: Vec<usize>) -> Result<Self> {
        Self::new(self.d, self.matrix.clone(), slots)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            d: self.d,
            matrix: linalg::adjoint(&self.matrix),
            op_norm: self.op_norm,
            slots: self.slots.clone(),
        }
    }

    fn check_fits(&self, d: usize, n: usize) -> Result<()> {
        if self.d != d {
            return Err(Error::DimensionMismatch { expected: d, found: self.d });
        }
        if let Some(&last) = self.slots.last() {
            if last >= n {
                return Err(Error::InvalidArgument(format!("slot {last} out of range for N={n}")));
            }
        }
        Ok(())
    }

    /// `A^{[slots]} x` on the full space of `n` particles.
    pub fn apply(&self, n: usize, x: &[C64], y: &mut [C64]) {
        let d = self.d;
        let strides: Vec<usize> = self.slots.iter().map(|&s| d.pow((n - 1 - s) as u32)).collect();
        let size = self.matrix.nrows();
        let offsets: Vec<usize> = (0..size)
            .map(|c| {
                let mut rem = c;
                let mut off = 0;
                for s in strides.iter().rev() {
                    off += (rem % d) * s;
                    rem /= d;
                }
                off
            })
            .collect();
        y.par_iter_mut().enumerate().with_min_len(256).for_each(|(idx, yi)| {
            let mut row = 0;
            let mut base = idx;
            for &s in &strides {
                let a = (idx / s) % d;
                row = row * d + a;
                base -= a * s;
            }
            *yi = (0..size).map(|c| self.matrix[(row, c)] * x[base + offsets[c]]).sum();
        });
    }

    /// Dense `A^{[slots]}` on `n` particles; only for small oracle checks.
    pub fn to_dense(&self, n: usize) -> Result<CMat> {
        let dim = checked_pow(self.d, n)?;
        if dim > 4096 {
            return Err(Error::Budget {
                guard: "d^N (dense slot observable)",
                required: dim as u128,
                limit: 4096,
            });
        }
        let mut out = CMat::zeros(dim, dim);
        let mut e = vec![ZERO; dim];
        let mut col = vec![ZERO; dim];
        for j in 0..dim {
            e[j] = linalg::ONE;
            self.apply(n, &e, &mut col);
            for i in 0..dim {
                out[(i, j)] = col[i];
            }
            e[j] = ZERO;
        }
        Ok(out)
    }
}

/// Seeded complex-Gaussian Hermitian observables rescaled to unit spectral
/// norm, attached to slots `0..m`.
pub fn sample_observables(d: usize, m: usize, count: usize, seed: u64) -> Result<Vec<SlotObservable>> {
    let size = checked_pow(d, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let g = CMat::from_fn(size, size, |_, _| {
                C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            let h = linalg::hermitian_part(&g);
            let s = linalg::spectral_norm(&h)?;
            let unit = CMat::from_fn(size, size, |i, j| h[(i, j)] / s);
            SlotObservable::new(d, unit, (0..m).collect())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerIterationConfig {
    pub max_iter: usize,
    /// Relative change of the Rayleigh quotient that counts as converged.
    pub tol: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for PowerIterationConfig {
    fn default() -> Self {
        Self {
            max_iter: 300,
            tol: 1e-4,
            restarts: 3,
            seed: 0x5eed,
        }
    }
}

/// Result of a spectral-norm estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    /// `‖C v‖` for the best unit vector `v` found; never exceeds `‖C‖`.
    pub value: f64,
    /// `‖C†C v - θ v‖`: some eigenvalue of `C†C` lies within this of `θ = value²`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Estimates `‖[A^{[i]}, e^{iHt} B^{[j]} e^{-iHt}]‖` by power iteration on
/// `C†C`. `prop` must wrap a [`FullHamiltonian`] on `n` particles.
pub fn commutator_norm(
    prop: &Propagator<'_>,
    d: usize,
    n: usize,
    a: &SlotObservable,
    b: &SlotObservable,
    t: f64,
    cfg: &PowerIterationConfig,
) -> Result<NormEstimate> {
    let dim = checked_pow(d, n)?;
    if prop.operator().dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: prop.operator().dim(),
        });
    }
    a.check_fits(d, n)?;
    b.check_fits(d, n)?;
    if let Some(&s) = a.slots.iter().find(|s| b.slots.contains(s)) {
        return Err(Error::SlotOverlap(s));
    }
    let a_adj = a.adjoint();
    let b_adj = b.adjoint();

    // e^{iHt} X e^{-iHt} v
    let heisenberg = |x: &SlotObservable, v: &[C64]| -> Result<Vec<C64>> {
        let u = prop.evolve_vec(v, t)?;
        let mut xu = vec![ZERO; dim];
        x.apply(n, &u, &mut xu);
        prop.evolve_vec(&xu, -t)
    };
    // [X, Y(t)] v
    let commutator = |x: &SlotObservable, y: &SlotObservable, v: &[C64], swap: bool| -> Result<Vec<C64>> {
        let yv = heisenberg(y, v)?;
        let mut xyv = vec![ZERO; dim];
        x.apply(n, &yv, &mut xyv);
        let mut xv = vec![ZERO; dim];
        x.apply(n, v, &mut xv);
        let yxv = heisenberg(y, &xv)?;
        let sign = if swap { -1.0 } else { 1.0 };
        Ok(xyv.iter().zip(&yxv).map(|(p, q)| (p - q) * sign).collect())
    };
    // C = [A, B(t)], C† = [B(t)†, A†] = -[A†, B†(t)]
    let gram = |v: &[C64]| -> Result<(Vec<C64>, f64)> {
        let cv = commutator(a, b, v, false)?;
        let c_norm = linalg::norm(&cv);
        Ok((commutator(&a_adj, &b_adj, &cv, true)?, c_norm))
    };

    let mut best = NormEstimate {
        value: 0.0,
        residual: 0.0,
        iterations: 0,
        converged: true,
    };
    for restart in 0..cfg.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(restart as u64));
        let mut v: Vec<C64> = (0..dim)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let nv = linalg::norm(&v);
        linalg::scale(&mut v, C64::new(1.0 / nv, 0.0));

        let mut theta_prev = f64::NAN;
        let mut estimate = NormEstimate {
            value: 0.0,
            residual: 0.0,
            iterations: 0,
            converged: false,
        };
        for it in 1..=cfg.max_iter {
            let (w, c_norm) = gram(&v)?;
            let theta = linalg::dot(&v, &w).re.max(0.0);
            let residual = linalg::norm(
                &w.iter().zip(&v).map(|(wi, vi)| wi - vi * theta).collect::<Vec<_>>(),
            );
            estimate = NormEstimate {
                value: c_norm,
                residual,
                iterations: it,
                converged: false,
            };
            let wn = linalg::norm(&w);
            if wn <= 1e-300 || c_norm <= 1e-15 {
                estimate.converged = true;
                break;
            }
            if (theta - theta_prev).abs() <= cfg.tol * theta {
                estimate.converged = true;
                break;
            }
            theta_prev = theta;
            v = w;
            linalg::scale(&mut v, C64::new(1.0 / wn, 0.0));
        }
        if estimate.value >= best.value || restart == 0 {
            best = estimate;
        }
    }
    Ok(best)
}

/// `|Tr (A ⊗ B)(γ^{(m+n)} - γ^{(m)} ⊗ γ^{(n)})|` for an `m`-particle `a` and
/// an `n`-particle `b`.
pub fn covariance_gap(state: &SymmetricState, a: &CMat, b: &CMat) -> Result<f64> {
    let d = state.basis().d();
    let n_total = state.basis().n_particles();
    let arity = |m: &CMat| -> Result<usize> {
        let size = m.nrows();
        if m.ncols() != size {
            return Err(Error::InvalidArgument("observable must be square".into()));
        }
        let mut k = 0;
        let mut acc = 1;
        while acc < size {
            acc *= d;
            k += 1;
        }
        if acc != size || k == 0 {
            return Err(Error::InvalidArgument(format!("size {size} is not a positive power of d={d}")));
        }
        Ok(k)
    };
    let (m, n) = (arity(a)?, arity(b)?);
    if m + n > n_total {
        return Err(Error::InvalidArgument(format!(
            "arity m+n={} exceeds N={n_total}",
            m + n
        )));
    }
    let joint = k_rdm(state, m + n)?;
    let gm = k_rdm(state, m)?;
    let gn = k_rdm(state, n)?;
    let ab = linalg::kron(a, b);
    let diff = &joint.matrix().clone() - gm.tensor(&gn)?.matrix();
    let mut acc = ZERO;
    for i in 0..diff.nrows() {
        for j in 0..diff.ncols() {
            acc += ab[(i, j)] * diff[(j, i)];
        }
    }
    Ok(acc.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{hamiltonian, product_state, OccupationBasis};
    use crate::lattice::{build_lattice, Shape};
    use std::sync::Arc;

    fn model(d: usize, v: Shape) -> LatticeModel {
        build_lattice(d, d as f64, &Shape::Zero, &v).unwrap()
    }

    fn cos_v() -> Shape {
        Shape::Cosine {
            amplitude: 1.0,
            harmonic: 1,
            offset: 0.0,
        }
    }

    #[test]
    fn full_hamiltonian_dense_matches_apply() {
        let m = build_lattice(
            3,
            2.0,
            &Shape::Cosine {
                amplitude: 0.5,
                harmonic: 1,
                offset: 0.0,
            },
            &cos_v(),
        )
        .unwrap();
        let h = FullHamiltonian::new(&m, 3).unwrap();
        let dense = h.to_dense();
        assert!(linalg::hermiticity_defect(&dense) < 1e-14);
        let x: Vec<C64> = (0..27).map(|i| C64::new(i as f64 * 0.1, 1.0 - i as f64 * 0.05)).collect();
        let mut y1 = vec![ZERO; 27];
        let mut y2 = vec![ZERO; 27];
        h.apply(&x, &mut y1);
        linalg::matvec(&dense, &x, &mut y2);
        assert!(linalg::distance(&y1, &y2) < 1e-13);
    }

    #[test]
    fn embedding_of_fock_evolution() {
        let m = model(3, cos_v());
        let n = 3;
        let b = Arc::new(OccupationBasis::new(3, n).unwrap());
        let phi = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.48), C64::new(0.64, 0.0)];
        let sym = product_state(&phi, b.clone()).unwrap();
        let fh = hamiltonian(&m, b).unwrap();
        let cfg = PropagatorConfig::default();
        let evolved = Propagator::new(&fh, cfg).unwrap().evolve(&sym, 0.8).unwrap();
        let full = full_evolve(&m, &FullState::from_symmetric(&sym).unwrap(), 0.8, &cfg).unwrap();
        let want = evolved.to_full().unwrap();
        assert!(linalg::distance(full.amplitudes(), &want) < 1e-8);
    }

    #[test]
    fn free_evolution_factorizes() {
        let m = model(3, Shape::Zero);
        let f1 = vec![C64::new(1.0, 0.0), ZERO, ZERO];
        let f2 = vec![ZERO, C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        let start = FullState::product(&[f1.clone(), f2.clone()]).unwrap();
        let cfg = PropagatorConfig::default();
        let out = full_evolve(&m, &start, 1.1, &cfg).unwrap();
        let one = |f: &Vec<C64>| {
            let u = crate::hartree::HartreeSolver::new(&m).unwrap().kinetic_propagator(1.1);
            let mut y = vec![ZERO; 3];
            linalg::matvec(&u, f, &mut y);
            y
        };
        let want = FullState::product(&[one(&f1), one(&f2)]).unwrap();
        assert!(linalg::distance(out.amplitudes(), want.amplitudes()) < 1e-12);
        let same = full_evolve(&m, &start, 0.0, &cfg).unwrap();
        assert_eq!(same, start);
    }

    #[test]
    fn slot_observable_validation() {
        let id = linalg::identity(2);
        assert!(SlotObservable::new(2, id.clone(), vec![]).is_err());
        assert!(SlotObservable::new(2, id.clone(), vec![1, 0]).is_err());
        assert!(SlotObservable::new(2, id.clone(), vec![0, 1]).is_err());
        let ok = SlotObservable::new(2, id, vec![3]).unwrap();
        assert!((ok.op_norm() - 1.0).abs() < 1e-14);
        assert_eq!(ok.arity(), 1);
    }

    #[test]
    fn sampled_observables() {
        let obs = sample_observables(2, 1, 20, 42).unwrap();
        for o in &obs {
            assert!((o.op_norm() - 1.0).abs() < 1e-10);
            assert!(linalg::hermiticity_defect(o.matrix()) < 1e-15);
            assert_eq!(o.slots(), &[0]);
        }
        let again = sample_observables(2, 1, 20, 42).unwrap();
        assert_eq!(obs, again);
        let other = sample_observables(2, 1, 20, 43).unwrap();
        assert_ne!(obs, other);
        let pairs = sample_observables(3, 2, 2, 1).unwrap();
        assert_eq!(pairs[0].matrix().nrows(), 9);
    }

    #[test]
    fn commutator_vanishes_at_time_zero_and_without_interaction() {
        let obs = sample_observables(2, 1, 2, 7).unwrap();
        let a = obs[0].clone();
        let b = obs[1].with_slots(vec![2]).unwrap();
        let cfg = PowerIterationConfig::default();

        let m = model(2, cos_v());
        let h = FullHamiltonian::new(&m, 4).unwrap();
        let p = Propagator::new(&h, PropagatorConfig::default()).unwrap();
        let est = commutator_norm(&p, 2, 4, &a, &b, 0.0, &cfg).unwrap();
        assert!(est.value < 1e-10);

        let free = model(2, Shape::Zero);
        let h = FullHamiltonian::new(&free, 4).unwrap();
        let p = Propagator::new(&h, PropagatorConfig::default()).unwrap();
        for t in [0.3, 1.0, 2.5] {
            let est = commutator_norm(&p, 2, 4, &a, &b, t, &cfg).unwrap();
            assert!(est.value < 1e-8, "t={t}: {}", est.value);
        }
    }

    #[test]
    fn commutator_rejects_overlap() {
        let obs = sample_observables(2, 1, 2, 7).unwrap();
        let m = model(2, cos_v());
        let h = FullHamiltonian::new(&m, 3).unwrap();
        let p = Propagator::new(&h, PropagatorConfig::default()).unwrap();
        let cfg = PowerIterationConfig::default();
        assert!(matches!(
            commutator_norm(&p, 2, 3, &obs[0], &obs[1], 0.5, &cfg),
            Err(Error::SlotOverlap(0))
        ));
        let far = obs[1].with_slots(vec![5]).unwrap();
        assert!(commutator_norm(&p, 2, 3, &obs[0], &far, 0.5, &cfg).is_err());
    }

    #[test]
    fn covariance_of_product_state_vanishes() {
        let b = Arc::new(OccupationBasis::new(2, 4).unwrap());
        let phi = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        let s = product_state(&phi, b).unwrap();
        let obs = sample_observables(2, 1, 2, 3).unwrap();
        let gap = covariance_gap(&s, obs[0].matrix(), obs[1].matrix()).unwrap();
        assert!(gap < 1e-10);
        let pair = sample_observables(2, 2, 1, 3).unwrap();
        assert!(covariance_gap(&s, pair[0].matrix(), obs[1].matrix()).unwrap() < 1e-10);
        let id = linalg::identity(2);
        assert!(covariance_gap(&s, &id, obs[1].matrix()).unwrap() < 1e-14);
        let big = sample_observables(2, 3, 1, 3).unwrap();
        assert!(covariance_gap(&s, big[0].matrix(), pair[0].matrix()).is_err());
        let bad = linalg::identity(3);
        assert!(covariance_gap(&s, &bad, &id).is_err());
    }
}
