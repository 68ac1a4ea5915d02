//! k-particle reduced density matrices (marginals) of symmetric states.
//!
//! Multi-indices `(p_1, ..., p_k)` are flattened with particle 1 as the most
//! significant base-`d` digit, matching the full tensor-space layout used by
//! [`SymmetricState::to_full`]. Marginals are normalized to unit trace.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{checked_pow, decompose, OccupationBasis, SymmetricState};
use crate::linalg::{self, CMat, C64, ZERO};

/// Largest `d^k` accepted by [`k_rdm`].
pub const RDM_DIM_LIMIT: usize = 1024;

/// Largest `d^N` accepted by [`dense_oracle_rdm`].
pub const ORACLE_DIM_LIMIT: usize = 100_000;

/// Eigenvalues down to this value are treated as roundoff and clipped.
pub const PSD_CLIP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "RdmRecord", try_from = "RdmRecord")]
pub struct ReducedDensity {
    k: usize,
    d: usize,
    matrix: CMat,
}

/// Wire form: `{k, d, real, imag}` with row-major nested arrays.
#[derive(Serialize, Deserialize)]
struct RdmRecord {
    k: usize,
    d: usize,
    real: Vec<Vec<f64>>,
    imag: Vec<Vec<f64>>,
}

impl From<ReducedDensity> for RdmRecord {
    fn from(r: ReducedDensity) -> Self {
        let n = r.matrix.nrows();
        let rows = |f: fn(C64) -> f64| -> Vec<Vec<f64>> {
            (0..n).map(|i| (0..n).map(|j| f(r.matrix[(i, j)])).collect()).collect()
        };
        RdmRecord {
            k: r.k,
            d: r.d,
            real: rows(|c| c.re),
            imag: rows(|c| c.im),
        }
    }
}

impl TryFrom<RdmRecord> for ReducedDensity {
    type Error = Error;

    fn try_from(rec: RdmRecord) -> Result<Self> {
        let n = rec.real.len();
        let square = |m: &Vec<Vec<f64>>| m.len() == n && m.iter().all(|row| row.len() == n);
        if !square(&rec.real) || !square(&rec.imag) {
            return Err(Error::InvalidArgument("real/imag must be equal square matrices".into()));
        }
        let matrix = CMat::from_fn(n, n, |i, j| C64::new(rec.real[i][j], rec.imag[i][j]));
        ReducedDensity::new(rec.k, rec.d, matrix)
    }
}

impl ReducedDensity {
    pub fn new(k: usize, d: usize, matrix: CMat) -> Result<Self> {
        let n = checked_pow(d, k)?;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.nrows(),
            });
        }
        Ok(Self { k, d, matrix })
    }

    /// `|phi><phi|^{⊗k}`
    pub fn pure_product(phi: &[C64], k: usize) -> Result<Self> {
        let d = phi.len();
        let n = checked_pow(d, k)?;
        let mut digits = vec![0usize; k];
        let vector: Vec<C64> = (0..n)
            .map(|x| {
                decompose(x, d, &mut digits);
                digits.iter().map(|&p| phi[p]).product()
            })
            .collect();
        Self::new(k, d, linalg::outer(&vector, &vector))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        linalg::trace(&self.matrix)
    }

    /// `Tr(op γ)`
    pub fn expectation(&self, op: &CMat) -> Result<C64> {
        let n = self.dim();
        if op.nrows() != n || op.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: op.nrows(),
            });
        }
        let mut acc = ZERO;
        for i in 0..n {
            for j in 0..n {
                acc += op[(i, j)] * self.matrix[(j, i)];
            }
        }
        Ok(acc)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        linalg::hermitian_eigenvalues(&linalg::hermitian_part(&self.matrix))
    }

    /// Traces out the last particle.
    pub fn partial_trace_last(&self) -> Result<Self> {
        if self.k == 0 {
            return Err(Error::InvalidArgument("cannot trace out of a 0-particle marginal".into()));
        }
        let d = self.d;
        let n = self.dim() / d;
        let m = CMat::from_fn(n, n, |x, y| (0..d).map(|z| self.matrix[(x * d + z, y * d + z)]).sum());
        Self::new(self.k - 1, d, m)
    }

    /// `self ⊗ other` on `k_self + k_other` particles.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: other.d,
            });
        }
        Self::new(self.k + other.k, self.d, linalg::kron(&self.matrix, &other.matrix))
    }

    /// Largest deviation from invariance under swapping particles `i` and
    /// `j` in rows and columns simultaneously.
    pub fn exchange_defect(&self, i: usize, j: usize) -> f64 {
        let (d, k) = (self.d, self.k);
        let n = self.dim();
        let swap = |x: usize| {
            let mut digits = vec![0usize; k];
            decompose(x, d, &mut digits);
            digits.swap(i, j);
            digits.iter().fold(0, |acc, &p| acc * d + p)
        };
        let perm: Vec<usize> = (0..n).map(swap).collect();
        let mut worst: f64 = 0.0;
        for x in 0..n {
            for y in 0..n {
                worst = worst.max((self.matrix[(x, y)] - self.matrix[(perm[x], perm[y])]).norm());
            }
        }
        worst
    }

    /// Checks Hermiticity, unit trace, positivity and exchange symmetry.
    /// Returns human-readable violations.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let herm = linalg::hermiticity_defect(&self.matrix);
        if herm > 1e-12 {
            out.push(format!("hermiticity defect {herm:e}"));
        }
        let tr = self.trace();
        if (tr - linalg::ONE).norm() > 1e-10 {
            out.push(format!("trace {tr} differs from 1"));
        }
        match self.eigenvalues() {
            Ok(ev) => {
                let min = ev.iter().cloned().fold(f64::INFINITY, f64::min);
                if min < -PSD_CLIP_TOL {
                    out.push(format!("negative eigenvalue {min:e}"));
                }
            }
            Err(e) => out.push(e.to_string()),
        }
        for i in 0..self.k {
            for j in i + 1..self.k {
                let defect = self.exchange_defect(i, j);
                if defect > 1e-10 {
                    out.push(format!("exchange ({i},{j}) defect {defect:e}"));
                }
            }
        }
        out
    }

    /// Positive-semidefinite projection: eigenvalues in `[-1e-10, 0)` are set
    /// to zero and the clipped magnitude is logged and returned. Anything
    /// more negative is an error.
    pub fn clip_negative(&self) -> Result<(Self, f64)> {
        let (values, u) = linalg::hermitian_eigen(&linalg::hermitian_part(&self.matrix))?;
        let mut clipped = 0.0_f64;
        let mut fixed = values.clone();
        for v in fixed.iter_mut() {
            if *v < -PSD_CLIP_TOL {
                return Err(Error::InvalidArgument(format!(
                    "marginal has eigenvalue {v:e} below the clipping tolerance"
                )));
            }
            if *v < 0.0 {
                clipped = clipped.max(-*v);
                *v = 0.0;
            }
        }
        if clipped == 0.0 {
            return Ok((self.clone(), 0.0));
        }
        log::debug!("clipped negative marginal eigenvalue of magnitude {clipped:e}");
        let n = self.dim();
        let m = CMat::from_fn(n, n, |i, j| {
            (0..n).map(|k| u[(i, k)] * fixed[k] * u[(j, k)].conj()).sum()
        });
        Ok((Self::new(self.k, self.d, m)?, clipped))
    }
}

/// `a_p` mapping a vector on the `from` basis to the basis with one particle
/// fewer.
fn annihilate(p: usize, x: &[C64], from: &OccupationBasis, to: &OccupationBasis) -> Vec<C64> {
    let mut out = vec![ZERO; to.dim()];
    let mut occ = vec![0u32; from.d()];
    for (i, &amp) in x.iter().enumerate() {
        if amp == ZERO {
            continue;
        }
        let src = from.unrank(i);
        if src[p] == 0 {
            continue;
        }
        occ.copy_from_slice(src);
        occ[p] -= 1;
        out[to.rank(&occ)] += amp * (src[p] as f64).sqrt();
    }
    out
}

/// One-particle marginal `γ_pq = <a†_q a_p> / N`.
pub fn one_rdm(state: &SymmetricState) -> Result<ReducedDensity> {
    k_rdm(state, 1)
}

/// k-particle marginal from normally ordered correlators
/// `<a†_{q_1}..a†_{q_k} a_{p_k}..a_{p_1}> (N-k)!/N!`.
pub fn k_rdm(state: &SymmetricState, k: usize) -> Result<ReducedDensity> {
    let basis = state.basis();
    let (d, n) = (basis.d(), basis.n_particles());
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("marginal order k={k} must lie in 1..={n}")));
    }
    let full = checked_pow(d, k)?;
    if full > RDM_DIM_LIMIT {
        return Err(Error::Budget {
            guard: "d^k (marginal size)",
            required: full as u128,
            limit: RDM_DIM_LIMIT as u128,
        });
    }

    // Annihilation images a_{p_1}..a_{p_j} ψ for nondecreasing tuples.
    let mut tuples: Vec<Vec<usize>> = vec![Vec::new()];
    let mut images: Vec<Vec<C64>> = vec![state.amplitudes().to_vec()];
    let mut current: Arc<OccupationBasis> = basis.clone();
    for _ in 0..k {
        let next = Arc::new(OccupationBasis::new(d, current.n_particles() - 1)?);
        let jobs: Vec<(usize, usize)> = tuples
            .iter()
            .enumerate()
            .flat_map(|(a, t)| (t.last().copied().unwrap_or(0)..d).map(move |p| (a, p)))
            .collect();
        let new_images: Vec<Vec<C64>> = jobs
            .par_iter()
            .map(|&(a, p)| annihilate(p, &images[a], &current, &next))
            .collect();
        tuples = jobs
            .iter()
            .map(|&(a, p)| {
                let mut t = tuples[a].clone();
                t.push(p);
                t
            })
            .collect();
        images = new_images;
        current = next;
    }

    let falling: f64 = (0..k).map(|j| (n - j) as f64).product();
    let count = tuples.len();
    let gram: Vec<C64> = (0..count * count)
        .into_par_iter()
        .map(|ab| {
            let (a, b) = (ab / count, ab % count);
            linalg::dot(&images[b], &images[a]) / falling
        })
        .collect();

    // map every flattened multi-index to its sorted tuple
    let lookup: std::collections::HashMap<&[usize], usize> =
        tuples.iter().enumerate().map(|(i, t)| (t.as_slice(), i)).collect();
    let mut digits = vec![0usize; k];
    let class: Vec<usize> = (0..full)
        .map(|x| {
            decompose(x, d, &mut digits);
            let mut sorted = digits.clone();
            sorted.sort_unstable();
            lookup[sorted.as_slice()]
        })
        .collect();
    let matrix = CMat::from_fn(full, full, |x, y| gram[class[x] * count + class[y]]);
    ReducedDensity::new(k, d, matrix)
}

/// Reference marginal: embeds the state into `(C^d)^{⊗N}` and traces the
/// last `N - k` factors of `|ψ><ψ|` entry by entry.
pub fn dense_oracle_rdm(state: &SymmetricState, k: usize) -> Result<ReducedDensity> {
    let (d, n) = (state.basis().d(), state.basis().n_particles());
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("marginal order k={k} must lie in 1..={n}")));
    }
    let total = checked_pow(d, n)?;
    if total > ORACLE_DIM_LIMIT {
        return Err(Error::Budget {
            guard: "d^N (dense oracle)",
            required: total as u128,
            limit: ORACLE_DIM_LIMIT as u128,
        });
    }
    let psi = state.to_full()?;
    let kept = checked_pow(d, k)?;
    let traced = total / kept;
    let m = CMat::from_fn(kept, kept, |x, xp| {
        (0..traced)
            .map(|y| psi[x * traced + y] * psi[xp * traced + y].conj())
            .sum()
    });
    ReducedDensity::new(k, d, m)
}

/// `Tr |a - b|` through a Hermitian eigensolve.
pub fn trace_distance(a: &ReducedDensity, b: &ReducedDensity) -> Result<f64> {
    if a.k != b.k || a.d != b.d {
        return Err(Error::InvalidArgument(format!(
            "marginal shapes differ: (k={}, d={}) vs (k={}, d={})",
            a.k, a.d, b.k, b.d
        )));
    }
    linalg::trace_norm_hermitian(&(&a.matrix - &b.matrix))
}
