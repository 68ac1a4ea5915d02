//! Unitary evolution `exp(-i H t)` for Hermitian operators.
//!
//! Two engines share one interface: a cached full eigendecomposition for
//! small spaces, and adaptive Lanczos (Krylov) stepping otherwise.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::SymmetricState;
use crate::linalg::{self, LinearOperator, C64, ZERO};

/// Norm drift above which evolved states are renormalized (and logged).
pub const NORM_DRIFT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Eigendecomposition up to `eigen_threshold`, Krylov above it.
    Auto,
    FullEigen,
    Krylov,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagatorConfig {
    pub method: Method,
    pub krylov_dim: usize,
    /// Per-step error bound for Krylov stepping.
    pub step_tol: f64,
    /// Longest Krylov substep, in time units.
    pub max_step: f64,
    pub eigen_threshold: usize,
    pub max_substeps: usize,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            krylov_dim: 30,
            step_tol: 1e-12,
            max_step: 1.0,
            eigen_threshold: 4000,
            max_substeps: 1_000_000,
        }
    }
}

impl PropagatorConfig {
    pub fn krylov() -> Self {
        Self {
            method: Method::Krylov,
            ..Self::default()
        }
    }

    pub fn full_eigen() -> Self {
        Self {
            method: Method::FullEigen,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_tol > 0.0) {
            return Err(Error::InvalidArgument("step_tol must be positive".into()));
        }
        if self.krylov_dim < 4 {
            return Err(Error::InvalidArgument("krylov_dim must be at least 4".into()));
        }
        if !(self.max_step > 0.0) || !self.max_step.is_finite() {
            return Err(Error::InvalidArgument("max_step must be positive and finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
enum Eigenvectors {
    /// Column-major `n x n`.
    Real(Vec<f64>),
    Complex(Vec<C64>),
}

#[derive(Debug, Clone)]
struct Spectral {
    values: Vec<f64>,
    vectors: Eigenvectors,
}

impl Spectral {
    fn new(op: &dyn LinearOperator) -> Result<Self> {
        let dense = op.to_dense();
        let n = dense.nrows();
        if op.is_real() {
            let real = Mat::<f64>::from_fn(n, n, |i, j| dense[(i, j)].re);
            let (values, u) = linalg::real_symmetric_eigen(&real)?;
            let mut cols = Vec::with_capacity(n * n);
            for j in 0..n {
                cols.extend((0..n).map(|i| u[(i, j)]));
            }
            Ok(Self {
                values,
                vectors: Eigenvectors::Real(cols),
            })
        } else {
            let (values, u) = linalg::hermitian_eigen(&dense)?;
            let mut cols = Vec::with_capacity(n * n);
            for j in 0..n {
                cols.extend((0..n).map(|i| u[(i, j)]));
            }
            Ok(Self {
                values,
                vectors: Eigenvectors::Complex(cols),
            })
        }
    }

    /// Applies `f(H) = U diag(f(λ)) U†` to `psi`.
    fn apply_fn(&self, psi: &[C64], f: impl Fn(f64) -> C64) -> Vec<C64> {
        let n = self.values.len();
        let mut out = vec![ZERO; n];
        match &self.vectors {
            Eigenvectors::Real(u) => {
                for (k, col) in u.chunks_exact(n).enumerate() {
                    let c: C64 = col.iter().zip(psi).map(|(a, b)| b * a).sum();
                    let c = c * f(self.values[k]);
                    out.iter_mut().zip(col).for_each(|(o, a)| *o += c * a);
                }
            }
            Eigenvectors::Complex(u) => {
                for (k, col) in u.chunks_exact(n).enumerate() {
                    let c = linalg::dot(col, psi) * f(self.values[k]);
                    linalg::axpy(c, col, &mut out);
                }
            }
        }
        out
    }
}

/// Propagator bound to one Hermitian operator. Construction may be costly
/// (eigendecomposition); evolutions afterwards are cheap and reentrant.
pub struct Propagator<'a> {
    op: &'a dyn LinearOperator,
    cfg: PropagatorConfig,
    spectral: Option<Spectral>,
}

impl<'a> Propagator<'a> {
    pub fn new(op: &'a dyn LinearOperator, cfg: PropagatorConfig) -> Result<Self> {
        cfg.validate()?;
        let use_eigen = match cfg.method {
            Method::FullEigen => true,
            Method::Krylov => false,
            Method::Auto => op.dim() <= cfg.eigen_threshold,
        };
        let spectral = if use_eigen { Some(Spectral::new(op)?) } else { None };
        Ok(Self { op, cfg, spectral })
    }

    pub fn operator(&self) -> &'a dyn LinearOperator {
        self.op
    }

    pub fn config(&self) -> &PropagatorConfig {
        &self.cfg
    }

    pub fn uses_eigendecomposition(&self) -> bool {
        self.spectral.is_some()
    }

    /// Eigenvalues when the eigendecomposition engine is active.
    pub fn eigenvalues(&self) -> Option<&[f64]> {
        self.spectral.as_ref().map(|s| s.values.as_slice())
    }

    /// `exp(-i H t) psi`.
    pub fn evolve_vec(&self, psi: &[C64], t: f64) -> Result<Vec<C64>> {
        if psi.len() != self.op.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.op.dim(),
                found: psi.len(),
            });
        }
        if !t.is_finite() {
            return Err(Error::InvalidArgument(format!("evolution time {t} is not finite")));
        }
        if t == 0.0 {
            return Ok(psi.to_vec());
        }
        match &self.spectral {
            Some(s) => Ok(s.apply_fn(psi, |e| C64::from_polar(1.0, -e * t))),
            None => krylov_evolve(self.op, psi, t, &self.cfg),
        }
    }

    /// Evolves a symmetric state, renormalizing only on drift beyond
    /// [`NORM_DRIFT_TOL`].
    pub fn evolve(&self, state: &SymmetricState, t: f64) -> Result<SymmetricState> {
        let out = self.evolve_vec(state.amplitudes(), t)?;
        let mut next = SymmetricState::new(state.basis().clone(), out)?;
        next.renormalize_if_drifted(NORM_DRIFT_TOL);
        Ok(next)
    }
}

/// One-shot `exp(-i H t) state`. Reuse a [`Propagator`] when evolving many
/// states under the same Hamiltonian.
pub fn evolve(
    h: &dyn LinearOperator,
    state: &SymmetricState,
    t: f64,
    cfg: &PropagatorConfig,
) -> Result<SymmetricState> {
    Propagator::new(h, *cfg)?.evolve(state, t)
}

/// `<ψ, H ψ>` (real part; the imaginary part is roundoff for Hermitian H).
pub fn energy(h: &dyn LinearOperator, psi: &[C64]) -> f64 {
    let mut hpsi = vec![ZERO; psi.len()];
    h.apply(psi, &mut hpsi);
    linalg::dot(psi, &hpsi).re
}

struct Lanczos {
    basis: Vec<Vec<C64>>,
    alpha: Vec<f64>,
    /// `beta[j]` couples basis vectors `j` and `j + 1`; the last entry is
    /// the residual coupling used for the error estimate.
    beta: Vec<f64>,
    breakdown: bool,
}

fn lanczos(op: &dyn LinearOperator, start: &[C64], m: usize) -> Lanczos {
    let n = start.len();
    let mut v0 = start.to_vec();
    let b0 = linalg::norm(&v0);
    linalg::scale(&mut v0, C64::new(1.0 / b0, 0.0));
    let mut basis = vec![v0];
    let mut alpha = Vec::with_capacity(m);
    let mut beta = Vec::with_capacity(m);
    let mut w = vec![ZERO; n];
    let mut scale: f64 = 0.0;
    let m = m.min(n);
    for j in 0..m {
        op.apply(&basis[j], &mut w);
        let a = linalg::dot(&basis[j], &w).re;
        alpha.push(a);
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for v in &basis {
                let c = linalg::dot(v, &w);
                linalg::axpy(-c, v, &mut w);
            }
        }
        let b = linalg::norm(&w);
        scale = scale.max(a.abs() + b);
        beta.push(b);
        if b <= 1e-13 * scale.max(1e-300) {
            return Lanczos {
                basis,
                alpha,
                beta,
                breakdown: true,
            };
        }
        if j + 1 < m {
            let mut next = w.clone();
            linalg::scale(&mut next, C64::new(1.0 / b, 0.0));
            basis.push(next);
        }
    }
    let breakdown = basis.len() == n;
    Lanczos {
        basis,
        alpha,
        beta,
        breakdown,
    }
}

fn krylov_evolve(op: &dyn LinearOperator, psi: &[C64], t: f64, cfg: &PropagatorConfig) -> Result<Vec<C64>> {
    let mut v = psi.to_vec();
    let mut remaining = t;
    let mut tau = t.signum() * t.abs().min(cfg.max_step);
    let mut substeps = 0usize;

    while remaining != 0.0 {
        let b0 = linalg::norm(&v);
        if b0 == 0.0 {
            return Ok(v);
        }
        let lz = lanczos(op, &v, cfg.krylov_dim);
        let m = lz.basis.len();
        let tri = Mat::<f64>::from_fn(m, m, |i, j| {
            if i == j {
                lz.alpha[i]
            } else if i == j + 1 {
                lz.beta[j]
            } else if j == i + 1 {
                lz.beta[i]
            } else {
                0.0
            }
        });
        let (theta, q) = linalg::real_symmetric_eigen(&tri)?;
        let residual_coupling = if lz.breakdown { 0.0 } else { lz.beta[m - 1] };

        if tau.abs() > remaining.abs() {
            tau = remaining;
        }
        let coefficients = loop {
            substeps += 1;
            if substeps > cfg.max_substeps {
                return Err(Error::NonConvergence {
                    what: "Krylov propagation",
                    iterations: substeps,
                });
            }
            let y: Vec<C64> = (0..m)
                .map(|i| {
                    (0..m)
                        .map(|k| C64::from_polar(q[(i, k)] * q[(0, k)], -theta[k] * tau))
                        .sum::<C64>()
                        * b0
                })
                .collect();
            let err = residual_coupling * y[m - 1].norm();
            if err <= cfg.step_tol {
                break y;
            }
            tau *= 0.5;
            if tau.abs() < 1e-14 * t.abs().max(1.0) {
                return Err(Error::NonConvergence {
                    what: "Krylov step-size control",
                    iterations: substeps,
                });
            }
        };

        let mut next = vec![ZERO; v.len()];
        for (vec, c) in lz.basis.iter().zip(&coefficients) {
            linalg::axpy(*c, vec, &mut next);
        }
        v = next;
        remaining -= tau;
        if remaining.abs() <= 1e-15 * t.abs() {
            remaining = 0.0;
        }
        tau = (2.0 * tau).clamp(-cfg.max_step, cfg.max_step);
    }
    Ok(v)
}
