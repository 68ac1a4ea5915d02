//! Lattice Hartree flow `i ∂_t φ = h φ + (V * |φ|²) φ`.
//!
//! Strang splitting: half a step of the exact kinetic flow (through a cached
//! eigendecomposition of `h`), a full step of the diagonal nonlinear phase
//! `exp(-i dt (V * |φ|²))`, another kinetic half step. Both sub-flows are
//! unitary, so the norm is conserved up to roundoff. The convolution is
//! circular and keeps the `r = 0` term; there is no `1/N`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeModel;
use crate::linalg::{self, CMat, C64};

/// Default first step for [`HartreeSolver::solve_adaptive`].
pub const DEFAULT_DT: f64 = 1e-3;
/// Agreement required between successive refinements.
pub const DEFAULT_REFINE_TOL: f64 = 1e-8;
const MAX_REFINEMENTS: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HartreeOrbital {
    pub time: f64,
    pub phi: Vec<C64>,
}

impl HartreeOrbital {
    /// Orbital at time zero. `phi` must have unit norm.
    pub fn new(phi: Vec<C64>) -> Result<Self> {
        let nrm = linalg::norm(&phi);
        if (nrm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized { norm: nrm });
        }
        Ok(Self { time: 0.0, phi })
    }

    /// The uniform orbital `φ_p = 1/√d`.
    pub fn uniform(d: usize) -> Self {
        let a = C64::new((d as f64).sqrt().recip(), 0.0);
        Self {
            time: 0.0,
            phi: vec![a; d],
        }
    }

    pub fn d(&self) -> usize {
        self.phi.len()
    }

    pub fn density(&self) -> Vec<f64> {
        self.phi.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// Hartree integrator bound to one model; caches the kinetic eigenbasis.
pub struct HartreeSolver<'a> {
    model: &'a LatticeModel,
    levels: Vec<f64>,
    modes: CMat,
}

impl<'a> HartreeSolver<'a> {
    pub fn new(model: &'a LatticeModel) -> Result<Self> {
        let (levels, modes) = linalg::hermitian_eigen(model.kinetic())?;
        Ok(Self { model, levels, modes })
    }

    pub fn model(&self) -> &LatticeModel {
        self.model
    }

    /// `exp(-i h tau)` as a dense matrix.
    pub fn kinetic_propagator(&self, tau: f64) -> CMat {
        let d = self.levels.len();
        let phases: Vec<C64> = self.levels.iter().map(|&e| C64::from_polar(1.0, -e * tau)).collect();
        CMat::from_fn(d, d, |i, j| {
            (0..d)
                .map(|k| self.modes[(i, k)] * phases[k] * self.modes[(j, k)].conj())
                .sum()
        })
    }

    /// Mean-field potential `V * |φ|²`.
    pub fn mean_field(&self, phi: &[C64]) -> Vec<f64> {
        let rho: Vec<f64> = phi.iter().map(|c| c.norm_sqr()).collect();
        self.model.convolve(&rho)
    }

    fn check(&self, orbital: &HartreeOrbital) -> Result<()> {
        if orbital.d() != self.model.d() {
            return Err(Error::DimensionMismatch {
                expected: self.model.d(),
                found: orbital.d(),
            });
        }
        let nrm = linalg::norm(&orbital.phi);
        if (nrm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized { norm: nrm });
        }
        Ok(())
    }

    /// Advances `phi0` by `t` (either sign) with substeps no longer than `dt`.
    pub fn solve(&self, phi0: &HartreeOrbital, t: f64, dt: f64) -> Result<HartreeOrbital> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
        }
        if !t.is_finite() {
            return Err(Error::InvalidArgument(format!("evolution time {t} is not finite")));
        }
        self.check(phi0)?;
        if t == 0.0 {
            return Ok(phi0.clone());
        }
        let steps = ((t.abs() / dt) - 1e-9).ceil().max(1.0) as usize;
        let h = t / steps as f64;
        let half = self.kinetic_propagator(0.5 * h);
        let full = self.kinetic_propagator(h);

        let d = self.model.d();
        let mut phi = phi0.phi.clone();
        let mut scratch = vec![linalg::ZERO; d];
        linalg::matvec(&half, &phi, &mut scratch);
        std::mem::swap(&mut phi, &mut scratch);
        for step in 0..steps {
            let w = self.mean_field(&phi);
            phi.iter_mut()
                .zip(&w)
                .for_each(|(c, &wx)| *c *= C64::from_polar(1.0, -h * wx));
            let kick = if step + 1 == steps { &half } else { &full };
            linalg::matvec(kick, &phi, &mut scratch);
            std::mem::swap(&mut phi, &mut scratch);
        }
        if phi.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("Hartree integration"));
        }
        Ok(HartreeOrbital {
            time: phi0.time + t,
            phi,
        })
    }

    /// Solves with `dt0`, then halves the step until two successive results
    /// agree to `tol` in ℓ². Returns the finest solution and its step.
    pub fn solve_adaptive(&self, phi0: &HartreeOrbital, t: f64, dt0: f64, tol: f64) -> Result<(HartreeOrbital, f64)> {
        let mut dt = dt0;
        let mut prev = self.solve(phi0, t, dt)?;
        for _ in 0..MAX_REFINEMENTS {
            dt *= 0.5;
            let next = self.solve(phi0, t, dt)?;
            let gap = linalg::distance(&prev.phi, &next.phi);
            prev = next;
            if gap <= tol {
                return Ok((prev, dt));
            }
        }
        Err(Error::NonConvergence {
            what: "Hartree step refinement",
            iterations: MAX_REFINEMENTS,
        })
    }

    /// Snapshots at `phi0.time + j * spacing`, `j = 0..count`, each interval
    /// integrated with `substeps` Strang steps.
    pub fn trajectory(
        &self,
        phi0: &HartreeOrbital,
        spacing: f64,
        count: usize,
        substeps: usize,
    ) -> Result<Vec<HartreeOrbital>> {
        if substeps == 0 {
            return Err(Error::InvalidArgument("substeps must be positive".into()));
        }
        let dt = spacing.abs() / substeps as f64;
        let mut out = Vec::with_capacity(count);
        let mut cur = phi0.clone();
        for j in 0..count {
            if j > 0 {
                let mut next = self.solve(&cur, spacing, dt)?;
                next.time = phi0.time + j as f64 * spacing;
                cur = next;
            }
            out.push(cur.clone());
        }
        Ok(out)
    }

    /// `<φ, h φ> + ½ <|φ|², V * |φ|²>`
    pub fn energy(&self, orbital: &HartreeOrbital) -> f64 {
        hartree_energy(self.model, orbital)
    }
}

/// One-shot solve; builds a fresh [`HartreeSolver`].
pub fn hartree_solve(model: &LatticeModel, phi0: &HartreeOrbital, t: f64, dt: f64) -> Result<HartreeOrbital> {
    HartreeSolver::new(model)?.solve(phi0, t, dt)
}

/// `<φ, h φ> + ½ <|φ|², V * |φ|²>`
pub fn hartree_energy(model: &LatticeModel, orbital: &HartreeOrbital) -> f64 {
    let d = model.d();
    let mut hphi = vec![linalg::ZERO; d];
    linalg::matvec(model.kinetic(), &orbital.phi, &mut hphi);
    let kinetic = linalg::dot(&orbital.phi, &hphi).re;
    let rho = orbital.density();
    let w = model.convolve(&rho);
    let interaction: f64 = rho.iter().zip(&w).map(|(a, b)| a * b).sum();
    kinetic + 0.5 * interaction
}
