//! Closed-form envelopes of the proved inequalities, hierarchy residuals,
//! and log-log rate fitting.
//!
//! Every envelope depends on the interaction only through `‖V‖ = max |V|`
//! and, for the marginal bound, `λ_V = 1 + ‖V̂‖₁ / ‖V‖`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::SymmetricState;
use crate::hartree::HartreeOrbital;
use crate::lattice::LatticeModel;
use crate::linalg::{self, CMat, C64, ZERO};
use crate::rdm::{k_rdm, ReducedDensity};

/// Distances at or below this are numerical noise and never enter a fit.
pub const NOISE_FLOOR: f64 = 1e-9;

/// `(k² λ_V / N) e^{2k‖V‖} (e^{8‖V‖|t|} - 1)`
pub fn main_theorem_envelope(k: usize, n_particles: usize, t: f64, sup_norm_v: f64, lambda_v: Option<f64>) -> Result<f64> {
    let lambda = lambda_v.ok_or(Error::UndefinedLambda)?;
    check_common(n_particles, t, sup_norm_v)?;
    let k = k as f64;
    Ok(k * k * lambda / n_particles as f64 * (2.0 * k * sup_norm_v).exp() * (8.0 * sup_norm_v * t.abs()).exp_m1())
}

/// `(mn ‖A‖ ‖B‖ / N)(e^{4‖V‖|t|} - 1)`
pub fn commutator_envelope(m: usize, n: usize, n_particles: usize, t: f64, sup_norm_v: f64, norm_a: f64, norm_b: f64) -> Result<f64> {
    check_common(n_particles, t, sup_norm_v)?;
    Ok(prefactor(m, n, n_particles, norm_a, norm_b) * (4.0 * sup_norm_v * t.abs()).exp_m1())
}

/// `(mn ‖A‖ ‖B‖ / N)(e^{8‖V‖|t|} - 1)`
pub fn correlation_envelope(m: usize, n: usize, n_particles: usize, t: f64, sup_norm_v: f64, norm_a: f64, norm_b: f64) -> Result<f64> {
    check_common(n_particles, t, sup_norm_v)?;
    Ok(prefactor(m, n, n_particles, norm_a, norm_b) * (8.0 * sup_norm_v * t.abs()).exp_m1())
}

fn prefactor(m: usize, n: usize, n_particles: usize, norm_a: f64, norm_b: f64) -> f64 {
    (m * n) as f64 * norm_a * norm_b / n_particles as f64
}

fn check_common(n_particles: usize, t: f64, sup_norm_v: f64) -> Result<()> {
    if n_particles == 0 {
        return Err(Error::InvalidArgument("envelope needs N >= 1".into()));
    }
    if !t.is_finite() || !sup_norm_v.is_finite() || sup_norm_v < 0.0 {
        return Err(Error::InvalidArgument(format!("bad envelope inputs t={t}, ‖V‖={sup_norm_v}")));
    }
    Ok(())
}

/// One time slice of a hierarchy trajectory.
#[derive(Debug, Clone)]
pub struct HierarchyFrame {
    pub gamma_k: ReducedDensity,
    pub gamma_next: ReducedDensity,
}

impl HierarchyFrame {
    /// Marginals of orders `k` and `k + 1` of an N-body state.
    pub fn from_state(state: &SymmetricState, k: usize) -> Result<Self> {
        Ok(Self {
            gamma_k: k_rdm(state, k)?,
            gamma_next: k_rdm(state, k + 1)?,
        })
    }

    /// The factorized ansatz `|φ><φ|^{⊗k}`, `|φ><φ|^{⊗(k+1)}`.
    pub fn from_orbital(orbital: &HartreeOrbital, k: usize) -> Result<Self> {
        Ok(Self {
            gamma_k: ReducedDensity::pure_product(&orbital.phi, k)?,
            gamma_next: ReducedDensity::pure_product(&orbital.phi, k + 1)?,
        })
    }
}

/// Which hierarchy the residual is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hierarchy {
    /// Finite-N BBGKY with the `1/N` pair term and `(N-k)/N` coupling.
    Bbgky { n_particles: usize },
    /// The `N -> ∞` hierarchy.
    Infinite,
}

/// Right-hand side `Σ_j [h_j, γ] + (1/N) Σ_{i<j} [V_ij, γ] + c Σ_j Tr_{k+1}[V_{j,k+1}, γ^{(k+1)}]`
/// with `c = (N-k)/N` (BBGKY) or `c = 1` (infinite hierarchy).
pub fn hierarchy_rhs(model: &LatticeModel, frame: &HierarchyFrame, hierarchy: Hierarchy) -> Result<CMat> {
    let d = model.d();
    let k = frame.gamma_k.k();
    if frame.gamma_k.d() != d || frame.gamma_next.d() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: frame.gamma_k.d(),
        });
    }
    if frame.gamma_next.k() != k + 1 {
        return Err(Error::InvalidArgument(format!(
            "frame carries orders {} and {}, expected {k} and {}",
            k,
            frame.gamma_next.k(),
            k + 1
        )));
    }
    let coupling = match hierarchy {
        Hierarchy::Bbgky { n_particles } => {
            if n_particles <= k {
                return Err(Error::InvalidArgument(format!("BBGKY needs k < N, got k={k}, N={n_particles}")));
            }
            (n_particles - k) as f64 / n_particles as f64
        }
        Hierarchy::Infinite => 1.0,
    };

    let dim = frame.gamma_k.dim();
    let g = frame.gamma_k.matrix();
    let digits_of = |x: usize| -> Vec<usize> {
        let mut digits = vec![0usize; k];
        crate::fock::decompose(x, d, &mut digits);
        digits
    };
    let digits: Vec<Vec<usize>> = (0..dim).map(digits_of).collect();

    // one-body part
    let mut one_body = CMat::zeros(dim, dim);
    for j in 0..k {
        let mut factor = linalg::identity(1);
        for slot in 0..k {
            let piece = if slot == j { model.kinetic().clone() } else { linalg::identity(d) };
            factor = linalg::kron(&factor, &piece);
        }
        one_body = &one_body + &factor;
    }
    let mut rhs = &(&one_body * g) - &(g * &one_body);

    // pair interaction inside the k particles
    if let Hierarchy::Bbgky { n_particles } = hierarchy {
        let inv_n = 1.0 / n_particles as f64;
        let pair: Vec<f64> = digits
            .iter()
            .map(|x| {
                let mut e = 0.0;
                for i in 0..k {
                    for j in i + 1..k {
                        e += model.v_between(x[i], x[j]);
                    }
                }
                e * inv_n
            })
            .collect();
        for x in 0..dim {
            for y in 0..dim {
                rhs[(x, y)] += g[(x, y)] * (pair[x] - pair[y]);
            }
        }
    }

    // coupling to the (k+1)-particle marginal
    let g1 = frame.gamma_next.matrix();
    for x in 0..dim {
        for y in 0..dim {
            let mut acc = ZERO;
            for z in 0..d {
                let entry = g1[(x * d + z, y * d + z)];
                if entry == ZERO {
                    continue;
                }
                let mut w = 0.0;
                for j in 0..k {
                    w += model.v_between(digits[x][j], z) - model.v_between(digits[y][j], z);
                }
                acc += entry * w;
            }
            rhs[(x, y)] += acc * coupling;
        }
    }
    Ok(rhs)
}

/// Max over interior snapshots of the trace norm of
/// `i (γ(t+Δt) - γ(t-Δt)) / (2Δt) - RHS(t)`.
pub fn hierarchy_residual(frames: &[HierarchyFrame], dt: f64, model: &LatticeModel, hierarchy: Hierarchy) -> Result<f64> {
    if frames.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "a centered difference needs at least 3 snapshots, got {}",
            frames.len()
        )));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("snapshot spacing must be positive, got {dt}")));
    }
    let k = frames[0].gamma_k.k();
    if frames.iter().any(|f| f.gamma_k.k() != k) {
        return Err(Error::InvalidArgument("snapshots carry mixed marginal orders".into()));
    }
    let scale = C64::new(0.0, 0.5 / dt);
    let mut worst: f64 = 0.0;
    for w in frames.windows(3) {
        let rhs = hierarchy_rhs(model, &w[1], hierarchy)?;
        let diff = w[2].gamma_k.matrix() - w[0].gamma_k.matrix();
        let n = diff.nrows();
        let residual = CMat::from_fn(n, n, |i, j| diff[(i, j)] * scale - rhs[(i, j)]);
        worst = worst.max(linalg::trace_norm(&residual)?);
    }
    Ok(worst)
}

/// Residual of exact N-body marginals against the BBGKY hierarchy.
pub fn bbgky_residual(frames: &[HierarchyFrame], dt: f64, model: &LatticeModel, n_particles: usize) -> Result<f64> {
    hierarchy_residual(frames, dt, model, Hierarchy::Bbgky { n_particles })
}

/// Residual of the factorized Hartree ansatz against the infinite hierarchy.
pub fn infinite_hierarchy_residual(trajectory: &[HartreeOrbital], dt: f64, model: &LatticeModel, k: usize) -> Result<f64> {
    let frames = trajectory
        .iter()
        .map(|o| HierarchyFrame::from_orbital(o, k))
        .collect::<Result<Vec<_>>>()?;
    hierarchy_residual(&frames, dt, model, Hierarchy::Infinite)
}

/// Least-squares line through `(ln N, ln distance)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub used: usize,
    pub excluded: usize,
}

/// Fits `ln distance = intercept + slope ln N`. Points at or below
/// [`NOISE_FLOOR`] (or non-finite) are excluded with a warning.
pub fn fit_rate(points: &[(usize, f64)]) -> Result<RateFit> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(n, dist)| {
            let keep = n > 0 && dist.is_finite() && dist > NOISE_FLOOR;
            if !keep {
                log::warn!("rate fit: excluding point N={n}, distance={dist:e}");
            }
            keep
        })
        .map(|&(n, dist)| ((n as f64).ln(), dist.ln()))
        .collect();
    if usable.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "rate fit needs at least 3 points above the noise floor, got {}",
            usable.len()
        )));
    }
    let count = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / count;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / count;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = usable.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("rate fit needs at least two distinct N".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = usable.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy <= f64::EPSILON * count { 1.0 } else { 1.0 - ss_res / syy };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        used: usable.len(),
        excluded: points.len() - usable.len(),
    })
}

/// One measured distance against its envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub n_particles: usize,
    pub k: usize,
    pub t: f64,
    pub distance: f64,
    /// `None` when the envelope is undefined (vanishing interaction).
    pub envelope: Option<f64>,
    pub slope_group: String,
    pub seed: u64,
    pub model_digest: String,
}

impl ExperimentRecord {
    /// True when the distance respects the envelope up to `slack`, or the
    /// envelope is undefined.
    pub fn within(&self, slack: f64) -> bool {
        self.envelope.is_none_or(|e| self.distance <= e + slack)
    }
}
