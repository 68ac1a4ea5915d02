//! Run configuration: a TOML document with `[model]`, `[initial]`,
//! `[experiment]`, `[propagator]`, `[power_iteration]` and `[output]`
//! sections. Validation is pure and reports every violation at once.

use std::path::Path;

use meanfield::fock::basis_dimension;
use meanfield::rdm::RDM_DIM_LIMIT;
use meanfield::{build_lattice, HartreeOrbital, LatticeModel, PowerIterationConfig, PropagatorConfig, Shape, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Largest symmetric-subspace dimension a run may request.
pub const FOCK_DIM_LIMIT: usize = 2_000_000;
/// Largest full tensor-space dimension `d^N` for commutator runs.
pub const FULL_DIM_LIMIT: usize = meanfield::distinguishable::FULL_DIM_LIMIT;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    #[serde(default)]
    pub initial: InitialOrbital,
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub propagator: PropagatorConfig,
    #[serde(default)]
    pub power_iteration: PowerIterationConfig,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub d: usize,
    pub period: f64,
    #[serde(default = "zero_shape")]
    pub u: Shape,
    pub v: Shape,
}

fn zero_shape() -> Shape {
    Shape::Zero
}

/// One-body initial datum `φ_0`; the N-body state is `φ_0^{⊗N}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialOrbital {
    /// `exp(-(p - center)^2 / (2 width^2) + i momentum p)`, normalized.
    Packet {
        /// Defaults to `d / 3`.
        center: Option<f64>,
        #[serde(default = "default_width")]
        width: f64,
        #[serde(default = "default_momentum")]
        momentum: f64,
    },
    Uniform,
    /// Complex Gaussian entries drawn from the experiment seed.
    Random,
}

fn default_width() -> f64 {
    1.5f64.sqrt()
}

fn default_momentum() -> f64 {
    0.9
}

impl Default for InitialOrbital {
    fn default() -> Self {
        InitialOrbital::Packet {
            center: None,
            width: default_width(),
            momentum: default_momentum(),
        }
    }
}

impl InitialOrbital {
    pub fn build(&self, d: usize, seed: u64) -> meanfield::Result<HartreeOrbital> {
        let raw: Vec<C64> = match *self {
            InitialOrbital::Packet {
                center,
                width,
                momentum,
            } => {
                let c = center.unwrap_or(d as f64 / 3.0);
                (0..d)
                    .map(|p| {
                        let x = p as f64 - c;
                        C64::from_polar((-x * x / (2.0 * width * width)).exp(), momentum * p as f64)
                    })
                    .collect()
            }
            InitialOrbital::Uniform => vec![C64::new(1.0, 0.0); d],
            InitialOrbital::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..d)
                    .map(|_| C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
                    .collect()
            }
        };
        let norm = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        HartreeOrbital::new(raw.into_iter().map(|c| c / norm).collect())
    }

    /// Whether the orbital depends on the seed.
    pub fn is_seeded(&self) -> bool {
        matches!(self, InitialOrbital::Random)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Convergence,
    Commutator,
    Covariance,
    Bbgky,
    HartreeOnly,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::Commutator => "commutator",
            ExperimentKind::Covariance => "covariance",
            ExperimentKind::Bbgky => "bbgky",
            ExperimentKind::HartreeOnly => "hartree-only",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: ExperimentKind,
    /// Particle numbers.
    #[serde(default)]
    pub n: Vec<usize>,
    /// Marginal orders (convergence, bbgky).
    #[serde(default = "default_k")]
    pub k: Vec<usize>,
    /// Evaluation times, strictly ascending.
    pub t: Vec<f64>,
    /// Hartree base step; also the snapshot spacing for bbgky runs.
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Hartree step refinement tolerance.
    #[serde(default = "default_refine_tol")]
    pub refine_tol: f64,
    /// Mandatory; one sweep per seed.
    pub seeds: Vec<u64>,
    /// Observable pairs per seed (commutator, covariance).
    #[serde(default = "default_observables")]
    pub observables: usize,
    /// Arity `m` of the first observable.
    #[serde(default = "one")]
    pub arity_a: usize,
    /// Arity `n` of the second observable.
    #[serde(default = "one")]
    pub arity_b: usize,
}

fn default_k() -> Vec<usize> {
    vec![1]
}

fn default_dt() -> f64 {
    meanfield::hartree::DEFAULT_DT
}

fn default_refine_tol() -> f64 {
    meanfield::hartree::DEFAULT_REFINE_TOL
}

fn default_observables() -> usize {
    50
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Relative paths resolve against the config file's directory.
    pub directory: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Config,
    Budget,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub field: String,
    pub message: String,
}

impl Violation {
    fn config(field: &str, message: impl Into<String>) -> Self {
        Self {
            kind: ViolationKind::Config,
            field: field.to_string(),
            message: message.into(),
        }
    }

    fn budget(field: &str, message: impl Into<String>) -> Self {
        Self {
            kind: ViolationKind::Budget,
            field: field.to_string(),
            message: message.into(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, Violation> {
        toml::from_str(text).map_err(|e| Violation::config("<document>", e.to_string().trim_end()))
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<u8>), Violation> {
        let bytes = std::fs::read(path)
            .map_err(|e| Violation::config("<file>", format!("cannot read {}: {e}", path.display())))?;
        let text = std::str::from_utf8(&bytes).map_err(|e| Violation::config("<file>", format!("not UTF-8: {e}")))?;
        Ok((Self::parse(text)?, bytes))
    }

    pub fn build_model(&self) -> meanfield::Result<LatticeModel> {
        build_lattice(self.model.d, self.model.period, &self.model.u, &self.model.v)
    }

    /// Schema and budget checks; no computation beyond building the model.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let m = &self.model;
        let e = &self.experiment;
        if m.d == 0 {
            out.push(Violation::config("model.d", "must be at least 1"));
        }
        if !(m.period.is_finite() && m.period > 0.0) {
            out.push(Violation::config("model.period", "must be positive and finite"));
        }
        for (field, shape) in [("model.u", &m.u), ("model.v", &m.v)] {
            if let Err(err) = shape.validate() {
                out.push(Violation::config(field, err.to_string()));
            }
        }
        if out.is_empty() {
            if let Err(err) = self.build_model() {
                out.push(Violation::config("model", err.to_string()));
            }
        }
        if let InitialOrbital::Packet { center, width, momentum } = self.initial {
            if !(width.is_finite() && width > 0.0) {
                out.push(Violation::config("initial.width", "must be positive and finite"));
            }
            if !momentum.is_finite() || center.is_some_and(|c| !c.is_finite()) {
                out.push(Violation::config("initial", "parameters must be finite"));
            }
        }

        let needs_n = e.kind != ExperimentKind::HartreeOnly;
        if needs_n && e.n.is_empty() {
            out.push(Violation::config("experiment.n", "list is empty"));
        }
        if e.n.contains(&0) {
            out.push(Violation::config("experiment.n", "particle numbers must be at least 1"));
        }
        if e.k.is_empty() {
            out.push(Violation::config("experiment.k", "list is empty"));
        }
        if e.k.contains(&0) {
            out.push(Violation::config("experiment.k", "marginal orders must be at least 1"));
        }
        if e.t.is_empty() {
            out.push(Violation::config("experiment.t", "list is empty"));
        }
        if e.t.iter().any(|t| !t.is_finite()) {
            out.push(Violation::config("experiment.t", "times must be finite"));
        }
        if e.t.windows(2).any(|w| w[0] >= w[1]) {
            out.push(Violation::config("experiment.t", "times must be strictly ascending"));
        }
        if matches!(e.kind, ExperimentKind::Convergence | ExperimentKind::Covariance) && e.t.iter().any(|&t| t < 0.0) {
            out.push(Violation::config("experiment.t", "envelopes need t >= 0"));
        }
        if !(e.dt.is_finite() && e.dt > 0.0) {
            out.push(Violation::config("experiment.dt", "must be positive and finite"));
        }
        if !(e.refine_tol.is_finite() && e.refine_tol > 0.0) {
            out.push(Violation::config("experiment.refine_tol", "must be positive and finite"));
        }
        if e.seeds.is_empty() {
            out.push(Violation::config("experiment.seeds", "at least one seed is required"));
        }
        if self.output.directory.trim().is_empty() {
            out.push(Violation::config("output.directory", "must not be empty"));
        }
        if self.output.formats.is_empty() {
            out.push(Violation::config("output.formats", "list is empty"));
        }
        if let Err(err) = self.propagator.validate() {
            out.push(Violation::config("propagator", err.to_string()));
        }
        let pi = &self.power_iteration;
        if pi.max_iter == 0 || pi.restarts == 0 || !(pi.tol.is_finite() && pi.tol > 0.0) {
            out.push(Violation::config(
                "power_iteration",
                "max_iter and restarts must be positive, tol positive and finite",
            ));
        }

        let min_n = e.n.iter().copied().min().unwrap_or(0);
        let max_n = e.n.iter().copied().max().unwrap_or(0);
        let max_k = e.k.iter().copied().max().unwrap_or(0);
        match e.kind {
            ExperimentKind::Convergence => {
                if max_k > min_n && min_n > 0 {
                    out.push(Violation::config("experiment.k", format!("k={max_k} exceeds N={min_n}")));
                }
            }
            ExperimentKind::Bbgky => {
                if min_n > 0 && min_n < max_k + 1 {
                    out.push(Violation::config(
                        "experiment.n",
                        format!("bbgky runs need N >= max(k)+1 = {}, got N={min_n}", max_k + 1),
                    ));
                }
            }
            ExperimentKind::Commutator | ExperimentKind::Covariance => {
                if e.observables == 0 {
                    out.push(Violation::config("experiment.observables", "must be at least 1"));
                }
                if e.arity_a == 0 || e.arity_b == 0 {
                    out.push(Violation::config("experiment.arity_a", "arities must be at least 1"));
                }
                let total = e.arity_a + e.arity_b;
                if min_n > 0 && total > min_n {
                    out.push(Violation::config(
                        "experiment.n",
                        format!("observables need m+n={total} disjoint slots, got N={min_n}"),
                    ));
                }
            }
            ExperimentKind::HartreeOnly => {}
        }

        if m.d > 0 {
            out.extend(self.budget_violations(max_n, max_k));
        }
        out
    }

    fn budget_violations(&self, max_n: usize, max_k: usize) -> Vec<Violation> {
        let d = self.model.d;
        let e = &self.experiment;
        let mut out = Vec::new();
        let pow = |exp: usize| -> Option<usize> { d.checked_pow(u32::try_from(exp).ok()?) };
        let mut rdm_guard = |order: usize, what: &str| match pow(order) {
            Some(dim) if dim <= RDM_DIM_LIMIT => {}
            _ => out.push(Violation::budget(
                "experiment.k",
                format!("guard d^k: {what} needs d^{order} entries per side, limit {RDM_DIM_LIMIT}"),
            )),
        };
        match e.kind {
            ExperimentKind::Convergence => rdm_guard(max_k, "marginal"),
            ExperimentKind::Bbgky => rdm_guard(max_k + 1, "the (k+1)-marginal"),
            ExperimentKind::Covariance => rdm_guard(e.arity_a + e.arity_b, "the joint marginal"),
            _ => {}
        }
        match e.kind {
            ExperimentKind::Convergence | ExperimentKind::Covariance | ExperimentKind::Bbgky if max_n > 0 => {
                match basis_dimension(d, max_n) {
                    Ok(dim) if dim <= FOCK_DIM_LIMIT => {}
                    _ => out.push(Violation::budget(
                        "experiment.n",
                        format!("guard fock-dimension: C(d+N-1, N) for N={max_n} exceeds {FOCK_DIM_LIMIT}"),
                    )),
                }
            }
            ExperimentKind::Commutator if max_n > 0 => match pow(max_n) {
                Some(dim) if dim <= FULL_DIM_LIMIT => {}
                _ => out.push(Violation::budget(
                    "experiment.n",
                    format!("guard d^N: full space for N={max_n} exceeds {FULL_DIM_LIMIT}"),
                )),
            },
            _ => {}
        }
        out
    }
}
