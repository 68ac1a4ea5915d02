//! Executes a validated [`RunConfig`] and emits plot-ready tables.
//!
//! Independent `(seed, N)` cells run on the rayon pool; results are gathered
//! and sorted by key before anything is written, so output is a pure
//! function of the config.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use meanfield::bounds::HierarchyFrame;
use meanfield::{
    bbgky_residual, commutator_envelope, commutator_norm, correlation_envelope, covariance_gap, fit_rate, hamiltonian,
    infinite_hierarchy_residual, k_rdm, main_theorem_envelope, product_state, sample_observables, trace_distance,
    Error as CoreError, ExperimentRecord, FullHamiltonian, HartreeOrbital, HartreeSolver, LatticeModel,
    OccupationBasis, Propagator, RateFit, ReducedDensity, SlotObservable,
};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{ExperimentKind, Format, RunConfig, Violation, ViolationKind};

/// Slack added to the marginal and commutator envelopes.
pub const ENVELOPE_SLACK: f64 = 1e-6;
/// Slack added to the covariance envelope.
pub const COVARIANCE_SLACK: f64 = 1e-8;
/// Allowed Hartree mass drift.
pub const MASS_TOL: f64 = 1e-10;
/// Allowed relative Hartree energy drift per unit time.
pub const HARTREE_ENERGY_TOL: f64 = 1e-8;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration")]
    Config(Vec<Violation>),
    #[error("budget refusal")]
    Budget(Vec<Violation>),
    #[error("engine error: {0}")]
    Engine(CoreError),
    #[error("output error: {0}")]
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Budget(_) => EXIT_BUDGET,
            RunError::Engine(_) | RunError::Io(_) => EXIT_FAILURE,
        }
    }

    /// Machine-readable error list.
    pub fn to_json(&self) -> serde_json::Value {
        let (status, errors) = match self {
            RunError::Config(v) => ("config-error", serde_json::to_value(v).unwrap_or_default()),
            RunError::Budget(v) => ("budget-refusal", serde_json::to_value(v).unwrap_or_default()),
            RunError::Engine(e) => ("engine-error", serde_json::json!([{ "message": e.to_string() }])),
            RunError::Io(e) => ("output-error", serde_json::json!([{ "message": e }])),
        };
        serde_json::json!({ "status": status, "exit_code": self.exit_code(), "errors": errors })
    }
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Budget { guard, required, limit } => RunError::Budget(vec![Violation {
                kind: ViolationKind::Budget,
                field: guard.to_string(),
                message: format!("guard {guard}: requires {required}, limit {limit}"),
            }]),
            other => RunError::Engine(other),
        }
    }
}

/// Splits violations into a config error (preferred) or a budget refusal.
pub fn check(cfg: &RunConfig) -> Result<(), RunError> {
    let violations = cfg.validate();
    if violations.is_empty() {
        return Ok(());
    }
    if violations.iter().any(|v| v.kind == ViolationKind::Config) {
        Err(RunError::Config(violations))
    } else {
        Err(RunError::Budget(violations))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
    Undefined,
}

impl Cell {
    /// Floats carry 17 significant digits, enough to round-trip exactly.
    pub fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Text(s) => s.clone(),
            Cell::Undefined => "undefined".into(),
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Cell::Int(i) => serde_json::json!(i),
            Cell::Float(x) => serde_json::json!(x),
            Cell::Text(s) => serde_json::json!(s),
            Cell::Undefined => serde_json::Value::Null,
        }
    }
}

fn int(x: usize) -> Cell {
    Cell::Int(x as u64)
}

fn opt(x: Option<f64>) -> Cell {
    x.map_or(Cell::Undefined, Cell::Float)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitRecord {
    pub slope_group: String,
    #[serde(flatten)]
    pub fit: RateFit,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelSummary {
    pub d: usize,
    pub period: f64,
    pub sup_norm: f64,
    pub fourier_l1: f64,
    pub lambda_v: Option<f64>,
    pub digest: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct WallTimes {
    pub compute_seconds: f64,
    pub write_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub kind: &'static str,
    pub config_digest: String,
    pub model: ModelSummary,
    pub seeds: Vec<u64>,
    pub rows: usize,
    pub files: Vec<String>,
    pub fits: Vec<FitRecord>,
    pub invariant_violations: Vec<String>,
    pub wall_times: WallTimes,
}

/// Everything a run produced, before it is written.
#[derive(Debug, Clone)]
pub struct Computed {
    pub table: Table,
    pub fits: Vec<FitRecord>,
    pub violations: Vec<String>,
    /// Additional JSON documents keyed by file stem.
    pub extra_json: BTreeMap<String, serde_json::Value>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of the model's sampled data; identical models share it.
pub fn model_digest(model: &LatticeModel) -> String {
    let mut text = format!("d={};period={:.16e}", model.d(), model.period());
    for (name, xs) in [("u", model.u_samples()), ("v", model.v_samples())] {
        text.push_str(&format!(";{name}="));
        let parts: Vec<String> = xs.iter().map(|x| format!("{x:.16e}")).collect();
        text.push_str(&parts.join(","));
    }
    sha256_hex(text.as_bytes())
}

pub fn model_summary(model: &LatticeModel) -> ModelSummary {
    let norms = model.norms();
    ModelSummary {
        d: model.d(),
        period: model.period(),
        sup_norm: norms.sup_norm,
        fourier_l1: norms.fourier_l1,
        lambda_v: norms.lambda_v,
        digest: model_digest(model),
    }
}

/// Summary of a finished run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub manifest: Manifest,
    pub directory: PathBuf,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if self.manifest.invariant_violations.is_empty() {
            EXIT_OK
        } else {
            EXIT_INVARIANT
        }
    }
}

/// Validates, computes and writes. `config_bytes` feeds the manifest digest.
pub fn run(cfg: &RunConfig, config_bytes: &[u8], out_dir: &Path) -> Result<RunSummary, RunError> {
    let start = Instant::now();
    check(cfg)?;
    let model = cfg.build_model()?;
    let computed = compute(cfg, &model)?;
    let compute_seconds = start.elapsed().as_secs_f64();

    let write_start = Instant::now();
    std::fs::create_dir_all(out_dir).map_err(|e| RunError::Io(format!("{}: {e}", out_dir.display())))?;
    let kind = cfg.experiment.kind.name();
    let mut files = Vec::new();
    for format in sorted_formats(&cfg.output.formats) {
        match format {
            Format::Csv => {
                let name = format!("{kind}.csv");
                write_csv(&out_dir.join(&name), &computed.table)?;
                files.push(name);
            }
            Format::Json => {
                let name = format!("{kind}.json");
                write_json(&out_dir.join(&name), &table_json(&computed.table))?;
                files.push(name);
                for (stem, doc) in &computed.extra_json {
                    let name = format!("{stem}.json");
                    write_json(&out_dir.join(&name), doc)?;
                    files.push(name);
                }
            }
        }
    }
    for v in &computed.violations {
        log::debug!("invariant violation: {v}");
    }
    let mut seeds = cfg.experiment.seeds.clone();
    seeds.sort_unstable();
    seeds.dedup();
    files.push("manifest.json".into());
    let mut manifest = Manifest {
        tool: "meanfield",
        version: env!("CARGO_PKG_VERSION"),
        kind,
        config_digest: sha256_hex(config_bytes),
        model: model_summary(&model),
        seeds,
        rows: computed.table.rows.len(),
        files,
        fits: computed.fits,
        invariant_violations: computed.violations,
        wall_times: WallTimes {
            compute_seconds,
            write_seconds: 0.0,
            total_seconds: 0.0,
        },
    };
    manifest.wall_times.write_seconds = write_start.elapsed().as_secs_f64();
    manifest.wall_times.total_seconds = start.elapsed().as_secs_f64();
    write_json(
        &out_dir.join("manifest.json"),
        &serde_json::to_value(&manifest).map_err(|e| RunError::Io(e.to_string()))?,
    )?;
    Ok(RunSummary {
        manifest,
        directory: out_dir.to_path_buf(),
    })
}

fn sorted_formats(formats: &[Format]) -> Vec<Format> {
    let mut f = formats.to_vec();
    f.sort_unstable();
    f.dedup();
    f
}

fn write_csv(path: &Path, table: &Table) -> Result<(), RunError> {
    let io = |e: csv::Error| RunError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(&table.header).map_err(io)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render)).map_err(io)?;
    }
    w.flush().map_err(|e| RunError::Io(format!("{}: {e}", path.display())))
}

fn table_json(table: &Table) -> serde_json::Value {
    let rows: Vec<serde_json::Value> = table
        .rows
        .iter()
        .map(|row| {
            let obj: serde_json::Map<String, serde_json::Value> = table
                .header
                .iter()
                .zip(row)
                .map(|(h, c)| (h.to_string(), c.to_json()))
                .collect();
            serde_json::Value::Object(obj)
        })
        .collect();
    serde_json::Value::Array(rows)
}

fn write_json(path: &Path, doc: &serde_json::Value) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(doc).map_err(|e| RunError::Io(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))
}

/// Runs the experiment without touching the filesystem.
pub fn compute(cfg: &RunConfig, model: &LatticeModel) -> Result<Computed, RunError> {
    let mut seeds = cfg.experiment.seeds.clone();
    seeds.sort_unstable();
    seeds.dedup();
    let mut computed = match cfg.experiment.kind {
        ExperimentKind::Convergence => convergence(cfg, model, &seeds)?,
        ExperimentKind::Commutator => commutator(cfg, model, &seeds)?,
        ExperimentKind::Covariance => covariance(cfg, model, &seeds)?,
        ExperimentKind::Bbgky => bbgky(cfg, model, &seeds)?,
        ExperimentKind::HartreeOnly => hartree_only(cfg, model, &seeds)?,
    };
    computed.violations.sort();
    computed.violations.dedup();
    Ok(computed)
}

fn sorted_unique(xs: &[usize]) -> Vec<usize> {
    let mut v = xs.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Hartree orbitals at each grid time, by adaptive refinement.
fn hartree_references(cfg: &RunConfig, solver: &HartreeSolver<'_>, orb0: &HartreeOrbital) -> Result<Vec<HartreeOrbital>, RunError> {
    let e = &cfg.experiment;
    e.t.par_iter()
        .map(|&t| Ok(solver.solve_adaptive(orb0, t, e.dt, e.refine_tol)?.0))
        .collect()
}

fn convergence(cfg: &RunConfig, model: &LatticeModel, seeds: &[u64]) -> Result<Computed, RunError> {
    let e = &cfg.experiment;
    let d = model.d();
    let norms = model.norms();
    let digest = model_digest(model);
    let ks = sorted_unique(&e.k);
    let solver = HartreeSolver::new(model)?;
    let mut records: Vec<ExperimentRecord> = Vec::new();
    let mut violations = Vec::new();
    for &seed in seeds {
        let orb0 = cfg.initial.build(d, seed)?;
        let refs = hartree_references(cfg, &solver, &orb0)?;
        let cells: Vec<(Vec<ExperimentRecord>, Vec<String>)> = sorted_unique(&e.n)
            .par_iter()
            .map(|&n| -> Result<_, RunError> {
                let basis = Arc::new(OccupationBasis::new(d, n)?);
                let h = hamiltonian(model, basis.clone())?;
                let prop = Propagator::new(&h, cfg.propagator)?;
                let psi = product_state(&orb0.phi, basis)?;
                let mut recs = Vec::new();
                let mut bad = Vec::new();
                for (&t, reference) in e.t.iter().zip(&refs) {
                    let state = prop.evolve(&psi, t)?;
                    for &k in &ks {
                        let gamma = k_rdm(&state, k)?;
                        for problem in gamma.invariant_violations() {
                            bad.push(format!("seed={seed} N={n} k={k} t={t}: marginal {problem}"));
                        }
                        let pure = ReducedDensity::pure_product(&reference.phi, k)?;
                        let distance = trace_distance(&gamma, &pure)?;
                        let envelope = match norms.lambda_v {
                            Some(l) => Some(main_theorem_envelope(k, n, t, norms.sup_norm, Some(l))?),
                            None => None,
                        };
                        recs.push(ExperimentRecord {
                            n_particles: n,
                            k,
                            t,
                            distance,
                            envelope,
                            slope_group: format!("seed={seed};k={k};t={t}"),
                            seed,
                            model_digest: digest.clone(),
                        });
                    }
                }
                Ok((recs, bad))
            })
            .collect::<Result<_, _>>()?;
        for (recs, bad) in cells {
            records.extend(recs);
            violations.extend(bad);
        }
    }
    records.sort_by(|a, b| {
        (a.seed, a.n_particles, a.k)
            .cmp(&(b.seed, b.n_particles, b.k))
            .then(a.t.total_cmp(&b.t))
    });

    let mut groups: BTreeMap<(u64, usize, u64), (String, Vec<(usize, f64)>)> = BTreeMap::new();
    let mut rows = Vec::with_capacity(records.len());
    for r in &records {
        if !r.within(ENVELOPE_SLACK) {
            violations.push(format!(
                "seed={} N={} k={} t={}: distance {:e} exceeds envelope {:e}",
                r.seed,
                r.n_particles,
                r.k,
                r.t,
                r.distance,
                r.envelope.unwrap_or(f64::NAN)
            ));
        }
        if r.t > 0.0 {
            groups
                .entry((r.seed, r.k, r.t.to_bits()))
                .or_insert_with(|| (r.slope_group.clone(), Vec::new()))
                .1
                .push((r.n_particles, r.distance));
        }
        let ratio = r.envelope.filter(|&env| env > 0.0).map(|env| r.distance / env);
        rows.push(vec![
            Cell::Int(r.seed),
            int(r.n_particles),
            int(r.k),
            Cell::Float(r.t),
            Cell::Float(r.distance),
            opt(r.envelope),
            opt(ratio),
        ]);
    }
    let mut group_list: Vec<_> = groups.into_values().collect();
    group_list.sort_by(|a, b| a.0.cmp(&b.0));
    let fits = group_list
        .into_iter()
        .filter(|(_, pts)| pts.len() >= 3)
        .filter_map(|(slope_group, pts)| match fit_rate(&pts) {
            Ok(fit) => Some(FitRecord { slope_group, fit }),
            Err(err) => {
                log::warn!("no rate fit for {slope_group}: {err}");
                None
            }
        })
        .collect();
    Ok(Computed {
        table: Table {
            header: vec!["seed", "N", "k", "t", "distance", "envelope", "ratio"],
            rows,
        },
        fits,
        violations,
        extra_json: BTreeMap::new(),
    })
}

/// Observable pairs for one seed: `A` on slots `0..m`, `B` on `m..m+n`.
fn observable_pairs(cfg: &RunConfig, d: usize, seed: u64) -> Result<Vec<(SlotObservable, SlotObservable)>, RunError> {
    let e = &cfg.experiment;
    let a = sample_observables(d, e.arity_a, e.observables, seed)?;
    let b = sample_observables(d, e.arity_b, e.observables, seed.rotate_left(32) ^ 0x9e37_79b9_7f4a_7c15)?;
    let shifted: Vec<usize> = (e.arity_a..e.arity_a + e.arity_b).collect();
    a.into_iter()
        .zip(b)
        .map(|(a, b)| Ok((a, b.with_slots(shifted.clone())?)))
        .collect()
}

fn commutator(cfg: &RunConfig, model: &LatticeModel, seeds: &[u64]) -> Result<Computed, RunError> {
    let e = &cfg.experiment;
    let d = model.d();
    let sup = model.norms().sup_norm;
    let mut rows: Vec<(u64, usize, usize, usize, Vec<Cell>)> = Vec::new();
    let mut violations = Vec::new();
    for &seed in seeds {
        let pairs = observable_pairs(cfg, d, seed)?;
        let cells: Vec<Vec<(usize, usize, usize, Vec<Cell>, Option<String>)>> = sorted_unique(&e.n)
            .par_iter()
            .map(|&n| -> Result<_, RunError> {
                let h = FullHamiltonian::new(model, n)?;
                let prop = Propagator::new(&h, cfg.propagator)?;
                let mut out = Vec::new();
                for (ti, &t) in e.t.iter().enumerate() {
                    for (p, (a, b)) in pairs.iter().enumerate() {
                        let env = commutator_envelope(e.arity_a, e.arity_b, n, t, sup, a.op_norm(), b.op_norm())?;
                        let est = commutator_norm(&prop, d, n, a, b, t, &cfg.power_iteration)?;
                        let bad = (est.value > env + ENVELOPE_SLACK).then(|| {
                            format!("seed={seed} pair={p} N={n} t={t}: commutator {:e} exceeds envelope {env:e}", est.value)
                        });
                        if !est.converged {
                            log::warn!("seed={seed} pair={p} N={n} t={t}: power iteration stopped unconverged");
                        }
                        out.push((
                            n,
                            ti,
                            p,
                            vec![
                                Cell::Int(seed),
                                int(p),
                                int(e.arity_a),
                                int(e.arity_b),
                                int(n),
                                Cell::Float(t),
                                Cell::Float(est.value),
                                Cell::Float(env),
                                Cell::Float(env - est.value),
                                Cell::Float(est.residual),
                            ],
                            bad,
                        ));
                    }
                }
                Ok(out)
            })
            .collect::<Result<_, _>>()?;
        for (n, ti, p, row, bad) in cells.into_iter().flatten() {
            rows.push((seed, n, ti, p, row));
            violations.extend(bad);
        }
    }
    rows.sort_by_key(|r| (r.0, r.1, r.2, r.3));
    Ok(Computed {
        table: Table {
            header: vec!["seed", "pair", "m", "n", "N", "t", "estimate", "envelope", "slack", "residual"],
            rows: rows.into_iter().map(|r| r.4).collect(),
        },
        fits: Vec::new(),
        violations,
        extra_json: BTreeMap::new(),
    })
}

fn covariance(cfg: &RunConfig, model: &LatticeModel, seeds: &[u64]) -> Result<Computed, RunError> {
    let e = &cfg.experiment;
    let d = model.d();
    let sup = model.norms().sup_norm;
    let mut rows: Vec<(u64, usize, usize, usize, Vec<Cell>)> = Vec::new();
    let mut violations = Vec::new();
    for &seed in seeds {
        let orb0 = cfg.initial.build(d, seed)?;
        let pairs = observable_pairs(cfg, d, seed)?;
        let cells: Vec<Vec<(usize, usize, usize, Vec<Cell>, Option<String>)>> = sorted_unique(&e.n)
            .par_iter()
            .map(|&n| -> Result<_, RunError> {
                let basis = Arc::new(OccupationBasis::new(d, n)?);
                let h = hamiltonian(model, basis.clone())?;
                let prop = Propagator::new(&h, cfg.propagator)?;
                let psi = product_state(&orb0.phi, basis)?;
                let mut out = Vec::new();
                for (ti, &t) in e.t.iter().enumerate() {
                    let state = prop.evolve(&psi, t)?;
                    for (p, (a, b)) in pairs.iter().enumerate() {
                        let env = correlation_envelope(e.arity_a, e.arity_b, n, t, sup, a.op_norm(), b.op_norm())?;
                        let gap = covariance_gap(&state, a.matrix(), b.matrix())?;
                        let bad = (gap > env + COVARIANCE_SLACK)
                            .then(|| format!("seed={seed} pair={p} N={n} t={t}: covariance {gap:e} exceeds envelope {env:e}"));
                        out.push((
                            n,
                            ti,
                            p,
                            vec![
                                Cell::Int(seed),
                                int(p),
                                int(e.arity_a),
                                int(e.arity_b),
                                int(n),
                                Cell::Float(t),
                                Cell::Float(gap),
                                Cell::Float(env),
                                Cell::Float(env - gap),
                            ],
                            bad,
                        ));
                    }
                }
                Ok(out)
            })
            .collect::<Result<_, _>>()?;
        for (n, ti, p, row, bad) in cells.into_iter().flatten() {
            rows.push((seed, n, ti, p, row));
            violations.extend(bad);
        }
    }
    rows.sort_by_key(|r| (r.0, r.1, r.2, r.3));
    Ok(Computed {
        table: Table {
            header: vec!["seed", "pair", "m", "n", "N", "t", "gap", "envelope", "slack"],
            rows: rows.into_iter().map(|r| r.4).collect(),
        },
        fits: Vec::new(),
        violations,
        extra_json: BTreeMap::new(),
    })
}

/// Snapshot spacings: the configured `dt` and its half, for the order check.
fn spacings(dt: f64) -> [f64; 2] {
    [dt, dt / 2.0]
}

/// Sub-steps per snapshot interval for the Hartree trajectory.
const HIERARCHY_SUBSTEPS: usize = 20;

fn bbgky(cfg: &RunConfig, model: &LatticeModel, seeds: &[u64]) -> Result<Computed, RunError> {
    let e = &cfg.experiment;
    let d = model.d();
    let ks = sorted_unique(&e.k);
    let solver = HartreeSolver::new(model)?;
    // sort key: (seed, k, N or usize::MAX for the infinite hierarchy, spacing index)
    let mut rows: Vec<((u64, usize, usize, usize), Vec<Cell>)> = Vec::new();
    for &seed in seeds {
        let orb0 = cfg.initial.build(d, seed)?;
        let cells: Vec<Vec<((u64, usize, usize, usize), Vec<Cell>)>> = sorted_unique(&e.n)
            .par_iter()
            .map(|&n| -> Result<_, RunError> {
                let basis = Arc::new(OccupationBasis::new(d, n)?);
                let h = hamiltonian(model, basis.clone())?;
                let prop = Propagator::new(&h, cfg.propagator)?;
                let psi = product_state(&orb0.phi, basis)?;
                let mut out = Vec::new();
                for &k in ks.iter().filter(|&&k| k < n) {
                    for (si, dt) in spacings(e.dt).into_iter().enumerate() {
                        let mut worst: f64 = 0.0;
                        for &t in &e.t {
                            let frames = [t - dt, t, t + dt]
                                .iter()
                                .map(|&s| Ok(HierarchyFrame::from_state(&prop.evolve(&psi, s)?, k)?))
                                .collect::<Result<Vec<_>, RunError>>()?;
                            worst = worst.max(bbgky_residual(&frames, dt, model, n)?);
                        }
                        out.push((
                            (seed, k, n, si),
                            vec![Cell::Int(seed), int(k), int(n), Cell::Float(dt), Cell::Float(worst)],
                        ));
                    }
                }
                Ok(out)
            })
            .collect::<Result<_, _>>()?;
        rows.extend(cells.into_iter().flatten());

        for &k in &ks {
            for (si, dt) in spacings(e.dt).into_iter().enumerate() {
                let mut worst: f64 = 0.0;
                for &t in &e.t {
                    let (start, _) = solver.solve_adaptive(&orb0, t - dt, e.dt, e.refine_tol)?;
                    let traj = solver.trajectory(&start, dt, 3, HIERARCHY_SUBSTEPS)?;
                    worst = worst.max(infinite_hierarchy_residual(&traj, dt, model, k)?);
                }
                rows.push((
                    (seed, k, usize::MAX, si),
                    vec![Cell::Int(seed), int(k), Cell::Text("inf".into()), Cell::Float(dt), Cell::Float(worst)],
                ));
            }
        }
    }
    rows.sort_by_key(|r| r.0);
    Ok(Computed {
        table: Table {
            header: vec!["seed", "k", "N", "dt", "residual"],
            rows: rows.into_iter().map(|r| r.1).collect(),
        },
        fits: Vec::new(),
        violations: Vec::new(),
        extra_json: BTreeMap::new(),
    })
}

fn hartree_only(cfg: &RunConfig, model: &LatticeModel, seeds: &[u64]) -> Result<Computed, RunError> {
    let e = &cfg.experiment;
    let d = model.d();
    let solver = HartreeSolver::new(model)?;
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    let mut trajectories = serde_json::Map::new();
    let horizon = e.t.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    for &seed in seeds {
        let orb0 = cfg.initial.build(d, seed)?;
        let e0 = solver.energy(&orb0);
        let (_, dt) = solver.solve_adaptive(&orb0, horizon, e.dt, e.refine_tol)?;
        let mut snapshots = Vec::with_capacity(e.t.len());
        let mut cur = orb0.clone();
        for &t in &e.t {
            cur = solver.solve(&cur, t - cur.time, dt)?;
            cur.time = t;
            let mass = cur.phi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let energy = solver.energy(&cur);
            let drift = (energy - e0).abs() / e0.abs().max(f64::MIN_POSITIVE);
            if (mass - 1.0).abs() > MASS_TOL {
                violations.push(format!("seed={seed} t={t}: Hartree mass drift {:e}", (mass - 1.0).abs()));
            }
            if drift > HARTREE_ENERGY_TOL * t.abs().max(1.0) {
                violations.push(format!("seed={seed} t={t}: Hartree energy drift {drift:e}"));
            }
            rows.push(vec![
                Cell::Int(seed),
                Cell::Float(t),
                Cell::Float(mass),
                Cell::Float(energy),
                Cell::Float(drift),
                Cell::Float(dt),
            ]);
            snapshots.push(cur.clone());
        }
        trajectories.insert(
            seed.to_string(),
            serde_json::to_value(&snapshots).map_err(|err| RunError::Io(err.to_string()))?,
        );
    }
    let mut extra_json = BTreeMap::new();
    extra_json.insert("hartree-only_trajectory".to_string(), serde_json::Value::Object(trajectories));
    Ok(Computed {
        table: Table {
            header: vec!["seed", "t", "mass", "energy", "energy_drift", "dt"],
            rows,
        },
        fits: Vec::new(),
        violations,
        extra_json,
    })
}
