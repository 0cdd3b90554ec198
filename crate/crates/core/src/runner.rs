//! Orchestrates a full verification pipeline for one catalog entry and
//! aggregates a machine-readable report.
//!
//! Checks form a dependency DAG (the eigenmap checks need minimality and
//! parallelism, the spectral check additionally needs isoparametricity, the
//! hemisphere scan needs the spectral eigenbasis); the runner computes
//! prerequisites on demand and marks downstream checks as skipped when an
//! upstream one does not pass, so a failure never aborts a run.
//!
//! Reports are deterministic: given the same spec, grid, step and seed, two
//! runs produce byte-identical canonical JSON regardless of the worker count.
//! Wall-clock timings and the worker count live in a separate `runtime` block
//! that the canonical form strips.

use std::cell::{OnceCell, RefCell};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{
    basis_table, cd_inverse, cd_multiply, sedenion_zero_divisor, CDElement, TranslationMatrix,
};
use crate::catalog::{build_chart, format_spec, parse_spec, CatalogEntry};
use crate::chart::{cap_grid, frames_at, Chart, NormalHintSet};
use crate::gauss::{
    aggregate_eigenmap, gauss_field, harmonicity_from_cache, laplacian_grid, lemma_scan,
    node_weights, GaussMapField,
};
use crate::hemisphere::{hemisphere_scan, mean_zero_check, HemisphereReport};
use crate::linalg::norm8;
use crate::spectra::{
    bstarb_eigencheck, combined_normal, shape_operator, spectra_scan, SpectraScan,
};
use crate::tol::{Tolerances, DEFAULT_FD_STEP, NODE_CAP};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CheckKind {
    Algebra,
    Minimality,
    Parallelism,
    Isoparametric,
    Lemma,
    Theorem1,
    Theorem2,
    Corollary,
    Hemisphere,
}

impl CheckKind {
    pub const ALL: [CheckKind; 9] = [
        CheckKind::Algebra,
        CheckKind::Minimality,
        CheckKind::Parallelism,
        CheckKind::Isoparametric,
        CheckKind::Lemma,
        CheckKind::Theorem1,
        CheckKind::Theorem2,
        CheckKind::Corollary,
        CheckKind::Hemisphere,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Algebra => "algebra",
            CheckKind::Minimality => "minimality",
            CheckKind::Parallelism => "parallelism",
            CheckKind::Isoparametric => "isoparametric",
            CheckKind::Lemma => "lemma",
            CheckKind::Theorem1 => "theorem1",
            CheckKind::Theorem2 => "theorem2",
            CheckKind::Corollary => "corollary",
            CheckKind::Hemisphere => "hemisphere",
        }
    }

    fn prerequisites(self) -> &'static [CheckKind] {
        match self {
            CheckKind::Algebra
            | CheckKind::Minimality
            | CheckKind::Parallelism
            | CheckKind::Isoparametric => &[],
            CheckKind::Lemma | CheckKind::Theorem1 | CheckKind::Corollary => {
                &[CheckKind::Minimality, CheckKind::Parallelism]
            }
            CheckKind::Theorem2 => &[
                CheckKind::Minimality,
                CheckKind::Parallelism,
                CheckKind::Isoparametric,
            ],
            CheckKind::Hemisphere => &[CheckKind::Theorem2],
        }
    }
}

impl FromStr for CheckKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CheckKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownCheck(s.to_string()))
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub manifold: String,
    /// per-axis grid request; `None` means the dimension-based default
    pub grid: Option<Vec<usize>>,
    pub fd_step: f64,
    pub checks: Vec<CheckKind>,
    pub tolerances: Tolerances,
    /// echoed in the report so overrides are visible
    pub tolerance_overrides: BTreeMap<String, f64>,
    pub seed: u64,
    /// 0 uses the ambient thread pool
    pub workers: usize,
    pub hemisphere_budget: usize,
}

impl RunConfig {
    pub fn new(manifold: impl Into<String>) -> Self {
        RunConfig {
            manifold: manifold.into(),
            grid: None,
            fd_step: DEFAULT_FD_STEP,
            checks: CheckKind::ALL.to_vec(),
            tolerances: Tolerances::default(),
            tolerance_overrides: BTreeMap::new(),
            seed: 1,
            workers: 0,
            hemisphere_budget: 256,
        }
    }

    pub fn override_tolerance(&mut self, name: &str, value: f64) -> Result<()> {
        self.tolerances.set(name, value)?;
        self.tolerance_overrides.insert(name.to_string(), value);
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if let Some(grid) = &self.grid {
            if grid.is_empty() || grid.iter().any(|&n| n < 8) {
                return Err(Error::InvalidConfig(
                    "grid resolution must be at least 8 per axis".into(),
                ));
            }
        }
        if !(1e-6..=1e-1).contains(&self.fd_step) {
            return Err(Error::InvalidConfig(format!(
                "fd step {} outside [1e-6, 1e-1]",
                self.fd_step
            )));
        }
        if self.checks.is_empty() {
            return Err(Error::InvalidConfig("no checks requested".into()));
        }
        Ok(())
    }
}

/// Per-axis default resolution: 24 for d ≤ 3, 12 for d ∈ {4,5}, 8 for d = 6.
pub fn default_grid(d: usize) -> Vec<usize> {
    let n = match d {
        0..=3 => 24,
        4 | 5 => 12,
        _ => 8,
    };
    vec![n; d]
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Refused,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub stats: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EntryInfo {
    pub name: String,
    pub dim: usize,
    pub codim: usize,
    pub minimal: bool,
    pub factors: Vec<(usize, f64)>,
    pub hints: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub manifold: String,
    pub requested_grid: Vec<usize>,
    pub effective_grid: Vec<usize>,
    pub fd_step: f64,
    pub seed: u64,
    pub checks: Vec<String>,
    pub hemisphere_budget: usize,
    pub tolerance_overrides: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GramSummary {
    pub gram: Vec<Vec<f64>>,
    pub sigma: Vec<f64>,
    pub degeneracies: Vec<usize>,
    pub gram_spread: f64,
    pub sigma_spread: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenRow {
    pub j: usize,
    pub sigma: f64,
    pub lambda: f64,
    pub residual_l2: f64,
    pub residual_max: f64,
    pub nodes: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RuntimeInfo {
    pub workers: usize,
    pub timings_ms: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub entry: EntryInfo,
    pub config: ConfigEcho,
    pub checks: Vec<CheckReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gram: Option<GramSummary>,
    pub eigenmap_table: Vec<EigenRow>,
    pub hemisphere: Vec<HemisphereReport>,
    pub runtime: RuntimeInfo,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.verdict == Verdict::Pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON with the runtime block (timings, worker count) removed; two runs of
    /// the same config compare byte-identically on this form.
    pub fn canonical_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report serializes");
        if let Some(obj) = value.as_object_mut() {
            obj.remove("runtime");
        }
        serde_json::to_string_pretty(&value).expect("value serializes")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub schema: u32,
    pub reports: Vec<VerificationReport>,
    pub all_pass: bool,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("suite serializes")
    }

    pub fn canonical_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("suite serializes");
        if let Some(reports) = value.get_mut("reports").and_then(|r| r.as_array_mut()) {
            for rep in reports {
                if let Some(obj) = rep.as_object_mut() {
                    obj.remove("runtime");
                }
            }
        }
        serde_json::to_string_pretty(&value).expect("value serializes")
    }
}

// ---------------------------------------------------------------------------
// Entry state: everything expensive is computed once and shared across checks
// ---------------------------------------------------------------------------

struct DirectionData {
    field: GaussMapField,
    laplacians: Vec<Option<[f64; 8]>>,
}

struct EntryState<'a> {
    cfg: &'a RunConfig,
    chart: &'a Chart,
    hints: &'a NormalHintSet,
    weights: OnceCell<Vec<f64>>,
    scan: OnceCell<Result<SpectraScan>>,
    directions: RefCell<HashMap<Vec<i64>, Rc<DirectionData>>>,
}

impl<'a> EntryState<'a> {
    fn weights(&self) -> &[f64] {
        self.weights.get_or_init(|| node_weights(self.chart))
    }

    fn scan(&self) -> Result<&SpectraScan> {
        self.scan
            .get_or_init(|| spectra_scan(self.chart, self.hints, self.cfg.fd_step))
            .as_ref()
            .map_err(clone_error)
    }

    /// Gauss map + Laplacian grid for a normal section given by hint-frame
    /// coefficients, memoized on the (quantized) coefficient vector.
    fn direction(&self, coeffs: &[f64], label: &str) -> Result<Rc<DirectionData>> {
        let key: Vec<i64> = coeffs.iter().map(|c| (c * 1e12).round() as i64).collect();
        if let Some(hit) = self.directions.borrow().get(&key) {
            return Ok(hit.clone());
        }
        let eta = combined_normal(self.hints, coeffs)?;
        let field = gauss_field(self.chart, eta, label)?;
        let laplacians = laplacian_grid(self.chart, &field.eta, self.cfg.fd_step)?;
        let data = Rc::new(DirectionData { field, laplacians });
        self.directions.borrow_mut().insert(key, data.clone());
        Ok(data)
    }

    fn basis_coeffs(&self, index: usize) -> Vec<f64> {
        let mut c = vec![0.0; self.hints.hints.len()];
        c[index] = 1.0;
        c
    }
}

fn clone_error(e: &Error) -> Error {
    Error::Domain(format!("{e}"))
}

struct CheckOutcome {
    verdict: Verdict,
    reason: Option<String>,
    stats: BTreeMap<String, f64>,
}

impl CheckOutcome {
    fn pass(stats: BTreeMap<String, f64>) -> Self {
        CheckOutcome {
            verdict: Verdict::Pass,
            reason: None,
            stats,
        }
    }

    fn fail(reason: String, stats: BTreeMap<String, f64>) -> Self {
        CheckOutcome {
            verdict: Verdict::Fail,
            reason: Some(reason),
            stats,
        }
    }
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

/// Run the requested checks for one manifold spec and assemble the report.
pub fn run(cfg: &RunConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    if cfg.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
        pool.install(|| run_inner(cfg))
    } else {
        run_inner(cfg)
    }
}

/// Per-axis request (broadcast scalar or default) and its node-capped form.
fn resolve_grids(cfg: &RunConfig, d: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let requested = match &cfg.grid {
        Some(g) if g.len() == 1 => vec![g[0]; d],
        Some(g) if g.len() == d => g.clone(),
        Some(g) => {
            return Err(Error::InvalidConfig(format!(
                "grid has {} entries for a {d}-dimensional chart",
                g.len()
            )))
        }
        None => default_grid(d),
    };
    let mut effective = requested.clone();
    cap_grid(&mut effective, NODE_CAP);
    Ok((requested, effective))
}

fn run_inner(cfg: &RunConfig) -> Result<VerificationReport> {
    let spec = parse_spec(&cfg.manifold)?;
    let d = spec.dim();
    let (requested_grid, effective_grid) = resolve_grids(cfg, d)?;

    let (chart, hints) = build_chart(&spec, &effective_grid)?;
    chart.check_invariants(cfg.tolerances.chart_norm, cfg.tolerances.chart_tangency)?;

    let state = EntryState {
        cfg,
        chart: &chart,
        hints: &hints,
        weights: OnceCell::new(),
        scan: OnceCell::new(),
        directions: RefCell::new(HashMap::new()),
    };

    let mut statuses: HashMap<CheckKind, (Verdict, Option<String>)> = HashMap::new();
    let mut outcomes: HashMap<CheckKind, CheckOutcome> = HashMap::new();
    let mut timings: BTreeMap<String, f64> = BTreeMap::new();
    let mut gram_summary = None;
    let mut eigen_table = Vec::new();
    let mut hemi_reports = Vec::new();

    for kind in CheckKind::ALL {
        if cfg.checks.contains(&kind) {
            ensure_check(
                kind,
                &state,
                &mut statuses,
                &mut outcomes,
                &mut timings,
                &mut gram_summary,
                &mut eigen_table,
                &mut hemi_reports,
            );
        }
    }

    let checks = CheckKind::ALL
        .iter()
        .filter(|k| cfg.checks.contains(k))
        .map(|k| {
            let outcome = outcomes.remove(k).expect("requested check computed");
            CheckReport {
                name: k.name().to_string(),
                verdict: outcome.verdict,
                reason: outcome.reason,
                stats: outcome.stats,
            }
        })
        .collect();

    Ok(VerificationReport {
        schema: 1,
        entry: EntryInfo {
            name: format_spec(&spec),
            dim: d,
            codim: spec.codim(),
            minimal: spec.is_minimal(),
            factors: spec.factors().iter().map(|f| (f.n, f.radius)).collect(),
            hints: hints.hints.iter().map(|h| h.label.clone()).collect(),
        },
        config: ConfigEcho {
            manifold: cfg.manifold.clone(),
            requested_grid,
            effective_grid,
            fd_step: cfg.fd_step,
            seed: cfg.seed,
            checks: cfg.checks.iter().map(|k| k.name().to_string()).collect(),
            hemisphere_budget: cfg.hemisphere_budget,
            tolerance_overrides: cfg.tolerance_overrides.clone(),
        },
        checks,
        gram: gram_summary,
        eigenmap_table: eigen_table,
        hemisphere: hemi_reports,
        runtime: RuntimeInfo {
            workers: cfg.workers,
            timings_ms: timings,
        },
    })
}

#[allow(clippy::too_many_arguments)]
fn ensure_check(
    kind: CheckKind,
    state: &EntryState,
    statuses: &mut HashMap<CheckKind, (Verdict, Option<String>)>,
    outcomes: &mut HashMap<CheckKind, CheckOutcome>,
    timings: &mut BTreeMap<String, f64>,
    gram_summary: &mut Option<GramSummary>,
    eigen_table: &mut Vec<EigenRow>,
    hemi_reports: &mut Vec<HemisphereReport>,
) -> (Verdict, Option<String>) {
    if let Some(status) = statuses.get(&kind) {
        return status.clone();
    }

    for prereq in kind.prerequisites() {
        let (verdict, _) = ensure_check(
            *prereq,
            state,
            statuses,
            outcomes,
            timings,
            gram_summary,
            eigen_table,
            hemi_reports,
        );
        if verdict != Verdict::Pass {
            let outcome = CheckOutcome {
                verdict: Verdict::Skipped,
                reason: Some(format!("prerequisite '{}' did not pass", prereq.name())),
                stats: BTreeMap::new(),
            };
            let status = (outcome.verdict, outcome.reason.clone());
            statuses.insert(kind, status.clone());
            outcomes.insert(kind, outcome);
            return status;
        }
    }

    let start = Instant::now();
    let result = match kind {
        CheckKind::Algebra => check_algebra(state),
        CheckKind::Minimality => check_minimality(state),
        CheckKind::Parallelism => check_parallelism(state),
        CheckKind::Isoparametric => check_isoparametric(state, gram_summary),
        CheckKind::Lemma => check_lemma(state),
        CheckKind::Theorem1 => check_theorem1(state),
        CheckKind::Theorem2 => check_theorem2(state, eigen_table, gram_summary),
        CheckKind::Corollary => check_corollary(state),
        CheckKind::Hemisphere => check_hemisphere(state, hemi_reports),
    };
    timings.insert(kind.name().to_string(), start.elapsed().as_secs_f64() * 1e3);

    let outcome = match result {
        Ok(outcome) => outcome,
        Err(Error::Refused(msg)) => CheckOutcome {
            verdict: Verdict::Refused,
            reason: Some(msg),
            stats: BTreeMap::new(),
        },
        Err(e) => CheckOutcome {
            verdict: Verdict::Fail,
            reason: Some(format!("check aborted: {e}")),
            stats: BTreeMap::new(),
        },
    };
    let status = (outcome.verdict, outcome.reason.clone());
    statuses.insert(kind, status.clone());
    outcomes.insert(kind, outcome);
    status
}

// ---------------------------------------------------------------------------
// Individual checks
// ---------------------------------------------------------------------------

fn random_octonion(rng: &mut ChaCha8Rng) -> CDElement {
    CDElement::from_coords((0..8).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn check_algebra(state: &EntryState) -> Result<CheckOutcome> {
    let tol = &state.cfg.tolerances;
    let mut rng = ChaCha8Rng::seed_from_u64(state.cfg.seed ^ 0xa15eb8a);

    let mut norm_dev = 0.0f64;
    let mut alt_dev = 0.0f64;
    let mut inv_dev = 0.0f64;
    let mut div_dev = 0.0f64;
    for _ in 0..10_000 {
        let x = random_octonion(&mut rng);
        let y = random_octonion(&mut rng);
        let p = cd_multiply(&x, &y)?;
        norm_dev = norm_dev.max((p.norm() - x.norm() * y.norm()).abs());

        let xx = cd_multiply(&x, &x)?;
        let left = cd_multiply(&x, &cd_multiply(&x, &y)?)?;
        alt_dev = alt_dev.max(left.sub(&cd_multiply(&xx, &y)?)?.norm());
        let right = cd_multiply(&cd_multiply(&y, &x)?, &x)?;
        alt_dev = alt_dev.max(right.sub(&cd_multiply(&y, &xx)?)?.norm());

        if x.norm() > 1e-2 {
            let xinv = cd_inverse(&x)?;
            inv_dev = inv_dev.max(
                cd_multiply(&x, &xinv)?
                    .sub(&CDElement::one(3))?
                    .norm()
                    .max(cd_multiply(&xinv, &x)?.sub(&CDElement::one(3))?.norm()),
            );
            let a = cd_multiply(&xinv, &y)?;
            div_dev = div_dev.max(cd_multiply(&x, &a)?.sub(&y)?.norm());
            let b = cd_multiply(&y, &xinv)?;
            div_dev = div_dev.max(cd_multiply(&b, &x)?.sub(&y)?.norm());
        }
    }

    // translation matrices: orthogonal at unit base, skew at imaginary base
    let mut trans_dev = 0.0f64;
    for _ in 0..16 {
        let mut x = random_octonion(&mut rng);
        x = x.scale(1.0 / x.norm());
        for m in [TranslationMatrix::left(&x)?, TranslationMatrix::right(&x)?] {
            for i in 0..8 {
                for j in 0..8 {
                    let mut s = 0.0;
                    for k in 0..8 {
                        s += m.entries[k][i] * m.entries[k][j];
                    }
                    let expect = if i == j { 1.0 } else { 0.0 };
                    trans_dev = trans_dev.max((s - expect).abs());
                }
            }
        }
        let mut v = random_octonion(&mut rng).im();
        v = v.scale(1.0 / v.norm());
        for m in [TranslationMatrix::left(&v)?, TranslationMatrix::right(&v)?] {
            for i in 0..8 {
                for j in 0..8 {
                    trans_dev = trans_dev.max((m.entries[i][j] + m.entries[j][i]).abs());
                }
            }
        }
    }

    // generated basis table against the recursion
    let table = basis_table();
    let mut table_dev = 0.0f64;
    for i in 0..8 {
        for j in 0..8 {
            let p = cd_multiply(&CDElement::basis(3, i), &CDElement::basis(3, j))?;
            let mut expect = [0.0f64; 8];
            expect[table.index[i][j] as usize] = table.sign[i][j] as f64;
            for c in 0..8 {
                table_dev = table_dev.max((p.coords()[c] - expect[c]).abs());
            }
        }
    }

    // sedenion negative control: the norm law fails through a zero divisor
    let witness = sedenion_zero_divisor();
    let zero_divisor_norm = match witness {
        Some((a, b, c, dd)) => {
            let x = CDElement::basis(4, a).add(&CDElement::basis(4, b))?;
            let y = CDElement::basis(4, c).sub(&CDElement::basis(4, dd))?;
            cd_multiply(&x, &y)?.norm()
        }
        None => f64::INFINITY,
    };

    let mut stats = BTreeMap::new();
    stats.insert("norm_law_max_dev".into(), norm_dev);
    stats.insert("alternativity_max_dev".into(), alt_dev);
    stats.insert("inverse_law_max_dev".into(), inv_dev);
    stats.insert("division_max_dev".into(), div_dev);
    stats.insert("translation_max_dev".into(), trans_dev);
    stats.insert("basis_table_max_dev".into(), table_dev);
    stats.insert("sedenion_zero_divisor_norm".into(), zero_divisor_norm);
    stats.insert("pairs".into(), 10_000.0);

    let ok = norm_dev < tol.algebra
        && alt_dev < tol.algebra
        && inv_dev < tol.algebra
        && div_dev < tol.division
        && trans_dev < tol.algebra
        && table_dev == 0.0
        && zero_divisor_norm < tol.algebra;
    if ok {
        Ok(CheckOutcome::pass(stats))
    } else {
        Ok(CheckOutcome::fail(
            "an algebra law exceeded tolerance".into(),
            stats,
        ))
    }
}

fn check_minimality(state: &EntryState) -> Result<CheckOutcome> {
    let tol = &state.cfg.tolerances;
    let scan = state.scan()?;
    let mut stats = BTreeMap::new();
    stats.insert("mean_curvature_max".into(), scan.mean_curvature_max);
    stats.insert("trace_max".into(), scan.trace_max);
    stats.insert("shape_symmetry_max".into(), scan.symmetry_max);
    stats.insert("nodes".into(), scan.nodes as f64);
    if scan.mean_curvature_max < tol.minimality && scan.trace_max < tol.traceless {
        Ok(CheckOutcome::pass(stats))
    } else {
        Ok(CheckOutcome::fail(
            format!(
                "mean curvature does not vanish (max {:.3e}); the entry radii are not minimal",
                scan.mean_curvature_max
            ),
            stats,
        ))
    }
}

fn check_parallelism(state: &EntryState) -> Result<CheckOutcome> {
    let tol = &state.cfg.tolerances;
    let scan = state.scan()?;
    let mut stats = BTreeMap::new();
    stats.insert(
        "normal_connection_defect_max".into(),
        scan.parallel_defect_max,
    );
    stats.insert("nodes".into(), scan.nodes as f64);
    if scan.parallel_defect_max < tol.parallel_defect {
        Ok(CheckOutcome::pass(stats))
    } else {
        Ok(CheckOutcome::fail(
            format!(
                "a hint section is not parallel (defect {:.3e})",
                scan.parallel_defect_max
            ),
            stats,
        ))
    }
}

fn check_isoparametric(
    state: &EntryState,
    gram_summary: &mut Option<GramSummary>,
) -> Result<CheckOutcome> {
    let tol = &state.cfg.tolerances;
    let scan = state.scan()?;
    if gram_summary.is_none() {
        *gram_summary = Some(GramSummary {
            gram: scan.ref_spectrum.gram.clone(),
            sigma: scan.ref_spectrum.sigma.clone(),
            degeneracies: scan.ref_spectrum.degeneracies.clone(),
            gram_spread: scan.gram_spread,
            sigma_spread: scan.sigma_spread,
        });
    }
    let mut stats = BTreeMap::new();
    stats.insert("sigma_spread".into(), scan.sigma_spread);
    stats.insert("gram_spread".into(), scan.gram_spread);
    stats.insert("principal_curvature_spread".into(), scan.principal_spread);
    stats.insert("commutator_max".into(), scan.commutator_max);
    stats.insert("nodes".into(), scan.nodes as f64);
    let ok = scan.sigma_spread < tol.constancy
        && scan.gram_spread < tol.constancy
        && scan.principal_spread < tol.constancy
        && scan.commutator_max < tol.commutator;
    if ok {
        Ok(CheckOutcome::pass(stats))
    } else {
        Ok(CheckOutcome::fail(
            "spectra are not constant or the normal bundle is not flat".into(),
            stats,
        ))
    }
}

/// Seeded unit directions in the tangent space at the neutral element.
fn random_directions(count: usize, seed: u64) -> Vec<[f64; 8]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut v = [0.0; 8];
        for c in v.iter_mut().skip(1) {
            // Box-Muller from uniforms; rand's normal distribution lives in a
            // separate crate and is not needed for this
            let u1: f64 = rng.random::<f64>().max(1e-16);
            let u2: f64 = rng.random();
            *c = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
        }
        let n = norm8(&v);
        if n < 1e-8 {
            continue;
        }
        for c in v.iter_mut() {
            *c /= n;
        }
        out.push(v);
    }
    out
}

fn check_lemma(state: &EntryState) -> Result<CheckOutcome> {
    let tol = &state.cfg.tolerances;
    let dir = state.direction(
        &state.basis_coeffs(0),
        &format!("hint:{}", state.hints.hints[0].label),
    )?;
    let directions = random_directions(20, state.cfg.seed ^ 0x1e44a);
    let (l2, max) = lemma_scan(
        state.chart,
        state.hints,
        0,
        &directions,
        &dir.laplacians,
        state.weights(),
        state.cfg.fd_step,
    )?;
    let mut stats = BTreeMap::new();
    stats.insert("residual_l2".into(), l2);
    stats.insert("residual_max".into(), max);
    stats.insert("directions".into(), directions.len() as f64);
    if l2 < tol.lemma {
        Ok(CheckOutcome::pass(stats))
    } else {
        Ok(CheckOutcome::fail(
            format!(
                "Laplacian identity residual {l2:.3e} exceeds {:.0e}",
                tol.lemma
            ),
            stats,
        ))
    }
}

/// Harmonicity defect over the cached grid (weighted L², pointwise max).
fn harmonicity_defects(state: &EntryState, dir: &DirectionData) -> (f64, f64) {
    harmonicity_from_cache(&dir.field.values, &dir.laplacians, state.weights())
}

fn check_theorem1(state: &EntryState) -> Result<CheckOutcome> {
    let tol = &state.cfg.tolerances;
    let scan = state.scan()?;
    let spectrum = &scan.ref_spectrum;
    let k = spectrum.k;
    let d7k = (7 - state.chart.codim()) as f64;
    let u0 = state.chart.node_u(0);
    let frames0 = frames_at(state.chart, &u0, Some(state.hints))?;
    let weights = state.weights();

    let mut stats = BTreeMap::new();
    let mut consistent = true;
    let mut worst_bstarb = 0.0f64;
    let mut worst_eigenmap = 0.0f64;
    let mut worst_harmonicity = 0.0f64;
    let mut sigma_match_dev = 0.0f64;

    for j in 0..k {
        let coeffs = &spectrum.vectors[j];

        // (ii) eigenvector of the Gram matrix
        let chk = bstarb_eigencheck(spectrum, coeffs, tol.eigencheck)?;
        worst_bstarb = worst_bstarb.max(chk.residual);

        // independent route to ‖S_η‖²: shape operator of the combined section
        let eta = combined_normal(state.hints, coeffs)?;
        let op = shape_operator(state.chart, &frames0, &eta, state.cfg.fd_step, "eigen")?;
        let s2 = op.hs_norm_sq();
        sigma_match_dev = sigma_match_dev.max((s2 - chk.eigenvalue).abs());

        // (i) eigenmap identity with λ = (7−k) + ‖S_η‖²
        let dir = state.direction(coeffs, &format!("eigen:{j}"))?;
        let verdict = aggregate_eigenmap(&dir.field, &dir.laplacians, weights, d7k + s2, tol);
        worst_eigenmap = worst_eigenmap.max(verdict.residual_l2);

        // (iii) harmonicity
        let (defect_l2, _) = harmonicity_defects(state, &dir);
        worst_harmonicity = worst_harmonicity.max(defect_l2);

        let all_true = chk.is_eigenvector && verdict.pass && defect_l2 < tol.harmonicity;
        if !all_true {
            consistent = false;
        }
    }
    stats.insert("eigendirection_bstarb_residual_max".into(), worst_bstarb);
    stats.insert(
        "eigendirection_eigenmap_residual_max".into(),
        worst_eigenmap,
    );
    stats.insert(
        "eigendirection_harmonicity_l2_max".into(),
        worst_harmonicity,
    );
    stats.insert("sigma_vs_hs_norm_dev".into(), sigma_match_dev);

    // negative direction: a mixture across a spectral gap must fail all three
    let gap = spectrum.sigma[k - 1] - spectrum.sigma[0];
    if gap > 1e-6 {
        let mut mix = vec![0.0; k];
        for i in 0..k {
            mix[i] = (spectrum.vectors[0][i] + spectrum.vectors[k - 1][i]) / 2.0f64.sqrt();
        }
        let chk = bstarb_eigencheck(spectrum, &mix, tol.eigencheck)?;
        let eta = combined_normal(state.hints, &mix)?;
        let op = shape_operator(state.chart, &frames0, &eta, state.cfg.fd_step, "mixture")?;
        let dir = state.direction(&mix, "mixture")?;
        let verdict = aggregate_eigenmap(
            &dir.field,
            &dir.laplacians,
            weights,
            d7k + op.hs_norm_sq(),
            tol,
        );
        let (_, defect_max) = harmonicity_defects(state, &dir);

        stats.insert("mixture_bstarb_residual".into(), chk.residual);
        stats.insert("mixture_eigenmap_residual".into(), verdict.residual_l2);
        stats.insert("mixture_harmonicity_defect_max".into(), defect_max);

        let all_false = !chk.is_eigenvector && !verdict.pass && defect_max > 0.1;
        if !all_false {
            consistent = false;
        }
    }

    let ok = consistent && sigma_match_dev < tol.sigma_match;
    if ok {
        Ok(CheckOutcome::pass(stats))
    } else {
        Ok(CheckOutcome::fail(
            "the three characterizations did not agree in the expected direction".into(),
            stats,
        ))
    }
}

fn check_theorem2(
    state: &EntryState,
    eigen_table: &mut Vec<EigenRow>,
    gram_summary: &mut Option<GramSummary>,
) -> Result<CheckOutcome> {
    let tol = &state.cfg.tolerances;
    let scan = state.scan()?;
    let spectrum = &scan.ref_spectrum;
    let k = spectrum.k;
    let d7k = (7 - state.chart.codim()) as f64;
    let weights = state.weights();
    let u0 = state.chart.node_u(0);
    let frames0 = frames_at(state.chart, &u0, Some(state.hints))?;

    if gram_summary.is_none() {
        *gram_summary = Some(GramSummary {
            gram: spectrum.gram.clone(),
            sigma: spectrum.sigma.clone(),
            degeneracies: spectrum.degeneracies.clone(),
            gram_spread: scan.gram_spread,
            sigma_spread: scan.sigma_spread,
        });
    }

    let mut stats = BTreeMap::new();
    let mut ok = true;
    let mut worst_residual = 0.0f64;
    let mut sigma_match_dev = 0.0f64;
    let mut negativity = 0.0f64;
    let mut component_max = 0.0f64;

    eigen_table.clear();
    for j in 0..k {
        let coeffs = &spectrum.vectors[j];
        negativity = negativity.min(spectrum.sigma[j]);

        // σ_j against the directly computed Hilbert-Schmidt norm
        let eta = combined_normal(state.hints, coeffs)?;
        let op = shape_operator(state.chart, &frames0, &eta, state.cfg.fd_step, "eigen")?;
        sigma_match_dev = sigma_match_dev.max((op.hs_norm_sq() - spectrum.sigma[j]).abs());

        let lambda = d7k + spectrum.sigma[j];
        let dir = state.direction(coeffs, &format!("eigen:{j}"))?;
        let verdict = aggregate_eigenmap(&dir.field, &dir.laplacians, weights, lambda, tol);
        worst_residual = worst_residual.max(verdict.residual_l2);
        component_max = component_max.max(verdict.component_residual_max);
        if !verdict.pass {
            ok = false;
        }
        eigen_table.push(EigenRow {
            j,
            sigma: spectrum.sigma[j],
            lambda,
            residual_l2: verdict.residual_l2,
            residual_max: verdict.residual_max,
            nodes: verdict.nodes,
            pass: verdict.pass,
        });
    }

    stats.insert("eigenmap_residual_l2_max".into(), worst_residual);
    stats.insert("sigma_vs_hs_norm_dev".into(), sigma_match_dev);
    stats.insert("sigma_min".into(), negativity);
    stats.insert("component_residual_max".into(), component_max);
    stats.insert("sigma_spread".into(), scan.sigma_spread);

    if negativity < -1e-10 {
        ok = false;
    }
    if sigma_match_dev >= tol.sigma_match {
        ok = false;
    }
    if scan.sigma_spread >= tol.constancy {
        ok = false;
    }
    if ok {
        Ok(CheckOutcome::pass(stats))
    } else {
        Ok(CheckOutcome::fail(
            format!("spectral eigenmap verification failed (worst residual {worst_residual:.3e})"),
            stats,
        ))
    }
}

fn check_corollary(state: &EntryState) -> Result<CheckOutcome> {
    // The first hint is the in-sphere normal: for a product hypersurface the
    // block normal, for a great sphere S^m the first coordinate normal (M seen
    // as a totally geodesic hypersurface of S^{m+1}), for a composition the
    // inner normal of S^m.
    let tol = &state.cfg.tolerances;
    let label = state.hints.hints[0].label.clone();
    let dir = state.direction(&state.basis_coeffs(0), &format!("hint:{label}"))?;
    let (defect_l2, defect_max) = harmonicity_defects(state, &dir);
    let mut stats = BTreeMap::new();
    stats.insert("harmonicity_defect_l2".into(), defect_l2);
    stats.insert("harmonicity_defect_max".into(), defect_max);
    if defect_l2 < tol.harmonicity {
        Ok(CheckOutcome::pass(stats))
    } else {
        Ok(CheckOutcome::fail(
            format!("gauss map of '{label}' is not harmonic (defect {defect_l2:.3e})"),
            stats,
        ))
    }
}

fn check_hemisphere(
    state: &EntryState,
    hemi_reports: &mut Vec<HemisphereReport>,
) -> Result<CheckOutcome> {
    let tol = &state.cfg.tolerances;
    if state.chart.codim() == 6 {
        return Err(Error::Refused(
            "hemisphere obstruction is stated for codimension 1..=5; k = 6 is outside its hypotheses"
                .into(),
        ));
    }
    let scan = state.scan()?;
    let spectrum = scan.ref_spectrum.clone();
    let weights = state.weights().to_vec();

    let mut stats = BTreeMap::new();
    let mut worst_margin = f64::NEG_INFINITY;
    let mut worst_mean = 0.0f64;
    let mut ok = true;

    hemi_reports.clear();
    for j in 0..spectrum.k {
        let dir = state.direction(&spectrum.vectors[j], &format!("eigen:{j}"))?;
        let report = hemisphere_scan(
            state.chart,
            &format!("eigen:{j}"),
            &dir.field.values,
            &weights,
            state.cfg.hemisphere_budget,
            state.cfg.seed,
            tol.hemisphere_margin,
        )?;
        let mean = mean_zero_check(&dir.field.values, &weights);
        worst_margin = worst_margin.max(report.best_margin);
        worst_mean = worst_mean.max(mean);
        if !report.consistent || mean >= tol.mean_zero {
            ok = false;
        }
        hemi_reports.push(report);
    }

    stats.insert("best_margin_max".into(), worst_margin);
    stats.insert("mean_zero_max".into(), worst_mean);
    stats.insert("directions".into(), spectrum.k as f64);
    if ok {
        Ok(CheckOutcome::pass(stats))
    } else {
        Ok(CheckOutcome::fail(
            format!("a direction admits a candidate hemisphere (margin {worst_margin:.3e}) or a nonzero mean"),
            stats,
        ))
    }
}

// ---------------------------------------------------------------------------
// Prepared entry for inspection commands
// ---------------------------------------------------------------------------

/// Chart, hints and reference spectrum of one entry, resolved the same way
/// `run` resolves them (defaults, node cap). Used by the inspection commands
/// (spectrum, gauss-image, hemisphere) and the residual sidecar.
pub struct EntryComputation {
    pub chart: Chart,
    pub hints: NormalHintSet,
    pub spectrum: crate::spectra::GramSpectrum,
    pub requested_grid: Vec<usize>,
    pub effective_grid: Vec<usize>,
}

pub fn prepare_entry(cfg: &RunConfig) -> Result<EntryComputation> {
    cfg.validate()?;
    let spec = parse_spec(&cfg.manifold)?;
    let (requested_grid, effective_grid) = resolve_grids(cfg, spec.dim())?;
    let (chart, hints) = build_chart(&spec, &effective_grid)?;
    chart.check_invariants(cfg.tolerances.chart_norm, cfg.tolerances.chart_tangency)?;
    let u0 = chart.node_u(0);
    let frames = frames_at(&chart, &u0, Some(&hints))?;
    let spectrum = crate::spectra::gram_spectrum(&chart, &frames, &hints, cfg.fd_step)?;
    Ok(EntryComputation {
        chart,
        hints,
        spectrum,
        requested_grid,
        effective_grid,
    })
}

// ---------------------------------------------------------------------------
// Suite
// ---------------------------------------------------------------------------

/// Run every shipped catalog entry with the base configuration's checks.
pub fn run_suite(base: &RunConfig) -> Result<SuiteReport> {
    let mut reports = Vec::new();
    for CatalogEntry { name, .. } in crate::catalog::catalog_list() {
        let mut cfg = base.clone();
        cfg.manifold = name;
        reports.push(run(&cfg)?);
    }
    let all_pass = reports.iter().all(|r| r.all_pass());
    Ok(SuiteReport {
        schema: 1,
        reports,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_names_roundtrip() {
        for kind in CheckKind::ALL {
            assert_eq!(CheckKind::from_str(kind.name()).unwrap(), kind);
        }
        assert!(matches!(
            CheckKind::from_str("nonsense"),
            Err(Error::UnknownCheck(_))
        ));
    }

    #[test]
    fn config_validation() {
        let mut cfg = RunConfig::new("great:6");
        cfg.grid = Some(vec![4]);
        assert!(matches!(run(&cfg), Err(Error::InvalidConfig(_))));

        let mut cfg = RunConfig::new("great:6");
        cfg.fd_step = 1.0;
        assert!(matches!(run(&cfg), Err(Error::InvalidConfig(_))));

        let mut cfg = RunConfig::new("great:6");
        cfg.checks = vec![];
        assert!(matches!(run(&cfg), Err(Error::InvalidConfig(_))));

        let cfg = RunConfig::new("product:9");
        assert!(run(&cfg).is_err());
    }

    #[test]
    fn great6_all_checks_pass() {
        let mut cfg = RunConfig::new("great:6");
        cfg.grid = Some(vec![8]);
        let report = run(&cfg).unwrap();
        assert!(report.all_pass(), "{}", report.to_json());
        assert_eq!(report.eigenmap_table.len(), 1);
        let row = &report.eigenmap_table[0];
        assert!((row.sigma - 0.0).abs() < 1e-12);
        assert!((row.lambda - 6.0).abs() < 1e-12);
        assert_eq!(report.checks.len(), CheckKind::ALL.len());
    }

    #[test]
    fn codim2_product_passes_with_degenerate_sigma() {
        let mut cfg = RunConfig::new("product:1,1,3");
        cfg.grid = Some(vec![8]);
        let report = run(&cfg).unwrap();
        assert!(report.all_pass(), "{}", report.to_json());
        let gram = report.gram.as_ref().unwrap();
        assert!((gram.sigma[0] - 5.0).abs() < 1e-8);
        assert!((gram.sigma[1] - 5.0).abs() < 1e-8);
        assert_eq!(gram.degeneracies, vec![2]);
        for row in &report.eigenmap_table {
            assert!((row.lambda - 10.0).abs() < 1e-8);
            assert!(row.pass);
        }
    }

    #[test]
    fn non_minimal_radii_fail_minimality_and_skip_downstream() {
        let mut cfg = RunConfig::new("product:2,4@0.6,0.8");
        cfg.grid = Some(vec![8]);
        let report = run(&cfg).unwrap();
        let by_name: BTreeMap<&str, &CheckReport> =
            report.checks.iter().map(|c| (c.name.as_str(), c)).collect();
        assert_eq!(by_name["minimality"].verdict, Verdict::Fail);
        assert_eq!(by_name["theorem1"].verdict, Verdict::Skipped);
        assert!(by_name["theorem1"]
            .reason
            .as_deref()
            .unwrap()
            .contains("minimality"));
        // isoparametricity holds at any radii, and failing checks never abort
        assert_eq!(by_name["isoparametric"].verdict, Verdict::Pass);
        assert_eq!(by_name["algebra"].verdict, Verdict::Pass);
        assert!(!report.all_pass());
    }

    #[test]
    fn reports_are_deterministic_and_worker_invariant() {
        let mut cfg = RunConfig::new("compose:great:3/product:1,1");
        cfg.grid = Some(vec![12, 12]);
        cfg.workers = 1;
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.canonical_json(), b.canonical_json());

        cfg.workers = 4;
        let c = run(&cfg).unwrap();
        assert_eq!(a.canonical_json(), c.canonical_json());
    }

    #[test]
    fn requested_checks_appear_exactly_once() {
        let mut cfg = RunConfig::new("great:5");
        cfg.grid = Some(vec![8]);
        cfg.checks = vec![CheckKind::Theorem2, CheckKind::Algebra];
        let report = run(&cfg).unwrap();
        let names: Vec<&str> = report.checks.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, vec!["algebra", "theorem2"]);
    }

    #[test]
    fn hemisphere_refused_for_codimension_six() {
        let mut cfg = RunConfig::new("great:1");
        cfg.grid = Some(vec![24]);
        cfg.checks = vec![
            CheckKind::Minimality,
            CheckKind::Parallelism,
            CheckKind::Isoparametric,
            CheckKind::Theorem2,
            CheckKind::Hemisphere,
        ];
        let report = run(&cfg).unwrap();
        let hemi = report
            .checks
            .iter()
            .find(|c| c.name == "hemisphere")
            .unwrap();
        assert_eq!(hemi.verdict, Verdict::Refused);
        assert!(hemi.reason.as_deref().unwrap().contains("codimension"));
        // the circle is still a Theorem-2 case: λ = 1 eigenmaps
        let t2 = report.checks.iter().find(|c| c.name == "theorem2").unwrap();
        assert_eq!(t2.verdict, Verdict::Pass);
        assert!(report
            .eigenmap_table
            .iter()
            .all(|r| (r.lambda - 1.0).abs() < 1e-10));
    }
}
