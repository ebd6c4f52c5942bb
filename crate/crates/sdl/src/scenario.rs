//! Seeded scenario execution and report assembly.
//!
//! A [`Scenario`] names one experiment kind with its parameters, a seed and a
//! trial count. Trial `i` draws from the stream `(seed, i)`, so results do not
//! depend on scheduling; trials run in parallel and are collected in order.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use sdl_core::convex::{numrange_boundary, verify_hull_identity, DEFAULT_ANGLES};
use sdl_core::decomposition::{
    contractive_similarity_search, decompose_operator, idempotent_system, orthogonalize, verify_block_ranges,
    Contour, MeasureProjection, SimilarityConfig,
};
use sdl_core::gleason::{
    gleason_degree_ladder_with, measure_part_decomposition, GleasonConfig, GleasonSearch, ModelDomain, SearchRun,
};
use sdl_core::kspectral::{estimate_K, von_neumann_check, RATIO_WATCH};
use sdl_core::linalg::spectral_norm;
use sdl_core::np::{
    elementary_measure, reconstruct, BoundaryGrid, DirichletSolver, MeasureVector, NpOperator, SemispectralDensity,
};
use sdl_core::random::{fit_to_disc, random_operator_with, random_split_operator, Profile, TrialRng};
use sdl_core::rational::{Pole, RationalFunction};
use sdl_core::sampler::RegionSampler;
use sdl_core::{ComplexMatrix, C64};

use crate::error::{Result, SdlError};
use crate::io::{complex, read_json, CurveJson, Pair, SearchConfigJson};

pub const SCHEMA_VERSION: u32 = 1;

/// Below this, a reconstruction error counts as converged.
pub const DECAY_FLOOR: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    HullIdentity,
    VonNeumann,
    KSearch,
    NpReconstruct,
    Realness,
    RieszDecomposition,
    GleasonDistance,
    MeasureDecomposition,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub kind: Kind,
    #[serde(default = "empty_params")]
    pub params: serde_json::Value,
    pub seed: u64,
    pub trials: usize,
}

fn empty_params() -> serde_json::Value {
    serde_json::Value::Object(Default::default())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HullParams {
    pub max_dim: usize,
    pub m: usize,
}

impl Default for HullParams {
    fn default() -> Self {
        Self { max_dim: 6, m: 720 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VonNeumannParams {
    pub max_dim: usize,
    pub polynomials: usize,
}

impl Default for VonNeumannParams {
    fn default() -> Self {
        Self {
            max_dim: 6,
            polynomials: 200,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KSearchParams {
    pub dim: usize,
    pub margin: f64,
    pub samples: usize,
    pub search: SearchConfigJson,
}

impl Default for KSearchParams {
    fn default() -> Self {
        Self {
            dim: 4,
            margin: 0.05,
            samples: 256,
            search: SearchConfigJson::default(),
        }
    }
}

/// How seeded operators are placed inside the curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fit {
    /// Centered, spectral norm at most this.
    Norm(f64),
    /// Centered, numerical radius exactly this.
    NumericalRadius(f64),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NpParams {
    pub curve: CurveJson,
    pub dim: usize,
    pub fit: Fit,
    pub ladder: Vec<usize>,
    /// Trial 0 is `0.9·J2` instead of a seeded operator.
    pub jordan: bool,
    /// Adds the `2·J2` unit-circle positivity control.
    pub negative_control: bool,
}

impl Default for NpParams {
    fn default() -> Self {
        Self {
            curve: CurveJson::Ellipse {
                center: [0.0, 0.0],
                a: 2.0,
                b: 1.0,
            },
            dim: 4,
            fit: Fit::Norm(0.8),
            ladder: vec![64, 128, 256, 512],
            jordan: true,
            negative_control: true,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RealnessParams {
    pub domain: String,
    pub m: usize,
    pub dim: usize,
    /// Operators are fitted into this disc around the first component's center.
    pub fit_radius: f64,
}

impl Default for RealnessParams {
    fn default() -> Self {
        Self {
            domain: "two_discs".into(),
            m: 128,
            dim: 3,
            fit_radius: 0.6,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RieszParams {
    pub max_dim: usize,
    pub gap: f64,
    pub nodes: usize,
    /// Pole of the resolvent used for the calculus compatibility check.
    pub pole: Pair,
    pub normal_trials: usize,
    pub similarity_demo: bool,
}

impl Default for RieszParams {
    fn default() -> Self {
        Self {
            max_dim: 8,
            gap: 1.0,
            nodes: 256,
            pole: [10.0, 0.0],
            normal_trials: 5,
            similarity_demo: true,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GleasonCase {
    pub domain: String,
    pub x1: Pair,
    pub x2: Pair,
    #[serde(default)]
    pub min: Option<f64>,
    #[serde(default)]
    pub max: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GleasonParams {
    pub cases: Vec<GleasonCase>,
    #[serde(default)]
    pub degree: Option<usize>,
    #[serde(default)]
    pub phases: Option<usize>,
    #[serde(default)]
    pub iterations: Option<usize>,
    #[serde(default)]
    pub restarts: Option<usize>,
    #[serde(default)]
    pub per_loop: Option<usize>,
    /// Degree ladder applied to every case instead of a single degree.
    #[serde(default)]
    pub ladder: Option<Vec<usize>>,
}

impl GleasonParams {
    fn config(&self, seed: u64) -> GleasonConfig {
        let d = GleasonConfig::default();
        GleasonConfig {
            degree: self.degree.unwrap_or(d.degree),
            phases: self.phases.unwrap_or(d.phases),
            iterations: self.iterations.unwrap_or(d.iterations),
            restarts: self.restarts.unwrap_or(d.restarts),
            per_loop: self.per_loop.unwrap_or(d.per_loop),
            seed,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasureParams {
    pub domain: String,
    pub m: usize,
    /// Random rational test functions per trial.
    pub tests: usize,
}

impl Default for MeasureParams {
    fn default() -> Self {
        Self {
            domain: "two_discs".into(),
            m: 128,
            tests: 20,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Params {
    Hull(HullParams),
    VonNeumann(VonNeumannParams),
    KSearch(KSearchParams),
    Np(NpParams),
    Realness(RealnessParams),
    Riesz(RieszParams),
    Gleason(GleasonParams),
    Measure(MeasureParams),
}

fn parse<T: DeserializeOwned>(v: &serde_json::Value) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| SdlError::Input(format!("params: {e}")))
}

fn domain(id: &str) -> Result<ModelDomain> {
    ModelDomain::catalog(id).map_err(|_| SdlError::Input(format!("unknown domain {id:?}")))
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s: Self = read_json(path)?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(SdlError::Input(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.trials == 0 {
            return Err(SdlError::Input("trials must be positive".into()));
        }
        match self.params()? {
            Params::Np(p) => {
                p.curve.to_curve()?;
                if p.ladder.is_empty() || p.ladder.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(SdlError::Input("ladder must be non-empty and strictly increasing".into()));
                }
            }
            Params::Realness(p) => {
                domain(&p.domain)?;
            }
            Params::Measure(p) => {
                domain(&p.domain)?;
            }
            Params::Gleason(p) => {
                for c in &p.cases {
                    domain(&c.domain)?;
                }
                if p.cases.len() != self.trials {
                    return Err(SdlError::Input(format!(
                        "gleason_distance runs one trial per case: {} cases but {} trials",
                        p.cases.len(),
                        self.trials
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn params(&self) -> Result<Params> {
        let v = &self.params;
        Ok(match self.kind {
            Kind::HullIdentity => Params::Hull(parse(v)?),
            Kind::VonNeumann => Params::VonNeumann(parse(v)?),
            Kind::KSearch => Params::KSearch(parse(v)?),
            Kind::NpReconstruct => Params::Np(parse(v)?),
            Kind::Realness => Params::Realness(parse(v)?),
            Kind::RieszDecomposition => Params::Riesz(parse(v)?),
            Kind::GleasonDistance => Params::Gleason(parse(v)?),
            Kind::MeasureDecomposition => Params::Measure(parse(v)?),
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub values: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub series: BTreeMap<String, Vec<f64>>,
}

impl Metrics {
    fn set(&mut self, key: &str, v: f64) {
        self.values.insert(key.to_string(), v);
    }

    fn raise(&mut self, key: &str, v: f64) {
        let e = self.values.entry(key.to_string()).or_insert(v);
        *e = e.max(v);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Ok(Metrics),
    Error { error: String, message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    #[serde(flatten)]
    pub outcome: Outcome,
}

impl TrialRecord {
    pub fn metric(&self, key: &str) -> Option<f64> {
        match &self.outcome {
            Outcome::Ok(m) => m.values.get(key).copied(),
            Outcome::Error { .. } => None,
        }
    }

    pub fn is_error(&self) -> bool {
        matches!(self.outcome, Outcome::Error { .. })
    }
}

fn error_kind(e: &sdl_core::Error) -> String {
    let dbg = format!("{e:?}");
    dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or_default().to_string()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Le,
    Ge,
}

/// One pass/fail line, citing the acceptance criterion it implements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub name: String,
    pub value: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(id: &str, name: &str, value: f64, comparison: Comparison, threshold: f64) -> Self {
        let passed = match comparison {
            Comparison::Le => value <= threshold,
            Comparison::Ge => value >= threshold,
        };
        Self {
            id: id.to_string(),
            name: name.to_string(),
            value,
            comparison,
            threshold,
            passed,
        }
    }

    pub fn le(id: &str, name: &str, value: f64, threshold: f64) -> Self {
        Self::new(id, name, value, Comparison::Le, threshold)
    }

    pub fn ge(id: &str, name: &str, value: f64, threshold: f64) -> Self {
        Self::new(id, name, value, Comparison::Ge, threshold)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub parameter: f64,
    pub residual: f64,
}

/// Residual against a growing parameter; `decay_ratios[i]` is
/// `residual[i] / residual[i + 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub parameter: String,
    pub rows: Vec<ConvergenceRow>,
    pub decay_ratios: Vec<f64>,
}

impl ConvergenceTable {
    pub fn new(parameter: &str, rows: Vec<ConvergenceRow>) -> Self {
        let decay_ratios = rows.windows(2).map(|w| w[0].residual / w[1].residual).collect();
        Self {
            parameter: parameter.to_string(),
            rows,
            decay_ratios,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub scenario: Scenario,
    pub trials: Vec<TrialRecord>,
    pub aggregates: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub convergence: Vec<ConvergenceTable>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl Report {
    fn assemble(
        scenario: &Scenario,
        trials: Vec<TrialRecord>,
        mut aggregates: BTreeMap<String, f64>,
        convergence: Vec<ConvergenceTable>,
        mut checks: Vec<Check>,
        errors_cite: &str,
    ) -> Self {
        let errors = trials.iter().filter(|t| t.is_error()).count();
        aggregates.insert("errored_trials".into(), errors as f64);
        checks.push(Check::le(errors_cite, "errored trials", errors as f64, 0.0));
        let passed = checks.iter().all(|c| c.passed);
        Self {
            schema_version: SCHEMA_VERSION,
            scenario: scenario.clone(),
            trials,
            aggregates,
            convergence,
            checks,
            passed,
        }
    }

    /// Maximum of a metric over successful trials; `NaN` when none carry it.
    pub fn max_metric(&self, key: &str) -> f64 {
        max_metric(&self.trials, key)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// One row per trial: index, status, error kind, then every metric key.
    pub fn trials_csv(&self) -> Result<Vec<u8>> {
        let mut keys: Vec<&String> = self
            .trials
            .iter()
            .filter_map(|t| match &t.outcome {
                Outcome::Ok(m) => Some(m.values.keys()),
                Outcome::Error { .. } => None,
            })
            .flatten()
            .collect();
        keys.sort();
        keys.dedup();
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["trial".to_string(), "status".into(), "error".into()];
        header.extend(keys.iter().map(|k| k.to_string()));
        w.write_record(&header)?;
        for t in &self.trials {
            let mut row = vec![t.trial.to_string()];
            match &t.outcome {
                Outcome::Ok(m) => {
                    row.push("ok".into());
                    row.push(String::new());
                    row.extend(keys.iter().map(|k| m.values.get(*k).map(|v| v.to_string()).unwrap_or_default()));
                }
                Outcome::Error { error, .. } => {
                    row.push("error".into());
                    row.push(error.clone());
                    row.extend(keys.iter().map(|_| String::new()));
                }
            }
            w.write_record(&row)?;
        }
        crate::io::finish_csv(w)
    }
}

fn max_metric(trials: &[TrialRecord], key: &str) -> f64 {
    trials.iter().filter_map(|t| t.metric(key)).fold(f64::NAN, f64::max)
}

fn min_metric(trials: &[TrialRecord], key: &str) -> f64 {
    trials.iter().filter_map(|t| t.metric(key)).fold(f64::NAN, f64::min)
}

fn sum_metric(trials: &[TrialRecord], key: &str) -> f64 {
    trials.iter().filter_map(|t| t.metric(key)).sum()
}

/// A 64-bit seed for library routines that take one, derived from the
/// trial stream.
fn sub_seed(rng: &mut TrialRng) -> u64 {
    (rng.uniform() * 2f64.powi(53)) as u64
}

fn run_trials<F>(seed: u64, range: std::ops::Range<usize>, f: F) -> Vec<TrialRecord>
where
    F: Fn(usize, &mut TrialRng) -> sdl_core::Result<Metrics> + Sync,
{
    range
        .into_par_iter()
        .map(|i| {
            let mut rng = TrialRng::new(seed, i as u64);
            let outcome = match f(i, &mut rng) {
                Ok(m) => Outcome::Ok(m),
                Err(e) => Outcome::Error {
                    error: error_kind(&e),
                    message: e.to_string(),
                },
            };
            TrialRecord { trial: i, outcome }
        })
        .collect()
}

fn dim_in(rng: &mut TrialRng, lo: usize, hi: usize) -> usize {
    lo + rng.below(hi - lo + 1)
}

/// Executes every trial and applies the acceptance thresholds. Per-trial
/// numeric failures are recorded, not returned.
pub fn run(s: &Scenario) -> Result<Report> {
    s.validate()?;
    match s.params()? {
        Params::Hull(p) => Ok(run_hull(s, &p)),
        Params::VonNeumann(p) => Ok(run_von_neumann(s, &p)),
        Params::KSearch(p) => Ok(run_k_search(s, &p)),
        Params::Np(p) => run_np(s, &p),
        Params::Realness(p) => run_realness(s, &p),
        Params::Riesz(p) => Ok(run_riesz(s, &p)),
        Params::Gleason(p) => run_gleason(s, &p),
        Params::Measure(p) => run_measure(s, &p),
    }
}

fn run_hull(s: &Scenario, p: &HullParams) -> Report {
    let trials = run_trials(s.seed, 0..s.trials, |_, rng| {
        let (da, db) = (dim_in(rng, 1, p.max_dim), dim_in(rng, 1, p.max_dim));
        let a = random_operator_with(rng, da, Profile::Generic)?;
        let b = random_operator_with(rng, db, Profile::Generic)?;
        let mut m = Metrics::default();
        m.set("hausdorff", verify_hull_identity(&a, &b, p.m)?);
        Ok(m)
    });
    let worst = max_metric(&trials, "hausdorff");
    let agg = BTreeMap::from([("max_hausdorff".to_string(), worst)]);
    let checks = vec![Check::le("AC-1", "max Hausdorff distance", worst, 1e-8)];
    Report::assemble(s, trials, agg, vec![], checks, "AC-1")
}

fn run_von_neumann(s: &Scenario, p: &VonNeumannParams) -> Report {
    let trials = run_trials(s.seed, 0..s.trials, |_, rng| {
        let dim = dim_in(rng, 1, p.max_dim);
        let t = random_operator_with(rng, dim, Profile::Contraction)?;
        let mut m = Metrics::default();
        m.set("max_ratio", von_neumann_check(&t, p.polynomials, sub_seed(rng))?);
        Ok(m)
    });
    let worst = max_metric(&trials, "max_ratio");
    let agg = BTreeMap::from([("max_ratio".to_string(), worst)]);
    let checks = vec![Check::le("AC-2", "max spectral ratio", worst, 1.0 + 1e-8)];
    Report::assemble(s, trials, agg, vec![], checks, "AC-2")
}

fn run_k_search(s: &Scenario, p: &KSearchParams) -> Report {
    let trials = run_trials(s.seed, 0..s.trials, |_, rng| {
        let t = random_operator_with(rng, p.dim, Profile::Generic)?;
        let x = numrange_boundary(&t, DEFAULT_ANGLES)?.inflate(p.margin);
        let sampler = RegionSampler::from_region(&x, p.samples)?;
        let mut cfg = p.search.to_config();
        if p.search.seed.is_none() {
            cfg.seed = sub_seed(rng);
        }
        let est = estimate_K(&t, &sampler, &cfg)?;
        let mut m = Metrics::default();
        m.set("k_hat", est.k_hat);
        m.set("flagged", est.flagged as f64);
        m.set("certificate_degree", est.certificate.numerator().len().saturating_sub(1) as f64);
        m.series.insert("ratios".into(), est.ratios);
        Ok(m)
    });
    let non_finite = trials.iter().filter(|t| t.metric("k_hat").is_some_and(|k| !k.is_finite())).count();
    let flagged = sum_metric(&trials, "flagged");
    let agg = BTreeMap::from([
        ("max_k_hat".to_string(), max_metric(&trials, "k_hat")),
        ("flagged_ratios".to_string(), flagged),
        ("ratio_watch".to_string(), RATIO_WATCH),
    ]);
    let checks = vec![
        Check::le("AC-3", "non-finite estimates", non_finite as f64, 0.0),
        Check::le("AC-3", "ratios above 1 + sqrt 2", flagged, 0.0),
    ];
    Report::assemble(s, trials, agg, vec![], checks, "AC-3")
}

fn j2() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]])
}

/// `1, z, z², z³, 1/(z − 3)`.
pub fn reconstruction_battery() -> Vec<RationalFunction> {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let mut out = vec![RationalFunction::constant(one)];
    for k in 1..=3 {
        let mut c = vec![zero; k + 1];
        c[k] = one;
        out.push(RationalFunction::polynomial(c).expect("monomial"));
    }
    out.push(RationalFunction::simple_pole(C64::new(3.0, 0.0)).expect("pole"));
    out
}

fn numerical_radius(t: &ComplexMatrix) -> sdl_core::Result<f64> {
    Ok(numrange_boundary(t, DEFAULT_ANGLES)?
        .support()
        .iter()
        .fold(0.0, |a: f64, &h| a.max(h)))
}

fn place(t: &ComplexMatrix, fit: Fit, center: C64) -> sdl_core::Result<ComplexMatrix> {
    let placed = match fit {
        Fit::Norm(r) => fit_to_disc(t, r),
        Fit::NumericalRadius(r) => {
            let c = fit_to_disc(t, f64::INFINITY);
            let w = numerical_radius(&c)?;
            if w > 0.0 {
                c.scale_real(r / w)
            } else {
                c
            }
        }
    };
    Ok(placed.shift(center))
}

/// Decay holds when each rung at least halves the error or is already at the
/// rounding floor.
pub fn geometric_decay(errors: &[f64]) -> bool {
    errors.windows(2).all(|w| w[1] <= w[0] / 2.0 || w[1] < DECAY_FLOOR)
}

fn run_np(s: &Scenario, p: &NpParams) -> Result<Report> {
    let curve = p.curve.to_curve()?;
    let battery = reconstruction_battery();
    let top = *p.ladder.last().expect("validated ladder");
    let grids = p
        .ladder
        .iter()
        .map(|&m| {
            let g = BoundaryGrid::discretize(&curve, m)?;
            let solver = DirichletSolver::new(&NpOperator::new(&g)?)?;
            Ok((m, g, solver))
        })
        .collect::<sdl_core::Result<Vec<_>>>()?;
    let trials = run_trials(s.seed, 0..s.trials, |i, rng| {
        let t = if p.jordan && i == 0 {
            j2().scale_real(0.9).shift(curve.center())
        } else {
            place(&random_operator_with(rng, p.dim, Profile::Generic)?, p.fit, curve.center())?
        };
        let mut m = Metrics::default();
        let mut errors = Vec::with_capacity(grids.len());
        // the accuracy rung enforces the margin rule, so check it first
        for (m_nodes, grid, solver) in grids.iter().rev() {
            let density = if *m_nodes == top {
                SemispectralDensity::new(grid, &t)?
            } else {
                SemispectralDensity::new_unchecked(grid, &t)?
            };
            let mut err = 0.0f64;
            for u in &battery {
                let diff = &reconstruct(u, grid, solver, &density)? - &u.eval_matrix_unchecked(&t)?;
                err = err.max(spectral_norm(&diff));
            }
            m.set(&format!("error_m{m_nodes}"), err);
            errors.push(err);
            if *m_nodes == top {
                let id = ComplexMatrix::identity(t.dim());
                m.set("reconstruction_error", err);
                m.set("hermitian_defect", density.hermitian_defect());
                m.set("min_eigenvalue", density.min_eigenvalue()?);
                m.set("sum_error", density.total().distance(&id));
            }
        }
        errors.reverse();
        m.set("decay_ok", if geometric_decay(&errors) { 1.0 } else { 0.0 });
        Ok(m)
    });
    let mut agg = BTreeMap::new();
    for key in ["reconstruction_error", "hermitian_defect", "sum_error"] {
        agg.insert(format!("max_{key}"), max_metric(&trials, key));
    }
    agg.insert("min_eigenvalue".into(), min_metric(&trials, "min_eigenvalue"));
    let decay_failures = trials.iter().filter(|t| t.metric("decay_ok") == Some(0.0)).count();
    agg.insert("decay_failures".into(), decay_failures as f64);
    let rows = p
        .ladder
        .iter()
        .map(|&m| ConvergenceRow {
            parameter: m as f64,
            residual: max_metric(&trials, &format!("error_m{m}")),
        })
        .collect();
    let mut checks = vec![
        Check::le("AC-4", "max reconstruction error at the top rung", agg["max_reconstruction_error"], 1e-6),
        Check::le("AC-4", "trials without geometric decay", decay_failures as f64, 0.0),
        Check::le("AC-5", "max Hermitian defect", agg["max_hermitian_defect"], 1e-14),
        Check::ge("AC-5", "min block eigenvalue", agg["min_eigenvalue"], -1e-10),
        Check::le("AC-5", "max partition-of-unity error", agg["max_sum_error"], 1e-8),
    ];
    if p.negative_control {
        let v = negative_control(top)?;
        agg.insert("negative_control_min_eigenvalue".into(), v);
        checks.push(Check::le("AC-5", "negative control min block eigenvalue", v, -1e-6));
    }
    let table = ConvergenceTable::new("M", rows);
    Ok(Report::assemble(s, trials, agg, vec![table], checks, "AC-4"))
}

/// Smallest block eigenvalue for `2·J2` against the unit circle, whose
/// numerical range touches the boundary.
pub fn negative_control(m: usize) -> Result<f64> {
    let circle = sdl_core::curve::BoundaryCurve::disc(C64::new(0.0, 0.0), 1.0)?;
    let grid = BoundaryGrid::discretize(&circle, m)?;
    Ok(SemispectralDensity::new_unchecked(&grid, &j2().scale_real(2.0))?.min_eigenvalue()?)
}

fn run_realness(s: &Scenario, p: &RealnessParams) -> Result<Report> {
    let d = domain(&p.domain)?;
    let grid = d.grid(p.m)?;
    let solver = DirichletSolver::new(&NpOperator::new(&grid)?)?;
    let center = d.curves[0].0.center();
    let trials = run_trials(s.seed, 0..s.trials, |_, rng| {
        let t = fit_to_disc(&random_operator_with(rng, p.dim, Profile::Generic)?, p.fit_radius).shift(center);
        let f = rng.gaussian_vec(p.dim);
        let density = SemispectralDensity::new(&grid, &t)?;
        let mu = elementary_measure(&solver, &density, &f, &f);
        let mut m = Metrics::default();
        m.set("max_imag", mu.max_imag());
        m.set("restricted_max_imag", 0.0);
        for k in 0..grid.component_count() {
            let q = MeasureProjection::components(&grid, &[k])?;
            m.raise("restricted_max_imag", q.apply(&mu)?.max_imag());
        }
        Ok(m)
    });
    let agg = BTreeMap::from([
        ("max_imag".to_string(), max_metric(&trials, "max_imag")),
        ("restricted_max_imag".to_string(), max_metric(&trials, "restricted_max_imag")),
    ]);
    let checks = vec![
        Check::le("AC-6", "max |Im mu_ff|", agg["max_imag"], 1e-10),
        Check::le("AC-6", "max |Im Q mu_ff| over components", agg["restricted_max_imag"], 1e-10),
    ];
    Ok(Report::assemble(s, trials, agg, vec![], checks, "AC-6"))
}

fn riesz_metrics(t: &ComplexMatrix, contours: &[Contour], pole: C64) -> sdl_core::Result<Metrics> {
    let sys = idempotent_system(t, contours)?;
    let o = orthogonalize(&sys)?;
    let d = decompose_operator(t, &o)?;
    let u = RationalFunction::simple_pole(pole)?;
    let lhs = &(&o.similarity * &u.eval_matrix_unchecked(t)?) * &o.inverse;
    let blocks = d
        .blocks
        .iter()
        .map(|b| u.eval_matrix_unchecked(b))
        .collect::<sdl_core::Result<Vec<_>>>()?;
    let mut m = Metrics::default();
    let r = &sys.residuals;
    m.set("system_residual", r.idempotent.max(r.cross).max(r.commutation));
    m.set("similarity_identity", o.similarity_identity_residual(&sys));
    m.set("projection_residual", o.projection_residual());
    m.set("off_block_residual", d.residual);
    m.set("calculus_residual", lhs.distance(&d.assemble(&blocks)));
    m.set("block_hull_residual", verify_block_ranges(&d.blocks)?);
    m.set("condition_number", o.condition_number());
    m.set("similarity_distance_from_identity", o.similarity.distance(&ComplexMatrix::identity(t.dim())));
    Ok(m)
}

fn run_riesz(s: &Scenario, p: &RieszParams) -> Report {
    let pole = complex(p.pole);
    let split = run_trials(s.seed, 0..s.trials, |_, rng| {
        let dim = dim_in(rng, 2, p.max_dim);
        let op = random_split_operator(rng, dim, p.gap)?;
        let contours = op
            .clusters
            .iter()
            .map(|&(c, r)| Contour::new(c, r + 0.45 * p.gap, p.nodes))
            .collect::<sdl_core::Result<Vec<_>>>()?;
        let mut m = riesz_metrics(&op.matrix, &contours, pole)?;
        m.values.remove("similarity_distance_from_identity");
        Ok(m)
    });
    let normal = run_trials(s.seed, s.trials..s.trials + p.normal_trials, |_, rng| {
        let dim = dim_in(rng, 2, p.max_dim);
        let op = random_split_operator(rng, dim, p.gap)?;
        let diag: Vec<C64> = (0..dim)
            .map(|i| {
                let (c, r) = op.clusters[usize::from(i >= dim.div_ceil(2))];
                rng.point_in_disc(c, r)
            })
            .collect();
        let q = rng.unitary(dim);
        let t = &(&q * &ComplexMatrix::from_diag(&diag)) * &q.adjoint();
        let contours = op
            .clusters
            .iter()
            .map(|&(c, r)| Contour::new(c, r + 0.45 * p.gap, p.nodes))
            .collect::<sdl_core::Result<Vec<_>>>()?;
        let full = riesz_metrics(&t, &contours, pole)?;
        let mut m = Metrics::default();
        m.set("similarity_distance_from_identity", full.values["similarity_distance_from_identity"]);
        Ok(m)
    });
    let mut trials = split;
    trials.extend(normal);
    let keys = [
        "system_residual",
        "similarity_identity",
        "projection_residual",
        "off_block_residual",
        "calculus_residual",
        "block_hull_residual",
        "condition_number",
        "similarity_distance_from_identity",
    ];
    let mut agg: BTreeMap<String, f64> = keys.iter().map(|k| (format!("max_{k}"), max_metric(&trials, k))).collect();
    let mut checks = vec![
        Check::le("AC-7", "max idempotent/commutation residual", agg["max_system_residual"], 1e-8),
        Check::le("AC-7", "max similarity identity residual", agg["max_similarity_identity"], 1e-8),
        Check::le("AC-7", "max self-adjoint idempotent residual", agg["max_projection_residual"], 1e-9),
        Check::le("AC-7", "max off-block residual", agg["max_off_block_residual"], 1e-8),
        Check::le("AC-7", "max calculus compatibility residual", agg["max_calculus_residual"], 1e-8),
        Check::le("AC-7", "max block hull residual", agg["max_block_hull_residual"], 1e-8),
    ];
    if p.normal_trials > 0 {
        checks.push(Check::le(
            "AC-7",
            "max |S - I| for normal operators",
            agg["max_similarity_distance_from_identity"],
            1e-9,
        ));
    }
    if p.similarity_demo {
        let ratio = similarity_demo().unwrap_or(f64::NAN);
        agg.insert("similarity_demo_ratio".into(), ratio);
        checks.push(Check::le("AC-10", "contractive similarity ratio", ratio, 1.0 + 1e-6));
    }
    Report::assemble(s, trials, agg, vec![], checks, "AC-7")
}

/// Best ratio the contractive similarity search reaches for `[[0,2],[0,0]]`
/// against the unit disc.
pub fn similarity_demo() -> sdl_core::Result<f64> {
    let t = ComplexMatrix::from_real_rows(&[[0.0, 2.0], [0.0, 0.0]]);
    let sampler = RegionSampler::unit_circle(256)?;
    Ok(contractive_similarity_search(&t, &sampler, &SimilarityConfig::default())?.ratio)
}

/// Executor that runs the optimizer restarts in parallel, in index order.
pub fn parallel_runs(search: &GleasonSearch) -> Vec<SearchRun> {
    (0..search.run_count()).into_par_iter().map(|i| search.run(i)).collect()
}

fn run_gleason(s: &Scenario, p: &GleasonParams) -> Result<Report> {
    let cfg = p.config(s.seed);
    let domains = p
        .cases
        .iter()
        .map(|c| domain(&c.domain))
        .collect::<Result<Vec<_>>>()?;
    let ladder = p.ladder.clone().unwrap_or_else(|| vec![cfg.degree]);
    let trials = run_trials(s.seed, 0..s.trials, |i, _| {
        let c = &p.cases[i];
        let rungs = gleason_degree_ladder_with(complex(c.x1), complex(c.x2), &domains[i], &cfg, &ladder, parallel_runs)?;
        let best = rungs.last().expect("non-empty ladder");
        let mut m = Metrics::default();
        m.set("d_hat", best.d_hat);
        m.set("degree", best.degree as f64);
        m.set("verification_sup", rungs.iter().map(|r| r.verification_sup).fold(0.0, f64::max));
        m.set(
            "ladder_monotone",
            if rungs.windows(2).all(|w| w[1].d_hat >= w[0].d_hat) { 1.0 } else { 0.0 },
        );
        if rungs.len() > 1 {
            m.series.insert("ladder_d_hat".into(), rungs.iter().map(|r| r.d_hat).collect());
        }
        Ok(m)
    });
    let mut agg = BTreeMap::from([("max_verification_sup".to_string(), max_metric(&trials, "verification_sup"))]);
    let mut checks = vec![Check::le(
        "AC-8",
        "max certificate sup on the 4x sampler",
        agg["max_verification_sup"],
        1.0 + 1e-9,
    )];
    let mut convergence = Vec::new();
    for (i, (c, t)) in p.cases.iter().zip(&trials).enumerate() {
        let d = t.metric("d_hat").unwrap_or(f64::NAN);
        agg.insert(format!("case{i}_d_hat"), d);
        let label = format!("{} d_hat for {:?} vs {:?}", c.domain, c.x1, c.x2);
        if let Some(lo) = c.min {
            checks.push(Check::ge("AC-8", &label, d, lo));
        }
        if let Some(hi) = c.max {
            checks.push(Check::le("AC-8", &label, d, hi));
        }
        if ladder.len() > 1 {
            checks.push(Check::ge("AC-8", &format!("case {i} ladder non-decreasing"), t.metric("ladder_monotone").unwrap_or(0.0), 1.0));
            if let Outcome::Ok(m) = &t.outcome {
                let rows = ladder
                    .iter()
                    .zip(&m.series["ladder_d_hat"])
                    .map(|(&deg, &d)| ConvergenceRow {
                        parameter: deg as f64,
                        residual: d,
                    })
                    .collect();
                convergence.push(ConvergenceTable::new(&format!("degree (case {i})"), rows));
            }
        }
    }
    Ok(Report::assemble(s, trials, agg, convergence, checks, "AC-8"))
}

/// `Σ_k (p_k(ζ) + β_k/(ζ − a_k)) dζ` over the components, with every `a_k`
/// outside the closed disc of its component: annihilates functions analytic
/// on each component.
fn cauchy_annihilator(grid: &BoundaryGrid, rng: &mut TrialRng) -> MeasureVector {
    let mut mu = MeasureVector::zeros(grid.len());
    for (k, (curve, _)) in grid.curves().iter().enumerate() {
        let p = rng.polynomial(4);
        let beta = rng.complex_gaussian();
        let a = curve.center() + C64::from_polar(curve.circumradius() * 1.6, rng.uniform_range(0.0, std::f64::consts::TAU));
        let part = MeasureVector::line_measure(grid, k, |z| sdl_core::linalg::poly_eval(&p, z) + beta / (z - a));
        mu = &mu + &part;
    }
    let tv = mu.total_variation();
    MeasureVector {
        values: mu.values.iter().map(|v| v / tv).collect(),
    }
}

fn test_function(d: &ModelDomain, rng: &mut TrialRng) -> sdl_core::Result<RationalFunction> {
    let coeffs = rng.polynomial(6);
    if d.admissible_poles.is_empty() {
        return RationalFunction::polynomial(coeffs);
    }
    let pi = d.admissible_poles[rng.below(d.admissible_poles.len())];
    let multiplicity = 1 + rng.below(3) as u32;
    RationalFunction::new(coeffs, vec![Pole { location: pi, multiplicity }])
}

fn run_measure(s: &Scenario, p: &MeasureParams) -> Result<Report> {
    let d = domain(&p.domain)?;
    let grid = d.grid(p.m)?;
    let trials = run_trials(s.seed, 0..s.trials, |_, rng| {
        let mu = cauchy_annihilator(&grid, rng);
        let noise = MeasureVector {
            values: rng.gaussian_vec(grid.len()),
        };
        let qs = (0..grid.component_count())
            .map(|k| MeasureProjection::components(&grid, &[k]))
            .collect::<sdl_core::Result<Vec<_>>>()?;
        let mut m = Metrics::default();
        m.set("annihilation", 0.0);
        m.set("restricted_annihilation", 0.0);
        m.set("multiplicativity_defect", 0.0);
        for _ in 0..p.tests {
            let u = test_function(&d, rng)?;
            m.raise("annihilation", mu.integrate(&grid, &u)?.norm());
            for q in &qs {
                m.raise("restricted_annihilation", q.apply(&mu)?.integrate(&grid, &u)?.norm());
                for nu in [&mu, &noise] {
                    let a = q.apply(&nu.multiply(&grid, &u)?)?;
                    let b = q.apply(nu)?.multiply(&grid, &u)?;
                    let defect = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
                    m.raise("multiplicativity_defect", defect);
                }
            }
        }
        let parts = measure_part_decomposition(&noise, &d, &grid)?;
        m.set("tv_defect", parts.variation_defect(&noise) / noise.total_variation());
        m.set("mutually_singular", if parts.mutually_singular() { 1.0 } else { 0.0 });
        Ok(m)
    });
    let agg = BTreeMap::from([
        ("max_annihilation".to_string(), max_metric(&trials, "annihilation")),
        ("max_restricted_annihilation".to_string(), max_metric(&trials, "restricted_annihilation")),
        ("max_multiplicativity_defect".to_string(), max_metric(&trials, "multiplicativity_defect")),
        ("max_tv_defect".to_string(), max_metric(&trials, "tv_defect")),
        ("min_mutually_singular".to_string(), min_metric(&trials, "mutually_singular")),
    ]);
    let checks = vec![
        Check::le("AC-9", "max |integral of u against the annihilator|", agg["max_annihilation"], 1e-8),
        Check::le("AC-9", "max |integral of u against a restriction|", agg["max_restricted_annihilation"], 1e-8),
        Check::le("AC-9", "relative total-variation defect", agg["max_tv_defect"], 1e-12),
        Check::ge("AC-9", "parts mutually singular", agg["min_mutually_singular"], 1.0),
        Check::le("AC-9", "max |uQmu - Q(u mu)| at the nodes", agg["max_multiplicativity_defect"], 0.0),
    ];
    Ok(Report::assemble(s, trials, agg, vec![], checks, "AC-9"))
}

/// The aggregate a convergence study tracks for each kind.
pub fn primary_residual(kind: Kind) -> &'static str {
    match kind {
        Kind::HullIdentity => "max_hausdorff",
        Kind::VonNeumann => "max_ratio",
        Kind::KSearch => "max_k_hat",
        Kind::NpReconstruct => "max_reconstruction_error",
        Kind::Realness => "max_imag",
        Kind::RieszDecomposition => "max_system_residual",
        Kind::GleasonDistance => "case0_d_hat",
        Kind::MeasureDecomposition => "max_annihilation",
    }
}

/// Runs the scenario once per rung with `params[parameter]` set to the rung.
/// For `gleason_distance` with parameter `degree`, the rungs form one
/// warm-started ladder per case.
pub fn convergence_study(s: &Scenario, parameter: &str, ladder: &[f64]) -> Result<Report> {
    if ladder.is_empty() || ladder.windows(2).any(|w| w[0] >= w[1] || w[0].is_nan()) {
        return Err(SdlError::Input("ladder must be non-empty and strictly increasing".into()));
    }
    let set = |v: f64| -> Result<Scenario> {
        let mut rung = s.clone();
        let obj = rung
            .params
            .as_object_mut()
            .ok_or_else(|| SdlError::Input("params must be an object".into()))?;
        let value = if v.fract() == 0.0 && v >= 0.0 {
            serde_json::Value::from(v as u64)
        } else {
            serde_json::Value::from(v)
        };
        obj.insert(parameter.to_string(), value);
        rung.validate()?;
        Ok(rung)
    };
    if s.kind == Kind::GleasonDistance && parameter == "degree" {
        let mut rung = s.clone();
        if let Some(obj) = rung.params.as_object_mut() {
            obj.remove("degree");
            obj.insert("ladder".into(), serde_json::Value::from(ladder.iter().map(|&d| d as u64).collect::<Vec<_>>()));
        }
        rung.validate()?;
        let mut report = run(&rung)?;
        report.scenario = s.clone();
        return Ok(report);
    }
    let key = primary_residual(s.kind);
    let mut trials = Vec::new();
    let mut rows = Vec::with_capacity(ladder.len());
    let mut checks = Vec::new();
    let mut aggregates = BTreeMap::new();
    for &v in ladder {
        let r = run(&set(v)?)?;
        let residual = r.aggregates.get(key).copied().unwrap_or(f64::NAN);
        aggregates.insert(format!("{key}@{v}"), residual);
        rows.push(ConvergenceRow { parameter: v, residual });
        checks.extend(r.checks.into_iter().map(|mut c| {
            c.name = format!("{} ({parameter} = {v})", c.name);
            c
        }));
        let offset = trials.len();
        trials.extend(r.trials.into_iter().map(|mut t| {
            t.trial += offset;
            t
        }));
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        scenario: s.clone(),
        trials,
        aggregates,
        convergence: vec![ConvergenceTable::new(parameter, rows)],
        checks,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(kind: &str, params: &str, trials: usize) -> Scenario {
        Scenario::from_json(&format!(
            r#"{{"schema_version": 1, "kind": "{kind}", "params": {params}, "seed": 11, "trials": {trials}}}"#
        ))
        .unwrap()
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = r#"{"schema_version": 1, "kind": "hull_identity", "seed": 1, "trials": 1, "extra": 0}"#;
        assert!(matches!(Scenario::from_json(bad), Err(SdlError::Json(_))));
        let bad = r#"{"schema_version": 1, "kind": "hull_identity", "params": {"mm": 3}, "seed": 1, "trials": 1}"#;
        assert!(matches!(Scenario::from_json(bad), Err(SdlError::Input(_))));
        let bad = r#"{"schema_version": 2, "kind": "hull_identity", "seed": 1, "trials": 1}"#;
        assert!(matches!(Scenario::from_json(bad), Err(SdlError::Input(_))));
        let missing_seed = r#"{"schema_version": 1, "kind": "hull_identity", "trials": 1}"#;
        assert!(Scenario::from_json(missing_seed).is_err());
    }

    #[test]
    fn hull_runs_are_deterministic() {
        let s = scenario("hull_identity", r#"{"max_dim": 4, "m": 180}"#, 6);
        let a = run(&s).unwrap();
        let b = run(&s).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert!(a.passed, "{:?}", a.checks);
        assert_eq!(a.trials.len(), 6);
        assert!(a.trials.iter().enumerate().all(|(i, t)| t.trial == i));
    }

    #[test]
    fn failing_trials_become_records() {
        let s = scenario(
            "np_reconstruct",
            r#"{"curve": {"kind": "disc", "params": {"center": [0, 0], "radius": 1}}, "dim": 2,
                "fit": {"numerical_radius": 1.0}, "ladder": [64, 128], "jordan": false, "negative_control": false}"#,
            3,
        );
        let r = run(&s).unwrap();
        assert_eq!(r.trials.len(), 3);
        for t in &r.trials {
            match &t.outcome {
                Outcome::Error { error, .. } => assert_eq!(error, "RegionViolation"),
                Outcome::Ok(_) => panic!("trial {} should violate the margin", t.trial),
            }
        }
        assert!(!r.passed);
    }

    #[test]
    fn decay_rule() {
        assert!(geometric_decay(&[1e-2, 1e-4, 1e-12, 2e-12]));
        assert!(!geometric_decay(&[1e-2, 0.8e-2]));
    }

    #[test]
    fn csv_has_one_row_per_trial() {
        let s = scenario("hull_identity", r#"{"max_dim": 2, "m": 90}"#, 3);
        let csv = String::from_utf8(run(&s).unwrap().trials_csv().unwrap()).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "trial,status,error,hausdorff");
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn hull_study_records_every_rung() {
        let s = scenario("hull_identity", r#"{"max_dim": 3}"#, 4);
        let r = convergence_study(&s, "m", &[64.0, 128.0, 256.0]).unwrap();
        let t = &r.convergence[0];
        assert_eq!(t.rows.len(), 3);
        assert!(t.rows.iter().all(|row| row.residual <= 1e-8), "{:?}", t.rows);
        assert!(convergence_study(&s, "m", &[128.0, 64.0]).is_err());
    }
}
