//! Experiment orchestration: configuration, seeded trials, scaling sweeps,
//! CSV tables and the verification batteries.
//!
//! Every table is written with a leading `# {json}` provenance line followed
//! by a CSV header and rows ordered by `(genus, trial)`. Floats carry 12
//! significant digits. Nothing that depends on scheduling (thread count,
//! output path, wall time unless requested) enters the bytes.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{all_matchings, graph_diameter, is_connected, sample_configuration_model, PantsGraph};
use crate::hexagon::{build_hexagon, identity_residual, pants_radius, seam_length, HexagonGeometry};
use crate::lattice::{reference, verify_counting_bounds, BallCounter, LatticeProfile, MAX_RADIUS};
use crate::peeling::{audit_inequalities, explore, AuditStatus, CHECK_FINAL, CHECK_R6K};
use crate::seeds::derive_seed;
use crate::stats::{chi_square, linear_fit, median};
use crate::surface::{assemble_surface, auto_ell, diameter_estimate_with, theorem_budget, DiameterOptions};

/// Runs `f(0), …, f(n − 1)` on the current rayon pool, results in index order.
pub fn run_trials<T, F>(n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EllPolicy {
    Fixed(f64),
    Auto(AutoTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

impl EllPolicy {
    pub const AUTO: EllPolicy = EllPolicy::Auto(AutoTag::Auto);

    pub fn resolve(&self, genus: u64) -> f64 {
        match *self {
            EllPolicy::Fixed(ell) => ell,
            EllPolicy::Auto(_) => auto_ell(genus),
        }
    }
}

impl Default for EllPolicy {
    fn default() -> Self {
        EllPolicy::AUTO
    }
}

impl FromStr for EllPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(EllPolicy::AUTO);
        }
        s.parse::<f64>()
            .map(EllPolicy::Fixed)
            .map_err(|_| Error::InvalidInput(format!("ell must be a number or \"auto\", got {s:?}")))
    }
}

impl fmt::Display for EllPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EllPolicy::Fixed(ell) => write!(f, "{ell}"),
            EllPolicy::Auto(_) => f.write_str("auto"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub genus: Vec<u64>,
    pub ell: EllPolicy,
    pub trials: u64,
    pub seed: u64,
    /// Radius cap for the distance oracle; `None` picks one from the genus.
    pub rcap: Option<f64>,
    pub epsilon: f64,
    pub k: u64,
    /// Output table; stdout when absent.
    pub emit: Option<PathBuf>,
    /// Worker threads; rayon's default when absent.
    pub threads: Option<usize>,
    /// Fill the `wall_ms` column (makes output timing dependent).
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            genus: vec![64, 128, 256, 512, 1024, 2048],
            ell: EllPolicy::AUTO,
            trials: 20,
            seed: 0,
            rcap: None,
            epsilon: 0.4,
            k: 3,
            emit: None,
            threads: None,
            timing: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.genus.is_empty() {
            return Err(Error::InvalidInput("genus list is empty".into()));
        }
        if let Some(&g) = self.genus.iter().find(|&&g| g < 2) {
            return Err(Error::InvalidInput(format!("genus must be at least 2, got {g}")));
        }
        if self.trials < 1 {
            return Err(Error::InvalidInput("trials must be at least 1".into()));
        }
        if !(self.epsilon > 1.0 / 3.0 && self.epsilon < 0.5) {
            return Err(Error::InvalidInput(format!("epsilon must lie in (1/3, 1/2), got {}", self.epsilon)));
        }
        if self.k < 3 {
            return Err(Error::InvalidInput(format!("k must be at least 3, got {}", self.k)));
        }
        if let EllPolicy::Fixed(ell) = self.ell {
            build_hexagon(ell)?;
        }
        if let Some(r) = self.rcap {
            if !(r > 0.0 && r <= MAX_RADIUS) {
                return Err(Error::OutOfRange {
                    what: "rcap",
                    value: r,
                    max: MAX_RADIUS,
                });
            }
        }
        Ok(())
    }

    /// The fields that determine the output; excludes paths and threads.
    pub fn provenance(&self) -> serde_json::Value {
        serde_json::json!({
            "genus": self.genus,
            "ell": self.ell,
            "trials": self.trials,
            "seed": self.seed,
            "rcap": self.rcap,
            "epsilon": self.epsilon,
            "k": self.k,
            "timing": self.timing,
        })
    }
}

/// Formats with 12 significant digits, then prints the shortest decimal
/// that reads back to the rounded value.
pub fn fmt_f64(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => fmt_f64(*v),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub header: serde_json::Value,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(command: &str, params: serde_json::Value, columns: &[&'static str]) -> Self {
        Table {
            header: serde_json::json!({
                "tool": "hypdiam",
                "version": env!("CARGO_PKG_VERSION"),
                "command": command,
                "params": params,
            }),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# {}", serde_json::to_string(&self.header)?)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes to `path`, or to stdout when `path` is `None`.
    pub fn emit(&self, path: Option<&std::path::Path>) -> Result<()> {
        match path {
            Some(p) => self.write(std::io::BufWriter::new(std::fs::File::create(p)?)),
            None => self.write(std::io::stdout().lock()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub genus: u64,
    pub ell: f64,
    pub trial: u64,
    pub seed: u64,
    pub connected: bool,
    pub midpoint_diam: Option<f64>,
    pub padded_diam: Option<f64>,
    pub bavard: f64,
    pub theorem_budget: f64,
    pub budget_gap: Option<f64>,
    pub nodes_expanded: u64,
    pub wall_ms: Option<f64>,
    /// `ok`, `disconnected`, or an error description.
    pub status: String,
}

pub const SCALING_COLUMNS: [&str; 13] = [
    "genus",
    "ell",
    "trial",
    "seed",
    "connected",
    "midpoint_diam",
    "padded_diam",
    "bavard",
    "theorem_budget",
    "budget_gap",
    "nodes_expanded",
    "wall_ms",
    "status",
];

impl ScalingRow {
    pub fn cells(&self) -> Vec<Cell> {
        vec![
            self.genus.into(),
            self.ell.into(),
            self.trial.into(),
            self.seed.into(),
            self.connected.into(),
            self.midpoint_diam.into(),
            self.padded_diam.into(),
            self.bavard.into(),
            self.theorem_budget.into(),
            self.budget_gap.into(),
            self.nodes_expanded.into(),
            self.wall_ms.into(),
            self.status.as_str().into(),
        ]
    }

    pub fn is_complete(&self) -> bool {
        self.padded_diam.is_some()
    }
}

/// One surface trial: sample, assemble, estimate. Errors land in the row.
pub fn surface_trial(genus: u64, ell: f64, trial: u64, seed: u64, opts: &DiameterOptions, timing: bool) -> ScalingRow {
    let start = Instant::now();
    let mut row = ScalingRow {
        genus,
        ell,
        trial,
        seed,
        connected: false,
        midpoint_diam: None,
        padded_diam: None,
        bavard: crate::surface::bavard_bound(genus),
        theorem_budget: theorem_budget(genus),
        budget_gap: None,
        nodes_expanded: 0,
        wall_ms: None,
        status: "ok".into(),
    };
    let outcome = sample_configuration_model(genus, seed).and_then(|graph| {
        row.connected = is_connected(&graph);
        let surface = assemble_surface(graph, ell)?;
        diameter_estimate_with(&surface, opts)
    });
    match outcome {
        Ok(report) => {
            row.midpoint_diam = Some(report.midpoint_diameter);
            row.padded_diam = Some(report.padded_diameter);
            row.budget_gap = Some(report.padded_diameter - row.theorem_budget);
            row.nodes_expanded = report.nodes_expanded;
        }
        Err(Error::Disconnected) => row.status = "disconnected".into(),
        Err(Error::Incomplete { unreached, radius_cap, .. }) => {
            row.status = format!("incomplete: {unreached} unreached within {}", fmt_f64(radius_cap))
        }
        Err(e) => row.status = format!("error: {e}"),
    }
    if timing {
        row.wall_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    row
}

#[derive(Debug, Clone, Serialize)]
pub struct GenusSummary {
    pub genus: u64,
    pub ell: f64,
    pub trials: u64,
    pub connected: u64,
    pub complete: u64,
    pub median_midpoint: Option<f64>,
    pub median_padded: Option<f64>,
    pub theorem_budget: f64,
    pub bavard: f64,
    /// Fractions of complete trials with `padded ≤ budget + C₀`, `C₀ = 5, 10, 15`.
    pub within_budget: [(f64, f64); 3],
    /// Complete trials with `padded < bavard`.
    pub sandwich_violations: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub per_genus: Vec<GenusSummary>,
    /// OLS of median padded diameter on `log g`.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<ScalingRow>,
    pub summary: SweepSummary,
}

impl SweepResult {
    pub fn table(&self, cfg: &ExperimentConfig) -> Table {
        let mut table = Table::new("sweep", cfg.provenance(), &SCALING_COLUMNS);
        for row in &self.rows {
            table.push(row.cells());
        }
        table
    }
}

pub const BUDGET_OFFSETS: [f64; 3] = [5.0, 10.0, 15.0];

pub fn summarize(rows: &[ScalingRow]) -> SweepSummary {
    let mut genera: Vec<u64> = rows.iter().map(|r| r.genus).collect();
    genera.dedup();
    let per_genus: Vec<GenusSummary> = genera
        .iter()
        .map(|&g| {
            let of_g: Vec<&ScalingRow> = rows.iter().filter(|r| r.genus == g).collect();
            let padded: Vec<f64> = of_g.iter().filter_map(|r| r.padded_diam).collect();
            let midpoint: Vec<f64> = of_g.iter().filter_map(|r| r.midpoint_diam).collect();
            let budget = theorem_budget(g);
            let frac = |c0: f64| {
                let hits = padded.iter().filter(|&&d| d <= budget + c0).count();
                (c0, if padded.is_empty() { 0.0 } else { hits as f64 / padded.len() as f64 })
            };
            let bavard = crate::surface::bavard_bound(g);
            GenusSummary {
                genus: g,
                ell: of_g[0].ell,
                trials: of_g.len() as u64,
                connected: of_g.iter().filter(|r| r.connected).count() as u64,
                complete: padded.len() as u64,
                median_midpoint: median(&midpoint),
                median_padded: median(&padded),
                theorem_budget: budget,
                bavard,
                within_budget: BUDGET_OFFSETS.map(frac),
                sandwich_violations: padded.iter().filter(|&&d| d < bavard).count() as u64,
            }
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = per_genus
        .iter()
        .filter_map(|s| s.median_padded.map(|m| ((s.genus as f64).ln(), m)))
        .unzip();
    let fit = linear_fit(&xs, &ys).ok();
    SweepSummary {
        per_genus,
        slope: fit.map(|f| f.0),
        intercept: fit.map(|f| f.1),
    }
}

pub fn run_scaling_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let jobs: Vec<(u64, u64)> = cfg
        .genus
        .iter()
        .flat_map(|&g| (0..cfg.trials).map(move |t| (g, t)))
        .collect();
    let opts = DiameterOptions {
        rcap: cfg.rcap,
        ..DiameterOptions::default()
    };
    let rows: Vec<ScalingRow> = jobs
        .par_iter()
        .map(|&(g, t)| surface_trial(g, cfg.ell.resolve(g), t, derive_seed(cfg.seed, g, t), &opts, cfg.timing))
        .collect();
    let summary = summarize(&rows);
    Ok(SweepResult { rows, summary })
}

/// Ball counts `N_ℓ(R)` from a lattice profile that is rebuilt to a larger
/// radius when a query needs it. Queries above `limit` fail.
pub struct CachedBallCounter {
    hex: HexagonGeometry,
    limit: f64,
    profile: Mutex<Option<LatticeProfile>>,
}

impl CachedBallCounter {
    pub fn new(hex: HexagonGeometry, limit: f64) -> Self {
        CachedBallCounter {
            hex,
            limit: limit.min(MAX_RADIUS),
            profile: Mutex::new(None),
        }
    }
}

impl BallCounter for CachedBallCounter {
    fn c_ell(&self) -> f64 {
        self.hex.c_ell
    }

    fn count_within(&self, radius: f64) -> Result<u64> {
        if radius < 0.0 {
            return Ok(0);
        }
        if radius > self.limit {
            return Err(Error::OutOfRange {
                what: "census radius",
                value: radius,
                max: self.limit,
            });
        }
        let mut slot = self.profile.lock().expect("census lock");
        if slot.as_ref().is_none_or(|p| p.max_radius < radius) {
            let target = (radius.ceil() + 1.0).min(self.limit).max(radius);
            *slot = Some(LatticeProfile::build(&self.hex, target)?);
        }
        slot.as_ref().expect("profile built").count_within(radius)
    }
}

/// Census radius above which peel audits report incomplete.
pub const PEEL_CENSUS_LIMIT: f64 = 16.0;

pub const PEEL_COLUMNS: [&str; 9] = [
    "trial",
    "bad_phase1",
    "bad_phase2",
    "R_6k",
    "R_tau1",
    "R_tau2",
    "closed_early",
    "audit_pass",
    "audit_slack_min",
];

#[derive(Debug, Clone, Serialize)]
pub struct PeelRow {
    pub trial: u64,
    pub seed: u64,
    pub bad_phase1: u64,
    pub bad_phase2: u64,
    pub bad_first_6k: u64,
    pub r_6k: Option<f64>,
    pub r_tau1: Option<f64>,
    pub r_tau2: Option<f64>,
    pub closed_early: bool,
    pub status: AuditStatus,
    /// Every evaluated inequality held; `None` when nothing was evaluated.
    pub audit_pass: Option<bool>,
    pub audit_slack_min: Option<f64>,
    pub r6k_holds: Option<bool>,
    pub final_holds: Option<bool>,
}

impl PeelRow {
    pub fn cells(&self) -> Vec<Cell> {
        vec![
            self.trial.into(),
            self.bad_phase1.into(),
            self.bad_phase2.into(),
            self.r_6k.into(),
            self.r_tau1.into(),
            self.r_tau2.into(),
            self.closed_early.into(),
            match self.status {
                AuditStatus::Complete => self.audit_pass.into(),
                AuditStatus::SkippedClosed => "skipped-closed".into(),
                AuditStatus::SkippedBadSteps => "skipped-bad-steps".into(),
                AuditStatus::Incomplete => "audit-incomplete".into(),
            },
            self.audit_slack_min.into(),
        ]
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PeelParams {
    pub genus: u64,
    pub ell: EllPolicy,
    pub epsilon: f64,
    pub k: u64,
    pub trials: u64,
    pub seed: u64,
}

pub fn run_peel_trials(p: &PeelParams) -> Result<Vec<PeelRow>> {
    let ell = p.ell.resolve(p.genus);
    let census = CachedBallCounter::new(build_hexagon(ell)?, PEEL_CENSUS_LIMIT);
    let six_k = 6 * p.k as usize;
    run_trials(p.trials, |t| {
        let seed = derive_seed(p.seed, p.genus, t);
        let trace = explore(p.genus, seed, ell, p.epsilon, p.k)?;
        let audit = audit_inequalities(&trace, &census);
        Ok(PeelRow {
            trial: t,
            seed,
            bad_phase1: trace.bad_phase1,
            bad_phase2: trace.bad_phase2,
            bad_first_6k: trace.bad_in_first(six_k),
            r_6k: trace.r(six_k),
            r_tau1: trace.r(trace.tau1),
            r_tau2: trace.r(trace.tau2),
            closed_early: trace.closed_early,
            status: audit.status,
            audit_pass: (!audit.checks.is_empty()).then(|| audit.all_hold()),
            audit_slack_min: audit.min_slack(),
            r6k_holds: audit.check(CHECK_R6K).map(|c| c.holds),
            final_holds: audit.check(CHECK_FINAL).map(|c| c.holds),
        })
    })
    .into_iter()
    .collect()
}

pub fn peel_table(p: &PeelParams, rows: &[PeelRow]) -> Result<Table> {
    let mut table = Table::new("peel", serde_json::to_value(p)?, &PEEL_COLUMNS);
    for row in rows {
        table.push(row.cells());
    }
    Ok(table)
}

pub fn graph_table(genus: u64, trials: u64, seed: u64) -> Result<Table> {
    let rows = run_trials(trials, |t| {
        let g = sample_configuration_model(genus, derive_seed(seed, genus, t))?;
        Ok((is_connected(&g), graph_diameter(&g)))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(
        "graph",
        serde_json::json!({"genus": genus, "trials": trials, "seed": seed}),
        &["trial", "connected", "graph_diameter"],
    );
    for (t, (connected, diam)) in rows.into_iter().enumerate() {
        table.push(vec![t.into(), connected.into(), diam.map(u64::from).into()]);
    }
    Ok(table)
}

pub fn lattice_table(ell: f64, radius: f64, step: f64) -> Result<Table> {
    let report = verify_counting_bounds(ell, radius, step)?;
    let mut table = Table::new(
        "lattice",
        serde_json::json!({"ell": ell, "radius": radius, "grid_step": step}),
        &["R", "N", "shell", "raw_rate", "certified_upper", "submult_ok", "area_ok"],
    );
    for r in &report.rows {
        table.push(vec![
            r.radius.into(),
            r.n.into(),
            r.shell.into(),
            r.raw_rate.into(),
            r.certified_upper.into(),
            r.submult_ok.into(),
            r.area_ok.into(),
        ]);
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy)]
pub struct SurfaceParams {
    pub genus: u64,
    pub ell: EllPolicy,
    pub trials: u64,
    pub seed: u64,
    pub rcap: Option<f64>,
    pub timing: bool,
}

pub const SURFACE_COLUMNS: [&str; 8] = [
    "trial",
    "connected",
    "midpoint_diam",
    "padded_diam",
    "bavard",
    "theorem_budget",
    "nodes_expanded",
    "wall_ms",
];

pub fn surface_rows(p: &SurfaceParams) -> Vec<ScalingRow> {
    let ell = p.ell.resolve(p.genus);
    let opts = DiameterOptions {
        rcap: p.rcap,
        ..DiameterOptions::default()
    };
    run_trials(p.trials, |t| {
        surface_trial(p.genus, ell, t, derive_seed(p.seed, p.genus, t), &opts, p.timing)
    })
}

pub fn surface_table(p: &SurfaceParams, rows: &[ScalingRow]) -> Table {
    let params = serde_json::json!({
        "genus": p.genus,
        "ell": p.ell,
        "trials": p.trials,
        "seed": p.seed,
        "rcap": p.rcap,
        "timing": p.timing,
    });
    let mut table = Table::new("surface", params, &SURFACE_COLUMNS);
    for r in rows {
        table.push(vec![
            r.trial.into(),
            r.connected.into(),
            r.midpoint_diam.into(),
            r.padded_diam.into(),
            r.bavard.into(),
            r.theorem_budget.into(),
            r.nodes_expanded.into(),
            r.wall_ms.into(),
        ]);
    }
    table
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Geometry,
    Counting,
    Peeling,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geometry" => Ok(Suite::Geometry),
            "counting" => Ok(Suite::Counting),
            "peeling" => Ok(Suite::Peeling),
            "all" => Ok(Suite::All),
            _ => Err(Error::InvalidInput(format!("unknown suite {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<CheckOutcome>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(CheckOutcome {
            name: name.to_string(),
            passed,
            detail,
        });
    }

    fn push_result(&mut self, name: &str, outcome: Result<(bool, String)>) {
        match outcome {
            Ok((passed, detail)) => self.push(name, passed, detail),
            Err(e) => self.push(name, false, format!("error: {e}")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

pub type HexagonBuilder = dyn Fn(f64) -> Result<HexagonGeometry> + Sync;

pub const IDENTITY_GRID: [f64; 9] = [1.0, 2.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 40.0];

pub fn run_verification_suites(suite: Suite) -> VerificationReport {
    run_verification_suites_with(suite, &build_hexagon)
}

/// Runs the selected batteries, building hexagons through `builder` for the
/// identity checks so that a perturbed construction can be exercised.
pub fn run_verification_suites_with(suite: Suite, builder: &HexagonBuilder) -> VerificationReport {
    let selected: Vec<Suite> = match suite {
        Suite::All => vec![Suite::Geometry, Suite::Counting, Suite::Peeling],
        s => vec![s],
    };
    let suites: Vec<SuiteReport> = selected
        .into_iter()
        .map(|s| match s {
            Suite::Geometry => geometry_suite(builder),
            Suite::Counting => counting_suite(builder),
            _ => peeling_suite(),
        })
        .collect();
    VerificationReport {
        passed: suites.iter().all(SuiteReport::passed),
        suites,
    }
}

fn hexagon_identity_check(report: &mut SuiteReport, builder: &HexagonBuilder) {
    let outcome = IDENTITY_GRID.iter().try_fold((true, String::new()), |(ok, mut detail), &ell| {
        let hex = builder(ell)?;
        let residual = identity_residual(ell / 2.0, hex.t).abs();
        let good = residual <= 1e-8;
        if !good {
            detail.push_str(&format!("ell = {ell}: residual {residual:e}; "));
        }
        Ok::<_, Error>((ok && good, detail))
    });
    report.push_result("hexagon identity cosh t (cosh(l/2) - 1) = cosh(l/2)", outcome);
}

fn geometry_suite(builder: &HexagonBuilder) -> SuiteReport {
    let mut report = SuiteReport {
        suite: Suite::Geometry,
        checks: Vec::new(),
    };
    hexagon_identity_check(&mut report, builder);

    let regular = (|| {
        let ell = 2.0 * 2f64.acosh();
        let hex = builder(ell)?;
        let dt = (hex.t - 2f64.acosh()).abs();
        let dc = (hex.c_ell - 2f64.sqrt().acosh()).abs();
        Ok((dt <= 1e-9 && dc <= 1e-9, format!("|t - acosh 2| = {dt:e}, |C - acosh sqrt 2| = {dc:e}")))
    })();
    report.push_result("regular hexagon", regular);

    let thick = IDENTITY_GRID.iter().try_fold((true, String::new()), |(ok, detail), &ell| {
        let hex = builder(ell)?;
        let m = hex.c_ell.min(hex.c_prime);
        let good = m > 3f64.ln() / 2.0;
        Ok::<_, Error>((ok && good, if good { detail } else { format!("{detail}ell = {ell}: min {m}; ") }))
    });
    report.push_result("min(C, C') > log(3)/2", thick);

    let seam = (|| {
        let mut detail = String::new();
        let mut ok = true;
        for (ell, tol) in [(12.0, 0.05), (20.0, 0.01)] {
            let hex = builder(ell)?;
            let ratio = seam_length(&hex) / (4.0 * (-ell / 4.0).exp());
            ok &= (ratio - 1.0).abs() <= tol;
            detail.push_str(&format!("ell = {ell}: ratio {}; ", fmt_f64(ratio)));
        }
        Ok((ok, detail))
    })();
    report.push_result("seam asymptotics", seam);

    let closure = IDENTITY_GRID.iter().try_fold((true, String::new()), |(ok, detail), &ell| {
        let hex = builder(ell)?;
        let angles_ok = hex
            .interior_angles()
            .iter()
            .all(|a| (a - std::f64::consts::FRAC_PI_2).abs() <= 1e-8);
        let radius_ok = pants_radius(&hex) >= hex.rho;
        let good = angles_ok && radius_ok && hex.closing_residual <= 1e-8;
        Ok::<_, Error>((ok && good, if good { detail } else { format!("{detail}ell = {ell}; ") }))
    });
    report.push_result("hexagon closure and right angles", closure);
    report
}

fn counting_suite(builder: &HexagonBuilder) -> SuiteReport {
    let mut report = SuiteReport {
        suite: Suite::Counting,
        checks: Vec::new(),
    };
    hexagon_identity_check(&mut report, builder);

    let brute = [2.0, 4.0, 6.0].iter().try_fold((true, String::new()), |(ok, detail), &ell| {
        let hex = build_hexagon(ell)?;
        let mut all = true;
        let mut detail = detail;
        for r in [2.0, 4.0, 6.0, 8.0] {
            let pruned = crate::lattice::enumerate_ball(&hex, r)?.count;
            let brute = reference::brute_force_count(&hex, r);
            if pruned != brute {
                all = false;
                detail.push_str(&format!("ell = {ell}, R = {r}: pruned {pruned} vs brute {brute}; "));
            }
        }
        Ok::<_, Error>((ok && all, detail))
    });
    report.push_result("pruned count equals brute force (R <= 8)", brute);

    let bounds = verify_counting_bounds(6.0, 14.0, 0.5).map(|r| {
        let detail = format!(
            "{} submult, {} sandwich, {} ancestor, {} area checks; {} violations",
            r.submult_checks,
            r.sandwich_checks,
            r.ancestor_checks,
            r.area_checks,
            r.violations.len()
        );
        (r.all_hold(), detail)
    });
    report.push_result("counting bounds on the grid (ell = 6, R <= 14)", bounds);
    report
}

/// Probability of each canonical adjacency class under the uniform matching.
pub fn class_distribution(genus: u64) -> Result<HashMap<Vec<u8>, f64>> {
    let all = all_matchings(6 * genus as usize - 6);
    let total = all.len() as f64;
    let mut probs: HashMap<Vec<u8>, f64> = HashMap::new();
    for m in all {
        let class = PantsGraph::from_matching(genus, m)?.canonical_adjacency()?;
        *probs.entry(class).or_default() += 1.0 / total;
    }
    Ok(probs)
}

/// Chi-square p-value of observed classes against `probs`, merging bins
/// with expected count below 5 into one.
pub fn class_chi_square(probs: &HashMap<Vec<u8>, f64>, observed: &[Vec<u8>]) -> Result<f64> {
    let n = observed.len() as f64;
    let mut counts: HashMap<&Vec<u8>, u64> = HashMap::new();
    for c in observed {
        if !probs.contains_key(c) {
            return Err(Error::Consistency("observed class has zero probability".into()));
        }
        *counts.entry(c).or_default() += 1;
    }
    let mut classes: Vec<&Vec<u8>> = probs.keys().collect();
    classes.sort();
    let (mut obs, mut exp) = (Vec::new(), Vec::new());
    let (mut rest_o, mut rest_e) = (0u64, 0.0);
    for c in classes {
        let e = probs[c] * n;
        let o = counts.get(c).copied().unwrap_or(0);
        if e < 5.0 {
            rest_o += o;
            rest_e += e;
        } else {
            obs.push(o);
            exp.push(e);
        }
    }
    if rest_e > 0.0 {
        obs.push(rest_o);
        exp.push(rest_e);
    }
    Ok(chi_square(&obs, &exp)?.p_value)
}

fn peeling_suite() -> SuiteReport {
    let mut report = SuiteReport {
        suite: Suite::Peeling,
        checks: Vec::new(),
    };

    let config_model = (|| {
        let all = all_matchings(6);
        let index: HashMap<&Vec<u32>, usize> = all.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let mut counts = vec![0u64; all.len()];
        for t in 0..15_000 {
            let g = sample_configuration_model(2, derive_seed(0, 2, t))?;
            counts[index[&g.matching().to_vec()]] += 1;
        }
        let chi = chi_square(&counts, &vec![1000.0; all.len()])?;
        Ok((chi.p_value >= 1e-3, format!("p = {}", fmt_f64(chi.p_value))))
    })();
    report.push_result("configuration model uniform at genus 2", config_model);

    let distribution = (|| {
        let probs = class_distribution(3)?;
        let observed = run_trials(5000, |t| {
            explore(3, derive_seed(0, 3, t), 2.0, 0.4, 3)?.final_graph()?.canonical_adjacency()
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let p = class_chi_square(&probs, &observed)?;
        Ok((p >= 1e-3, format!("p = {}", fmt_f64(p))))
    })();
    report.push_result("peeling matching distribution at genus 3", distribution);

    let audits = run_peel_trials(&PeelParams {
        genus: 256,
        ell: EllPolicy::AUTO,
        epsilon: 0.4,
        k: 3,
        trials: 50,
        seed: 0,
    })
    .map(|rows| {
        let r6k_fail = rows.iter().filter(|r| r.r6k_holds == Some(false)).count();
        let audited: Vec<&PeelRow> = rows.iter().filter(|r| r.final_holds.is_some()).collect();
        let final_ok = audited.iter().filter(|r| r.final_holds == Some(true)).count();
        let frac = if audited.is_empty() { 0.0 } else { final_ok as f64 / audited.len() as f64 };
        (
            r6k_fail == 0 && !audited.is_empty() && frac >= 0.95,
            format!("{r6k_fail} R_6k failures; final display holds on {final_ok}/{} audited runs", audited.len()),
        )
    });
    report.push_result("peeling audits at genus 256", audits);
    report
}
