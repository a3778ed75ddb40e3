//! Experiment runners (convergence traces, power sweeps, secrecy CDFs), trial
//! evaluation and result serialization.
//!
//! Trial `i` of an experiment uses channel seed `master + i` for every scheme
//! and sweep point, so rows are paired across schemes. Rows come out sorted
//! by (sweep position, scheme, trial) whatever the worker count.

use crate::error::{domain_err, Error, Result};
use crate::par;
use crate::rates::{eve_outage_mc, objective_value, secrecy_report, sinr_all, worst_case_primary, EveSide};
use crate::sca::{build_subproblem_for, heuristic_start_for, run_scheme, AlgorithmStatus, RunOptions, Scheme};
use crate::scenario::{draw_channels, validate_config, ChannelSet, SystemConfig};
use crate::surrogate::IterateState;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const CSV_HEADER: [&str; 11] = [
    "seed",
    "scheme",
    "sweep",
    "iterations",
    "status",
    "objective_bps",
    "sampled_secrecy_bps",
    "primary_margin_bps",
    "outage_secondary",
    "outage_primary",
    "ms",
];

/// Designs kept in the sidecar for re-evaluation.
pub const AUDIT_LIMIT: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Convergence,
    PowerSweep,
    Cdf,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::PowerSweep => "power_sweep",
            ExperimentKind::Cdf => "cdf",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    /// Antenna counts for convergence runs, P_s in dBm otherwise.
    pub sweep: Vec<f64>,
    pub trials: usize,
    pub schemes: Vec<Scheme>,
    pub out: PathBuf,
    /// R̄_p applied to every PR; `None` keeps the configured values.
    pub min_primary_secrecy: Option<f64>,
    /// P_s (dBm) of convergence runs; `None` keeps the configured budget.
    pub st_power_dbm: Option<f64>,
    /// N of sweep and CDF runs; `None` keeps the configured count.
    pub n_antennas: Option<usize>,
    /// Fill the `ms` column. Off by default so that output is reproducible
    /// byte for byte.
    pub wall_time: bool,
}

impl ExperimentSpec {
    /// Objective versus iteration for N ∈ {4, 6, 8} at R̄_p = 2, P_s = 15 dBm.
    pub fn convergence(out: impl Into<PathBuf>) -> Self {
        Self {
            kind: ExperimentKind::Convergence,
            sweep: vec![4.0, 6.0, 8.0],
            trials: 1,
            schemes: vec![Scheme::Proposed],
            out: out.into(),
            min_primary_secrecy: Some(2.0),
            st_power_dbm: Some(15.0),
            n_antennas: None,
            wall_time: false,
        }
    }

    /// Secrecy versus P_s ∈ {0, 4, …, 20} dBm at R̄_p = 1, N = 8.
    pub fn power_sweep(out: impl Into<PathBuf>) -> Self {
        Self {
            kind: ExperimentKind::PowerSweep,
            sweep: (0..=5).map(|i| 4.0 * i as f64).collect(),
            trials: 50,
            schemes: Scheme::ALL.to_vec(),
            out: out.into(),
            min_primary_secrecy: Some(1.0),
            st_power_dbm: None,
            n_antennas: Some(8),
            wall_time: false,
        }
    }

    /// Per-trial secrecy distribution at P_s = 20 dBm, R̄_p = 1, N = 8.
    pub fn cdf(out: impl Into<PathBuf>) -> Self {
        Self {
            kind: ExperimentKind::Cdf,
            sweep: vec![20.0],
            trials: 200,
            schemes: Scheme::ALL.to_vec(),
            out: out.into(),
            min_primary_secrecy: Some(1.0),
            st_power_dbm: None,
            n_antennas: Some(8),
            wall_time: false,
        }
    }

    pub fn for_kind(kind: ExperimentKind, out: impl Into<PathBuf>) -> Self {
        match kind {
            ExperimentKind::Convergence => Self::convergence(out),
            ExperimentKind::PowerSweep => Self::power_sweep(out),
            ExperimentKind::Cdf => Self::cdf(out),
        }
    }

    /// Drops the figure-specific overrides so the configuration file is used
    /// as is (apart from the swept quantity).
    pub fn keep_config_settings(mut self) -> Self {
        self.min_primary_secrecy = None;
        self.st_power_dbm = None;
        self.n_antennas = None;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return domain_err("trials must be at least 1");
        }
        if self.sweep.is_empty() {
            return domain_err("sweep must not be empty");
        }
        if self.schemes.is_empty() {
            return domain_err("at least one scheme is required");
        }
        for (i, s) in self.schemes.iter().enumerate() {
            if self.schemes[..i].contains(s) {
                return domain_err(format!("scheme {} listed twice", s.as_str()));
            }
        }
        for &v in &self.sweep {
            let ok = match self.kind {
                ExperimentKind::Convergence => v >= 1.0 && v.fract() == 0.0,
                _ => v.is_finite(),
            };
            if !ok {
                return domain_err(format!("invalid sweep value {v} for {}", self.kind.as_str()));
            }
        }
        if let Some(r) = self.min_primary_secrecy {
            if !(r >= 0.0 && r.is_finite()) {
                return domain_err("primary secrecy rate must be finite and nonnegative");
            }
        }
        if self.n_antennas == Some(0) {
            return domain_err("n_antennas must be positive");
        }
        Ok(())
    }

    /// Configuration of one trial at sweep value `v`.
    pub fn trial_config(&self, base: &SystemConfig, v: f64, seed: u64) -> Result<SystemConfig> {
        let mut cfg = base.clone().with_seed(seed);
        if let Some(r) = self.min_primary_secrecy {
            cfg = cfg.with_min_primary_secrecy(r);
        }
        match self.kind {
            ExperimentKind::Convergence => {
                cfg = cfg.with_antennas(v as usize);
                if let Some(p) = self.st_power_dbm {
                    cfg = cfg.with_st_power_dbm(p);
                }
            }
            ExperimentKind::PowerSweep | ExperimentKind::Cdf => {
                cfg = cfg.with_st_power_dbm(v);
                if let Some(n) = self.n_antennas {
                    cfg = cfg.with_antennas(n);
                }
            }
        }
        validate_config(cfg)
    }
}

pub fn trial_seed(master: u64, trial: usize) -> u64 {
    master.wrapping_add(trial as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowStatus {
    /// Intermediate iterate of a convergence trace.
    Iterate,
    Final(AlgorithmStatus),
}

impl RowStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RowStatus::Iterate => "iterate",
            RowStatus::Final(s) => s.as_str(),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        if s == "iterate" {
            return Some(RowStatus::Iterate);
        }
        [
            AlgorithmStatus::Converged,
            AlgorithmStatus::MaxIters,
            AlgorithmStatus::InfeasibleScenario,
            AlgorithmStatus::NumericalFailure,
        ]
        .into_iter()
        .find(|a| a.as_str() == s)
        .map(RowStatus::Final)
    }

    pub fn has_design(&self) -> bool {
        matches!(self, RowStatus::Final(s) if s.has_design())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub seed: u64,
    pub scheme: Scheme,
    pub sweep: f64,
    pub iterations: usize,
    pub status: RowStatus,
    pub objective_bps: Option<f64>,
    pub sampled_secrecy_bps: Option<f64>,
    /// min_l of sampled worst-case primary secrecy minus R̄_l.
    pub primary_margin_bps: Option<f64>,
    pub outage_secondary: Option<f64>,
    pub outage_primary: Option<f64>,
    /// Primary margin on the true channels. Not written to the CSV.
    pub true_margin_bps: Option<f64>,
    pub ms: u64,
}

impl ResultRow {
    fn bare(seed: u64, scheme: Scheme, sweep: f64, iterations: usize, status: RowStatus, ms: u64) -> Self {
        Self {
            seed,
            scheme,
            sweep,
            iterations,
            status,
            objective_bps: None,
            sampled_secrecy_bps: None,
            primary_margin_bps: None,
            outage_secondary: None,
            outage_primary: None,
            true_margin_bps: None,
            ms,
        }
    }
}

/// Scores of a finished design.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialEvaluation {
    /// min over SRs of [log₂(1+Γ_s) − log₂(1+φ_g)]⁺.
    pub certified_bps: f64,
    /// `certified_bps`, except that a non-robust design breaking primary QoS
    /// on the true channels scores 0.
    pub objective_bps: f64,
    /// Minimum SR secrecy against the drawn eavesdropper channels.
    pub sampled_secrecy_bps: f64,
    pub primary_margin_bps: f64,
    pub true_margin_bps: f64,
    /// Smallest per-group Pr(max Eve SINR ≤ φ_g).
    pub outage_secondary: f64,
    /// Pr(max primary Eve SINR ≤ β).
    pub outage_primary: f64,
}

fn primary_margin(sinr: &[f64], beta: f64, cfg: &SystemConfig) -> f64 {
    let eve = (1.0 + beta).log2();
    sinr.iter()
        .zip(&cfg.min_primary_secrecy)
        .map(|(&g, &r)| (1.0 + g).log2() - eve - r)
        .fold(f64::INFINITY, f64::min)
}

/// Evaluates the final state of a run on channel set `ch`; Monte Carlo parts
/// are seeded by `seed`.
pub fn evaluate_design(
    scheme: Scheme,
    state: &IterateState,
    ch: &ChannelSet,
    cfg: &SystemConfig,
    seed: u64,
) -> Result<TrialEvaluation> {
    let d = &state.design;
    let certified_bps = objective_value(d, ch, cfg, &state.phi)?;
    let sampled_secrecy_bps = secrecy_report(d, ch, cfg)?.min_secondary;
    let wc = worst_case_primary(d, ch, cfg, cfg.mc.worst_case_samples.max(1), seed)?;
    let primary_margin_bps = primary_margin(&wc, state.beta, cfg);
    let true_margin_bps = primary_margin(&sinr_all(d, ch, cfg)?.primary, state.beta, cfg);
    let n = cfg.mc.outage_samples.max(1);
    let mut outage_secondary = f64::INFINITY;
    for g in 0..cfg.n_groups {
        outage_secondary = outage_secondary.min(eve_outage_mc(d, cfg, state.phi[g], EveSide::Group(g), n, seed)?);
    }
    let outage_primary = eve_outage_mc(d, cfg, state.beta, EveSide::Primary, n, seed)?;
    let objective_bps = if scheme == Scheme::NonRobust && true_margin_bps < 0.0 { 0.0 } else { certified_bps };
    Ok(TrialEvaluation {
        certified_bps,
        objective_bps,
        sampled_secrecy_bps,
        primary_margin_bps,
        true_margin_bps,
        outage_secondary,
        outage_primary,
    })
}

/// A persisted design with the scores it was given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub seed: u64,
    pub scheme: Scheme,
    pub sweep: f64,
    pub state: IterateState,
    pub evaluation: TrialEvaluation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub sweep: f64,
    pub scheme: Scheme,
    pub trials: usize,
    /// Trials that returned a design.
    pub feasible: usize,
    pub numerical_failures: usize,
    pub feasibility_rate: f64,
    /// Mean objective over feasible trials.
    pub mean_objective: Option<f64>,
    /// Mean objective with failed trials counted as 0.
    pub mean_objective_zero_filled: f64,
}

/// Empirical CDF points `(x, F(x))` of the per-trial objective.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdfCurve {
    pub scheme: Scheme,
    pub feasible_only: Vec<(f64, f64)>,
    pub zero_filled: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub aggregates: Vec<Aggregate>,
    pub cdf: Vec<CdfCurve>,
    pub audit: Vec<AuditRecord>,
}

impl ExperimentOutput {
    /// Rows closing a run (one per scheme, sweep value and trial).
    pub fn final_rows(&self) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(|r| r.status != RowStatus::Iterate)
    }

    pub fn all_trials_failed(&self) -> bool {
        !self.final_rows().any(|r| r.status.has_design())
    }
}

struct Job {
    sweep_index: usize,
    scheme: Scheme,
    trial: usize,
}

struct JobResult {
    rows: Vec<ResultRow>,
    audit: Option<AuditRecord>,
}

fn run_job(spec: &ExperimentSpec, base: &SystemConfig, job: &Job, opts: &RunOptions) -> Result<JobResult> {
    let v = spec.sweep[job.sweep_index];
    let seed = trial_seed(base.seed, job.trial);
    let cfg = spec.trial_config(base, v, seed)?;
    let ch = draw_channels(&cfg, seed)?;
    let t0 = Instant::now();
    let report = run_scheme(job.scheme, &ch, &cfg, opts)?;
    let mut rows = Vec::new();
    if spec.kind == ExperimentKind::Convergence {
        let last = report.trace.len().saturating_sub(1);
        for (k, &value) in report.trace.iter().enumerate().take(last) {
            let mut row = ResultRow::bare(seed, job.scheme, v, k + 1, RowStatus::Iterate, 0);
            row.objective_bps = Some(value);
            rows.push(row);
        }
    }
    let status = RowStatus::Final(report.status);
    let mut audit = None;
    let mut row = ResultRow::bare(seed, job.scheme, v, report.iterations_used, status, 0);
    if let (true, Some(state)) = (report.status.has_design(), &report.final_state) {
        let e = evaluate_design(job.scheme, state, &ch, &cfg, seed)?;
        row.objective_bps = Some(e.objective_bps);
        row.sampled_secrecy_bps = Some(e.sampled_secrecy_bps);
        row.primary_margin_bps = Some(e.primary_margin_bps);
        row.outage_secondary = Some(e.outage_secondary);
        row.outage_primary = Some(e.outage_primary);
        row.true_margin_bps = Some(e.true_margin_bps);
        audit = Some(AuditRecord { seed, scheme: job.scheme, sweep: v, state: state.clone(), evaluation: e });
    }
    if spec.wall_time {
        row.ms = t0.elapsed().as_millis() as u64;
    }
    rows.push(row);
    Ok(JobResult { rows, audit })
}

fn jobs(spec: &ExperimentSpec) -> Vec<Job> {
    let mut out = Vec::new();
    for sweep_index in 0..spec.sweep.len() {
        for &scheme in &spec.schemes {
            for trial in 0..spec.trials {
                out.push(Job { sweep_index, scheme, trial });
            }
        }
    }
    out
}

fn aggregate(spec: &ExperimentSpec, rows: &[ResultRow]) -> Vec<Aggregate> {
    let mut out = Vec::new();
    for &v in &spec.sweep {
        for &scheme in &spec.schemes {
            let finals: Vec<&ResultRow> = rows
                .iter()
                .filter(|r| r.status != RowStatus::Iterate && r.scheme == scheme && r.sweep == v)
                .collect();
            let feasible: Vec<f64> =
                finals.iter().filter(|r| r.status.has_design()).filter_map(|r| r.objective_bps).collect();
            let trials = finals.len();
            let numerical_failures = finals
                .iter()
                .filter(|r| r.status == RowStatus::Final(AlgorithmStatus::NumericalFailure))
                .count();
            let sum: f64 = feasible.iter().sum();
            out.push(Aggregate {
                sweep: v,
                scheme,
                trials,
                feasible: feasible.len(),
                numerical_failures,
                feasibility_rate: feasible.len() as f64 / trials.max(1) as f64,
                mean_objective: (!feasible.is_empty()).then(|| sum / feasible.len() as f64),
                mean_objective_zero_filled: sum / trials.max(1) as f64,
            });
        }
    }
    out
}

/// Sorted sample and its empirical CDF `(x_(i), i/n)`.
pub fn empirical_cdf(values: &[f64]) -> Vec<(f64, f64)> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.into_iter().enumerate().map(|(i, x)| (x, (i + 1) as f64 / n)).collect()
}

fn cdf_curves(spec: &ExperimentSpec, rows: &[ResultRow]) -> Vec<CdfCurve> {
    spec.schemes
        .iter()
        .map(|&scheme| {
            let finals = rows.iter().filter(|r| r.status != RowStatus::Iterate && r.scheme == scheme);
            let feasible: Vec<f64> = finals.clone().filter(|r| r.status.has_design()).filter_map(|r| r.objective_bps).collect();
            let zero_filled: Vec<f64> =
                finals.map(|r| if r.status.has_design() { r.objective_bps.unwrap_or(0.0) } else { 0.0 }).collect();
            CdfCurve { scheme, feasible_only: empirical_cdf(&feasible), zero_filled: empirical_cdf(&zero_filled) }
        })
        .collect()
}

/// Runs every (sweep value, scheme, trial) job of `spec`. `base.seed` is the
/// master seed.
pub fn run_experiment(spec: &ExperimentSpec, base: &SystemConfig, opts: &RunOptions) -> Result<ExperimentOutput> {
    spec.validate()?;
    let base = validate_config(base.clone())?;
    let jobs = jobs(spec);
    let results = par::map_slice(&jobs, |j| run_job(spec, &base, j, opts));
    let mut rows = Vec::new();
    let mut audit = Vec::new();
    for r in results {
        let r = r?;
        rows.extend(r.rows);
        if let Some(a) = r.audit {
            if audit.len() < AUDIT_LIMIT {
                audit.push(a);
            }
        }
    }
    let aggregates = aggregate(spec, &rows);
    let cdf = if spec.kind == ExperimentKind::Cdf { cdf_curves(spec, &rows) } else { Vec::new() };
    Ok(ExperimentOutput { rows, aggregates, cdf, audit })
}

fn expect_kind(spec: &ExperimentSpec, kind: ExperimentKind) -> Result<()> {
    if spec.kind != kind {
        return domain_err(format!("expected a {} experiment, got {}", kind.as_str(), spec.kind.as_str()));
    }
    Ok(())
}

pub fn run_convergence(spec: &ExperimentSpec, cfg: &SystemConfig) -> Result<ExperimentOutput> {
    expect_kind(spec, ExperimentKind::Convergence)?;
    run_experiment(spec, cfg, &RunOptions::default())
}

pub fn run_power_sweep(spec: &ExperimentSpec, cfg: &SystemConfig) -> Result<ExperimentOutput> {
    expect_kind(spec, ExperimentKind::PowerSweep)?;
    run_experiment(spec, cfg, &RunOptions::default())
}

pub fn run_cdf(spec: &ExperimentSpec, cfg: &SystemConfig) -> Result<ExperimentOutput> {
    expect_kind(spec, ExperimentKind::Cdf)?;
    run_experiment(spec, cfg, &RunOptions::default())
}

/// Writes the main subproblem of the first job, built at its heuristic start,
/// as JSON.
pub fn dump_program(spec: &ExperimentSpec, base: &SystemConfig, path: &Path) -> Result<()> {
    spec.validate()?;
    let seed = trial_seed(base.seed, 0);
    let cfg = spec.trial_config(base, spec.sweep[0], seed)?;
    let ch = draw_channels(&cfg, seed)?;
    let scheme = spec.schemes[0];
    let start = heuristic_start_for(scheme, &ch, &cfg)?;
    let program = build_subproblem_for(scheme, &start, &ch, &cfg)?;
    std::fs::write(path, program.to_json()?)?;
    Ok(())
}

/// Nine significant digits, exponent notation.
pub fn format_float(x: f64) -> String {
    format!("{x:.8e}")
}

fn opt_field(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

pub fn csv_record(r: &ResultRow) -> [String; 11] {
    [
        r.seed.to_string(),
        r.scheme.as_str().to_string(),
        format_float(r.sweep),
        r.iterations.to_string(),
        r.status.as_str().to_string(),
        opt_field(r.objective_bps),
        opt_field(r.sampled_secrecy_bps),
        opt_field(r.primary_margin_bps),
        opt_field(r.outage_secondary),
        opt_field(r.outage_primary),
        r.ms.to_string(),
    ]
}

/// Path of the metadata file written next to `out`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub code_version: String,
    pub experiment: ExperimentSpec,
    pub config: SystemConfig,
    pub aggregates: Vec<Aggregate>,
    pub cdf: Vec<CdfCurve>,
    pub audit: Vec<AuditRecord>,
}

/// Writes the CSV to `path` and the JSON sidecar to [`sidecar_path`].
pub fn emit_results(
    output: &ExperimentOutput,
    spec: &ExperimentSpec,
    cfg: &SystemConfig,
    path: &Path,
) -> Result<()> {
    if output.rows.is_empty() {
        return domain_err("no rows to write");
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for r in &output.rows {
        w.write_record(csv_record(r))?;
    }
    w.flush()?;
    let sidecar = Sidecar {
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        experiment: spec.clone(),
        config: cfg.clone(),
        aggregates: output.aggregates.clone(),
        cdf: output.cdf.clone(),
        audit: output.audit.clone(),
    };
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}

pub fn read_sidecar(path: &Path) -> Result<Sidecar> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// Parses a CSV written by [`emit_results`] back into rows (the true-channel
/// margin is not stored and comes back as `None`).
pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let mut rd = csv::Reader::from_path(path)?;
    if rd.headers()?.iter().ne(CSV_HEADER) {
        return Err(Error::Domain("unexpected CSV header".into()));
    }
    let bad = |what: &str| Error::Domain(format!("malformed {what} field"));
    let opt = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| bad("float"))
        }
    };
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let f = |i: usize| rec.get(i).unwrap_or("");
        rows.push(ResultRow {
            seed: f(0).parse().map_err(|_| bad("seed"))?,
            scheme: Scheme::parse(f(1)).ok_or_else(|| bad("scheme"))?,
            sweep: f(2).parse().map_err(|_| bad("sweep"))?,
            iterations: f(3).parse().map_err(|_| bad("iterations"))?,
            status: RowStatus::parse(f(4)).ok_or_else(|| bad("status"))?,
            objective_bps: opt(f(5))?,
            sampled_secrecy_bps: opt(f(6))?,
            primary_margin_bps: opt(f(7))?,
            outage_secondary: opt(f(8))?,
            outage_primary: opt(f(9))?,
            true_margin_bps: None,
            ms: f(10).parse().map_err(|_| bad("ms"))?,
        });
    }
    Ok(rows)
}
