//! Acceptance run. Prints one `criterion k: PASS|FAIL` line per criterion and
//! exits non-zero if any of them fails.

mod common;

use common::*;
use rand::Rng;
use secbeam::harness::{evaluate_design, TrialEvaluation};
use secbeam::par;
use secbeam::sca::{run_scheme, AlgorithmReport, RunOptions, Scheme};
use secbeam::scenario::{draw_channels, ChannelSet, SystemConfig};
use secbeam::surrogate::*;
use std::process::{Command, ExitCode};
use std::sync::OnceLock;
use std::time::Instant;

const POOL_TRIALS: u64 = 200;
const PAIRED_TRIALS: u64 = 100;
const QUALITY_SEEDS: u64 = 20;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

struct SchemeRun {
    report: AlgorithmReport,
    eval: Option<TrialEvaluation>,
}

impl SchemeRun {
    fn has_design(&self) -> bool {
        self.report.status.has_design()
    }
}

struct Trial {
    seed: u64,
    runs: Vec<SchemeRun>,
}

impl Trial {
    fn get(&self, s: Scheme) -> &SchemeRun {
        &self.runs[SCHEMES.iter().position(|&x| x == s).unwrap()]
    }
}

const SCHEMES: [Scheme; 3] = [Scheme::Proposed, Scheme::NoJn, Scheme::NonRobust];

fn run_trial(cfg: &SystemConfig, seed: u64, schemes: &[Scheme]) -> Trial {
    let cfg = cfg.clone().with_seed(seed);
    let ch: ChannelSet = draw_channels(&cfg, seed).unwrap();
    let runs = schemes
        .iter()
        .map(|&s| {
            let report = run_scheme(s, &ch, &cfg, &RunOptions::default()).unwrap();
            let eval = report.final_state.as_ref().map(|st| evaluate_design(s, st, &ch, &cfg, seed).unwrap());
            SchemeRun { report, eval }
        })
        .collect();
    Trial { seed, runs }
}

fn defaults_at(dbm: f64) -> SystemConfig {
    SystemConfig::paper_defaults().with_st_power_dbm(dbm)
}

/// All three schemes on seeds 1..=200 at P_s = 20 dBm.
fn pool() -> &'static [Trial] {
    static POOL: OnceLock<Vec<Trial>> = OnceLock::new();
    POOL.get_or_init(|| {
        let cfg = defaults_at(20.0);
        par::map_indexed(POOL_TRIALS as usize, |i| run_trial(&cfg, i as u64 + 1, &SCHEMES))
    })
}

fn status_census<'a>(runs: impl Iterator<Item = &'a SchemeRun>) -> String {
    let mut counts: Vec<(&'static str, usize)> = Vec::new();
    for r in runs {
        let s = r.report.status.as_str();
        match counts.iter_mut().find(|c| c.0 == s) {
            Some(c) => c.1 += 1,
            None => counts.push((s, 1)),
        }
    }
    counts.iter().map(|(s, n)| format!("{s}={n}")).collect::<Vec<_>>().join(" ")
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let mut r = rng(101);
    let (mut checks, mut bad) = (0usize, 0usize);
    let mut tally = |ok: bool| {
        checks += 1;
        if !ok {
            bad += 1;
        }
    };
    for k in 0..1000u64 {
        let n = 2 + (k % 7) as usize;
        let cfg = SystemConfig::paper_defaults().with_antennas(n);
        let ch = draw_channels(&cfg, 5000 + k).unwrap();
        let ws = 0.05 + 3.0 * r.random::<f64>();
        let us = 2.0 * r.random::<f64>();
        let st = IterateState {
            design: random_design(&mut r, n, cfg.n_groups, ws, us),
            alpha: vec![1.0; cfg.n_prs],
            phi: vec![0.1; cfg.n_groups],
            beta: 0.5,
            r: 1.0,
            aux: AuxValues::default(),
        };
        let probes: Vec<_> = (0..3).map(|_| random_design(&mut r, n, cfg.n_groups, ws, us)).collect();
        for (g, m) in cfg.srs() {
            let f = build_f_surrogate(&st, g, m, &ch, &cfg).unwrap();
            let at = secondary_sinr(&st.design, &ch, &cfg, g, m).ln_1p();
            tally((f.eval(&st.design.w, &st.design.u_cov) - at).abs() <= 1e-9 * (1.0 + at));
            for p in &probes {
                let v = secondary_sinr(p, &ch, &cfg, g, m).ln_1p();
                tally(f.eval(&p.w, &p.u_cov) <= v + 1e-9 * (1.0 + v));
            }
        }

        let an = 10f64.powf(-3.0 + 6.0 * r.random::<f64>());
        let gain = 10f64.powf(-2.0 + 6.0 * r.random::<f64>());
        let inv = linearize_inverse_alpha(an, gain).unwrap();
        tally((inv.eval(an) - gain / an).abs() <= 1e-9 * gain / an);
        let xn = 1e3 * r.random::<f64>();
        let lt = tangent_log_overestimator(xn).unwrap();
        tally((lt.eval(xn) - xn.ln_1p()).abs() <= 1e-9 * (1.0 + xn.ln_1p()));
        let rn = 10f64.powf(-3.0 + 5.0 * r.random::<f64>());
        let bb = bilinear_inner_bound(rn).unwrap();
        tally((bb.lower.eval(rn) - rn * rn).abs() <= 1e-9 * (1.0 + rn * rn));
        for _ in 0..3 {
            let a = 10f64.powf(-3.0 + 6.0 * r.random::<f64>());
            tally(inv.eval(a) <= gain / a + 1e-9 * (1.0 + gain / a));
            let x = 1e3 * r.random::<f64>();
            tally(lt.eval(x) >= x.ln_1p() - 1e-9 * (1.0 + x.ln_1p()));
            let (beta, theta) = (100.0 * r.random::<f64>(), 100.0 * r.random::<f64>());
            let rr = r.random::<f64>() * (beta * theta).sqrt();
            tally(bb.lower.eval(rr) <= beta * theta + 1e-9 * (1.0 + beta * theta));
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(bad == 0 && secs < 10.0, format!("{bad} violations in {checks} checks over 1000 expansion points, {secs:.1} s"))
}

fn criterion_2() -> Outcome {
    let t0 = Instant::now();
    let mut r = rng(202);
    let (mut worst_beam, mut worst_jn, mut worst_id) = (0f64, 0f64, 0f64);
    let mut ball_violations = 0usize;
    for k in 0..100usize {
        let n = 2 + k % 7;
        let w = random_cvec(&mut r, n, 1.0);
        let f = random_cvec(&mut r, n, 1.0);
        let delta = (r.random::<f64>() * 0.3 * f.norm_squared()).sqrt();
        let exact = (abs_dot(&f, &w) + delta * w.norm()).powi(2);
        let mu = min_certified_mu(|mu, om| build_schur_lmi_beam(&w, &f, delta, mu, om).unwrap(), delta, 4.0 * exact + 1e-9);
        worst_beam = worst_beam.max((mu - exact).abs() / exact);
        for e in ball_samples(&mut r, n, delta, 10_000) {
            if abs_dot(&(&f + e), &w).powi(2) > mu * (1.0 + 1e-12) {
                ball_violations += 1;
            }
        }

        let u = random_psd(&mut r, n, 1 + k % n, 1.0);
        let dj = (0.01 + r.random::<f64>() * 0.29).sqrt() * f.norm();
        let tr = trust_region_max(&u, &f, dj);
        let mu_j = min_certified_mu(|mu, om| build_schur_lmi_jn(&u, &f, dj, mu, om).unwrap(), dj, 4.0 * tr);
        worst_jn = worst_jn.max((mu_j - tr).abs() / tr);
        for e in ball_samples(&mut r, n, dj, 10_000) {
            if quad_form(&u, &(&f + e)) > mu_j * (1.0 + 1e-12) {
                ball_violations += 1;
            }
        }

        if k % 10 == 0 {
            let c = 0.5 + r.random::<f64>();
            let ui = CMat::identity(n, n) * num_complex::Complex64::from(c);
            let want = c * (f.norm() + dj).powi(2);
            let got = min_certified_mu(|mu, om| build_schur_lmi_jn(&ui, &f, dj, mu, om).unwrap(), dj, 4.0 * want);
            worst_id = worst_id.max((got - want).abs() / want);
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    let pass = worst_beam <= 1e-4 && worst_jn <= 1e-4 && worst_id <= 1e-4 && ball_violations == 0 && secs < 60.0;
    outcome(
        pass,
        format!(
            "max rel err beam {worst_beam:.1e}, jamming {worst_jn:.1e}, scaled identity {worst_id:.1e}; \
             {ball_violations} ball-sample violations; {secs:.1} s"
        ),
    )
}

fn criterion_3() -> Outcome {
    let trials = &pool()[..QUALITY_SEEDS as usize];
    let mut with_design = 0;
    let mut violations = Vec::new();
    for t in trials {
        let run = t.get(Scheme::Proposed);
        if run.has_design() {
            with_design += 1;
        }
        let tr = &run.report.trace;
        if tr.windows(2).any(|w| w[1] < w[0] - 1e-6) {
            violations.push(format!("seed {} trace decreases", t.seed));
        }
        if let Some(res) = run.report.carry_forward_residuals.iter().find(|&&x| x > 1e-7) {
            violations.push(format!("seed {} carry-forward residual {res:.1e}", t.seed));
        }
    }
    let census = status_census(trials.iter().map(|t| t.get(Scheme::Proposed)));
    let mut detail = format!("{with_design}/{} draws produced a design ({census})", trials.len());
    if with_design == 0 {
        detail.push_str("; no feasible start, nothing to certify");
    }
    if !violations.is_empty() {
        detail.push_str(&format!("; {}", violations.join(", ")));
    }
    outcome(with_design > 0 && violations.is_empty(), detail)
}

fn criterion_4() -> Outcome {
    let t0 = Instant::now();
    let sizes = [4usize, 6, 8];
    let base = SystemConfig::paper_defaults().with_min_primary_secrecy(2.0).with_st_power_dbm(15.0);
    let jobs: Vec<(usize, u64)> = sizes.iter().flat_map(|&n| (1..=QUALITY_SEEDS).map(move |s| (n, s))).collect();
    let runs = par::map_slice(&jobs, |&(n, seed)| {
        run_trial(&base.clone().with_antennas(n), seed, &[Scheme::Proposed]).runs.pop().unwrap().report
    });
    let mut notes = Vec::new();
    let mut pass = true;
    for (si, &n) in sizes.iter().enumerate() {
        let reps = &runs[si * QUALITY_SEEDS as usize..(si + 1) * QUALITY_SEEDS as usize];
        let mut fractions: Vec<f64> = reps
            .iter()
            .filter(|r| r.status.has_design() && !r.trace.is_empty())
            .map(|r| {
                let last = *r.trace.last().unwrap();
                let early = r.trace[r.trace.len().min(10) - 1];
                if last > 0.0 { early / last } else { 1.0 }
            })
            .collect();
        if fractions.is_empty() {
            pass = false;
            notes.push(format!("N={n}: no converged seed"));
            continue;
        }
        fractions.sort_by(f64::total_cmp);
        let median = fractions[(fractions.len() - 1) / 2];
        pass &= median >= 0.9;
        notes.push(format!("N={n}: {} converged, median fraction at iteration 10 {median:.3}", fractions.len()));
    }
    let mut compared = 0;
    for s in 0..QUALITY_SEEDS as usize {
        let objs: Vec<Option<f64>> =
            (0..sizes.len()).map(|si| runs[si * QUALITY_SEEDS as usize + s].final_objective()).collect();
        for a in 0..sizes.len() {
            for b in a + 1..sizes.len() {
                if let (Some(x), Some(y)) = (objs[a], objs[b]) {
                    compared += 1;
                    if y < x - 1e-3 {
                        pass = false;
                        notes.push(format!("seed {}: N={} gives {y:.4} < N={} {x:.4}", s + 1, sizes[b], sizes[a]));
                    }
                }
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    pass &= secs < 900.0;
    notes.push(format!("{compared} nested-N pairs compared, {secs:.0} s"));
    outcome(pass, notes.join("; "))
}

fn criterion_5() -> Outcome {
    let high = &pool()[..PAIRED_TRIALS as usize];
    let cfg4 = defaults_at(4.0);
    let low = par::map_indexed(PAIRED_TRIALS as usize, |i| run_trial(&cfg4, i as u64 + 1, &[Scheme::NonRobust]));

    let mut robust_designs = 0;
    let mut worst_margin = f64::INFINITY;
    for t in pool() {
        if let Some(e) = &t.get(Scheme::Proposed).eval {
            robust_designs += 1;
            worst_margin = worst_margin.min(e.primary_margin_bps);
        }
    }
    let rate = |runs: Vec<&SchemeRun>| {
        let designs: Vec<&TrialEvaluation> = runs.iter().filter_map(|r| r.eval.as_ref()).collect();
        let violated = designs.iter().filter(|e| e.true_margin_bps < 0.0).count();
        (violated, designs.len())
    };
    let (v20, d20) = rate(high.iter().map(|t| t.get(Scheme::NonRobust)).collect());
    let (v4, d4) = rate(low.iter().map(|t| &t.runs[0]).collect());
    let robust_ok = robust_designs > 0 && worst_margin >= -0.01;
    let trend_ok = d20 > 0 && d4 > 0 && (v20 as f64 / d20 as f64) > (v4 as f64 / d4 as f64);
    let margin = if robust_designs > 0 { format!("{worst_margin:.4}") } else { "n/a".into() };
    outcome(
        robust_ok && trend_ok,
        format!(
            "{robust_designs} robust designs, worst-case primary margin {margin} bps/Hz; \
             non-robust true-channel violations {v20}/{d20} at 20 dBm vs {v4}/{d4} at 4 dBm"
        ),
    )
}

fn criterion_6() -> Outcome {
    let trials = &pool()[..QUALITY_SEEDS as usize];
    let mut met = 0;
    let (mut lo_s, mut lo_p) = (f64::INFINITY, f64::INFINITY);
    for t in trials {
        if let Some(e) = &t.get(Scheme::Proposed).eval {
            lo_s = lo_s.min(e.outage_secondary);
            lo_p = lo_p.min(e.outage_primary);
            if e.outage_secondary >= 0.99 && e.outage_primary >= 0.99 {
                met += 1;
            }
        }
    }
    let fmt = |x: f64| if x.is_finite() { format!("{x:.4}") } else { "n/a".into() };
    outcome(
        met == trials.len(),
        format!(
            "{met}/{} seeds meet both outage targets; lowest secondary {}, primary {}",
            trials.len(),
            fmt(lo_s),
            fmt(lo_p)
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut paired = 0;
    let mut bad = Vec::new();
    for t in pool() {
        let (p, j, n) = (t.get(Scheme::Proposed), t.get(Scheme::NoJn), t.get(Scheme::NonRobust));
        if let (Some(ep), Some(ej), Some(en)) = (&p.eval, &j.eval, &n.eval) {
            paired += 1;
            if ep.certified_bps < ej.certified_bps - 1e-6 || ep.certified_bps < en.objective_bps - 1e-6 {
                bad.push(t.seed);
            }
        }
    }
    let zero_filled = |s: Scheme| {
        let mut v: Vec<f64> = pool().iter().map(|t| t.get(s).eval.as_ref().map_or(0.0, |e| e.certified_bps)).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let (prop, nojn) = (zero_filled(Scheme::Proposed), zero_filled(Scheme::NoJn));
    let q = |v: &[f64]| v[((0.6 * v.len() as f64).ceil() as usize).max(1) - 1];
    let gap = q(&prop) - q(&nojn);
    let census = status_census(pool().iter().flat_map(|t| t.runs.iter()));
    outcome(
        paired > 0 && bad.is_empty() && gap > 0.0,
        format!(
            "{paired}/{} seeds with all schemes converged, ordering violated on {:?}; \
             60th-percentile gap proposed minus no-JN {gap:.4} bps/Hz ({census})",
            pool().len(),
            bad
        ),
    )
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    std::fs::write(&cfg_path, serde_json::to_string(&small_config()).unwrap()).unwrap();
    let mut notes = Vec::new();
    let mut pass = true;
    for (kind, extra) in [("convergence", "4"), ("sweep", "10,20"), ("cdf", "20")] {
        let mut bytes = Vec::new();
        for name in ["a.csv", "b.csv"] {
            let out = dir.path().join(format!("{kind}-{name}"));
            let o = Command::new(env!("CARGO_BIN_EXE_secbeam"))
                .args([kind, "--config", cfg_path.to_str().unwrap(), "--seed", "3", "--trials", "2"])
                .args(["--out", out.to_str().unwrap(), "--sweep", extra, "--keep-config"])
                .args(["--schemes", "proposed,no_jn,non_robust"])
                .output()
                .unwrap();
            let code = o.status.code();
            if code != Some(0) && code != Some(3) {
                pass = false;
                notes.push(format!("{kind} exited {code:?}"));
            }
            bytes.push(std::fs::read(&out).unwrap_or_default());
        }
        let same = !bytes[0].is_empty() && bytes[0] == bytes[1];
        pass &= same;
        notes.push(format!("{kind} {}", if same { "identical" } else { "differs" }));
    }
    outcome(pass, notes.join(", "))
}

fn main() -> ExitCode {
    // `cargo test` passes harness flags; a name filter selects criteria.
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(u32, fn() -> Outcome); 8] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
    ];
    let mut failed = 0;
    for (k, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == &k.to_string()) {
            continue;
        }
        let o = run();
        println!("criterion {k}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {failed} failing");
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
