use clap::{Parser, Subcommand, ValueEnum};
use secbeam::harness::{dump_program, emit_results, run_experiment, ExperimentKind, ExperimentSpec};
use secbeam::sca::{RunOptions, Scheme};
use secbeam::scenario::SystemConfig;
use secbeam::Error;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_CONFIG: u8 = 2;
const EXIT_ALL_FAILED: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "secbeam", version, about = "Robust secure beamforming experiments for cognitive radio downlinks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Objective per iteration for several antenna counts.
    Convergence(Args),
    /// Secrecy rate versus secondary transmit power.
    Sweep(Args),
    /// Distribution of the secrecy rate over channel draws.
    Cdf(Args),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SchemeArg {
    Proposed,
    #[value(name = "no_jn")]
    NoJn,
    #[value(name = "non_robust")]
    NonRobust,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Proposed => Scheme::Proposed,
            SchemeArg::NoJn => Scheme::NoJn,
            SchemeArg::NonRobust => Scheme::NonRobust,
        }
    }
}

#[derive(clap::Args, Debug)]
struct Args {
    /// System configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Master seed; trial i uses seed + i.
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    trials: usize,
    /// CSV output; metadata goes to <out>.json.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_delimiter = ',', value_enum)]
    schemes: Option<Vec<SchemeArg>>,
    /// Antenna counts (convergence) or P_s values in dBm (sweep, cdf).
    #[arg(long, value_delimiter = ',')]
    sweep: Option<Vec<f64>>,
    /// Use R̄_p, P_s and N from the configuration instead of the experiment
    /// defaults.
    #[arg(long)]
    keep_config: bool,
    /// Record per-trial wall time in the ms column.
    #[arg(long)]
    wall_time: bool,
    /// Also write the first subproblem as JSON.
    #[arg(long)]
    dump_program: Option<PathBuf>,
}

fn build_spec(kind: ExperimentKind, a: &Args) -> ExperimentSpec {
    let mut spec = ExperimentSpec::for_kind(kind, a.out.clone());
    if a.keep_config {
        spec = spec.keep_config_settings();
    }
    spec.trials = a.trials;
    if let Some(s) = &a.schemes {
        spec.schemes = s.iter().map(|&x| x.into()).collect();
    }
    if let Some(v) = &a.sweep {
        spec.sweep = v.clone();
    }
    spec.wall_time = a.wall_time;
    spec
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Convergence(a) => (ExperimentKind::Convergence, a),
        Command::Sweep(a) => (ExperimentKind::PowerSweep, a),
        Command::Cdf(a) => (ExperimentKind::Cdf, a),
    };
    let cfg = match SystemConfig::from_json_file(&args.config) {
        Ok(c) => c.with_seed(args.seed),
        Err(e) => {
            eprintln!("error: config {}: {e}", args.config.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let spec = build_spec(kind, args);
    if let Err(e) = spec.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    if let Some(p) = &args.dump_program {
        if let Err(e) = dump_program(&spec, &cfg, p) {
            return report(e);
        }
    }
    let output = match run_experiment(&spec, &cfg, &RunOptions::default()) {
        Ok(o) => o,
        Err(e) => return report(e),
    };
    if let Err(e) = emit_results(&output, &spec, &cfg, &args.out) {
        return report(e);
    }
    for a in &output.aggregates {
        eprintln!(
            "sweep {} {}: {}/{} feasible, mean objective {}",
            a.sweep,
            a.scheme.as_str(),
            a.feasible,
            a.trials,
            a.mean_objective.map(|m| format!("{m:.4} bps/Hz")).unwrap_or_else(|| "n/a".into())
        );
    }
    if output.all_trials_failed() {
        eprintln!("all trials failed");
        return ExitCode::from(EXIT_ALL_FAILED);
    }
    ExitCode::SUCCESS
}

fn report(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        Error::Config(_) => ExitCode::from(EXIT_CONFIG),
        _ => ExitCode::FAILURE,
    }
}
