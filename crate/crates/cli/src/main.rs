//! `rbacv`: check RBAC policies against constraint files, emit prover
//! inputs, and run the oracle differential suite.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rbacv_core::differential::{
    engine_status, mutant_checker, run_differential, Checker, Disagreement,
};
use rbacv_core::dsl::{print_constraint, print_policy};
use rbacv_core::prover::{
    emit_goal, run_external, status_of, EmissionMode, OutcomeKind, RunnerConfig, PROVER_PATH_ENV,
};
use rbacv_core::report::Report;
use rbacv_core::{
    check_all, parse_constraints, parse_policy, CheckOptions, ClosedPolicy, ConstraintSpec, Status,
};

const DEFAULT_WITNESS_LIMIT: usize = 10;

#[derive(Parser)]
#[command(
    name = "rbacv",
    version,
    about = "Verify role-based access-control policies against constraints"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    /// Report every violating tuple instead of at most 10 per constraint.
    #[arg(long, global = true)]
    all_witnesses: bool,

    /// Leave timing out of reports so identical runs print identical bytes.
    #[arg(long, global = true)]
    no_timing: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Enumerate,
    Complete,
}

impl From<Mode> for EmissionMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Enumerate => EmissionMode::Enumerate,
            Mode::Complete => EmissionMode::Complete,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every constraint against the policy.
    Check {
        policy: PathBuf,
        constraints: PathBuf,
        /// Also run each constraint through an external prover in complete
        /// mode and report its verdict next to the engine's.
        #[arg(long)]
        via_prover: bool,
        /// Prover binary; defaults to $RBACV_PROVER_PATH.
        #[arg(long, requires = "via_prover")]
        prover: Option<PathBuf>,
        /// Per-constraint prover timeout in seconds.
        #[arg(long, default_value_t = 60, requires = "via_prover")]
        prover_timeout: u64,
    },
    /// Write one prover input file per constraint plus manifest.tsv.
    Emit {
        policy: PathBuf,
        constraints: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Complete)]
        mode: Mode,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare every family check with the formula oracle on random policies.
    OracleDiff {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u64).range(1..))]
        cases: u64,
        /// Swap in a deliberately broken checker.
        #[arg(long, hide = true)]
        mutant: bool,
    },
}

/// An error that prevents a full report; exits with status 2.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))
}

fn load(
    policy_path: &Path,
    constraints_path: &Path,
) -> Result<(ClosedPolicy, Vec<ConstraintSpec>), InputError> {
    let policy_text = read(policy_path)?;
    let policy = parse_policy(&policy_text)
        .map_err(|e| InputError(e.render(&policy_path.display().to_string())))?;
    let constraint_text = read(constraints_path)?;
    let constraints = parse_constraints(&constraint_text, &policy)
        .map_err(|e| InputError(e.render(&constraints_path.display().to_string())))?;
    Ok((policy.close(), constraints))
}

#[derive(Serialize)]
struct ProverRun {
    constraint: usize,
    outcome: OutcomeKind,
    status: Option<Status>,
    agrees: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

#[derive(Serialize)]
struct CheckOutput<'a> {
    #[serde(flatten)]
    report: &'a Report,
    #[serde(skip_serializing_if = "Option::is_none")]
    prover: Option<Vec<ProverRun>>,
}

fn prover_runs(
    p: &ClosedPolicy,
    cs: &[ConstraintSpec],
    report: &Report,
    runner: &RunnerConfig,
) -> Result<Vec<ProverRun>, InputError> {
    let mut runs = Vec::new();
    for (i, (c, r)) in cs.iter().zip(&report.results).enumerate() {
        let e = emit_goal(c, p, EmissionMode::Complete);
        let out = run_external(&e, runner)?;
        let status = status_of(out.kind, e.polarity);
        runs.push(ProverRun {
            constraint: i,
            outcome: out.kind,
            status,
            agrees: status.map(|s| s == r.status),
            note: out.note,
        });
    }
    Ok(runs)
}

fn cmd_check(
    cli: &Cli,
    policy: &Path,
    constraints: &Path,
    prover: Option<RunnerConfig>,
) -> Result<ExitCode, InputError> {
    let start = Instant::now();
    let (p, cs) = load(policy, constraints)?;
    let opts = CheckOptions {
        exhaustive: cli.all_witnesses,
    };
    let results = check_all(&p, &cs, opts)?;
    let elapsed = (!cli.no_timing).then(|| start.elapsed().as_millis() as u64);
    let mut report = Report::new(&p, results, elapsed);
    if !cli.all_witnesses {
        report.truncate_witnesses(DEFAULT_WITNESS_LIMIT);
    }
    let runs = match &prover {
        Some(runner) => Some(prover_runs(&p, &cs, &report, runner)?),
        None => None,
    };

    match cli.format {
        Format::Json => {
            let out = CheckOutput {
                report: &report,
                prover: runs,
            };
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        Format::Text => {
            print!("{}", report.render_text());
            for run in runs.iter().flatten() {
                let verdict = match (run.status, run.agrees) {
                    (Some(s), Some(true)) => format!("{s}, agrees"),
                    (Some(s), _) => format!("{s}, DISAGREES with engine"),
                    (None, _) => "no verdict".to_string(),
                };
                let note = run
                    .note
                    .as_deref()
                    .map(|n| format!(" ({n})"))
                    .unwrap_or_default();
                println!(
                    "prover C{} {}: {:?} -> {verdict}{note}",
                    cs[run.constraint].family().number(),
                    print_constraint(&cs[run.constraint]),
                    run.outcome
                );
            }
        }
    }
    Ok(if report.overall == Status::Satisfied {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_emit(
    policy: &Path,
    constraints: &Path,
    mode: EmissionMode,
    out: &Path,
) -> Result<ExitCode, InputError> {
    let (p, cs) = load(policy, constraints)?;
    fs::create_dir_all(out)
        .map_err(|e| InputError(format!("cannot create {}: {e}", out.display())))?;
    let mut manifest = String::from("file\tconstraint\tpolarity\n");
    for (i, c) in cs.iter().enumerate() {
        let name = format!("{:02}-{}.in", i + 1, c.family().keyword());
        let e = emit_goal(c, &p, mode);
        fs::write(out.join(&name), e.render())?;
        manifest.push_str(&format!(
            "{name}\t{}\t{}\n",
            print_constraint(c),
            e.polarity
        ));
    }
    fs::write(out.join("manifest.tsv"), manifest)?;
    println!("wrote {} file(s) to {}", cs.len(), out.display());
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct Reproducer {
    case: usize,
    policy: String,
    constraint: String,
    engine: Status,
    oracle: Status,
}

impl From<&Disagreement> for Reproducer {
    fn from(d: &Disagreement) -> Self {
        Reproducer {
            case: d.case,
            policy: print_policy(&d.policy),
            constraint: print_constraint(&d.constraint),
            engine: d.engine,
            oracle: d.oracle,
        }
    }
}

#[derive(Serialize)]
struct DiffOutput {
    seed: u64,
    cases: usize,
    checks: usize,
    skipped: usize,
    disagreements: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    minimized: Option<Reproducer>,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<u64>,
}

fn cmd_oracle_diff(
    cli: &Cli,
    seed: u64,
    cases: usize,
    mutant: bool,
) -> Result<ExitCode, InputError> {
    let checker: &Checker = if mutant {
        &mutant_checker
    } else {
        &engine_status
    };
    let start = Instant::now();
    let r = run_differential(seed, cases, checker);
    let out = DiffOutput {
        seed,
        cases: r.cases,
        checks: r.checks,
        skipped: r.skipped,
        disagreements: r.disagreements.len(),
        minimized: r.minimized.as_ref().map(Reproducer::from),
        elapsed_ms: (!cli.no_timing).then(|| start.elapsed().as_millis() as u64),
    };
    match cli.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&out)?),
        Format::Text => {
            println!(
                "seed {seed}: {} cases, {} checks, {} skipped, {} disagreement(s)",
                out.cases, out.checks, out.skipped, out.disagreements
            );
            if let Some(m) = &out.minimized {
                println!(
                    "minimized reproducer (case {}): engine {} but oracle {}",
                    m.case, m.engine, m.oracle
                );
                print!("{}", m.policy);
                println!("{}", m.constraint);
            }
            if let Some(ms) = out.elapsed_ms {
                println!("elapsed: {ms} ms");
            }
        }
    }
    Ok(if r.agreed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn runner(prover: &Option<PathBuf>, timeout: u64) -> Result<RunnerConfig, InputError> {
    let timeout = Duration::from_secs(timeout);
    match prover {
        Some(path) => Ok(RunnerConfig::new(path, timeout)),
        None => RunnerConfig::from_env(timeout)
            .ok_or_else(|| InputError(format!("--via-prover needs --prover or {PROVER_PATH_ENV}"))),
    }
}

fn run(cli: &Cli) -> Result<ExitCode, InputError> {
    match &cli.command {
        Command::Check {
            policy,
            constraints,
            via_prover,
            prover,
            prover_timeout,
        } => {
            let runner = if *via_prover {
                Some(runner(prover, *prover_timeout)?)
            } else {
                None
            };
            cmd_check(cli, policy, constraints, runner)
        }
        Command::Emit {
            policy,
            constraints,
            mode,
            out,
        } => cmd_emit(policy, constraints, (*mode).into(), out),
        Command::OracleDiff {
            seed,
            cases,
            mutant,
        } => cmd_oracle_diff(cli, *seed, *cases as usize, *mutant),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
