//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on invalid input (bad flags, malformed files,
//! invalid parameters, solver failures), 2 on I/O failures.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{run_bench, summary_path, verify, BenchConfig, SolverSpec};
use crate::descent::{EpsilonPolicy, Initialization, SolveConfig, Variant};
use crate::error::{BenchError, IoError};
use crate::generators::{generate, GameFamily, GameSpec, PRNG_NAME};
use crate::io::{read_json, read_matrix, read_profile, write_matrix, write_profile, write_text};
use crate::lp::LpForm;
use crate::ogda::{OgdaConfig, StepSchedule};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_IO: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "dualgap", version, about = "Approximate equilibria of zero-sum matrix games by descent on the duality gap")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a seeded random game and write it as CSV or JSON.
    Generate(GenerateArgs),
    /// Solve a game, writing the trace and the final profile.
    Solve(SolveArgs),
    /// Run a benchmark described by a JSON config.
    Bench(BenchArgs),
    /// Check whether a profile is a delta-equilibrium of a game.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    Uniform,
    Gaussian,
    LowRank,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "uniform")]
    family: FamilyArg,
    #[arg(long)]
    rows: usize,
    /// Defaults to a square game.
    #[arg(long)]
    cols: Option<usize>,
    /// Rank of the low-rank family.
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; `.json` selects the JSON layout, anything else CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariantArg {
    Plain,
    DecayDelta,
    DecayDeltaRho,
    FixedSupport,
    Ogda,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InitArg {
    Pure,
    Uniform,
}

impl From<InitArg> for Initialization {
    fn from(arg: InitArg) -> Self {
        match arg {
            InitArg::Pure => Initialization::PureFirst,
            InitArg::Uniform => Initialization::Uniform,
        }
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Game as CSV or JSON.
    #[arg(long)]
    matrix: PathBuf,
    /// Rescale arbitrary finite payoffs onto [0, 1].
    #[arg(long)]
    normalize: bool,
    /// Solver config as JSON (a SolveConfig); flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for trace.csv, trace.json and profile.json.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    /// fixed-half-rho, ternary-then-decay, exact, or a constant in (0, 1].
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long, value_enum)]
    init: Option<InitArg>,
    #[arg(long)]
    lp_tolerance: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Use the joint direction LP instead of the two per-player programs.
    #[arg(long)]
    joint_lp: bool,
    /// OGDA step size.
    #[arg(long)]
    alpha: Option<f64>,
    /// OGDA with alpha / sqrt(t + 1).
    #[arg(long)]
    sqrt_schedule: bool,
    /// Accepted for symmetry with the other subcommands; solves are deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the output directory of the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replaces the seed of every game spec.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    normalize: bool,
    /// Profile JSON `{"row": [..], "col": [..]}`.
    #[arg(long)]
    profile: PathBuf,
    #[arg(long)]
    delta: f64,
}

/// Failure of a subcommand, already classified by exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn invalid(message: impl ToString) -> Self {
        Self {
            code: EXIT_INVALID,
            message: message.to_string(),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        let code = match e {
            IoError::Io { .. } => EXIT_IO,
            IoError::Parse { .. } | IoError::Game(_) => EXIT_INVALID,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Config(_) => Failure::invalid(e),
            BenchError::Io(io) => io.into(),
        }
    }
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn cli_main(args: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Generate(a) => run_generate(a),
        Command::Solve(a) => run_solve(a),
        Command::Bench(a) => run_bench_command(a),
        Command::Verify(a) => run_verify(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn run_generate(a: GenerateArgs) -> Result<(), Failure> {
    let family = match (a.family, a.rank) {
        (FamilyArg::Uniform, None) => GameFamily::Uniform,
        (FamilyArg::Gaussian, None) => GameFamily::Gaussian,
        (FamilyArg::LowRank, Some(rank)) => GameFamily::LowRank { rank },
        (FamilyArg::LowRank, None) => return Err(Failure::invalid("--family low-rank needs --rank")),
        (_, Some(_)) => return Err(Failure::invalid("--rank only applies to --family low-rank")),
    };
    let spec = GameSpec {
        family,
        rows: a.rows,
        cols: a.cols.unwrap_or(a.rows),
        seed: a.seed,
    };
    let r = generate(&spec).map_err(Failure::invalid)?;
    write_matrix(&a.out, &r)?;
    println!("wrote {} to {} ({PRNG_NAME})", spec.describe(), a.out.display());
    Ok(())
}

fn parse_epsilon(text: &str) -> Result<EpsilonPolicy, Failure> {
    Ok(match text {
        "fixed-half-rho" => EpsilonPolicy::FixedHalfRho,
        "ternary-then-decay" => EpsilonPolicy::TernaryThenDecay,
        "exact" => EpsilonPolicy::ExactLineMin,
        other => EpsilonPolicy::Constant(
            other
                .parse()
                .map_err(|_| Failure::invalid(format!("unknown epsilon policy `{other}`")))?,
        ),
    })
}

fn descent_config(a: &SolveArgs) -> Result<SolveConfig, Failure> {
    let mut cfg = match &a.config {
        Some(path) => read_json::<SolveConfig>(path)?,
        None => SolveConfig::default(),
    };
    if let Some(v) = a.variant {
        cfg.variant = match v {
            VariantArg::Plain => Variant::Plain,
            VariantArg::DecayDelta => Variant::DecayDelta,
            VariantArg::DecayDeltaRho => Variant::DecayDeltaRho,
            VariantArg::FixedSupport => {
                // the practical schedule unless told otherwise
                if a.epsilon.is_none() && a.config.is_none() {
                    cfg.epsilon_policy = EpsilonPolicy::TernaryThenDecay;
                }
                Variant::FixedSupport { k: a.k.unwrap_or(100) }
            }
            VariantArg::Ogda => unreachable!("handled by the caller"),
        };
    }
    if let (Some(k), Variant::FixedSupport { .. }) = (a.k, cfg.variant) {
        cfg.variant = Variant::FixedSupport { k };
    } else if a.k.is_some() {
        return Err(Failure::invalid("--k only applies to --variant fixed-support"));
    }
    if let Some(d) = a.delta {
        cfg.delta = d;
    }
    if let Some(rho) = a.rho {
        cfg.rho = rho;
    }
    if let Some(eps) = &a.epsilon {
        cfg.epsilon_policy = parse_epsilon(eps)?;
    }
    if let Some(init) = a.init {
        cfg.initialization = init.into();
    }
    if let Some(tol) = a.lp_tolerance {
        cfg.lp_tolerance = tol;
    }
    if a.max_iters.is_some() {
        cfg.max_iterations = a.max_iters;
    }
    if a.joint_lp {
        cfg.lp_form = LpForm::Joint;
    }
    cfg.validate().map_err(Failure::invalid)?;
    Ok(cfg)
}

fn ogda_config(a: &SolveArgs) -> Result<OgdaConfig, Failure> {
    let mut cfg = match &a.config {
        Some(path) => read_json::<OgdaConfig>(path)?,
        None => OgdaConfig::default(),
    };
    if let Some(d) = a.delta {
        cfg.delta = d;
    }
    if let Some(alpha) = a.alpha {
        cfg.alpha = alpha;
    }
    if let Some(n) = a.max_iters {
        cfg.max_iterations = n;
    }
    if let Some(init) = a.init {
        cfg.initialization = init.into();
    }
    if a.sqrt_schedule {
        cfg.schedule = StepSchedule::InverseSqrt;
    }
    cfg.validate().map_err(Failure::invalid)?;
    Ok(cfg)
}

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|source| {
        Failure::from(IoError::Io {
            path: dir.display().to_string(),
            source,
        })
    })
}

fn run_solve(a: SolveArgs) -> Result<(), Failure> {
    let solver = if matches!(a.variant, Some(VariantArg::Ogda)) {
        SolverSpec::Ogda {
            name: None,
            config: ogda_config(&a)?,
        }
    } else {
        SolverSpec::Descent {
            name: None,
            config: descent_config(&a)?,
        }
    };
    let r = read_matrix(&a.matrix, a.normalize)?;
    let (z, trace) = solver.run(&r).map_err(Failure::invalid)?;
    ensure_dir(&a.out)?;
    write_text(&a.out.join("trace.csv"), &trace.to_csv_string())?;
    write_text(&a.out.join("trace.json"), &trace.to_json())?;
    write_profile(&a.out.join("profile.json"), &z)?;
    println!(
        "{}: {:?} after {} iterations, gap {:e}",
        solver.name(),
        trace.outcome,
        trace.len(),
        trace.final_gap
    );
    Ok(())
}

fn run_bench_command(a: BenchArgs) -> Result<(), Failure> {
    let mut config: BenchConfig = read_json(&a.config)?;
    if let Some(out) = a.out {
        config.out_dir = out;
    }
    if let Some(seed) = a.seed {
        config.specs.iter_mut().for_each(|s| s.seed = seed);
    }
    let report = run_bench(&config)?;
    print!("{}", report.summary_csv());
    let mut io_failure = false;
    for cell in report.failed_cells() {
        eprintln!(
            "cell {} / {} / rep {} failed: {}",
            cell.spec.describe(),
            cell.solver,
            cell.repetition,
            cell.error.as_deref().unwrap_or_default()
        );
        io_failure |= cell.outcome.is_some();
    }
    eprintln!("summary written to {}", summary_path(&config.out_dir).display());
    let any_failed = report.failed_cells().next().is_some();
    if !any_failed {
        Ok(())
    } else if io_failure {
        // a cell that solved but could not write its trace
        Err(Failure {
            code: EXIT_IO,
            message: "some trace files could not be written".into(),
        })
    } else {
        Err(Failure::invalid("some cells failed"))
    }
}

fn run_verify(a: VerifyArgs) -> Result<(), Failure> {
    if !(a.delta >= 0.0) {
        return Err(Failure::invalid(format!("delta = {} must be non-negative", a.delta)));
    }
    let r = read_matrix(&a.matrix, a.normalize)?;
    let z = read_profile(&a.profile)?;
    let verdict = verify(&r, &z, a.delta).map_err(Failure::invalid)?;
    println!("{}", serde_json::to_string(&verdict).expect("verdicts serialize"));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> i32 {
        let args: Vec<String> = std::iter::once("dualgap").chain(args.iter().copied()).map(String::from).collect();
        cli_main(&args)
    }

    #[test]
    fn unknown_flags_and_missing_arguments_are_invalid() {
        assert_eq!(run(&["solve", "--bogus"]), EXIT_INVALID);
        assert_eq!(run(&["frobnicate"]), EXIT_INVALID);
        assert_eq!(run(&[]), EXIT_INVALID);
        assert_eq!(run(&["--help"]), EXIT_OK);
    }

    #[test]
    fn epsilon_names() {
        assert_eq!(parse_epsilon("exact").unwrap(), EpsilonPolicy::ExactLineMin);
        assert_eq!(parse_epsilon("0.3").unwrap(), EpsilonPolicy::Constant(0.3));
        assert!(parse_epsilon("fast").is_err());
    }

    #[test]
    fn low_rank_needs_a_feasible_rank() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("g.csv");
        let out = out.to_str().unwrap();
        assert_eq!(run(&["generate", "--family", "low-rank", "--rows", "5", "--rank", "6", "--out", out]), EXIT_INVALID);
        assert_eq!(run(&["generate", "--family", "low-rank", "--rows", "5", "--rank", "2", "--out", out]), EXIT_OK);
    }

    #[test]
    fn missing_matrix_is_an_io_failure() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("o");
        assert_eq!(
            run(&["solve", "--matrix", "/nonexistent/game.csv", "--out", out.to_str().unwrap()]),
            EXIT_IO
        );
    }
}
