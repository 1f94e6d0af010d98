//! The `coalform` command line.
//!
//! Exit codes are stable: see [`exit`]. The budget for exhaustive work comes
//! from `--budget`, then the `COALFORM_BUDGET` environment variable, then
//! [`DEFAULT_BUDGET`].

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use coalform_core::{build_family, enumerate_partitions, Mode, SolverConfig};
use serde::Serialize;

use crate::report::{render_text, Report};
use crate::spec::{parse_spec, GameSpec};
use crate::{bundled, BUNDLED};

pub mod exit {
    pub const OK: u8 = 0;
    /// A validation check failed.
    pub const CHECK_FAILED: u8 = 1;
    pub const USAGE: u8 = 2;
    /// The spec could not be parsed or validated.
    pub const BAD_SPEC: u8 = 3;
    /// A member could not be solved, usually because of the budget.
    pub const SOLVER: u8 = 4;
    pub const IO: u8 = 5;
}

pub const DEFAULT_BUDGET: u128 = 1_000_000;
pub const BUDGET_ENV: &str = "COALFORM_BUDGET";

#[derive(Debug, Parser)]
#[command(
    name = "coalform",
    version,
    about = "Coalition-structure formation games: partitions, equilibria, nested families"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the partitions of n players with blocks of at most K.
    Partitions {
        n: usize,
        k: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Check formation-rule axioms and nesting.
    Validate {
        spec: String,
        #[command(flatten)]
        game: GameArgs,
        #[arg(long)]
        budget: Option<u128>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Find equilibria for each K of the spec.
    Solve {
        spec: String,
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Nesting checks and equilibria across the whole family.
    Family {
        spec: String,
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// List the bundled specs, print one, or write them to a directory.
    Examples {
        name: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct GameArgs {
    /// Solve a single K instead of the spec's range.
    #[arg(long, conflicts_with = "k_range")]
    k: Option<usize>,
    /// Range of K, written `A..B` (inclusive).
    #[arg(long, value_parser = parse_range)]
    k_range: Option<(usize, usize)>,
    /// Bonus for every player when the spec's designated partition forms.
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<f64>,
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Weak)]
    mode: ModeArg,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Largest support tried per player; 1 means pure profiles only.
    #[arg(long, default_value_t = 2)]
    max_support: usize,
    #[arg(long)]
    budget: Option<u128>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Weak,
    Strict,
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, got `{s}`"))?;
    let a = a
        .trim()
        .parse()
        .map_err(|_| format!("bad lower bound in `{s}`"))?;
    let b = b
        .trim()
        .trim_start_matches('=')
        .parse()
        .map_err(|_| format!("bad upper bound in `{s}`"))?;
    Ok((a, b))
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

/// Runs the command line; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                exit::USAGE
            } else {
                let _ = write!(out, "{text}");
                exit::OK
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "coalform: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<u8, Failure> {
    match command {
        Command::Partitions { n, k, format } => partitions(n, k, format, out),
        Command::Validate {
            spec,
            game,
            budget,
            format,
        } => {
            let spec = load(&spec, &game)?;
            let budget = budget_from(budget)?;
            let def = spec.definition().map_err(bad_spec)?;
            let ks = family_range(&spec, &game)?;
            let family =
                build_family(&def, ks).map_err(|e| Failure::new(exit::BAD_SPEC, e.to_string()))?;
            let report = Report::validate(&spec, &family, budget, 1e-9);
            emit(&report, format, out)?;
            let errored = report.members.iter().any(|m| m.error.is_some());
            Ok(if !report.checks_passed() || errored {
                exit::CHECK_FAILED
            } else {
                exit::OK
            })
        }
        Command::Solve { spec, game, solver } => {
            let spec = load(&spec, &game)?;
            let def = spec.definition().map_err(bad_spec)?;
            let ks: Vec<usize> = match (game.k, game.k_range) {
                (Some(k), _) => vec![k],
                (None, Some((a, b))) => (a..=b).collect(),
                (None, None) => spec.solve_range().map_err(bad_spec)?.collect(),
            };
            let (config, mode) = solver_config(&solver)?;
            let report = with_threads(solver.threads, || {
                Report::solve(&spec, &def, &ks, &config, mode)
            })?;
            emit(&report, solver.format, out)?;
            Ok(solve_code(&report))
        }
        Command::Family { spec, game, solver } => {
            let spec = load(&spec, &game)?;
            let def = spec.definition().map_err(bad_spec)?;
            let ks = family_range(&spec, &game)?;
            let family =
                build_family(&def, ks).map_err(|e| Failure::new(exit::BAD_SPEC, e.to_string()))?;
            let (config, mode) = solver_config(&solver)?;
            let report = with_threads(solver.threads, || {
                Report::family(&spec, &family, &config, mode)
            })?;
            emit(&report, solver.format, out)?;
            Ok(solve_code(&report))
        }
        Command::Examples { name, out: dir } => examples(name.as_deref(), dir.as_deref(), out),
    }
}

fn solve_code(report: &Report) -> u8 {
    if report.members.iter().any(|m| m.error.is_some()) {
        exit::SOLVER
    } else {
        exit::OK
    }
}

fn bad_spec(e: crate::SpecError) -> Failure {
    Failure::new(exit::BAD_SPEC, e.to_string())
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure::new(exit::IO, e.to_string())
}

/// Reads a spec from a path, falling back to a bundled spec of that name,
/// and applies the K and epsilon overrides.
fn load(source: &str, args: &GameArgs) -> Result<GameSpec, Failure> {
    let path = Path::new(source);
    let text = if path.exists() {
        std::fs::read_to_string(path)
            .map_err(|e| Failure::new(exit::IO, format!("{source}: {e}")))?
    } else if let Some(b) = bundled(source) {
        b.text.to_string()
    } else {
        return Err(Failure::new(
            exit::IO,
            format!("{source}: no such file or bundled spec"),
        ));
    };
    let mut spec =
        parse_spec(&text).map_err(|e| Failure::new(exit::BAD_SPEC, format!("{source}: {e}")))?;
    if let Some(k) = args.k {
        spec.k = Some(k);
        spec.k_range = None;
    }
    if let Some((a, b)) = args.k_range {
        spec.k = None;
        spec.k_range = Some([a, b]);
    }
    if let Some(eps) = args.epsilon {
        spec.set_epsilon(eps);
    }
    spec.definition()
        .map_err(|e| Failure::new(exit::BAD_SPEC, format!("{source}: {e}")))?;
    Ok(spec)
}

fn family_range(
    spec: &GameSpec,
    args: &GameArgs,
) -> Result<std::ops::RangeInclusive<usize>, Failure> {
    match args.k {
        Some(k) => Ok(k..=k),
        None => spec.family_range().map_err(bad_spec),
    }
}

fn budget_from(flag: Option<u128>) -> Result<u128, Failure> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::new(exit::USAGE, format!("{BUDGET_ENV}: `{v}` is not a count"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn solver_config(args: &SolverArgs) -> Result<(SolverConfig, Mode), Failure> {
    if !(args.tol > 0.0 && args.tol.is_finite()) {
        return Err(Failure::new(
            exit::USAGE,
            format!("--tol must be positive, got {}", args.tol),
        ));
    }
    if args.max_support == 0 {
        return Err(Failure::new(
            exit::USAGE,
            "--max-support must be at least 1",
        ));
    }
    if args.threads == 0 {
        return Err(Failure::new(exit::USAGE, "--threads must be at least 1"));
    }
    let config = SolverConfig {
        tol: args.tol,
        budget: budget_from(args.budget)?,
        max_support: args.max_support,
        parallel: args.threads > 1,
    };
    let mode = match args.mode {
        ModeArg::Weak => Mode::Weak,
        ModeArg::Strict => Mode::Strict,
    };
    Ok((config, mode))
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    if threads <= 1 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::new(exit::USAGE, format!("cannot start {threads} threads: {e}")))?;
    Ok(pool.install(f))
}

fn emit(report: &Report, format: Format, out: &mut dyn Write) -> Result<(), Failure> {
    match format {
        Format::Text => write!(out, "{}", render_text(report)),
        Format::Json => writeln!(out, "{}", report.to_json()),
    }
    .map_err(io_failure)
}

#[derive(Serialize)]
struct PartitionList {
    n: usize,
    k: usize,
    count: usize,
    partitions: Vec<String>,
}

fn partitions(n: usize, k: usize, format: Format, out: &mut dyn Write) -> Result<u8, Failure> {
    let family =
        enumerate_partitions(n, k).map_err(|e| Failure::new(exit::USAGE, e.to_string()))?;
    let list = PartitionList {
        n,
        k,
        count: family.len(),
        partitions: family.iter().map(ToString::to_string).collect(),
    };
    match format {
        Format::Text => {
            for p in &list.partitions {
                writeln!(out, "{p}").map_err(io_failure)?;
            }
            writeln!(out, "count={}", list.count).map_err(io_failure)?;
        }
        Format::Json => {
            let text = serde_json::to_string_pretty(&list).expect("plain data serializes");
            writeln!(out, "{text}").map_err(io_failure)?;
        }
    }
    Ok(exit::OK)
}

fn examples(name: Option<&str>, dir: Option<&Path>, out: &mut dyn Write) -> Result<u8, Failure> {
    let chosen: Vec<_> = match name {
        Some(n) => vec![bundled(n)
            .ok_or_else(|| Failure::new(exit::USAGE, format!("no bundled spec `{n}`")))?],
        None => BUNDLED.iter().collect(),
    };
    match (dir, name) {
        (Some(dir), _) => {
            std::fs::create_dir_all(dir).map_err(io_failure)?;
            for b in chosen {
                let path = dir.join(b.file_name());
                std::fs::write(&path, b.text).map_err(io_failure)?;
                writeln!(out, "{}", path.display()).map_err(io_failure)?;
            }
        }
        (None, Some(_)) => write!(out, "{}", chosen[0].text).map_err(io_failure)?,
        (None, None) => {
            for b in chosen {
                let title = b.spec().name.unwrap_or_default();
                writeln!(out, "{:<22} {title}", b.file_name()).map_err(io_failure)?;
            }
        }
    }
    Ok(exit::OK)
}
