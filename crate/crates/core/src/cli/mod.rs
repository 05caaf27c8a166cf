//! `invset` command line.
//!
//! Exit codes: 0 success, 2 usage, 3 domain error, 4 resource (budget,
//! interval limit, I/O).

mod commands;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use invset_core::bell::BellError;
use invset_core::cantor::{CantorError, IterateCsvError};
use invset_core::padic::PadicError;
use invset_core::rational::ParseRationalError;
use invset_core::trig::{TrigError, DEFAULT_SEARCH_BUDGET};

pub use output::Format;

/// Published default seed for Monte Carlo runs.
pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_PRECISION: usize = 32;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "invset", version, about = "p-adic invariant-set toolkit: p-adic arithmetic, Cantor sets, dyadic trigonometry, CHSH")]
pub struct Cli {
    /// Emit CSV (manifest as `#` comment lines).
    #[arg(long, global = true, conflicts_with = "json_lines")]
    csv: bool,
    /// Emit one JSON object per line (manifest first).
    #[arg(long, global = true)]
    json_lines: bool,
    /// Write output to a file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// p-adic norm, distance, sum and product.
    Padic(PadicArgs),
    /// The Cantor set C(p): iterates, encoding, membership, distances, dimension.
    #[command(subcommand)]
    Cantor(CantorCmd),
    /// Spherical cosine rule and dyadic admissibility.
    #[command(subcommand)]
    Triangle(TriangleCmd),
    /// CHSH A and A′ with Monte Carlo sub-experiments.
    Chsh(ChshArgs),
    /// Snap a cosine, angle or phase onto Q2(N).
    Snap(SnapArgs),
    /// Parameter sweeps written as CSV.
    Sweep(SweepArgs),
    /// Re-run the command recorded in an output file's manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args, Serialize)]
struct PadicArgs {
    #[arg(value_enum)]
    op: PadicOp,
    /// Rational such as `1/3`, `-50` or `0.25`.
    #[arg(allow_hyphen_values = true)]
    x: String,
    /// Second operand for `dist`, `add` and `mul`.
    #[arg(allow_hyphen_values = true)]
    y: Option<String>,
    #[arg(long)]
    p: u64,
    /// Unit digits kept (relative precision).
    #[arg(long, short = 'k', default_value_t = DEFAULT_PRECISION)]
    k: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum PadicOp {
    Norm,
    Dist,
    Add,
    Mul,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum CantorCmd {
    /// Kept intervals of the depth-k iterate.
    Iterate {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        depth: u32,
        /// Include every level from 0 to `depth`.
        #[arg(long)]
        all_levels: bool,
    },
    /// F_p(x) for a rational p-adic integer x, truncated to `depth` digits.
    Encode {
        #[arg(allow_hyphen_values = true)]
        x: String,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = DEFAULT_PRECISION)]
        depth: usize,
    },
    /// Refinement level at which a point of [0, 1] is removed, if any.
    Member {
        point: String,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        depth: u32,
    },
    /// D (p-adic) and E (Euclidean) between the images of two rationals.
    Dist {
        #[arg(allow_hyphen_values = true)]
        x: String,
        #[arg(allow_hyphen_values = true)]
        y: String,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = DEFAULT_PRECISION)]
        depth: usize,
    },
    /// Whether x + δ stays on C(p).
    Perturb {
        #[arg(allow_hyphen_values = true)]
        x: String,
        #[arg(allow_hyphen_values = true)]
        delta: String,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = DEFAULT_PRECISION)]
        depth: usize,
    },
    /// Hausdorff dimension log p / log(2p − 1).
    Dim {
        #[arg(long)]
        p: u64,
        /// Also evaluate log(2^N) / log(2^(N+1) − 1).
        #[arg(long = "N")]
        level: Option<u32>,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum TriangleCmd {
    /// cos θ_ab from two cosines and the phase φ = fπ.
    Third {
        #[arg(allow_hyphen_values = true)]
        cos_ac: String,
        #[arg(allow_hyphen_values = true)]
        cos_bc: String,
        /// Phase as a fraction of π.
        #[arg(long)]
        phase: String,
    },
    /// Whether the third side lies in Q2(N).
    Check {
        #[arg(allow_hyphen_values = true)]
        cos_ac: String,
        #[arg(allow_hyphen_values = true)]
        cos_bc: String,
        #[arg(long)]
        phase: String,
        #[arg(long = "N")]
        level: u32,
    },
    /// Exhaustive search over Q2(N)³ for admissible triangles.
    Search {
        #[arg(long = "N")]
        level: u32,
        #[arg(long, value_enum, default_value_t = PhaseRangeArg::Open)]
        range: PhaseRangeArg,
        /// Most triples to visit.
        #[arg(long, env = "INVSET_BUDGET", default_value_t = DEFAULT_SEARCH_BUDGET)]
        budget: u64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum PhaseRangeArg {
    Open,
    WithRightAngle,
    Full,
}

#[derive(Debug, Args, Serialize)]
struct ChshArgs {
    /// a = (0, π/2), b = (π/4, 3π/4).
    #[arg(long, conflicts_with_all = ["a1", "a2", "b1", "b2"])]
    standard: bool,
    /// Orientations as fractions of π.
    #[arg(long, required_unless_present = "standard", allow_hyphen_values = true)]
    a1: Option<String>,
    #[arg(long, required_unless_present = "standard", allow_hyphen_values = true)]
    a2: Option<String>,
    #[arg(long, required_unless_present = "standard", allow_hyphen_values = true)]
    b1: Option<String>,
    #[arg(long, required_unless_present = "standard", allow_hyphen_values = true)]
    b2: Option<String>,
    #[arg(long = "N")]
    level: u32,
    /// Trials per sub-experiment; 0 skips Monte Carlo.
    #[arg(long, short = 'n', default_value_t = 100_000)]
    n: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Realized setting pair `i,j`.
    #[arg(long, default_value = "1,1")]
    realized: String,
    /// Evaluate A as if all four pairs coexisted.
    #[arg(long)]
    no_is_rule: bool,
    /// Use the exact orientations instead of snapping correlations to Q2(N).
    #[arg(long)]
    no_snap: bool,
    /// Corr = −cos θ.
    #[arg(long)]
    singlet: bool,
    /// Instrument resolution in radians (default 2^(−(N−1)/2)).
    #[arg(long)]
    resolution: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
#[command(group(clap::ArgGroup::new("target").required(true).args(["cosine", "theta", "phase"])))]
struct SnapArgs {
    #[arg(long, allow_hyphen_values = true)]
    cosine: Option<String>,
    /// Angle in radians, snapped through its cosine.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// Phase as a fraction of π.
    #[arg(long)]
    phase: Option<String>,
    #[arg(long = "N")]
    level: u32,
}

#[derive(Debug, Args, Serialize)]
struct SweepArgs {
    #[arg(value_enum)]
    experiment: SweepKind,
    /// Inclusive range `a..b`; empty when b < a.
    range: String,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SweepKind {
    #[value(name = "chsh-vs-N")]
    ChshVsN,
    #[value(name = "dim-vs-p")]
    DimVsP,
    #[value(name = "snap-error-vs-N")]
    SnapErrorVsN,
}

#[derive(Debug, Args, Serialize)]
struct ReplayArgs {
    manifest: PathBuf,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(String),
    Resource(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Domain(_) => EXIT_DOMAIN,
            CliError::Resource(_) => EXIT_RESOURCE,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Domain(m) | CliError::Resource(m) => m,
        }
    }
}

impl From<ParseRationalError> for CliError {
    fn from(e: ParseRationalError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<PadicError> for CliError {
    fn from(e: PadicError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<CantorError> for CliError {
    fn from(e: CantorError) -> Self {
        match e {
            CantorError::TooManyIntervals { .. } => CliError::Resource(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<IterateCsvError> for CliError {
    fn from(e: IterateCsvError) -> Self {
        match e {
            IterateCsvError::Cantor(c) => c.into(),
            IterateCsvError::Io(io) => io.into(),
        }
    }
}

impl From<TrigError> for CliError {
    fn from(e: TrigError) -> Self {
        match e {
            TrigError::BudgetExceeded { .. } | TrigError::LevelTooLarge(_) => {
                CliError::Resource(e.to_string())
            }
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<BellError> for CliError {
    fn from(e: BellError) -> Self {
        match e {
            BellError::BadPairIndex(..) => CliError::Usage(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Resource(e.to_string())
    }
}

/// Parses `argv` (program name first), runs, and returns the exit code.
pub fn main_with(argv: Vec<String>) -> i32 {
    match run(argv) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

fn run(argv: Vec<String>) -> Result<(), CliError> {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return if code == EXIT_OK {
                Ok(())
            } else {
                Err(CliError::Usage("invalid arguments".into()))
            };
        }
    };
    let format = if cli.csv {
        Some(Format::Csv)
    } else if cli.json_lines {
        Some(Format::JsonLines)
    } else {
        None
    };

    if let Command::Replay(r) = &cli.command {
        let mut recorded = output::read_manifest_argv(&r.manifest)?;
        // The replay's own output flags take precedence.
        if let Some(path) = &cli.out {
            recorded.push("--out".into());
            recorded.push(path.display().to_string());
        }
        if recorded.iter().any(|a| a == "replay") {
            return Err(CliError::Usage("manifest records a replay".into()));
        }
        return run(recorded);
    }

    let (out, seed) = commands::execute(&cli.command)?;
    let manifest = output::RunManifest::new(command_name(&cli.command), &argv, &cli.command, seed);
    let format = format.unwrap_or(match cli.command {
        Command::Sweep(_) => Format::Csv,
        _ => Format::Json,
    });
    output::emit(&manifest, &out, format, cli.out.as_deref())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Padic(_) => "padic",
        Command::Cantor(_) => "cantor",
        Command::Triangle(_) => "triangle",
        Command::Chsh(_) => "chsh",
        Command::Snap(_) => "snap",
        Command::Sweep(_) => "sweep",
        Command::Replay(_) => "replay",
    }
}
