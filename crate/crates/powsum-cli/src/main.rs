//! `powsum`: command-line front end for learning sums of powers, checking
//! non-degeneracy, the lower-bound measure and Gaussian mixture recovery.
//!
//! Every run prints one document: JSON with the run manifest, its hash and
//! the result, or a moment table whose first lines carry the same. Errors
//! are JSON too, with exit code 2 for degeneracy, 3 for an exhausted retry
//! budget, 4 for bad input and 1 for anything else (including a failed
//! verification verdict).

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use powsum::Error;
use serde_json::json;

use manifest::RunManifest;

#[derive(Parser, Debug)]
#[command(name = "powsum", version, about = "Exact learning of sums of powers of low-degree polynomials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the elapsed time to stderr.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct SeedArg {
    /// Seed for every random choice of the run.
    #[arg(long, env = "POWSUM_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct Shape {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub t: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    HighT,
    LowT,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Random circuit sum_i Q_i^m with random degree-t forms.
    GenRandom {
        #[command(flatten)]
        shape: Shape,
        #[arg(long)]
        s: usize,
        #[command(flatten)]
        seed: SeedArg,
        /// Decimal prime; defaults to 2^127 - 1.
        #[arg(long)]
        prime: Option<String>,
    },
    /// Explicit non-degenerate circuit built from combinatorial designs, with its projection L.
    GenWitness {
        #[command(flatten)]
        shape: Shape,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n0: usize,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        prime: Option<String>,
    },
    /// Checks the four non-degeneracy conditions under random projections.
    CheckNondegen {
        input: PathBuf,
        /// Derivative order; defaults to the witness's own for witness files.
        #[arg(long)]
        k: Option<usize>,
        /// Projection width; witness files bring their own L.
        #[arg(long)]
        n0: Option<usize>,
        #[arg(long)]
        m0: usize,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Learns the terms of a circuit from evaluations.
    Learn {
        /// Circuit, witness or polynomial file.
        input: PathBuf,
        /// Number of terms to learn.
        #[arg(long)]
        s: usize,
        #[command(flatten)]
        seed: SeedArg,
        /// Derivative order; fixes the parameters together with --n0 and --m0.
        #[arg(long, requires_all = ["n0", "m0"], conflicts_with = "auto_params")]
        k: Option<usize>,
        /// Columns of the projection L.
        #[arg(long, requires_all = ["k", "m0"])]
        n0: Option<usize>,
        /// Columns of the projection P.
        #[arg(long, requires_all = ["k", "n0"])]
        m0: Option<usize>,
        /// Choose (n0, m0, k) from the formulas and escalate on failure (the default).
        #[arg(long)]
        auto_params: bool,
        /// Reduce a circuit over the rationals modulo this prime; must match a prime circuit's field.
        #[arg(long)]
        prime: Option<String>,
        /// Hide the circuit's structure: the learner sees evaluations only.
        #[arg(long)]
        opaque: bool,
    },
    /// Identity test of a learned model against a circuit at random points.
    Verify {
        circuit: PathBuf,
        model: PathBuf,
        #[arg(long, default_value_t = 50)]
        points: usize,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Largest dim of projected order-k partials over random projections.
    AppMeasure {
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n0: usize,
        #[arg(long, default_value_t = powsum::appmeasure::DEFAULT_TRIALS)]
        trials: usize,
        /// Measure from evaluations only instead of the expanded polynomial.
        #[arg(long)]
        black_box: bool,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// The hard polynomial of a regime, with its measured dimension.
    HardPoly {
        #[command(flatten)]
        shape: Shape,
        #[arg(long, value_enum)]
        regime: RegimeArg,
        /// Override the regime's derivative order.
        #[arg(long)]
        k: Option<usize>,
        /// Override the regime's projection width.
        #[arg(long)]
        n0: Option<usize>,
        #[arg(long, default_value_t = powsum::appmeasure::DEFAULT_TRIALS)]
        trials: usize,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        prime: Option<String>,
    },
    /// Regime parameters and the fan-in bounds they imply.
    Bounds {
        #[command(flatten)]
        shape: Shape,
        /// Hypothesized top fan-in.
        #[arg(long, default_value_t = 1)]
        s: usize,
    },
    /// Exact moments of a mixture at random integer points.
    GaussianMoments {
        mixture: PathBuf,
        /// Highest order; every even order up to it is tabulated.
        #[arg(long)]
        order: usize,
        #[arg(long, default_value_t = 20)]
        points: usize,
        /// Coordinates are drawn from -bound..=bound.
        #[arg(long, default_value_t = 10)]
        bound: i64,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Recovers a mixture from a moment table or a mixture file.
    GaussianLearn {
        input: PathBuf,
        #[arg(long)]
        s: usize,
        /// Power learned from the top moment; defaults to 4 for s >= 2 and 3 otherwise.
        #[arg(long)]
        m: Option<usize>,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Splits a space under a family of operators into indecomposable summands.
    Decompose {
        instance: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Reruns the command recorded in an output and checks the bytes match.
    Replay { output: PathBuf },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GenRandom { .. } => "gen-random",
            Command::GenWitness { .. } => "gen-witness",
            Command::CheckNondegen { .. } => "check-nondegen",
            Command::Learn { .. } => "learn",
            Command::Verify { .. } => "verify",
            Command::AppMeasure { .. } => "app-measure",
            Command::HardPoly { .. } => "hard-poly",
            Command::Bounds { .. } => "bounds",
            Command::GaussianMoments { .. } => "gaussian-moments",
            Command::GaussianLearn { .. } => "gaussian-learn",
            Command::Decompose { .. } => "decompose",
            Command::Replay { .. } => "replay",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Command::GenRandom { seed, .. }
            | Command::GenWitness { seed, .. }
            | Command::CheckNondegen { seed, .. }
            | Command::Learn { seed, .. }
            | Command::Verify { seed, .. }
            | Command::AppMeasure { seed, .. }
            | Command::HardPoly { seed, .. }
            | Command::GaussianMoments { seed, .. }
            | Command::GaussianLearn { seed, .. }
            | Command::Decompose { seed, .. } => Some(seed.seed),
            Command::Bounds { .. } | Command::Replay { .. } => None,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    /// Unreadable or malformed files and arguments.
    Io(String),
    /// A verdict that came out negative; carries the output to print.
    Verdict { output: String, code: u8 },
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Lib(Error::Degenerate(_)) => 2,
            CliError::Lib(Error::RetryExhausted(_)) => 3,
            CliError::Lib(
                Error::InvalidInput(_)
                | Error::Parse(_)
                | Error::DimensionMismatch(_)
                | Error::InvalidField(_)
                | Error::Infeasible(_),
            )
            | CliError::Io(_) => 4,
            CliError::Lib(_) => 1,
            CliError::Verdict { code, .. } => *code,
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            CliError::Lib(Error::Degenerate(r)) => json!({
                "kind": "degenerate",
                "condition": r.condition,
                "measured": r.measured,
                "expected": r.expected,
                "message": r.to_string(),
            }),
            CliError::Lib(e) => {
                let kind = match e {
                    Error::RetryExhausted(_) => "retry_exhausted",
                    Error::Infeasible(_) => "infeasible",
                    Error::Parse(_) => "parse",
                    Error::InvalidField(_) => "invalid_field",
                    Error::InvalidInput(_) | Error::DimensionMismatch(_) => "invalid_input",
                    _ => "internal",
                };
                json!({ "kind": kind, "message": e.to_string() })
            }
            CliError::Io(msg) => json!({ "kind": "invalid_input", "message": msg }),
            CliError::Verdict { .. } => json!({ "kind": "verdict" }),
        }
    }
}

/// Arguments after the program name with `--out` and its value removed.
fn recorded_argv(args: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(args.len());
    let mut skip = false;
    for a in args {
        if std::mem::take(&mut skip) {
            continue;
        }
        if a == "--out" {
            skip = true;
        } else if !a.starts_with("--out=") {
            out.push(a.clone());
        }
    }
    out
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Runs the command and renders its output. A replay runs the recorded
/// command through here a second time.
pub fn render(command: &Command, argv: Vec<String>) -> Result<String, CliError> {
    if let Command::Replay { output } = command {
        return commands::replay(output);
    }
    let mut manifest = RunManifest::new(command.name(), argv, command.seed());
    let product = commands::run(command, &mut manifest)?;
    let text = product.render(&manifest);
    match product.code() {
        0 => Ok(text),
        code => Err(CliError::Verdict { output: text, code }),
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let err = json!({ "error": { "kind": "usage", "message": e.render().to_string() } });
            println!("{}", serde_json::to_string_pretty(&err).expect("json"));
            return ExitCode::from(4);
        }
    };
    let start = Instant::now();
    let result = render(&cli.command, recorded_argv(&args[1..]));
    if cli.timing {
        eprintln!("elapsed: {:.3} s", start.elapsed().as_secs_f64());
    }
    let outcome = result.and_then(|text| emit(&cli.out, &text));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Verdict { output, code }) => {
            let _ = emit(&cli.out, &output);
            ExitCode::from(code)
        }
        Err(e) => {
            let err = json!({ "command": cli.command.name(), "error": e.to_json() });
            println!("{}", serde_json::to_string_pretty(&err).expect("json"));
            ExitCode::from(e.code())
        }
    }
}
