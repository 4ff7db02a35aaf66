//! The `sle-euler` command line: argument parsing, dispatch and output.

pub mod commands;
pub mod error;
pub mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use error::CliError;
use output::{render, Format};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "SLE_EULER_THREADS";

#[derive(Debug, Parser)]
#[command(name = "sle-euler", version, about = "Multiple-SLE partition functions, crossing probabilities and lattice checks")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value = "json", global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Chordal crossing probability of a conformal rectangle with cross-ratio r.
    Crossing {
        #[arg(long)]
        r: f64,
        #[arg(long)]
        kappa: f64,
    },
    /// Percolation crossing probabilities of a symmetric conformal hexagon.
    Hexagon {
        /// Angle of u = e^{iθ} in degrees, in (0, 120); 60 is the regular hexagon.
        #[arg(long, default_value_t = 60.0)]
        theta: f64,
    },
    /// Fomin determinant det((xᵢ − yⱼ)^{−2}) and its normalized density.
    Fomin {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        y: Vec<f64>,
    },
    /// Hyperelliptic period determinant ψ and its x₁-derivative identities.
    Ust {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x: Vec<f64>,
        /// Finite-difference step (default 1e-4 × minimum gap).
        #[arg(long)]
        h: Option<f64>,
    },
    /// Euler integral over a pairing-product or nested cycle.
    Euler {
        #[arg(long)]
        kappa: f64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x: Vec<f64>,
        /// Pairs such as 1-4,2-3 (default 1-2,3-4,…).
        #[arg(long, value_delimiter = ',', value_parser = parse_pair)]
        pairing: Vec<(usize, usize)>,
        #[arg(long, value_enum, default_value = "pairing")]
        cycle: CycleKind,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Numerical verification of the identities.
    Verify {
        #[command(subcommand)]
        check: VerifyCommand,
    },
    /// Lattice Monte Carlo.
    Mc {
        #[command(subcommand)]
        sim: McCommand,
    },
    /// Non-crossing pairings of 2n points.
    Pairings {
        #[arg(long)]
        n: u64,
        /// Print only the Catalan number.
        #[arg(long)]
        count: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CycleKind {
    Pairing,
    Nested,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AnnihilationCase {
    /// Pairing-product Euler integral.
    Euler,
    /// det((xᵢ − x_{2n+1−j})^{−2}) at κ = 2.
    Kappa2Det,
    /// Period determinant ψ at κ = 8.
    Ust,
}

/// Marked points, given explicitly or as a default configuration of size n.
#[derive(Debug, Args)]
pub struct PointArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Vec<f64>,
    /// Number of pairs when --x is omitted.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Finite-difference check that a function solves the 2n + 3 equations.
    Annihilation {
        #[arg(long, value_enum)]
        case: AnnihilationCase,
        #[command(flatten)]
        points: PointArgs,
        /// κ for the euler case (default 3); the other cases fix κ.
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long, value_delimiter = ',', value_parser = parse_pair)]
        pairing: Vec<(usize, usize)>,
        #[arg(long, default_value_t = 1e-13)]
        tol: f64,
    },
    /// 𝓛_k φ against the divergence form in u, for every k.
    Lemma {
        #[command(flatten)]
        points: PointArgs,
        #[arg(long)]
        kappa: f64,
        /// Integration points re:im, n − 1 of them (default above the pairs).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_complex)]
        u: Vec<(f64, f64)>,
    },
    /// Limit of the Euler integral as x_{k+1} → x_k.
    Collapse {
        #[command(flatten)]
        points: PointArgs,
        #[arg(long)]
        kappa: f64,
        #[arg(long, value_delimiter = ',', value_parser = parse_pair)]
        pairing: Vec<(usize, usize)>,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Dimension of the κ → ∞ solution space against the Catalan number.
    KappaInf {
        #[arg(long)]
        n: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum McCommand {
    /// Site percolation crossing events on the triangular lattice.
    Percolation {
        /// Domain JSON file, or a preset hexagon:MESH, lozenge:MESH.
        #[arg(long)]
        domain: String,
        #[arg(long, default_value_t = 10_000)]
        n_samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// UST branches against det H on the square lattice.
    Fomin {
        /// Domain JSON file, or a preset square:SIZE.
        #[arg(long)]
        domain: String,
        /// Boundary arclength parameters of x₁, …, xₙ.
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
        /// Boundary arclength parameters of y₁, …, yₙ.
        #[arg(long, value_delimiter = ',', required = true)]
        y: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        n_samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['-', ':']).ok_or_else(|| format!("expected a pair like 1-2, got {s:?}"))?;
    let p = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    Ok((p(a)?, p(b)?))
}

fn parse_complex(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected re:im, got {s:?}"))?;
    let p = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok((p(a)?, p(b)?))
}

/// What a run produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::invalid(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code: 2, stdout: String::new(), stderr: text }
            } else {
                Outcome { code: 0, stdout: text, stderr: String::new() }
            };
        }
    };
    let fail = |e: CliError| Outcome { code: e.exit_code(), stdout: String::new(), stderr: format!("error: {e}\n") };
    let pool = match thread_cap() {
        Ok(cap) => {
            let mut b = rayon::ThreadPoolBuilder::new();
            if let Some(n) = cap {
                b = b.num_threads(n);
            }
            match b.build() {
                Ok(p) => p,
                Err(e) => return fail(CliError::Numerical(format!("cannot start worker threads: {e}"))),
            }
        }
        Err(e) => return fail(e),
    };
    match pool.install(|| commands::dispatch(&cli.command)) {
        Ok((report, ok)) => {
            Outcome { code: if ok { 0 } else { 3 }, stdout: render(&report, cli.format), stderr: String::new() }
        }
        Err(e) => fail(e),
    }
}
