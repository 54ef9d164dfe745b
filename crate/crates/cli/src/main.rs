mod commands;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Central L-values of quadratic twists and the statistics built on them.
#[derive(Debug, Parser)]
#[command(name = "ltwist", version, about)]
pub struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "LTWIST_WORKERS")]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate every eligible twist with |d| < X and write one CSV row each.
    Scan(ScanArgs),
    /// L^(r)(E_d, 1)/r! for one curve or twist.
    Lvalue(LvalueArgs),
    /// Dirichlet coefficients a_1..a_M.
    Coeffs(CoeffsArgs),
    /// Plot-ready cumulative distribution of the nonzero values of a scan.
    Distribution(DistributionArgs),
    /// Power-law exponent of the vanishing count.
    FitExponent(FitExponentArgs),
    /// Lower-tail exponent of the value distribution.
    TailSlope(TailSlopeArgs),
    /// Vanishing counts in residue and nonresidue classes.
    Residuosity(ResiduosityArgs),
    /// Fit the residuosity exponent k from a residuosity table.
    FitK(FitKArgs),
    /// Heuristic models.
    #[command(subcommand)]
    Model(ModelCommand),
    /// Growth predictions for counts of higher-rank twists.
    Predict(PredictArgs),
    /// BSD invariants and the implied order of Sha for one twist.
    Bsd(BsdArgs),
    /// BSD invariants for a range of twists.
    BsdScan(BsdScanArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ParityArg {
    Odd,
    Even,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SignsArg {
    Both,
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ProviderArg {
    Hybrid,
    Eta,
    PointCount,
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Output file; stdout when absent. A `<out>.manifest.json` is written alongside.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub curve: PathBuf,
    #[arg(long)]
    pub xmax: u64,
    #[arg(long, value_enum, default_value_t = ParityArg::Both)]
    pub parity: ParityArg,
    #[arg(long, value_enum, default_value_t = SignsArg::Both)]
    pub signs: SignsArg,
    #[arg(long, default_value_t = 1e-2)]
    pub coarse_eps: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub refine_eps: f64,
    /// Vanishing threshold.
    #[arg(long, default_value_t = 1e-2)]
    pub tau: f64,
    #[arg(long)]
    pub max_terms: Option<usize>,
    #[arg(long, value_enum, default_value_t = ProviderArg::Hybrid)]
    pub provider: ProviderArg,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct LvalueArgs {
    #[arg(long)]
    pub curve: PathBuf,
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub twist: i64,
    /// Derivative order; defaults to the parity of the twist.
    #[arg(long)]
    pub order: Option<u32>,
    #[arg(long, default_value_t = 1e-10)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = ProviderArg::Hybrid)]
    pub provider: ProviderArg,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    #[arg(long)]
    pub curve: PathBuf,
    #[arg(long)]
    pub count: usize,
    #[arg(long, value_enum, default_value_t = ProviderArg::Hybrid)]
    pub provider: ProviderArg,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct DistributionArgs {
    /// Scan CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// Use value / (log |d|)^r.
    #[arg(long)]
    pub normalise: bool,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct FitExponentArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Cutoffs X; by default half-octave steps below the largest |d|.
    #[arg(long, value_delimiter = ',')]
    pub xs: Vec<u64>,
    #[arg(long, default_value_t = 12)]
    pub points: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct TailSlopeArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Fraction of the smallest values used.
    #[arg(long, default_value_t = 0.1)]
    pub window: f64,
    #[arg(long)]
    pub normalise: bool,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct ResiduosityArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub curve: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    pub primes: Vec<u64>,
    #[arg(long, default_value_t = ltwist::stats::DEFAULT_K, allow_hyphen_values = true)]
    pub k: f64,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct FitKArgs {
    /// Residuosity CSV.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Subcommand)]
pub enum ModelCommand {
    /// Squared length of a sum of h random unit vectors in R^h.
    Heegner(HeegnerArgs),
    /// Exhaustive count of d w^2 = v (u^3 + A u v^2 + B v^3).
    Granville(GranvilleArgs),
}

#[derive(Debug, Args)]
pub struct HeegnerArgs {
    #[arg(long)]
    pub h: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum QuadrantsArg {
    All,
    Positive,
}

#[derive(Debug, Args)]
pub struct GranvilleArgs {
    /// Curve whose short model supplies A and B.
    #[arg(long, required_unless_present_all = ["a", "b"])]
    pub curve: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "curve")]
    pub a: Option<i64>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "curve")]
    pub b: Option<i64>,
    #[arg(long)]
    pub dmin: u64,
    #[arg(long)]
    pub dmax: u64,
    #[arg(long)]
    pub xmin: u64,
    #[arg(long)]
    pub xmax: u64,
    #[arg(long, value_enum, default_value_t = QuadrantsArg::All)]
    pub quadrants: QuadrantsArg,
    /// Count only fundamental discriminants d.
    #[arg(long)]
    pub fundamental: bool,
    /// Largest number of (u, v) pairs to enumerate.
    #[arg(long, default_value_t = ltwist::models::DEFAULT_GRANVILLE_BUDGET)]
    pub budget: u64,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SchemeArg {
    EvenRank2,
    Theta,
    Granville,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long, value_enum)]
    pub scheme: SchemeArg,
    #[arg(long)]
    pub x: f64,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub r: Option<u32>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct BsdArgs {
    #[arg(long)]
    pub curve: PathBuf,
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub twist: i64,
    /// Generator `x,y` on the twisted model; searched for when absent.
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    /// Naive search bound for generators.
    #[arg(long, default_value_t = 2000)]
    pub search_bound: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub eps: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub tau: f64,
    #[arg(long, value_enum, default_value_t = ProviderArg::Hybrid)]
    pub provider: ProviderArg,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct BsdScanArgs {
    #[arg(long)]
    pub curve: PathBuf,
    /// Twists with 8 < |d| < xmax.
    #[arg(long)]
    pub xmax: u64,
    #[arg(long, value_enum, default_value_t = ParityArg::Even)]
    pub parity: ParityArg,
    #[arg(long, default_value_t = 1000)]
    pub search_bound: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub eps: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub tau: f64,
    #[arg(long, value_enum, default_value_t = ProviderArg::Hybrid)]
    pub provider: ProviderArg,
    #[command(flatten)]
    pub out: OutArg,
}

/// A rejected flag combination, reported with the usage exit code.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

const EXIT_USAGE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_BUDGET: u8 = 3;

fn exit_code(err: &anyhow::Error) -> u8 {
    use ltwist::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Config(_) | E::Singular(_) | E::UnsupportedEta(_) | E::NotOnCurve => EXIT_CONFIG,
                E::Budget(_) | E::InsufficientTerms { .. } => EXIT_BUDGET,
                _ => EXIT_USAGE,
            };
        }
    }
    EXIT_USAGE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be positive");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
