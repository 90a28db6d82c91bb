//! `diffeq`: series, strip solutions, continuation and Riemann surfaces for
//! complex difference equations from the command line.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use diffeq_core::{DoubleDouble, Scalar};

use crate::config::CplxArg;

/// Environment variable holding the default precision in bits.
pub const PRECISION_ENV: &str = "DIFFEQ_PRECISION";
pub const DEFAULT_PRECISION: u32 = 106;

#[derive(Debug)]
pub enum CliError {
    /// Bad input; exit code 2.
    Validation(String),
    /// The computation broke down; exit code 3.
    Numerical(String),
}

impl From<diffeq_core::Error> for CliError {
    fn from(e: diffeq_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "diffeq",
    version,
    about = "Solve and continue complex difference equations y(z+1) = F(z, y(z))"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Global {
    /// Working precision in bits: ≤ 24 runs in f32, ≤ 53 in f64, ≤ 106 in
    /// double-double. Defaults to $DIFFEQ_PRECISION, else 106.
    #[arg(long, global = true)]
    pub precision: Option<u32>,
    /// File of key=value lines supplying defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for randomized diagnostics.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Convergence tolerance; must be at least 2^(−precision/2).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    /// Output file; the artifact goes to stdout when omitted.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    /// Grid format for grid-valued commands.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ModelArgs {
    /// Multiplier λ, `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<CplxArg>,
    /// First coefficient g₁ (default −1).
    #[arg(long, allow_hyphen_values = true)]
    pub g1: Option<CplxArg>,
    /// Number of series coefficients.
    #[arg(long)]
    pub order: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct StripArgs {
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Grid points per unit of Re z.
    #[arg(long)]
    pub per_unit: Option<usize>,
    /// Units of Re z covered by the grid.
    #[arg(long)]
    pub width: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct EquationArgs {
    /// Equation entry `key=value` (`lambda`, `a2`, `a3`, ..., `b1`, ...);
    /// repeatable, overrides the config file.
    #[arg(long = "eq", value_name = "KEY=VALUE")]
    pub entries: Vec<String>,
    /// Asymptote α of y(z)λ^(−z).
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<CplxArg>,
    /// Terms of the y-series kept in the operator.
    #[arg(long)]
    pub j: Option<usize>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Fixed points of a rational map R(y) with their multipliers.
    Classify {
        /// The map in the variable y, e.g. "2*y + y^2".
        #[arg(long)]
        map: Option<String>,
    },
    /// Taylor coefficients of the model solution g(λw) = λg(w) + g(w)².
    Series {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Radius of convergence of g: majorant bound, tail estimate and r̂.
    Radius {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Sheets of g and their exchange edges along the branch ladder.
    Surface {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        depth: Option<usize>,
        /// Loop radius as a fraction of the gap to the nearest ladder point.
        #[arg(long)]
        radius_factor: Option<f64>,
        /// Random samples for the sheet identities (0 skips them).
        #[arg(long)]
        identities: Option<usize>,
    },
    /// Continues a sheet of g around a ladder point.
    Monodromy {
        #[command(flatten)]
        model: ModelArgs,
        /// Ladder index n of the branch point λ^(−n)·w₀.
        #[arg(long)]
        index: Option<usize>,
        /// Starting sheet label, e.g. 0, 1, 10.
        #[arg(long)]
        sheet: Option<String>,
        #[arg(long)]
        loops: Option<u32>,
        #[arg(long)]
        radius_factor: Option<f64>,
    },
    /// Picard solution on a left strip Re z < −ρ (|λ| > 1).
    SolveLeft {
        #[command(flatten)]
        eq: EquationArgs,
        #[command(flatten)]
        strip: StripArgs,
        /// Padding K of the operator sums (0 chooses it).
        #[arg(long)]
        k: Option<usize>,
        /// Radius b of the ball |w − α| ≤ b.
        #[arg(long)]
        ball: Option<f64>,
        /// Largest ρ tried when the contraction probe fails.
        #[arg(long)]
        rho_cap: Option<f64>,
    },
    /// Picard solution on a right strip Re z > ρ (|λ| < 1).
    SolveRight {
        #[command(flatten)]
        eq: EquationArgs,
        #[command(flatten)]
        strip: StripArgs,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        ball: Option<f64>,
        #[arg(long)]
        rho_cap: Option<f64>,
    },
    /// Normal form and strip solution at a parabolic fixed point.
    Abel {
        /// The map in the variable y.
        #[arg(long)]
        map: Option<String>,
        /// The parabolic fixed point γ.
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<CplxArg>,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<CplxArg>,
        #[command(flatten)]
        strip: StripArgs,
        #[arg(long)]
        padding: Option<usize>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        j: Option<usize>,
    },
    /// w(z) by telescoping the equation from deep inside the strip.
    Telescope {
        #[command(flatten)]
        eq: EquationArgs,
        #[command(flatten)]
        strip: StripArgs,
        /// Number of unit steps.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Y(u²) = Y(u)² + c: parameters, Laurent solution and boundary probes.
    Mahler {
        /// Multiplier λ; the constant is c = λ/2 − λ²/4.
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<CplxArg>,
        /// The constant c directly (real), instead of --lambda.
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
        #[arg(long)]
        order: Option<usize>,
        /// Probe a ray: `angle=…,rmax=…`; repeatable.
        #[arg(long)]
        probe: Vec<String>,
        /// Radii per probed ray.
        #[arg(long)]
        points: Option<usize>,
    },
    /// The horizontal strips log₂((4n−1)π/2) < Im z < log₂((4n+1)π/2).
    Strips {
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// A sheet of g sampled on a rectangular w-grid.
    Grid {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        sheet: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        re_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        re_max: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        im_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        im_max: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
    },
}

fn precision(
    global: &Global,
    file: &std::collections::BTreeMap<String, String>,
) -> Result<u32, CliError> {
    if let Some(p) = global.precision {
        return Ok(p);
    }
    if let Some(s) = file.get("precision") {
        return s
            .parse()
            .map_err(|_| CliError::Validation(format!("precision: not an integer: {s:?}")));
    }
    match std::env::var(PRECISION_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("{PRECISION_ENV}: not an integer: {s:?}"))),
        Err(_) => Ok(DEFAULT_PRECISION),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.global.config {
        Some(p) => config::read_config(p)?,
        None => Default::default(),
    };
    let bits = precision(&cli.global, &file)?;
    let ctx = commands::Context::new(cli.global.clone(), file, bits);
    let outcome = match bits {
        1..=24 => commands::run::<f32>(&cli.command, ctx)?,
        25..=53 => commands::run::<f64>(&cli.command, ctx)?,
        54..=106 => commands::run::<DoubleDouble>(&cli.command, ctx)?,
        _ => {
            return Err(CliError::Validation(format!(
                "precision {bits} bits is not available (1..={})",
                DoubleDouble::PRECISION_BITS
            )))
        }
    };
    outcome.emit()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                ErrorKind::InvalidSubcommand
                | ErrorKind::MissingSubcommand
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 1,
                _ => 2,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
    }
}
