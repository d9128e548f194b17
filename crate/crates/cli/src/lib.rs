//! Command-line front end for `momenta-core`.
//!
//! Each subcommand reads a problem file (or stdin when the path is `-`) and
//! writes a JSON report to stdout. Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | other failure |
//! | 2 | malformed input or usage error |
//! | 3 | moments requested past the end of the sequence |
//! | 4 | quadrature degree is not regular |
//! | 5 | plain Lanczos with vanishing initial coupling |
//! | 6 | no realization within the computed pattern |

pub mod commands;
pub mod problem;
pub mod report;

use std::ffi::OsString;
use std::io::Read;

use clap::{Parser, Subcommand};
use momenta_core::Error;

#[derive(Debug, Parser)]
#[command(
    name = "momenta",
    version,
    about = "Formal orthogonal polynomials, Gauss quadrature, Lanczos and realization reports"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct Flags {
    /// Relative threshold for zero Hankel determinants and Gram matrices.
    #[arg(long, global = true, value_name = "TOL")]
    pub tol_zero: Option<f64>,
    /// Relative radius for merging eigenvalues into multiple nodes.
    #[arg(long, global = true, value_name = "TOL")]
    pub tol_cluster: Option<f64>,
    /// Threshold for verification residuals.
    #[arg(long, global = true, value_name = "TOL")]
    pub tol_residual: Option<f64>,
    /// Decide Hankel zeros by exact fraction-free elimination.
    #[arg(long, global = true)]
    pub exact: bool,
    /// Largest degree examined: length of the classification table in
    /// `analyze`, step limit in `lanczos`.
    #[arg(long, global = true, value_name = "N")]
    pub max_degree: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hankel determinant pattern, regular indices and degree classification.
    Analyze {
        /// Problem file, or `-` for stdin.
        #[arg(required_unless_present = "pattern")]
        input: Option<String>,
        /// Analyze a given zero pattern instead (`x` nonzero, `0` zero).
        #[arg(long, conflicts_with = "input")]
        pattern: Option<String>,
    },
    /// Gauss quadrature with `n` nodes counted with multiplicity.
    Quadrature {
        input: String,
        #[arg(long)]
        n: usize,
    },
    /// Plain or look-ahead Lanczos on a triplet input.
    Lanczos {
        input: String,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        look_ahead: bool,
    },
    /// Minimal partial realization of `m_0..m_k`.
    Realize {
        input: String,
        #[arg(long)]
        k: usize,
    },
    /// Ritz values against the spectrum, and the matching moment table.
    Verify { input: String },
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Io(std::io::Error),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io(_) => 2,
            CliError::Core(e) => match e {
                Error::EmptyMoments
                | Error::NonFinite { .. }
                | Error::DimensionMismatch { .. }
                | Error::InvalidTolerance { .. }
                | Error::ZeroStartVector { .. } => 2,
                Error::HorizonExceeded { .. } | Error::InsufficientPattern { .. } => 3,
                Error::NotRegularDegree { .. } => 4,
                Error::ZeroInitialCoupling { .. } => 5,
                Error::NoRealizableDegree { .. } => 6,
                _ => 1,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(msg) => f.write_str(msg),
            CliError::Io(e) => write!(f, "cannot read input: {e}"),
            CliError::Core(Error::NotRegularDegree {
                degree,
                below,
                above,
            }) => {
                let near: Vec<String> = [below, above]
                    .iter()
                    .filter_map(|d| d.map(|d| d.to_string()))
                    .collect();
                write!(
                    f,
                    "degree {degree} is not regular; nearest regular degrees: "
                )?;
                if near.is_empty() {
                    f.write_str("none within the computed pattern")
                } else {
                    f.write_str(&near.join(", "))
                }
            }
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

/// What a run produced: exit code and the text for stdout and stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Run the command line `args` (program name first), reading `-` from
/// `stdin`.
pub fn run<I, T>(args: I, stdin: &mut dyn Read) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let code = e.exit_code();
            return if code == 0 {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    let echo: Vec<String> = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match commands::execute(&cli, &echo, stdin) {
        Ok(report) => Outcome {
            code: 0,
            stdout: report::render(&report),
            stderr: String::new(),
        },
        Err(e) => Outcome {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: format!("momenta: error: {e}\n"),
        },
    }
}
