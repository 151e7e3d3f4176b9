//! Command-line front end. Every subcommand writes one CSV table.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure.

mod commands;
pub mod format;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::error::Error;
use crate::expr::Expr;
use crate::spectra::ProblemKind;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

const MAX_N: usize = 64;
const MAX_M: usize = 1_000_000;
const MAX_SAMPLES: u64 = 100_000_000;

#[derive(Parser, Debug)]
#[command(name = "steklov", version, about = "Biharmonic Steklov spectra, counting laws and half-space checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Eigenvalues with multiplicities and running counts.
    Spectrum(CommonArgs),
    /// Counting function against the leading-order prediction.
    Weyl(CommonArgs),
    /// Symbol recovery on the half-space, or kernel vs Fourier comparison.
    Halfspace(CommonArgs),
    /// Principal symbols and phase volumes at sampled boundary points.
    Symbol(CommonArgs),
    /// The Gamma-function identity behind the ball constant.
    IdentityCheck(CommonArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HalfspaceMode {
    Bvp,
    Kernel,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    Identity,
    Random,
}

#[derive(Args, Debug, Default, Clone)]
pub struct CommonArgs {
    /// p1, p2 or harmonic
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "m-max")]
    pub m_max: Option<usize>,
    /// Constant or expression in the boundary angle `t` (and `s` for n >= 3)
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<String>,
    /// Regularizing shift added to rho in symbols and phase volumes
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon: Option<f64>,
    /// Finest step of the half-space refinement ladder
    #[arg(long)]
    pub h: Option<f64>,
    /// Half-space truncation length
    #[arg(long = "L")]
    pub length: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo samples for phase volumes
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long, value_enum)]
    pub mode: Option<HalfspaceMode>,
    #[arg(long, value_enum)]
    pub block: Option<BlockKind>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML file with the same keys; flags win
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Deserialize, Debug, Clone, PartialEq)]
#[serde(untagged)]
pub enum RhoValue {
    Number(f64),
    Text(String),
}

/// Contents of a configuration file.
#[derive(Deserialize, Debug, Default, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub problem: Option<String>,
    pub n: Option<usize>,
    #[serde(alias = "m-max")]
    pub m_max: Option<usize>,
    pub rho: Option<RhoValue>,
    pub epsilon: Option<f64>,
    pub h: Option<f64>,
    #[serde(rename = "L", alias = "length")]
    pub length: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub mode: Option<HalfspaceMode>,
    pub block: Option<BlockKind>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, Error> {
        toml::from_str(text).map_err(|e| Error::Parse {
            offset: e.span().map(|s| s.start).unwrap_or(0),
            message: e.message().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Domain(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Spectrum,
    Weyl,
    Halfspace,
    Symbol,
    IdentityCheck,
}

/// Boundary weight `ρ`: a constant or an expression.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightSpec {
    Constant(f64),
    Expression(Expr),
}

impl WeightSpec {
    pub fn parse(src: &str) -> Result<Self, Error> {
        let e = Expr::parse(src)?;
        Ok(match e.as_constant() {
            Some(c) => WeightSpec::Constant(c),
            None => WeightSpec::Expression(e),
        })
    }
}

/// Fully merged and validated settings.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub problem: ProblemKind,
    pub n: usize,
    pub m_max: usize,
    pub rho: WeightSpec,
    pub epsilon: f64,
    pub h: f64,
    pub length: Option<f64>,
    pub seed: u64,
    pub samples: u64,
    pub mode: HalfspaceMode,
    pub block: BlockKind,
    pub out: Option<PathBuf>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

impl RunConfig {
    /// Merges flags over file values over defaults, then validates.
    pub fn resolve(command: CommandKind, args: &CommonArgs, file: &FileConfig) -> Result<Self, Error> {
        let problem = match args.problem.as_deref().or(file.problem.as_deref()) {
            Some(p) => p.parse::<ProblemKind>()?,
            None => ProblemKind::NeumannTrace,
        };
        let n = args.n.or(file.n).unwrap_or(if command == CommandKind::IdentityCheck { 12 } else { 2 });
        let m_max = args.m_max.or(file.m_max).unwrap_or(match command {
            CommandKind::Weyl => 1000,
            _ => 20,
        });
        let rho = match (&args.rho, &file.rho) {
            (Some(s), _) => WeightSpec::parse(s)?,
            (None, Some(RhoValue::Text(s))) => WeightSpec::parse(s)?,
            (None, Some(RhoValue::Number(c))) => WeightSpec::Constant(*c),
            (None, None) => WeightSpec::Constant(1.0),
        };
        let cfg = RunConfig {
            command,
            problem,
            n,
            m_max,
            rho,
            epsilon: args.epsilon.or(file.epsilon).unwrap_or(0.0),
            h: args.h.or(file.h).unwrap_or(1.0 / 512.0),
            length: args.length.or(file.length),
            seed: args.seed.or(file.seed).unwrap_or(0),
            samples: args.samples.or(file.samples).unwrap_or(100_000),
            mode: args.mode.or(file.mode).unwrap_or(HalfspaceMode::Bvp),
            block: args.block.or(file.block).unwrap_or(BlockKind::Identity),
            out: args.out.clone().or_else(|| file.out.clone()),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), Error> {
        if self.n < 2 || self.n > MAX_N {
            return Err(invalid(format!("--n must be in [2, {MAX_N}], got {}", self.n)));
        }
        if self.m_max > MAX_M {
            return Err(invalid(format!("--m-max must be at most {MAX_M}")));
        }
        if let WeightSpec::Constant(c) = self.rho {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(invalid(format!("--rho constant must be finite and nonnegative, got {c}")));
            }
        }
        if let WeightSpec::Expression(e) = &self.rho {
            if e.uses_polar() && self.n < 3 {
                return Err(invalid("--rho uses the polar angle `s`, which needs n >= 3"));
            }
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(invalid("--epsilon must be finite and nonnegative"));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(invalid("--h must be positive"));
        }
        if let Some(l) = self.length {
            if !(l > 0.0 && l.is_finite()) {
                return Err(invalid("--L must be positive"));
            }
        }
        if self.samples == 0 || self.samples > MAX_SAMPLES {
            return Err(invalid(format!("--samples must be in [1, {MAX_SAMPLES}]")));
        }
        Ok(())
    }
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the exit code. Diagnostics go to `stderr`, tables to `--out` or
/// `stdout`.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let first = e.to_string().lines().next().unwrap_or("invalid arguments").to_string();
                    let _ = writeln!(stderr, "{first}");
                    EXIT_INVALID
                }
            };
        }
    };
    let (kind, args) = match &cli.command {
        Command::Spectrum(a) => (CommandKind::Spectrum, a),
        Command::Weyl(a) => (CommandKind::Weyl, a),
        Command::Halfspace(a) => (CommandKind::Halfspace, a),
        Command::Symbol(a) => (CommandKind::Symbol, a),
        Command::IdentityCheck(a) => (CommandKind::IdentityCheck, a),
    };
    let result = args
        .config
        .as_deref()
        .map(FileConfig::load)
        .unwrap_or_else(|| Ok(FileConfig::default()))
        .and_then(|file| RunConfig::resolve(kind, args, &file))
        .and_then(|cfg| commands::dispatch(&cfg).map(|csv| (cfg, csv)));
    match result {
        Ok((cfg, csv)) => match &cfg.out {
            Some(path) => match std::fs::write(path, csv) {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
                    EXIT_INVALID
                }
            },
            None => match stdout.write_all(csv.as_bytes()) {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    let _ = writeln!(stderr, "error: cannot write output: {e}");
                    EXIT_INVALID
                }
            },
        },
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Input problems map to 2, solver failures to 3.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::Parse { .. } | Error::Resource(_) | Error::Adequacy(_) | Error::Support(_) => {
            EXIT_INVALID
        }
        Error::Singular(_) | Error::Numerical(_) => EXIT_NUMERICAL,
    }
}
