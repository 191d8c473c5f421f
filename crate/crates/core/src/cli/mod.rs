//! Command-line front end.
//!
//! Settings are resolved in three layers: built-in defaults, then an
//! optional `key = value` config file (`--config`), then flags.

mod config;
mod format;
mod run;

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::model::{Boundary, ChainSpec};

use config::parse_config_file;
pub use format::format_sig;
pub use run::{
    check_chain, evolve_table, ordered_pairs, run, sweep_rows, time_grid, CheckOutcome, EvolveTable, SweepRow,
    CHECK_HEADER, FIGURE_PANELS, SWEEP_FIGURE, SWEEP_HEADER,
};

/// Environment variable capping sweep parallelism.
pub const THREADS_ENV: &str = "DISSIPCHAIN_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Evolve,
    Steady,
    Sweep,
    Check,
    Reproduce,
}

/// Inclusive γ grid `start:stop:step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GammaGrid {
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=count).map(|k| self.start + k as f64 * self.step).collect()
    }
}

impl std::str::FromStr for GammaGrid {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::Usage(format!("gamma grid must be start:stop:step, got {s:?}")));
        }
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad number {p:?} in gamma grid")))
        };
        Ok(Self { start: num(parts[0])?, stop: num(parts[1])?, step: num(parts[2])? })
    }
}

/// Fully resolved run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub n_sites: usize,
    pub boundary: Boundary,
    pub rates: Vec<f64>,
    /// Product initial state over `{e,g}`; `None` lets the command choose.
    pub initial_state: Option<String>,
    pub t_max: f64,
    pub dt: f64,
    pub gamma_grid: GammaGrid,
    pub output_path: Option<PathBuf>,
    pub tol: f64,
    pub window: usize,
}

impl RunConfig {
    pub fn chain(&self) -> Result<ChainSpec, CliError> {
        ChainSpec::new(self.n_sites, self.boundary, self.rates.clone()).map_err(usage)
    }
}

#[derive(Debug)]
pub enum CliError {
    /// `--help` / `--version` output; not an error for the exit code.
    Help(String),
    Usage(String),
    Numerical(Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Help(_) => 0,
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Help(text) => f.write_str(text),
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numerical(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub(crate) fn usage(e: impl fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "dissipchain", version, about = "Qubit chains with shared nearest-neighbour decay")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Time series of pair concurrences from a product initial state
    Evolve(Flags),
    /// Steady state reached from a product initial state
    Steady(Flags),
    /// Steady concurrence against the closed form over a γ grid
    Sweep(Flags),
    /// Kernel and commutant dimensions of the generator
    Check(Flags),
    /// Write the figure datasets fig2.csv … fig5.csv
    Reproduce(Flags),
}

#[derive(Args, Debug, Default, Clone)]
pub(crate) struct Flags {
    /// `key = value` settings file; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of sites
    #[arg(long = "n", alias = "sites")]
    pub(crate) n: Option<usize>,
    /// open | closed
    #[arg(long)]
    pub(crate) boundary: Option<String>,
    /// Comma-separated link rates
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub(crate) rates: Option<Vec<f64>>,
    /// Shorthand for rates (γ, 1−γ) on the three-site open chain
    #[arg(long, allow_negative_numbers = true)]
    pub(crate) gamma: Option<f64>,
    /// Initial product state, e.g. eeg
    #[arg(long)]
    pub(crate) init: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub(crate) tmax: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub(crate) dt: Option<f64>,
    /// start:stop:step
    #[arg(long = "gamma-grid")]
    pub(crate) gamma_grid: Option<String>,
    /// Output file (output directory for `reproduce`)
    #[arg(long)]
    pub(crate) out: Option<PathBuf>,
    /// Concurrence threshold for sudden-birth classification
    #[arg(long, allow_negative_numbers = true)]
    pub(crate) tol: Option<f64>,
    /// Points after t = 0 that count as immediate onset
    #[arg(long)]
    pub(crate) window: Option<usize>,
}

impl Flags {
    /// Fills unset fields from `lower`.
    fn layered_over(self, lower: Flags) -> Flags {
        // rates and gamma describe the same thing; whichever layer sets
        // either one owns both
        let (rates, gamma) = if self.rates.is_some() || self.gamma.is_some() {
            (self.rates, self.gamma)
        } else {
            (lower.rates, lower.gamma)
        };
        Flags {
            config: self.config,
            n: self.n.or(lower.n),
            boundary: self.boundary.or(lower.boundary),
            rates,
            gamma,
            init: self.init.or(lower.init),
            tmax: self.tmax.or(lower.tmax),
            dt: self.dt.or(lower.dt),
            gamma_grid: self.gamma_grid.or(lower.gamma_grid),
            out: self.out.or(lower.out),
            tol: self.tol.or(lower.tol),
            window: self.window.or(lower.window),
        }
    }
}

pub const DEFAULT_SITES: usize = 3;
pub const DEFAULT_RATE: f64 = 0.5;
pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_TMAX: f64 = 20.0;
pub const DEFAULT_GAMMA_GRID: GammaGrid = GammaGrid { start: 0.05, stop: 0.95, step: 0.05 };

/// Parses a full argument vector (program name first).
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            CliError::Help(e.to_string())
        }
        _ => CliError::Usage(e.to_string()),
    })?;
    let (command, flags) = match cli.command {
        Sub::Evolve(f) => (Command::Evolve, f),
        Sub::Steady(f) => (Command::Steady, f),
        Sub::Sweep(f) => (Command::Sweep, f),
        Sub::Check(f) => (Command::Check, f),
        Sub::Reproduce(f) => (Command::Reproduce, f),
    };
    let file = match &flags.config {
        Some(path) => parse_config_file(path)?,
        None => Flags::default(),
    };
    resolve(command, flags.layered_over(file))
}

fn resolve(command: Command, flags: Flags) -> Result<RunConfig, CliError> {
    let n_sites = flags.n.unwrap_or(DEFAULT_SITES);
    let boundary: Boundary = match &flags.boundary {
        Some(b) => b.parse().map_err(usage)?,
        None => Boundary::Open,
    };
    let n_links = match boundary {
        Boundary::Open => n_sites.saturating_sub(1),
        Boundary::Closed => n_sites,
    };
    let rates = match (flags.rates, flags.gamma) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage("give either --rates or --gamma, not both".into()))
        }
        (Some(r), None) => r,
        (None, Some(g)) => {
            if n_sites != 3 || boundary != Boundary::Open {
                return Err(CliError::Usage("--gamma applies to the three-site open chain".into()));
            }
            if !(g > 0.0 && g < 1.0) {
                return Err(CliError::Usage(format!("gamma must lie in (0, 1), got {g}")));
            }
            vec![g, 1.0 - g]
        }
        (None, None) => vec![DEFAULT_RATE; n_links],
    };

    let gamma_grid = match &flags.gamma_grid {
        Some(s) => s.parse()?,
        None => DEFAULT_GAMMA_GRID,
    };
    let config = RunConfig {
        command,
        n_sites,
        boundary,
        rates,
        initial_state: flags.init,
        t_max: flags.tmax.unwrap_or(DEFAULT_TMAX),
        dt: flags.dt.unwrap_or(DEFAULT_DT),
        gamma_grid,
        output_path: flags.out,
        tol: flags.tol.unwrap_or(crate::entanglement::DEFAULT_BIRTH_TOL),
        window: flags.window.unwrap_or(crate::entanglement::DEFAULT_BIRTH_WINDOW),
    };
    validate(&config)?;
    Ok(config)
}

fn validate(c: &RunConfig) -> Result<(), CliError> {
    c.chain()?;
    if !(c.dt > 0.0 && c.dt.is_finite()) {
        return Err(CliError::Usage(format!("dt must be positive, got {}", c.dt)));
    }
    if !(c.t_max >= c.dt && c.t_max.is_finite()) {
        return Err(CliError::Usage(format!("tmax must be at least dt, got {}", c.t_max)));
    }
    let g = c.gamma_grid;
    if !(g.step > 0.0 && g.start > 0.0 && g.stop < 1.0 && g.start <= g.stop) {
        return Err(CliError::Usage(format!(
            "gamma grid {}:{}:{} must satisfy 0 < start <= stop < 1 and step > 0",
            g.start, g.stop, g.step
        )));
    }
    if let Some(init) = &c.initial_state {
        if init.len() != c.n_sites || !init.chars().all(|ch| ch == 'e' || ch == 'g') {
            return Err(CliError::Usage(format!(
                "initial state {init:?} must be {} letters from {{e, g}}",
                c.n_sites
            )));
        }
    }
    if !(c.tol > 0.0) {
        return Err(CliError::Usage(format!("tol must be positive, got {}", c.tol)));
    }
    if c.window == 0 {
        return Err(CliError::Usage("window must be at least 1".into()));
    }
    Ok(())
}
