//! Command-line front end: batch solves, phase scans, spectra and oracle runs.

pub mod commands;
pub mod config;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{Exit, Failure, PointResult};
pub use config::{ConfigError, Format, ModelDefaults, RunConfig, Settings};
pub use output::fmt_f64;

#[derive(Parser, Debug)]
#[command(name = "pbh", version, about = "Pair boson Hamiltonian: pressure, phases and oracle checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Source continuation at one (beta, mu), written as JSON.
    Solve(ModelArgs),
    /// Phase diagram over a beta list and a mu range.
    Scan(ModelArgs),
    /// Excitation energies on a grid of |k|.
    Spectrum(ModelArgs),
    /// Truncated Fock-space checks of the operator inequalities.
    Oracle(OracleArgs),
}

/// Every flag mirrors a config key; flags win over the file.
#[derive(Args, Debug, Default)]
pub struct ModelArgs {
    /// Config file of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated inverse temperatures.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<String>,
    /// start:stop:count
    #[arg(long, allow_hyphen_values = true)]
    pub mu_range: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub u: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub v: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub mass: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub dim: Option<String>,
    /// gaussian:a | power:c:p | delta
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub eta0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub eta_floor: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub eta_factor: Option<String>,
    /// Euler–Lagrange residual tolerance.
    #[arg(long, allow_hyphen_values = true)]
    pub tol: Option<String>,
    /// start:stop:count for the spectrum.
    #[arg(long, allow_hyphen_values = true)]
    pub k_range: Option<String>,
    /// csv | json
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Per-mode occupation cutoff.
    #[arg(long, allow_hyphen_values = true)]
    pub n_max: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub volume: Option<String>,
    /// Source strength used by the inequality chain.
    #[arg(long, allow_hyphen_values = true)]
    pub eta: Option<String>,
    /// Build the residual with the wrong sign of u; the run must fail.
    #[arg(long)]
    pub negative_control: bool,
}

impl ModelArgs {
    fn settings(&self) -> Result<Settings, ConfigError> {
        let mut settings = match &self.config {
            Some(path) => Settings::parse_file(path)?,
            None => Settings::default(),
        };
        let out = self.out.as_ref().map(|p| p.to_string_lossy().into_owned());
        let flags = [
            ("beta", "beta", &self.beta),
            ("mu", "mu", &self.mu),
            ("mu_range", "mu-range", &self.mu_range),
            ("u", "u", &self.u),
            ("v", "v", &self.v),
            ("mass", "mass", &self.mass),
            ("dim", "dim", &self.dim),
            ("profile", "profile", &self.profile),
            ("eta0", "eta0", &self.eta0),
            ("eta_floor", "eta-floor", &self.eta_floor),
            ("eta_factor", "eta-factor", &self.eta_factor),
            ("tol", "tol", &self.tol),
            ("k_range", "k-range", &self.k_range),
            ("format", "format", &self.format),
            ("out", "out", &out),
        ];
        for (key, flag, value) in flags {
            if let Some(value) = value {
                settings.set_flag(key, flag, value);
            }
        }
        Ok(settings)
    }
}

fn physics_config(args: &ModelArgs) -> Result<RunConfig, Failure> {
    let mut settings = args.settings()?;
    settings.prefer_flag("mu", "mu_range");
    Ok(RunConfig::from_settings(&settings, ModelDefaults::PHYSICS, 0.0)?)
}

fn oracle_config(args: &OracleArgs) -> Result<RunConfig, Failure> {
    let mut settings = args.model.settings()?;
    settings.prefer_flag("mu", "mu_range");
    for (key, flag, value) in [("n_max", "n-max", &args.n_max), ("volume", "volume", &args.volume), ("oracle_eta", "eta", &args.eta)] {
        if let Some(value) = value {
            settings.set_flag(key, flag, value);
        }
    }
    Ok(RunConfig::from_settings(&settings, ModelDefaults::ORACLE, -1.0)?)
}

fn dispatch(command: &Command) -> Result<Exit, Failure> {
    match command {
        Command::Solve(args) => commands::cmd_solve(&physics_config(args)?),
        Command::Scan(args) => commands::cmd_scan(&physics_config(args)?),
        Command::Spectrum(args) => commands::cmd_spectrum(&physics_config(args)?),
        Command::Oracle(args) => commands::cmd_oracle(&oracle_config(args)?, args.negative_control),
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Exit::Config.code() } else { Exit::Ok.code() };
        }
    };
    match dispatch(&cli.command) {
        Ok(exit) => exit.code(),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.exit.code()
        }
    }
}
