use std::io::Write;
use std::path::Path;

use pbh_core::oracle::{run_suite, OracleInstance};
use pbh_core::pressure::ThermoPoint;
use pbh_core::solver::{
    classify_phase, eta_continuation, excitation_spectrum, SolveResult, SolveStatus, SolverConfig,
};
use pbh_core::{Error, Model};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ConfigError, Format, RunConfig};
use crate::output::fmt_f64;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Config = 1,
    Infeasible = 2,
    NonConvergence = 3,
    OracleFailure = 4,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn for_error(err: &Error) -> Exit {
        match err {
            Error::InvalidModel(_) | Error::InvalidParameter(_) | Error::DimensionExceeded { .. } => Exit::Config,
            Error::InfeasiblePoint(_) | Error::BracketFailure(_) | Error::UnstableMode { .. } => Exit::Infeasible,
            Error::ContinuationDiverged { .. }
            | Error::StationarityViolated { .. }
            | Error::QuadratureFailure { .. }
            | Error::TailNotConverged { .. }
            | Error::EigenFailure(_) => Exit::NonConvergence,
            Error::InequalityViolated(_) => Exit::OracleFailure,
        }
    }

    fn for_status(status: SolveStatus) -> Exit {
        match status {
            SolveStatus::Converged | SolveStatus::BoundaryMinimum => Exit::Ok,
            SolveStatus::Infeasible => Exit::Infeasible,
            SolveStatus::MaxIter => Exit::NonConvergence,
        }
    }
}

/// A command failure: what to print and which code to exit with.
#[derive(Debug)]
pub struct Failure {
    pub exit: Exit,
    pub message: String,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure { exit: Exit::Config, message: e.to_string() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { exit: Exit::for_error(&e), message: e.to_string() }
    }
}

fn io_failure(path: Option<&Path>, e: std::io::Error) -> Failure {
    let message = match path {
        Some(p) => format!("{}: {e}", p.display()),
        None => format!("stdout: {e}"),
    };
    Failure { exit: Exit::Config, message }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Residuals {
    pub el1: f64,
    pub el2: f64,
}

/// Extrapolated η→0 observables at one `(β, μ)`.
#[derive(Debug, Clone, Serialize)]
pub struct PointResult {
    pub beta: f64,
    pub mu: f64,
    pub pressure: f64,
    pub q_bar: f64,
    pub rho_bar: f64,
    pub m0: f64,
    pub gap: f64,
    pub phase: &'static str,
    pub status: SolveStatus,
    /// At the smallest source reached.
    pub residuals: Residuals,
    pub eta_trace: Vec<SolveResult>,
}

pub fn solve_point(model: &Model, beta: f64, mu: f64, cfg: &SolverConfig) -> Result<PointResult, Error> {
    let tp = ThermoPoint::new(beta, mu)?;
    let run = eta_continuation(model, &tp, cfg)?;
    let phase = classify_phase(model, &tp, &run, cfg)?;
    let last = run.steps.last().ok_or(Error::ContinuationDiverged { eta: cfg.eta0 })?;
    Ok(PointResult {
        beta,
        mu,
        pressure: run.limits.pressure.value,
        q_bar: run.limits.q_limit.value,
        rho_bar: run.limits.rho_limit.value,
        m0: run.limits.m0.value,
        gap: run.limits.gap_limit.value,
        phase: phase.as_str(),
        status: last.status,
        residuals: Residuals { el1: last.residual_el1, el2: last.residual_el2 },
        eta_trace: run.steps.clone(),
    })
}

fn single_point(cfg: &RunConfig, what: &str) -> Result<(f64, f64), Failure> {
    match (cfg.betas.as_slice(), cfg.mus.as_slice()) {
        ([beta], [mu]) => Ok((*beta, *mu)),
        _ => Err(Failure { exit: Exit::Config, message: format!("{what} takes a single beta and mu") }),
    }
}

fn emit(cfg: &RunConfig, bytes: &[u8]) -> Result<(), Failure> {
    match &cfg.out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| io_failure(Some(path), e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes).and_then(|_| stdout.flush()).map_err(|e| io_failure(None, e))
        }
    }
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report serializes");
    bytes.push(b'\n');
    bytes
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<Exit, Failure> {
    let (beta, mu) = single_point(cfg, "solve")?;
    if cfg.format == Some(Format::Csv) {
        return Err(Failure { exit: Exit::Config, message: "solve writes json only".into() });
    }
    let point = solve_point(&cfg.model, beta, mu, &cfg.solver)?;
    emit(cfg, &json_bytes(&point))?;
    Ok(Exit::for_status(point.status))
}

#[derive(Serialize)]
struct ScanRow {
    beta: f64,
    mu: f64,
    pressure: f64,
    q_bar: f64,
    rho_bar: f64,
    m0: f64,
    gap: f64,
    phase: &'static str,
}

impl ScanRow {
    fn new(beta: f64, mu: f64, result: &Result<PointResult, Error>) -> Self {
        match result {
            Ok(p) => ScanRow {
                beta,
                mu,
                pressure: p.pressure,
                q_bar: p.q_bar,
                rho_bar: p.rho_bar,
                m0: p.m0,
                gap: p.gap,
                phase: p.phase,
            },
            Err(_) => ScanRow {
                beta,
                mu,
                pressure: f64::NAN,
                q_bar: f64::NAN,
                rho_bar: f64::NAN,
                m0: f64::NAN,
                gap: f64::NAN,
                phase: "error",
            },
        }
    }

    fn record(&self) -> [String; 8] {
        [
            fmt_f64(self.beta),
            fmt_f64(self.mu),
            fmt_f64(self.pressure),
            fmt_f64(self.q_bar),
            fmt_f64(self.rho_bar),
            fmt_f64(self.m0),
            fmt_f64(self.gap),
            self.phase.to_string(),
        ]
    }
}

pub const SCAN_HEADER: [&str; 8] = ["beta", "mu", "pressure", "q_bar", "rho_bar", "m0", "gap", "phase"];

/// Worker count from `PBH_THREADS`; `0` lets rayon decide.
pub fn thread_cap() -> Result<usize, Failure> {
    match std::env::var("PBH_THREADS") {
        Ok(raw) => raw.trim().parse::<usize>().ok().filter(|n| *n > 0).ok_or_else(|| Failure {
            exit: Exit::Config,
            message: format!("PBH_THREADS: expected a positive integer, got `{raw}`"),
        }),
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(e) => Err(Failure { exit: Exit::Config, message: format!("PBH_THREADS: {e}") }),
    }
}

pub fn cmd_scan(cfg: &RunConfig) -> Result<Exit, Failure> {
    let grid = cfg.grid();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_cap()?)
        .build()
        .map_err(|e| Failure { exit: Exit::Config, message: format!("worker pool: {e}") })?;
    let results: Vec<Result<PointResult, Error>> = pool.install(|| {
        grid.par_iter().map(|&(beta, mu)| solve_point(&cfg.model, beta, mu, &cfg.solver)).collect()
    });

    let mut first_error = None;
    for (&(beta, mu), result) in grid.iter().zip(&results) {
        if let Err(e) = result {
            eprintln!("warning: beta = {beta}, mu = {mu}: {e}");
            first_error.get_or_insert_with(|| e.clone());
        }
    }
    let rows: Vec<ScanRow> = grid.iter().zip(&results).map(|(&(b, m), r)| ScanRow::new(b, m, r)).collect();
    let bytes = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            let written = writer.write_record(SCAN_HEADER).and_then(|_| {
                rows.iter().try_for_each(|row| writer.write_record(row.record()))
            });
            written.map_err(|e| Failure { exit: Exit::Config, message: format!("csv: {e}") })?;
            writer.into_inner().map_err(|e| Failure { exit: Exit::Config, message: format!("csv: {e}") })?
        }
        Format::Json => json_bytes(&rows),
    };
    emit(cfg, &bytes)?;
    match first_error {
        Some(e) if results.iter().all(|r| r.is_err()) => Ok(Exit::for_error(&e)),
        _ => Ok(Exit::Ok),
    }
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Exit, Failure> {
    let (beta, mu) = single_point(cfg, "spectrum")?;
    let tp = ThermoPoint::new(beta, mu)?;
    let run = eta_continuation(&cfg.model, &tp, &cfg.solver)?;
    let points = excitation_spectrum(&cfg.model, &tp, &run, &cfg.k_grid);
    let bytes = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            let written = writer
                .write_record(["k", "e_excit"])
                .and_then(|_| points.iter().try_for_each(|p| writer.write_record([fmt_f64(p.k), fmt_f64(p.e_excit)])));
            written.map_err(|e| Failure { exit: Exit::Config, message: format!("csv: {e}") })?;
            writer.into_inner().map_err(|e| Failure { exit: Exit::Config, message: format!("csv: {e}") })?
        }
        Format::Json => json_bytes(&points),
    };
    emit(cfg, &bytes)?;
    let status = run.steps.last().map_or(SolveStatus::MaxIter, |s| s.status);
    Ok(Exit::for_status(status))
}

/// The default instance with any configured overrides applied.
pub fn oracle_instance(cfg: &RunConfig, negative_control: bool) -> Result<OracleInstance, Failure> {
    let (beta, mu) = single_point(cfg, "oracle")?;
    let mut instance = OracleInstance::desk(cfg.model.u())?;
    instance.model = cfg.model;
    instance.thermo = ThermoPoint::new(beta, mu)?;
    if let Some(n_max) = cfg.n_max {
        instance.n_max = n_max;
    }
    if let Some(volume) = cfg.volume {
        instance.volume = volume;
    }
    if let Some(eta) = cfg.oracle_eta {
        instance.eta = eta;
    }
    instance.corrupt_residual_sign = negative_control;
    Ok(instance)
}

pub fn cmd_oracle(cfg: &RunConfig, negative_control: bool) -> Result<Exit, Failure> {
    if cfg.format == Some(Format::Csv) {
        return Err(Failure { exit: Exit::Config, message: "oracle writes json only".into() });
    }
    let instance = oracle_instance(cfg, negative_control)?;
    let report = run_suite(&instance)?;
    emit(cfg, &json_bytes(&report))?;
    Ok(if report.passed { Exit::Ok } else { Exit::OracleFailure })
}
