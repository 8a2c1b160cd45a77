//! Sup-inf optimizer over `(q, ρ)`, source continuation and observables.

mod continuation;
mod mean_field;
mod observables;
mod optimize;

pub use continuation::{eta_continuation, ContinuationResult, Extrapolated, Limits};
pub use mean_field::{bose_density, critical_density, mf_density, mf_pressure};
pub use observables::{classify_phase, excitation_spectrum, PhaseLabel, SpectrumPoint};
pub use optimize::{
    el_residuals, inf_rho, outer_opt, outer_opt_from, total_dq, Diagnostics, InnerResult, SolveResult, SolveStatus,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::QuadratureConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    pub quad: QuadratureConfig,
    /// Euler–Lagrange residual bound for `converged` status.
    pub tol: f64,
    pub max_iter: usize,
    /// Log-spaced points in the initial `q` scan.
    pub scan_points: usize,
    pub eta0: f64,
    pub eta_factor: f64,
    pub eta_floor: f64,
    /// Thresholds used by phase classification.
    pub m0_tol: f64,
    pub q_tol: f64,
    pub gap_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            quad: QuadratureConfig::with_tol(1e-11, 1e-13),
            tol: 1e-9,
            max_iter: 200,
            scan_points: 32,
            eta0: 1e-1,
            eta_factor: 0.5,
            eta_floor: 1e-6,
            m0_tol: 1e-4,
            q_tol: 1e-4,
            gap_tol: 1e-4,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        self.quad.validate()?;
        if !(self.tol > 0.0) || self.max_iter == 0 || self.scan_points < 2 {
            return Err(Error::InvalidParameter("solver tolerance and budgets must be positive".into()));
        }
        if !(self.eta0 > self.eta_floor) || !(self.eta_floor > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "need eta0 > eta_floor > 0, got eta0 = {}, eta_floor = {}",
                self.eta0, self.eta_floor
            )));
        }
        if !(self.eta_factor > 0.0 && self.eta_factor < 1.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "eta_factor must lie in (0, 1), got {}",
                self.eta_factor
            )));
        }
        Ok(())
    }
}
