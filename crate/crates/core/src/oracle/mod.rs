//! Exact diagonalization on a truncated Fock space: the full, approximating and
//! residual Hamiltonians as matrices, their trace pressures, and the operator
//! inequalities between them.

mod checks;
mod fock;
mod operators;

use alloc::vec::Vec;

use serde::Serialize;

pub use checks::{
    check_superstability, check_variational_chain, coupling_constant, decomposition_report, gibbs_expectation,
    pair_number_bound, residual_report, trace_pressure, truncation_study, variational_chain, Builder, ChainReport,
    DecompositionReport, FirstSlack, PairNumberCase, ResidualPoint, ResidualSign, SecondSlack, SuperstabilityReport,
    TruncationRow, INEQUALITY_TOL,
};
pub use fock::{Fock, FockSpec, Sector, DEFAULT_MAX_DIM};
pub use operators::{build_hamiltonian, build_operator, HamiltonianKind, OperatorLabel, OperatorMatrix, Which};

use crate::error::Result;
use crate::model::{CouplingProfile, Mode, Model, ProfileKind};
use crate::pressure::{OrderPoint, ThermoPoint};

/// Identities must hold to this max-norm.
pub const IDENTITY_TOL: f64 = 1e-12;

/// One oracle configuration: model, mode set, cutoff, volume and grids.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleInstance {
    pub model: Model,
    pub modes: Vec<Mode>,
    pub n_max: u32,
    pub headroom: u32,
    pub volume: f64,
    pub thermo: ThermoPoint,
    pub eta: f64,
    pub q_grid: Vec<f64>,
    pub rho_grid: Vec<f64>,
    /// Point for the closed-form comparison and the decomposition identities.
    pub study_point: OrderPoint,
    pub study_cutoffs: Vec<u32>,
    /// Build the residual with the sign of `u` flipped while judging it by the
    /// original sign. A negative control: the suite must then fail.
    pub corrupt_residual_sign: bool,
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

impl OracleInstance {
    /// Modes `{0, ±1}` on a line, gaussian profile, `n_max = 10`.
    pub fn desk(u: f64) -> Result<Self> {
        let profile = CouplingProfile::with_default_decay(ProfileKind::Gaussian { a: 1.0 }, 1)?;
        Ok(Self {
            model: Model::new(1, 0.5, u, 1.0, profile)?,
            modes: FockSpec::axis_modes(core::f64::consts::TAU, 1),
            n_max: 10,
            headroom: 2,
            volume: 2.0,
            thermo: ThermoPoint::new(1.0, -1.0)?,
            eta: 0.1,
            q_grid: linspace(0.0, 0.7, 8),
            rho_grid: linspace(0.0, 1.4, 8),
            study_point: OrderPoint::new(0.3, 0.4, 0.1)?,
            study_cutoffs: alloc::vec![6, 9, 12],
            corrupt_residual_sign: false,
        })
    }

    pub fn fock_spec(&self) -> FockSpec {
        FockSpec { headroom: self.headroom, ..FockSpec::new(self.modes.clone(), self.n_max) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub instance: OracleInstance,
    pub working_dim: usize,
    pub extended_dim: usize,
    pub superstability: SuperstabilityReport,
    pub pair_number: Vec<PairNumberCase>,
    pub residual: Vec<ResidualPoint>,
    pub decomposition: DecompositionReport,
    pub chain: ChainReport,
    pub truncation: Vec<TruncationRow>,
    /// Cutoff growth where the closed form diverges; qualitative only.
    pub infeasible_growth: Vec<TruncationRow>,
    pub passed: bool,
}

/// Run every check on one instance.
pub fn run_suite(instance: &OracleInstance) -> Result<OracleReport> {
    let fock = Fock::new(instance.fock_spec())?;
    let model = &instance.model;
    let v = instance.volume;
    let tp = &instance.thermo;
    let superstability = check_superstability(&fock, model, v)?;
    let pair_number = pair_number_bound(&fock, model)?;
    let expected = ResidualSign::for_coupling(model.u());
    let residual_model = if instance.corrupt_residual_sign { model.with_u(-model.u())? } else { *model };
    let residual = residual_report(&fock, &residual_model, v, &instance.q_grid, expected)?;
    let sp = &instance.study_point;
    let decomposition = decomposition_report(&fock, model, v, sp.q, sp.rho, sp.eta)?;
    let chain = variational_chain(&fock, model, tp, v, &instance.q_grid, &instance.rho_grid, instance.eta)?;
    let truncation = truncation_study(model, &instance.modes, &instance.study_cutoffs, tp, v, sp)?;
    // f(0,ρ) ≤ |u|q: the closed form is infinite
    let f0 = model.v() * sp.rho - tp.mu;
    let beyond = OrderPoint { q: 1.5 * f0 / model.u().abs().max(1e-300), ..*sp };
    let infeasible_growth = if model.u() != 0.0 {
        truncation_study(model, &instance.modes, &instance.study_cutoffs, tp, v, &beyond)?
    } else {
        Vec::new()
    };
    let passed = superstability.passed
        && pair_number.iter().all(|c| c.min_eig >= -INEQUALITY_TOL)
        && residual.iter().all(|r| r.passed)
        && decomposition.full_minus_parts <= IDENTITY_TOL
        && decomposition.approx_difference <= IDENTITY_TOL
        && decomposition.max_hermiticity_error <= IDENTITY_TOL
        && chain.passed;
    Ok(OracleReport {
        instance: instance.clone(),
        working_dim: fock.working_dim(),
        extended_dim: fock.extended_dim(),
        superstability,
        pair_number,
        residual,
        decomposition,
        chain,
        truncation,
        infeasible_growth,
        passed,
    })
}
