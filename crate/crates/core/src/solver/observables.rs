use alloc::vec::Vec;

#[allow(unused_imports)] // float math for no_std builds; shadowed by inherent methods when std is linked
use num_traits::Float;
use serde::Serialize;

use super::continuation::ContinuationResult;
use super::mean_field::critical_density;
use super::SolverConfig;
use crate::error::Result;
use crate::model::Model;
use crate::pressure::ThermoPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseLabel {
    Normal,
    PairOnly,
    Condensed,
    MfCondensed,
}

impl PhaseLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            PhaseLabel::Normal => "normal",
            PhaseLabel::PairOnly => "pair_only",
            PhaseLabel::Condensed => "condensed",
            PhaseLabel::MfCondensed => "mf_condensed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumPoint {
    pub k: f64,
    pub e_excit: f64,
}

/// `E(k, q̄, ρ̄)` at the extrapolated limits, for each `|k|` in `k_grid`.
pub fn excitation_spectrum(model: &Model, tp: &ThermoPoint, continuation: &ContinuationResult, k_grid: &[f64]) -> Vec<SpectrumPoint> {
    let q = continuation.limits.q_limit.value;
    let rho = continuation.limits.rho_limit.value;
    let w = model.u().abs();
    let sigma = model.v() * rho - tp.mu - w * q;
    k_grid
        .iter()
        .map(|&k| {
            let r = k.abs();
            let f = model.epsilon_radial(r) - tp.mu + model.v() * rho;
            let h = w * q * model.profile().radial(r);
            // the extrapolated limit may undershoot the gap edge by rounding
            let lower = (model.epsilon_radial(r) + sigma + w * q * model.profile().one_minus_radial(r)).max(0.0);
            SpectrumPoint { k, e_excit: (lower * (f + h)).sqrt() }
        })
        .collect()
}

/// Phase from the extrapolated limits. For `u ≤ 0` the mean-field criterion
/// `μ ≷ v ρ_c(β)` decides.
pub fn classify_phase(model: &Model, tp: &ThermoPoint, continuation: &ContinuationResult, cfg: &SolverConfig) -> Result<PhaseLabel> {
    if model.u() <= 0.0 {
        let rho_c = critical_density(model, tp.beta, &cfg.quad)?;
        return Ok(if tp.mu > model.v() * rho_c { PhaseLabel::MfCondensed } else { PhaseLabel::Normal });
    }
    let condensate = continuation.limits.m0.value > cfg.m0_tol;
    let pairing = continuation.limits.q_limit.value > cfg.q_tol;
    Ok(match (condensate, pairing) {
        (true, _) => PhaseLabel::Condensed,
        (false, true) => PhaseLabel::PairOnly,
        (false, false) => PhaseLabel::Normal,
    })
}
