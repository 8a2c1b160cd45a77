use alloc::vec::Vec;

#[allow(unused_imports)] // float math for no_std builds; shadowed by inherent methods when std is linked
use num_traits::Float;
use serde::Serialize;

use super::optimize::{outer_opt_from, SolveResult};
use super::SolverConfig;
use crate::error::{Error, Result};
use crate::model::Model;
use crate::pressure::ThermoPoint;

/// Limit estimate of a sequence sampled at `η_n = η₀ fⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extrapolated {
    pub value: f64,
    pub error: f64,
    /// Detected `a` in `g(η) ≈ g(0) + C η^a`, when the differences are geometric.
    pub exponent: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Limits {
    pub pressure: Extrapolated,
    pub q_limit: Extrapolated,
    pub rho_limit: Extrapolated,
    pub m0: Extrapolated,
    pub gap_limit: Extrapolated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuationResult {
    pub eta_sequence: Vec<f64>,
    pub steps: Vec<SolveResult>,
    pub limits: Limits,
    pub extrapolation_order: Option<f64>,
}

/// Tail-sum extrapolation from the last three samples, assuming successive
/// differences shrink geometrically.
fn tail_estimate(g: &[f64], factor: f64) -> (f64, Option<f64>) {
    let n = g.len();
    let last = g[n - 1];
    let d1 = last - g[n - 2];
    let d0 = g[n - 2] - g[n - 3];
    let noise = 1e-13 * last.abs().max(g[n - 2].abs()).max(1e-300);
    if d1.abs() <= noise || d0.abs() <= noise {
        return (last, None);
    }
    let ratio = d1 / d0;
    if !(ratio > 0.0 && ratio < 0.99) {
        return (last, None);
    }
    (last + d1 * ratio / (1.0 - ratio), Some(ratio.ln() / factor.ln()))
}

pub(crate) fn extrapolate(g: &[f64], factor: f64) -> Extrapolated {
    let n = g.len();
    match n {
        0 => Extrapolated { value: f64::NAN, error: f64::INFINITY, exponent: None },
        1 => Extrapolated { value: g[0], error: f64::INFINITY, exponent: None },
        2 => Extrapolated { value: g[1], error: (g[1] - g[0]).abs(), exponent: None },
        _ => {
            let (value, exponent) = tail_estimate(g, factor);
            let error = if n >= 4 {
                let (previous, _) = tail_estimate(&g[..n - 1], factor);
                (value - previous).abs()
            } else {
                (g[n - 1] - g[n - 2]).abs()
            };
            Extrapolated { value, error, exponent }
        }
    }
}

/// Solve along `η_n = η₀ fⁿ` down to the floor, warm-starting each step, and
/// extrapolate the `η → 0` limits.
pub fn eta_continuation(model: &Model, tp: &ThermoPoint, cfg: &SolverConfig) -> Result<ContinuationResult> {
    cfg.validate()?;
    let mut eta_sequence = Vec::new();
    let mut eta = cfg.eta0;
    while eta >= cfg.eta_floor * (1.0 - 1e-12) {
        eta_sequence.push(eta);
        eta *= cfg.eta_factor;
    }
    let mut steps: Vec<SolveResult> = Vec::with_capacity(eta_sequence.len());
    for &eta in &eta_sequence {
        let warm = steps.last().map(|s| s.q_bar);
        let step = outer_opt_from(model, tp, eta, warm, cfg)?;
        check_cauchy(&steps, &step)?;
        steps.push(step);
    }
    let series = |f: fn(&SolveResult) -> f64| steps.iter().map(f).collect::<Vec<_>>();
    let factor = cfg.eta_factor;
    let mut gap_limit = extrapolate(&series(|s| s.gap), factor);
    gap_limit.value = gap_limit.value.max(0.0);
    let mut q_limit = extrapolate(&series(|s| s.q_bar), factor);
    q_limit.value = q_limit.value.max(0.0);
    let mut m0 = extrapolate(&series(|s| s.rho0), factor);
    m0.value = m0.value.max(0.0);
    let limits = Limits {
        pressure: extrapolate(&series(|s| s.pressure), factor),
        q_limit,
        rho_limit: extrapolate(&series(|s| s.rho_bar), factor),
        m0,
        gap_limit,
    };
    let extrapolation_order = limits.q_limit.exponent.or(limits.pressure.exponent);
    Ok(ContinuationResult { eta_sequence, steps, limits, extrapolation_order })
}

/// Successive optima must not move apart: a step may not jump by more than ten
/// times the previous jump once the jumps are above noise.
fn check_cauchy(steps: &[SolveResult], next: &SolveResult) -> Result<()> {
    let n = steps.len();
    if n < 2 {
        return Ok(());
    }
    let (a, b) = (&steps[n - 2], &steps[n - 1]);
    for (x0, x1, x2) in [(a.q_bar, b.q_bar, next.q_bar), (a.rho_bar, b.rho_bar, next.rho_bar)] {
        let previous = (x1 - x0).abs();
        let current = (x2 - x1).abs();
        if current > 1e-6 * (1.0 + x2.abs()) && current > 10.0 * previous {
            return Err(Error::ContinuationDiverged { eta: next.eta });
        }
    }
    Ok(())
}
