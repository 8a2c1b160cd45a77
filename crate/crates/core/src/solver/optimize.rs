use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // float math for no_std builds; shadowed by inherent methods when std is linked
use num_traits::Float;
use serde::Serialize;

use super::SolverConfig;
use crate::error::{Error, Result};
use crate::model::Model;
use crate::pressure::{
    check_feasible_tl, f_radial, grad_q, grad_rho, pressure_tl, radial_scales, sigma_gap, source_denominator,
    OrderPoint, ThermoPoint,
};
use crate::quad::{integrate_radial, QuadratureConfig};
use crate::roots::{brent_min, brent_root};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InnerResult {
    pub rho_bar: f64,
    pub value: f64,
    /// Minimum sits on the edge `σ = 0` (or `ρ = 0`) of the feasible set.
    pub boundary: bool,
    pub iterations: usize,
    pub bracket: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    BoundaryMinimum,
    Infeasible,
    MaxIter,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Diagnostics {
    pub inner_solves: usize,
    pub inner_iterations: usize,
    pub outer_iterations: usize,
    pub q_bracket: (f64, f64),
    pub rho_bracket: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveResult {
    pub q_bar: f64,
    pub rho_bar: f64,
    pub pressure: f64,
    pub rho0: f64,
    pub gap: f64,
    pub residual_el1: f64,
    pub residual_el2: f64,
    pub eta: f64,
    pub status: SolveStatus,
    pub diagnostics: Diagnostics,
}

/// Lowest density keeping `σ ≥ 0` and `ρ ≥ 0`.
fn rho_floor(model: &Model, tp: &ThermoPoint, q: f64) -> f64 {
    let mut rho = ((tp.mu + model.u().abs() * q) / model.v()).max(0.0);
    while sigma_gap(model, tp, &OrderPoint { q, rho, eta: 0.0 }) < 0.0 {
        rho = rho.next_up();
    }
    rho
}

/// Minimize `ρ ↦ p(q, ρ, η)` over the feasible half-line. The pressure is
/// strictly convex in `ρ`, so the minimizer is the root of `∂p/∂ρ` or the edge.
pub fn inf_rho(model: &Model, tp: &ThermoPoint, q: f64, eta: f64, cfg: &SolverConfig) -> Result<InnerResult> {
    let quad = &cfg.quad;
    let lo = rho_floor(model, tp, q);
    let at = |rho: f64| OrderPoint { q, rho, eta };
    let mut iterations = 0usize;
    let mut grad = |rho: f64| {
        iterations += 1;
        grad_rho(model, tp, &at(rho), quad)
    };

    if check_feasible_tl(model, tp, &at(lo)).is_ok() {
        match grad(lo) {
            Ok(g) if g >= 0.0 => {
                let value = pressure_tl(model, tp, &at(lo), quad)?;
                return Ok(InnerResult { rho_bar: lo, value, boundary: true, iterations: 1, bracket: (lo, lo) });
            }
            // a divergent density integral at the edge means the slope is -inf there
            Ok(_) | Err(Error::QuadratureFailure { .. }) => {}
            Err(e) => return Err(e),
        }
    }

    let mut step = (1e-3f64).max(0.1 * lo);
    let mut last_negative = None;
    let mut found = None;
    for _ in 0..cfg.max_iter {
        let g = grad(lo + step)?;
        if g > 0.0 {
            found = Some(g);
            break;
        }
        last_negative = Some((step, g));
        step *= 2.0;
    }
    let g_hi = found.ok_or_else(|| Error::BracketFailure(format!("∂p/∂ρ stays negative up to ρ = {}", lo + step)))?;
    let t_hi = step;

    let (t_lo, g_lo) = match last_negative {
        Some(pair) => pair,
        None => {
            let mut t = 0.5 * t_hi;
            let mut pair = None;
            for _ in 0..cfg.max_iter {
                let g = grad(lo + t)?;
                if g < 0.0 {
                    pair = Some((t, g));
                    break;
                }
                if g == 0.0 || lo + t == lo {
                    break;
                }
                t *= 0.25;
            }
            match pair {
                Some(pair) => pair,
                None if lo + t == lo || t < 1e-300 => {
                    let value = pressure_tl(model, tp, &at(lo + t), quad)?;
                    return Ok(InnerResult { rho_bar: lo + t, value, boundary: true, iterations, bracket: (lo, lo + t_hi) });
                }
                None => (t, 0.0),
            }
        }
    };

    let root = brent_root(|t| grad(lo + t), t_lo, t_hi, g_lo, g_hi, 0.0, cfg.max_iter)?;
    let rho_bar = lo + root.x;
    let value = pressure_tl(model, tp, &at(rho_bar), quad)?;
    Ok(InnerResult { rho_bar, value, boundary: false, iterations: iterations + root.iterations, bracket: (lo + t_lo, lo + t_hi) })
}

/// `∂p/∂q + ∂p/∂ρ` at `(q, ρ̄)`: the derivative of `q ↦ p(q, ρ̄(q), η)` when `ρ̄` is stationary.
pub fn total_dq(model: &Model, tp: &ThermoPoint, q: f64, eta: f64, rho_bar: f64, cfg: &SolverConfig) -> Result<f64> {
    let op = OrderPoint { q, rho: rho_bar, eta };
    let g_rho = grad_rho(model, tp, &op, &cfg.quad)?;
    if g_rho.abs() > 10.0 * cfg.tol {
        return Err(Error::StationarityViolated { residual: g_rho.abs() });
    }
    Ok(grad_q(model, tp, &op, &cfg.quad)? + g_rho)
}

/// Euler–Lagrange residuals `(r1, r2)` in the `coth` form. `r1 = (∂p/∂ρ)/v` and
/// `r2 = -(∂p/∂q)/u`; `r2` is identically zero when `u = 0`.
pub fn el_residuals(model: &Model, tp: &ThermoPoint, op: &OrderPoint, quad: &QuadratureConfig) -> Result<(f64, f64)> {
    check_feasible_tl(model, tp, op)?;
    let beta = tp.beta;
    let measure = model.radial_measure();
    let power = model.dim() as i32 - 1;
    let w = model.u().abs();
    let mode = |r: f64| {
        let f = f_radial(model, tp, op, r);
        let lam = model.profile().radial(r);
        let h = w * op.q * lam;
        let lower = model.epsilon_radial(r) + sigma_gap(model, tp, op) + w * op.q * model.profile().one_minus_radial(r);
        let e = (lower.max(0.0) * (f + h)).sqrt();
        let coth = 1.0 / libm::tanh(0.5 * beta * e);
        (f, h, e, lam, coth)
    };
    let scales = radial_scales(model, tp, op);
    let density = integrate_radial(
        |r| {
            let (f, h, e, _, coth) = mode(r);
            // (f/E) coth - 1 = (f/E)(coth - 1) + h²/(E(E+f))
            let value = (f / e) * (coth - 1.0) + h * h / (e * (e + f));
            if value == 0.0 { 0.0 } else { measure * r.powi(power) * value }
        },
        &scales,
        quad,
    )?
    .value;
    let source = if op.eta == 0.0 {
        0.0
    } else {
        let d = source_denominator(model, tp, op);
        op.eta * op.eta / (d * d)
    };
    let r1 = op.rho - 0.5 * density - source;
    let r2 = if model.u() == 0.0 {
        0.0
    } else {
        let pairing = if op.q == 0.0 {
            0.0
        } else {
            integrate_radial(
                |r| {
                    let (_, _, e, lam, coth) = mode(r);
                    if lam == 0.0 { 0.0 } else { measure * r.powi(power) * lam * lam * coth / e }
                },
                &scales,
                quad,
            )?
            .value
        };
        op.q - 0.5 * model.u() * op.q * pairing - source
    };
    Ok((r1, r2))
}

struct Outer<'a> {
    model: &'a Model,
    tp: &'a ThermoPoint,
    eta: f64,
    cfg: &'a SolverConfig,
    /// +1 maximizes over `q` (attractive), -1 minimizes (repulsive)
    sense: f64,
    inner_solves: usize,
    inner_iterations: usize,
}

impl Outer<'_> {
    fn inner(&mut self, q: f64) -> Result<InnerResult> {
        let r = inf_rho(self.model, self.tp, q, self.eta, self.cfg)?;
        self.inner_solves += 1;
        self.inner_iterations += r.iterations;
        Ok(r)
    }

    /// Slope of the objective `sense * g(q)` at an interior inner minimizer.
    fn slope(&mut self, q: f64) -> Result<(f64, InnerResult)> {
        let inner = self.inner(q)?;
        let op = OrderPoint { q, rho: inner.rho_bar, eta: self.eta };
        let mut d = grad_q(self.model, self.tp, &op, &self.cfg.quad)?;
        if inner.boundary {
            // ρ̄ rides the edge ρ = (μ + |u| q)/v
            let g_rho = grad_rho(self.model, self.tp, &op, &self.cfg.quad)?;
            if inner.rho_bar > 0.0 {
                d += g_rho * self.model.u().abs() / self.model.v();
            }
        }
        Ok((self.sense * d, inner))
    }
}

/// Upper end of the `q` search interval: the objective slope is negative beyond it.
fn q_ceiling(outer: &mut Outer, rho_at_zero: f64) -> Result<f64> {
    let u = outer.model.u().abs();
    let mut q_max = 1f64.max((2.0 / u) * (outer.tp.mu.abs() + outer.model.v() * rho_at_zero));
    let cap = 2f64.powi(20);
    loop {
        let (d, _) = outer.slope(q_max)?;
        if d < 0.0 || q_max >= cap {
            return Ok(q_max);
        }
        q_max *= 2.0;
    }
}

/// Optimize over `q` from scratch (full scan).
pub fn outer_opt(model: &Model, tp: &ThermoPoint, eta: f64, cfg: &SolverConfig) -> Result<SolveResult> {
    outer_opt_from(model, tp, eta, None, cfg)
}

/// Optimize over `q`; with `warm = Some(q)` the search starts from `q` instead of a full scan.
pub fn outer_opt_from(model: &Model, tp: &ThermoPoint, eta: f64, warm: Option<f64>, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    if !(eta >= 0.0) || !eta.is_finite() {
        return Err(Error::InvalidParameter(format!("eta must be finite and >= 0, got {eta}")));
    }
    let mut outer = Outer {
        model,
        tp,
        eta,
        cfg,
        sense: if model.u() > 0.0 { 1.0 } else { -1.0 },
        inner_solves: 0,
        inner_iterations: 0,
    };
    if model.u() == 0.0 {
        let inner = outer.inner(0.0)?;
        return finish(&mut outer, 0.0, inner, (0.0, 0.0), 0);
    }

    let (q_lo, q_hi, seed, iterations) = match warm {
        Some(q0) if q0 > 0.0 => match warm_bracket(&mut outer, q0)? {
            Some(found) => found,
            None => scan_bracket(&mut outer)?,
        },
        _ => scan_bracket(&mut outer)?,
    };
    let (q_bar, inner, refine_iterations) = refine(&mut outer, q_lo, q_hi, seed)?;
    finish(&mut outer, q_bar, inner, (q_lo, q_hi), iterations + refine_iterations)
}

/// Bracket around the best point of a log-spaced scan, ties going to the smallest `q`.
/// Returns `(lo, hi, best_q, evaluations)`.
fn scan_bracket(outer: &mut Outer) -> Result<(f64, f64, f64, usize)> {
    let base = outer.inner(0.0)?;
    let q_max = q_ceiling(outer, base.rho_bar)?;
    let n = outer.cfg.scan_points;
    let mut grid: Vec<f64> = alloc::vec![0.0];
    for i in 0..n {
        grid.push(q_max * 10f64.powf(-8.0 + 8.0 * i as f64 / (n - 1) as f64));
    }
    let mut values = Vec::with_capacity(grid.len());
    values.push(outer.sense * base.value);
    for &q in &grid[1..] {
        values.push(outer.sense * outer.inner(q)?.value);
    }
    let best_value = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let flat = outer.cfg.tol * best_value.abs().max(1.0) * 1e-3;
    let best = values.iter().position(|&v| v >= best_value - flat).unwrap_or(0);
    let lo = if best == 0 { 0.0 } else { grid[best - 1] };
    let hi = grid[(best + 1).min(grid.len() - 1)];
    Ok((lo, hi, grid[best], grid.len() + 1))
}

/// Bracket found by walking geometrically from the previous optimum.
fn warm_bracket(outer: &mut Outer, q0: f64) -> Result<Option<(f64, f64, f64, usize)>> {
    let (d0, _) = outer.slope(q0)?;
    let mut evaluations = 1;
    let up = d0 > 0.0;
    let mut inner_q = q0;
    for _ in 0..60 {
        let next = if up { inner_q * 2.0 } else { inner_q * 0.5 };
        let (d, _) = outer.slope(next)?;
        evaluations += 1;
        if (d > 0.0) != up {
            let (lo, hi) = if up { (inner_q, next) } else { (next, inner_q) };
            return Ok(Some((lo, hi, q0, evaluations)));
        }
        inner_q = next;
        if inner_q < 1e-300 {
            break;
        }
    }
    Ok(None)
}

/// Locate the optimum inside `[lo, hi]`: slope root when the slope changes sign,
/// otherwise derivative-free maximization (edges included).
fn refine(outer: &mut Outer, lo: f64, hi: f64, seed: f64) -> Result<(f64, InnerResult, usize)> {
    if hi <= lo {
        let inner = outer.inner(lo)?;
        return Ok((lo, inner, 0));
    }
    let (d_lo, inner_lo) = outer.slope(lo)?;
    let (d_hi, _) = outer.slope(hi)?;
    if d_lo > 0.0 && d_hi < 0.0 {
        let max_iter = outer.cfg.max_iter;
        let root = brent_root(|q| Ok(outer.slope(q)?.0), lo, hi, d_lo, d_hi, 0.0, max_iter)?;
        let inner = outer.inner(root.x)?;
        return Ok((root.x, inner, root.iterations + 2));
    }
    if lo == 0.0 && d_lo <= 0.0 && d_hi <= 0.0 {
        return Ok((0.0, inner_lo, 2));
    }
    let max_iter = outer.cfg.max_iter;
    let found = brent_min(|q| Ok(-outer.sense * outer.inner(q)?.value), lo, hi, 1e-14 * hi, max_iter)?;
    let candidates = [(lo, outer.inner(lo)?), (found.x, outer.inner(found.x)?), (seed, outer.inner(seed)?)];
    let mut best = candidates[0];
    for c in &candidates[1..] {
        if outer.sense * c.1.value > outer.sense * best.1.value {
            best = *c;
        }
    }
    Ok((best.0, best.1, found.iterations + 2))
}

fn finish(outer: &mut Outer, q_bar: f64, inner: InnerResult, q_bracket: (f64, f64), iterations: usize) -> Result<SolveResult> {
    let (model, tp, eta) = (outer.model, outer.tp, outer.eta);
    let op = OrderPoint { q: q_bar, rho: inner.rho_bar, eta };
    let (r1, r2) = el_residuals(model, tp, &op, &outer.cfg.quad)?;
    let denom = source_denominator(model, tp, &op);
    let rho0 = if eta == 0.0 { 0.0 } else { eta * eta / (denom * denom) };
    let sigma = sigma_gap(model, tp, &op).max(0.0);
    let f0 = model.v() * op.rho - tp.mu;
    let gap = (sigma * (f0 + model.u().abs() * q_bar)).max(0.0).sqrt();
    let status = if inner.boundary {
        SolveStatus::BoundaryMinimum
    } else if r1.abs() <= outer.cfg.tol && r2.abs() <= outer.cfg.tol {
        SolveStatus::Converged
    } else {
        SolveStatus::MaxIter
    };
    Ok(SolveResult {
        q_bar,
        rho_bar: inner.rho_bar,
        pressure: inner.value,
        rho0,
        gap,
        residual_el1: r1,
        residual_el2: r2,
        eta,
        status,
        diagnostics: Diagnostics {
            inner_solves: outer.inner_solves,
            inner_iterations: outer.inner_iterations,
            outer_iterations: iterations,
            q_bracket,
            rho_bracket: inner.bracket,
        },
    })
}
