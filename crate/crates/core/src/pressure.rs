//! Bogoliubov spectrum, the second approximating pressure (thermodynamic
//! limit and finite volume) and its analytic derivatives.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // float math for no_std builds; shadowed by inherent methods when std is linked
use num_traits::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{epsilon, lambda_value, Mode, Model};
use crate::quad::{integrate_radial, QuadratureConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermoPoint {
    pub beta: f64,
    pub mu: f64,
}

impl ThermoPoint {
    pub fn new(beta: f64, mu: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
        }
        if !mu.is_finite() {
            return Err(Error::InvalidParameter(format!("mu must be finite, got {mu}")));
        }
        Ok(Self { beta, mu })
    }
}

/// Variational point in the gauge `q >= 0`, `eta >= 0` real.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderPoint {
    pub q: f64,
    pub rho: f64,
    pub eta: f64,
}

impl OrderPoint {
    pub fn new(q: f64, rho: f64, eta: f64) -> Result<Self> {
        for (name, x) in [("q", q), ("rho", rho), ("eta", eta)] {
            if !(x >= 0.0) || !x.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {x}")));
            }
        }
        Ok(Self { q, rho, eta })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralEval {
    pub f: f64,
    pub h_abs: f64,
    pub e: f64,
    pub x_sq: f64,
    pub y_sq: f64,
}

impl SpectralEval {
    /// Bogoliubov data from `f` and `|h|`; `f_minus_h` may be supplied when it
    /// is known more accurately than the difference.
    pub fn from_parts(f: f64, h_abs: f64, f_minus_h: Option<f64>) -> Result<Self> {
        let gap = f_minus_h.unwrap_or(f - h_abs);
        if gap < 0.0 {
            return Err(Error::UnstableMode { f, h_abs });
        }
        let e = (gap * (f + h_abs)).sqrt();
        let (x_sq, y_sq) = if h_abs == 0.0 {
            (1.0, 0.0)
        } else {
            // f/E - 1 = h^2 / (E (E + f))
            let excess = h_abs * h_abs / (e * (e + f));
            (0.5 * excess + 1.0, 0.5 * excess)
        };
        Ok(Self { f, h_abs, e, x_sq, y_sq })
    }
}

/// Which coefficient multiplies the source term of `dp/dmu`: 1 (obtained by
/// differentiating the pressure) or `v` (the form printed alongside the
/// `rho`-derivative relation).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MuSourceReading {
    #[default]
    Consistent,
    AsPrinted,
}

/// `f(k, rho)` at `|k| = r`.
pub fn f_radial(model: &Model, tp: &ThermoPoint, op: &OrderPoint, r: f64) -> f64 {
    model.epsilon_radial(r) - tp.mu + model.v() * op.rho
}

/// `vρ − μ − |u|q`
pub fn sigma_gap(model: &Model, tp: &ThermoPoint, op: &OrderPoint) -> f64 {
    model.v() * op.rho - tp.mu - model.u().abs() * op.q
}

/// `f(0, ρ) − u q` with signed `u`: the denominator of the source term.
pub fn source_denominator(model: &Model, tp: &ThermoPoint, op: &OrderPoint) -> f64 {
    model.v() * op.rho - tp.mu - model.u() * op.q
}

/// `|η|² / (f(0,ρ) − uq)^power`, zero when `η = 0`.
fn source_term(model: &Model, tp: &ThermoPoint, op: &OrderPoint, power: i32) -> f64 {
    if op.eta == 0.0 {
        0.0
    } else {
        op.eta * op.eta / source_denominator(model, tp, op).powi(power)
    }
}

pub fn spectral(model: &Model, tp: &ThermoPoint, op: &OrderPoint, k: &[f64]) -> Result<SpectralEval> {
    let f = epsilon(model, k) - tp.mu + model.v() * op.rho;
    let lam = lambda_value(model.profile(), k).abs();
    let h_abs = model.u().abs() * op.q * lam;
    let r = k.iter().map(|x| x * x).sum::<f64>().sqrt();
    SpectralEval::from_parts(f, h_abs, Some(f_minus_h_radial(model, tp, op, r)))
}

/// `f − |h|` written as `ε + σ + |u| q (1 − λ)`, exact near the gap edge.
fn f_minus_h_radial(model: &Model, tp: &ThermoPoint, op: &OrderPoint, r: f64) -> f64 {
    model.epsilon_radial(r)
        + sigma_gap(model, tp, op)
        + model.u().abs() * op.q * model.profile().one_minus_radial(r)
}

/// Thermodynamic-limit feasibility: `σ ≥ 0`, and `f(0,ρ) − uq > 0` when `η > 0`.
pub fn check_feasible_tl(model: &Model, tp: &ThermoPoint, op: &OrderPoint) -> Result<()> {
    let sigma = sigma_gap(model, tp, op);
    if sigma < 0.0 {
        return Err(Error::InfeasiblePoint(format!("σ = {sigma} < 0")));
    }
    if op.eta > 0.0 && !(source_denominator(model, tp, op) > 0.0) {
        return Err(Error::InfeasiblePoint("f(0,ρ) − uq ≤ 0 with nonzero source".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Kernel {
    /// `-(1/β) ln(1 - e^{-βE}) - (E - f)/2`
    Pressure,
    /// `n_B f/E + (f/E - 1)/2`
    Density,
    /// `λ² (n_B + 1/2) / E`
    Pairing,
    /// `β n_B (1 + n_B) f²/E² + (1/2) coth(βE/2) h²/E³`
    Curvature,
}

struct Point {
    f: f64,
    h: f64,
    e: f64,
    lam: f64,
}

fn point(model: &Model, tp: &ThermoPoint, op: &OrderPoint, r: f64) -> Point {
    let f = f_radial(model, tp, op, r);
    let lam = model.profile().radial(r).abs();
    let h = model.u().abs() * op.q * lam;
    let gap = f_minus_h_radial(model, tp, op, r).max(0.0);
    let e = (gap * (f + h)).sqrt();
    Point { f, h, e, lam }
}

fn kernel_value(kernel: Kernel, beta: f64, p: &Point) -> f64 {
    let x = beta * p.e;
    let n_b = 1.0 / libm::expm1(x);
    // f/E - 1 = h²/(E(E+f)), E - f = -h²/(E+f)
    let h2 = p.h * p.h;
    match kernel {
        Kernel::Pressure => {
            let log = if x > core::f64::consts::LN_2 {
                libm::log1p(-(-x).exp())
            } else {
                (-libm::expm1(-x)).ln()
            };
            let e_minus_f = if h2 == 0.0 { 0.0 } else { -h2 / (p.e + p.f) };
            -log / beta - 0.5 * e_minus_f
        }
        Kernel::Density => {
            if h2 == 0.0 {
                n_b
            } else {
                let excess = h2 / (p.e * (p.e + p.f));
                n_b * (1.0 + excess) + 0.5 * excess
            }
        }
        Kernel::Pairing => {
            if p.lam == 0.0 {
                0.0
            } else {
                p.lam * p.lam * (n_b + 0.5) / p.e
            }
        }
        Kernel::Curvature => {
            let ratio = p.f / p.e;
            let thermal = if n_b == 0.0 { 0.0 } else { beta * n_b * (1.0 + n_b) * ratio * ratio };
            let quantum = if h2 == 0.0 {
                0.0
            } else {
                0.5 * (1.0 + 2.0 * n_b) * h2 / (p.e * p.e * p.e)
            };
            thermal + quantum
        }
    }
}

/// Radii at which the integrands change character: the gap edge, the chemical
/// potential scale, the thermal scale and the decay scale of the profile.
pub fn radial_scales(model: &Model, tp: &ThermoPoint, op: &OrderPoint) -> Vec<f64> {
    let two_m = 2.0 * model.mass();
    let sigma = sigma_gap(model, tp, op);
    let f0 = model.v() * op.rho - tp.mu;
    let h0 = model.u().abs() * op.q;
    let mut scales = alloc::vec![
        (two_m * sigma).sqrt(),
        (two_m * (f0.abs() + h0)).sqrt(),
        (two_m / tp.beta).sqrt(),
        (two_m * 40.0 / tp.beta).sqrt(),
    ];
    if !model.profile().is_delta() && h0 > 0.0 {
        scales.push(model.profile().decay_scale(0.5));
        scales.push(model.profile().decay_scale(1e-8));
    }
    scales
}

pub(crate) fn integrate_kernel(
    model: &Model,
    tp: &ThermoPoint,
    op: &OrderPoint,
    kernel: Kernel,
    quad: &QuadratureConfig,
) -> Result<f64> {
    let measure = model.radial_measure();
    let power = model.dim() as i32 - 1;
    let beta = tp.beta;
    let integrand = |r: f64| {
        let value = kernel_value(kernel, beta, &point(model, tp, op, r));
        if value == 0.0 {
            0.0
        } else {
            measure * r.powi(power) * value
        }
    };
    let scales = radial_scales(model, tp, op);
    Ok(integrate_radial(integrand, &scales, quad)?.value)
}

/// Thermodynamic-limit pressure `p(q, ρ, η)`.
pub fn pressure_tl(model: &Model, tp: &ThermoPoint, op: &OrderPoint, quad: &QuadratureConfig) -> Result<f64> {
    check_feasible_tl(model, tp, op)?;
    let integral = integrate_kernel(model, tp, op, Kernel::Pressure, quad)?;
    Ok(integral + source_term(model, tp, op, 1) - 0.5 * model.u() * op.q * op.q
        + 0.5 * model.v() * op.rho * op.rho)
}

/// `∂p/∂ρ`
pub fn grad_rho(model: &Model, tp: &ThermoPoint, op: &OrderPoint, quad: &QuadratureConfig) -> Result<f64> {
    check_feasible_tl(model, tp, op)?;
    let density = integrate_kernel(model, tp, op, Kernel::Density, quad)?;
    let v = model.v();
    Ok(-v * density - v * source_term(model, tp, op, 2) + v * op.rho)
}

/// `∂p/∂q`
pub fn grad_q(model: &Model, tp: &ThermoPoint, op: &OrderPoint, quad: &QuadratureConfig) -> Result<f64> {
    check_feasible_tl(model, tp, op)?;
    let u = model.u();
    let pairing = if u == 0.0 || op.q == 0.0 {
        0.0
    } else {
        integrate_kernel(model, tp, op, Kernel::Pairing, quad)?
    };
    Ok(u * u * op.q * pairing + u * source_term(model, tp, op, 2) - u * op.q)
}

/// `∂p/∂μ` with the consistent source coefficient.
pub fn d_mu(model: &Model, tp: &ThermoPoint, op: &OrderPoint, quad: &QuadratureConfig) -> Result<f64> {
    d_mu_with(model, tp, op, quad, MuSourceReading::Consistent)
}

pub fn d_mu_with(
    model: &Model,
    tp: &ThermoPoint,
    op: &OrderPoint,
    quad: &QuadratureConfig,
    reading: MuSourceReading,
) -> Result<f64> {
    check_feasible_tl(model, tp, op)?;
    let density = integrate_kernel(model, tp, op, Kernel::Density, quad)?;
    let coefficient = match reading {
        MuSourceReading::Consistent => 1.0,
        MuSourceReading::AsPrinted => model.v(),
    };
    Ok(density + coefficient * source_term(model, tp, op, 2))
}

/// `∂²p/∂μ²`
pub fn d2_mu(model: &Model, tp: &ThermoPoint, op: &OrderPoint, quad: &QuadratureConfig) -> Result<f64> {
    check_feasible_tl(model, tp, op)?;
    let curvature = integrate_kernel(model, tp, op, Kernel::Curvature, quad)?;
    Ok(curvature + 2.0 * source_term(model, tp, op, 3))
}

/// Finite-volume pressure on the lattice `lat`.
pub fn pressure_fv(
    model: &Model,
    tp: &ThermoPoint,
    op: &OrderPoint,
    lat: &crate::model::LatticeSpec,
) -> Result<f64> {
    let modes = crate::model::lattice_modes(model, lat);
    pressure_fv_modes(model, tp, op, &modes, lat.volume(model.dim()))
}

/// Finite-volume pressure over an explicit mode set with an independent volume.
pub fn pressure_fv_modes(
    model: &Model,
    tp: &ThermoPoint,
    op: &OrderPoint,
    modes: &[Mode],
    volume: f64,
) -> Result<f64> {
    if !(volume > 0.0) {
        return Err(Error::InvalidParameter(format!("volume must be positive, got {volume}")));
    }
    let sigma = sigma_gap(model, tp, op);
    let denom = source_denominator(model, tp, op);
    if !(sigma > 0.0) || !(denom > 0.0) {
        return Err(Error::InfeasiblePoint(format!(
            "finite-volume pressure needs f(0,ρ) > |u|q, got σ = {sigma}"
        )));
    }
    let mut sum = 0.0;
    for mode in modes {
        let r = mode.k.iter().map(|x| x * x).sum::<f64>().sqrt();
        let p = point(model, tp, op, r);
        sum += kernel_value(Kernel::Pressure, tp.beta, &p);
    }
    Ok(sum / volume + source_term(model, tp, op, 1) - 0.5 * model.u() * op.q * op.q
        + 0.5 * model.v() * op.rho * op.rho)
}
