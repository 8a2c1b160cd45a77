#[allow(unused_imports)] // float math for no_std builds; shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::Result;
use crate::model::Model;
use crate::pressure::{pressure_tl, OrderPoint, ThermoPoint};
use crate::quad::{integrate_radial, QuadratureConfig};
use crate::roots::brent_root;

/// Ideal Bose density `∫ dᵛk/(2π)ᵛ (e^{β(ε(k)+x)} − 1)^{-1}` for `x ≥ 0`.
pub fn bose_density(model: &Model, beta: f64, x: f64, quad: &QuadratureConfig) -> Result<f64> {
    let measure = model.radial_measure();
    let power = model.dim() as i32 - 1;
    let two_m = 2.0 * model.mass();
    let scales = [(two_m * x).sqrt(), (two_m / beta).sqrt(), (two_m * 40.0 / beta).sqrt()];
    let integrand = |r: f64| {
        let n = 1.0 / libm::expm1(beta * (model.epsilon_radial(r) + x));
        if n == 0.0 { 0.0 } else { measure * r.powi(power) * n }
    };
    Ok(integrate_radial(integrand, &scales, quad)?.value)
}

/// Critical density of the perfect Bose gas; `+inf` for `ν ≤ 2`.
pub fn critical_density(model: &Model, beta: f64, quad: &QuadratureConfig) -> Result<f64> {
    if model.dim() <= 2 {
        return Ok(f64::INFINITY);
    }
    bose_density(model, beta, 0.0, quad)
}

/// Mean-field density: the solution of `ρ = n(vρ − μ)`, saturating at `μ/v`
/// once `μ ≥ v ρ_c(β)`.
pub fn mf_density(model: &Model, tp: &ThermoPoint, quad: &QuadratureConfig) -> Result<f64> {
    let v = model.v();
    let rho_c = critical_density(model, tp.beta, quad)?;
    if tp.mu >= v * rho_c {
        return Ok(tp.mu / v);
    }
    // F(ρ) = ρ − n(vρ − μ) is increasing on ρ ≥ max(0, μ/v)
    let lo = (tp.mu / v).max(0.0);
    let residual = |rho: f64| -> Result<f64> { Ok(rho - bose_density(model, tp.beta, (v * rho - tp.mu).max(0.0), quad)?) };
    let f_lo = residual(lo)?;
    if f_lo >= 0.0 {
        return Ok(lo);
    }
    let mut hi = lo.max(rho_c.min(lo + 1.0)) + 1.0;
    let mut f_hi = residual(hi)?;
    while f_hi <= 0.0 {
        hi *= 2.0;
        f_hi = residual(hi)?;
    }
    Ok(brent_root(residual, lo, hi, f_lo, f_hi, 0.0, 400)?.x)
}

/// Mean-field pressure `p(0, ρ̂, 0)`.
pub fn mf_pressure(model: &Model, tp: &ThermoPoint, quad: &QuadratureConfig) -> Result<f64> {
    let rho = mf_density(model, tp, quad)?;
    pressure_tl(model, tp, &OrderPoint { q: 0.0, rho, eta: 0.0 }, quad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CouplingProfile, ProfileKind};

    fn quad() -> QuadratureConfig {
        QuadratureConfig::with_tol(1e-12, 1e-15)
    }

    #[test]
    fn low_dimensions_have_no_critical_density() {
        let p = CouplingProfile::with_default_decay(ProfileKind::Gaussian { a: 1.0 }, 2).unwrap();
        let m = Model::new(2, 0.5, 0.0, 1.0, p).unwrap();
        assert_eq!(critical_density(&m, 1.0, &quad()).unwrap(), f64::INFINITY);
    }

    #[test]
    fn branches_agree_at_threshold() {
        let m = Model::standard(0.0, 1.0, ProfileKind::Gaussian { a: 1.0 }).unwrap();
        let rho_c = critical_density(&m, 1.0, &quad()).unwrap();
        let tp = ThermoPoint::new(1.0, rho_c).unwrap();
        assert!((mf_density(&m, &tp, &quad()).unwrap() - rho_c).abs() < 1e-14);
        let below = ThermoPoint::new(1.0, rho_c * (1.0 - 1e-9)).unwrap();
        assert!((mf_density(&m, &below, &quad()).unwrap() - rho_c).abs() < 1e-6);
    }

    #[test]
    fn fixed_point_residual() {
        let m = Model::standard(-0.2, 2.0, ProfileKind::Gaussian { a: 1.0 }).unwrap();
        let tp = ThermoPoint::new(0.7, -0.3).unwrap();
        let rho = mf_density(&m, &tp, &quad()).unwrap();
        let n = bose_density(&m, 0.7, 2.0 * rho + 0.3, &quad()).unwrap();
        assert!((rho - n).abs() < 1e-12);
    }

    #[test]
    fn large_v_suppresses_density() {
        let tp = ThermoPoint::new(1.0, 0.5).unwrap();
        let small = Model::standard(0.0, 1.0, ProfileKind::DeltaZero).unwrap();
        let large = Model::standard(0.0, 100.0, ProfileKind::DeltaZero).unwrap();
        assert!(mf_density(&large, &tp, &quad()).unwrap() < mf_density(&small, &tp, &quad()).unwrap());
    }
}
