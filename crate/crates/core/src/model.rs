//! Physical model: dispersion, pair-coupling profile, couplings and the
//! finite-volume momentum lattice.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // float math for no_std builds; shadowed by inherent methods when std is linked
use num_traits::Float;
use serde::Serialize;

use crate::error::{Error, Result};

/// Shape of the gauge-reduced, real, isotropic coupling profile `lambda(k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileKind {
    /// `exp(-a |k|^2)`
    Gaussian { a: f64 },
    /// `1 / (1 + (c |k|)^p)`
    Power { c: f64, p: f64 },
    /// 1 at `k = 0`, 0 elsewhere.
    DeltaZero,
}

/// Declared constants `(C, delta)` of the decay bound
/// `|lambda(k)| <= C / (1 + |k|^(max(nu, nu/2 + 1) + delta))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayBound {
    pub c: f64,
    pub delta: f64,
}

impl DecayBound {
    /// Exponent `max(nu, nu/2 + 1) + delta` for spatial dimension `dim`.
    pub fn exponent(&self, dim: usize) -> f64 {
        base_decay_exponent(dim) + self.delta
    }

    pub fn bound(&self, dim: usize, r: f64) -> f64 {
        self.c / (1.0 + r.powf(self.exponent(dim)))
    }
}

fn base_decay_exponent(dim: usize) -> f64 {
    let nu = dim as f64;
    nu.max(0.5 * nu + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingProfile {
    pub kind: ProfileKind,
    pub declared_decay: DecayBound,
}

impl CouplingProfile {
    pub fn new(kind: ProfileKind, declared_decay: DecayBound) -> Self {
        Self {
            kind,
            declared_decay,
        }
    }

    /// Profile with the tightest simple decay constants valid in dimension `dim`.
    ///
    /// Gaussian: `delta = 1`, `C = 1 + max_r r^s e^{-a r^2}`.
    /// Power: `delta = p - max(nu, nu/2+1)` (must be positive), `C = 1 + c^{-p}`.
    pub fn with_default_decay(kind: ProfileKind, dim: usize) -> Result<Self> {
        let base = base_decay_exponent(dim);
        let decay = match kind {
            ProfileKind::Gaussian { a } => {
                if !(a > 0.0) {
                    return Err(Error::InvalidModel(format!(
                        "gaussian width a must be positive, got {a}"
                    )));
                }
                let s = base + 1.0;
                let peak = (s / (2.0 * a)).powf(0.5 * s) * (-0.5 * s).exp();
                DecayBound {
                    c: 1.0 + peak,
                    delta: 1.0,
                }
            }
            ProfileKind::Power { c, p } => {
                if !(c > 0.0) || !(p > base) {
                    return Err(Error::InvalidModel(format!(
                        "power profile needs c > 0 and p > {base}, got c = {c}, p = {p}"
                    )));
                }
                DecayBound {
                    c: 1.0 + c.powf(-p),
                    delta: p - base,
                }
            }
            ProfileKind::DeltaZero => DecayBound { c: 1.0, delta: 1.0 },
        };
        Ok(Self::new(kind, decay))
    }

    /// Radial profile value at `|k| = r`.
    pub fn radial(&self, r: f64) -> f64 {
        match self.kind {
            ProfileKind::Gaussian { a } => (-a * r * r).exp(),
            ProfileKind::Power { c, p } => 1.0 / (1.0 + (c * r).powf(p)),
            ProfileKind::DeltaZero => {
                if r == 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `1 - lambda(r)` without cancellation for small `r`.
    pub fn one_minus_radial(&self, r: f64) -> f64 {
        match self.kind {
            ProfileKind::Gaussian { a } => -libm::expm1(-a * r * r),
            ProfileKind::Power { c, p } => {
                let t = (c * r).powf(p);
                t / (1.0 + t)
            }
            ProfileKind::DeltaZero => {
                if r == 0.0 {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    pub fn is_delta(&self) -> bool {
        matches!(self.kind, ProfileKind::DeltaZero)
    }

    /// Radius beyond which the profile is below `eps` (used to place quadrature breakpoints).
    pub fn decay_scale(&self, eps: f64) -> f64 {
        match self.kind {
            ProfileKind::Gaussian { a } => (-eps.ln() / a).sqrt(),
            ProfileKind::Power { c, p } => (1.0 / eps).powf(1.0 / p) / c,
            ProfileKind::DeltaZero => 0.0,
        }
    }
}

/// Pair-boson model parameters. Construct with [`Model::new`], which checks
/// `v > 0`, `v - u > 0` and the declared profile decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Model {
    dim: usize,
    mass: f64,
    u: f64,
    v: f64,
    profile: CouplingProfile,
}

impl Model {
    pub fn new(dim: usize, mass: f64, u: f64, v: f64, profile: CouplingProfile) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidModel("dimension must be positive".into()));
        }
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::InvalidModel(format!("mass must be positive, got {mass}")));
        }
        if !u.is_finite() || !v.is_finite() {
            return Err(Error::InvalidModel("couplings must be finite".into()));
        }
        if !(v > 0.0) {
            return Err(Error::InvalidModel(format!("requires v > 0, got v = {v}")));
        }
        if !(v - u > 0.0) {
            return Err(Error::InvalidModel(format!(
                "requires v − u > 0, got v = {v}, u = {u}"
            )));
        }
        check_profile(&profile, dim)?;
        Ok(Self {
            dim,
            mass,
            u,
            v,
            profile,
        })
    }

    /// Three-dimensional model with `m = 0.5`, so that `epsilon(k) = |k|^2`.
    pub fn standard(u: f64, v: f64, kind: ProfileKind) -> Result<Self> {
        let profile = CouplingProfile::with_default_decay(kind, 3)?;
        Self::new(3, 0.5, u, v, profile)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn mass(&self) -> f64 {
        self.mass
    }
    pub fn u(&self) -> f64 {
        self.u
    }
    pub fn v(&self) -> f64 {
        self.v
    }
    /// `alpha = v - u`
    pub fn alpha(&self) -> f64 {
        self.v - self.u
    }
    pub fn profile(&self) -> &CouplingProfile {
        &self.profile
    }

    /// Same model with a different BCS coupling (re-validated).
    pub fn with_u(&self, u: f64) -> Result<Self> {
        Self::new(self.dim, self.mass, u, self.v, self.profile)
    }

    /// Kinetic energy at radius `r = |k|`.
    pub fn epsilon_radial(&self, r: f64) -> f64 {
        r * r / (2.0 * self.mass)
    }

    /// Surface factor `2 pi^{nu/2} / Gamma(nu/2) / (2 pi)^nu` converting
    /// `int d^nu k / (2 pi)^nu` of a radial function into `int_0^inf r^{nu-1} dr`.
    pub fn radial_measure(&self) -> f64 {
        let nu = self.dim as f64;
        unit_sphere_area(self.dim) / (2.0 * PI).powf(nu)
    }
}

/// Surface area of the unit sphere in `R^dim`.
pub fn unit_sphere_area(dim: usize) -> f64 {
    let nu = dim as f64;
    2.0 * PI.powf(0.5 * nu) / libm::tgamma(0.5 * nu)
}

fn check_profile(profile: &CouplingProfile, dim: usize) -> Result<()> {
    let decay = profile.declared_decay;
    if !(decay.c > 0.0) || !(decay.delta > 0.0) {
        return Err(Error::InvalidModel(format!(
            "decay bound needs C > 0 and delta > 0, got C = {}, delta = {}",
            decay.c, decay.delta
        )));
    }
    match profile.kind {
        ProfileKind::Gaussian { a } if !(a > 0.0) => {
            return Err(Error::InvalidModel(format!("gaussian width must be positive, got {a}")))
        }
        ProfileKind::Power { c, p } => {
            if !(c > 0.0) {
                return Err(Error::InvalidModel(format!("power scale must be positive, got {c}")));
            }
            let need = decay.exponent(dim);
            if p < need {
                return Err(Error::InvalidModel(format!(
                    "power profile needs p >= max(nu, nu/2+1) + delta = {need}, got p = {p}"
                )));
            }
        }
        _ => {}
    }
    // Declared bound must dominate the profile; check on a log-spaced radial grid.
    for i in 0..=240 {
        let r = if i == 0 { 0.0 } else { 10f64.powf(-4.0 + i as f64 * 0.035) };
        let value = profile.radial(r).abs();
        let bound = decay.bound(dim, r);
        if value > bound * (1.0 + 1e-12) {
            return Err(Error::InvalidModel(format!(
                "declared decay bound violated at |k| = {r}: lambda = {value}, bound = {bound}"
            )));
        }
    }
    Ok(())
}

/// `epsilon(k) = |k|^2 / (2m)`.
pub fn epsilon(model: &Model, k: &[f64]) -> f64 {
    let k2: f64 = k.iter().map(|x| x * x).sum();
    k2 / (2.0 * model.mass)
}

/// Profile value `lambda(k)`.
pub fn lambda_value(profile: &CouplingProfile, k: &[f64]) -> f64 {
    let r = k.iter().map(|x| x * x).sum::<f64>().sqrt();
    profile.radial(r)
}

/// Box of side `l` (volume `l^nu`) with lattice indices `|s|_inf <= s_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeSpec {
    pub l: f64,
    pub s_max: u32,
}

impl LatticeSpec {
    pub fn new(l: f64, s_max: u32) -> Result<Self> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::InvalidParameter(format!("box side must be positive, got {l}")));
        }
        Ok(Self { l, s_max })
    }

    pub fn volume(&self, dim: usize) -> f64 {
        self.l.powi(dim as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeClass {
    Zero,
    /// Representative of a `{k, -k}` pair: first nonzero index component positive.
    Plus,
    /// Partner of a `Plus` mode.
    Minus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mode {
    pub index: Vec<i64>,
    pub k: Vec<f64>,
    pub class: ModeClass,
}

/// All momenta `k = 2 pi s / L` with `|s|_inf <= s_max`, in lexicographic index order.
pub fn lattice_modes(model: &Model, lat: &LatticeSpec) -> Vec<Mode> {
    let dim = model.dim;
    let s_max = lat.s_max as i64;
    let side = (2 * s_max + 1) as usize;
    let count = side.pow(dim as u32);
    let step = 2.0 * PI / lat.l;
    let mut modes = Vec::with_capacity(count);
    let mut index = alloc::vec![-s_max; dim];
    for _ in 0..count {
        let k = index.iter().map(|&s| step * s as f64).collect();
        let class = match index.iter().find(|&&s| s != 0) {
            None => ModeClass::Zero,
            Some(&s) if s > 0 => ModeClass::Plus,
            Some(_) => ModeClass::Minus,
        };
        modes.push(Mode {
            index: index.clone(),
            k,
            class,
        });
        // odometer increment, last component fastest
        for d in (0..dim).rev() {
            if index[d] < s_max {
                index[d] += 1;
                break;
            }
            index[d] = -s_max;
        }
    }
    modes
}

/// Lattice sums entering the uniform bounds on the pair profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingNorms {
    /// `sum_k |lambda(k)|`
    pub m_norm: f64,
    /// `sum_k epsilon(k) |lambda(k)|^2`
    pub n_norm: f64,
    /// `sup_k epsilon(k) |lambda(k)|^2`
    pub c_norm: f64,
    /// `max(m_norm / V, n_norm / V, c_norm)`
    pub m_estimate: f64,
    /// Upper bound on the contribution of modes outside the cutoff, in the
    /// units of `m_estimate`. Infinite when the cutoff is too small to bound.
    pub tail_bound: f64,
}

/// Coupling norms over the lattice, with a tail bound from the declared decay.
pub fn coupling_norms(model: &Model, lat: &LatticeSpec) -> CouplingNorms {
    let volume = lat.volume(model.dim);
    let (mut m_norm, mut n_norm, mut c_norm) = (0.0, 0.0, 0.0f64);
    for mode in lattice_modes(model, lat) {
        let lam = lambda_value(&model.profile, &mode.k).abs();
        let eps = epsilon(model, &mode.k);
        m_norm += lam;
        let weighted = eps * lam * lam;
        n_norm += weighted;
        c_norm = c_norm.max(weighted);
    }
    let m_estimate = (m_norm / volume).max(n_norm / volume).max(c_norm);
    let tail_bound = lattice_tail_bound(model, lat);
    CouplingNorms {
        m_norm,
        n_norm,
        c_norm,
        m_estimate,
        tail_bound,
    }
}

/// [`coupling_norms`] that fails unless the tail bound is at most `tol * m_estimate`.
pub fn coupling_norms_certified(model: &Model, lat: &LatticeSpec, tol: f64) -> Result<CouplingNorms> {
    let norms = coupling_norms(model, lat);
    let allowed = tol * norms.m_estimate;
    if norms.tail_bound > allowed {
        return Err(Error::TailNotConverged {
            tail: norms.tail_bound,
            tol: allowed,
        });
    }
    Ok(norms)
}

fn lattice_tail_bound(model: &Model, lat: &LatticeSpec) -> f64 {
    if model.profile.is_delta() {
        return 0.0;
    }
    let dim = model.dim;
    let nu = dim as f64;
    let h = 2.0 * PI / lat.l;
    // excluded modes have |k| >= r_min; each lattice cell lies within d of its centre
    let r_min = h * (lat.s_max as f64 + 1.0);
    let d = 0.5 * nu.sqrt() * h;
    let t0 = r_min - 2.0 * d;
    if t0 <= 0.0 {
        return f64::INFINITY;
    }
    let decay = model.profile.declared_decay;
    let s = decay.exponent(dim);
    let area = unit_sphere_area(dim);
    let cells = h.powf(-nu) * area * (1.0 + d / t0).powf(nu - 1.0);
    // sum of C r^{-s} and of C^2 r^{2-2s} / (2m) over the excluded cells
    let m_tail = cells * decay.c * t0.powf(nu - s) / (s - nu);
    let n_exp = 2.0 * s - 2.0;
    let n_tail =
        cells * decay.c * decay.c / (2.0 * model.mass) * t0.powf(nu - n_exp) / (n_exp - nu);
    let c_tail = decay.c * decay.c / (2.0 * model.mass) * r_min.powf(-n_exp);
    let volume = lat.volume(dim);
    (m_tail / volume).max(n_tail / volume).max(c_tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(a: f64, dim: usize) -> Model {
        let profile = CouplingProfile::with_default_decay(ProfileKind::Gaussian { a }, dim).unwrap();
        Model::new(dim, 0.5, 0.2, 1.0, profile).unwrap()
    }

    #[test]
    fn epsilon_values() {
        let m = gaussian(1.0, 3);
        assert_eq!(epsilon(&m, &[1.0, 0.0, 0.0]), 1.0);
        assert_eq!(epsilon(&m, &[0.0, 0.0, 0.0]), 0.0);
        let m1 = Model::new(3, 1.0, 0.2, 1.0, *m.profile()).unwrap();
        assert_eq!(epsilon(&m1, &[1.0, 1.0, 1.0]), 1.5);
    }

    #[test]
    fn lambda_values() {
        let g = CouplingProfile::with_default_decay(ProfileKind::Gaussian { a: 1.0 }, 3).unwrap();
        assert_eq!(lambda_value(&g, &[0.0, 0.0, 0.0]), 1.0);
        let p = CouplingProfile::with_default_decay(ProfileKind::Power { c: 1.0, p: 4.0 }, 3).unwrap();
        assert_eq!(lambda_value(&p, &[0.0, 1.0, 0.0]), 0.5);
        let g2 = CouplingProfile::with_default_decay(ProfileKind::Gaussian { a: 0.5 }, 3).unwrap();
        let v = lambda_value(&g2, &[1.0, 1.0, 0.0]);
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(lambda_value(&g2, &[0.3, -0.2, 0.1]), lambda_value(&g2, &[-0.3, 0.2, -0.1]));
    }

    #[test]
    fn rejects_bad_couplings() {
        let p = CouplingProfile::with_default_decay(ProfileKind::Gaussian { a: 1.0 }, 3).unwrap();
        let err = Model::new(3, 0.5, 1.0, 0.5, p).unwrap_err();
        assert!(matches!(err, Error::InvalidModel(ref s) if s.contains("v − u > 0")));
        assert!(Model::new(3, 0.5, -1.0, 0.0, p).is_err());
        assert!(Model::new(3, 0.5, 0.3, 0.3, p).is_err());
        assert!(Model::new(3, -1.0, 0.1, 1.0, p).is_err());
    }

    #[test]
    fn rejects_slow_power_decay() {
        assert!(CouplingProfile::with_default_decay(ProfileKind::Power { c: 1.0, p: 3.0 }, 3).is_err());
        let declared = CouplingProfile::new(
            ProfileKind::Power { c: 1.0, p: 3.5 },
            DecayBound { c: 2.0, delta: 1.0 },
        );
        assert!(Model::new(3, 0.5, 0.1, 1.0, declared).is_err());
    }

    #[test]
    fn rejects_understated_constant() {
        let declared = CouplingProfile::new(ProfileKind::Gaussian { a: 0.01 }, DecayBound { c: 1.0, delta: 1.0 });
        assert!(Model::new(3, 0.5, 0.1, 1.0, declared).is_err());
    }

    #[test]
    fn lattice_counts_and_classes() {
        let m1 = gaussian(1.0, 1);
        let modes = lattice_modes(&m1, &LatticeSpec::new(2.0 * PI, 1).unwrap());
        let ks: Vec<f64> = modes.iter().map(|m| m.k[0]).collect();
        assert_eq!(ks.len(), 3);
        for (got, want) in ks.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert_eq!(modes[0].class, ModeClass::Minus);
        assert_eq!(modes[1].class, ModeClass::Zero);
        assert_eq!(modes[2].class, ModeClass::Plus);

        let m3 = gaussian(1.0, 3);
        assert_eq!(lattice_modes(&m3, &LatticeSpec::new(5.0, 1).unwrap()).len(), 27);

        let m2 = gaussian(1.0, 2);
        let only = lattice_modes(&m2, &LatticeSpec::new(PI, 0).unwrap());
        assert_eq!(only.len(), 1);
        assert_eq!(only[0].k, alloc::vec![0.0, 0.0]);
        assert_eq!(only[0].class, ModeClass::Zero);
    }

    #[test]
    fn lattice_closed_under_negation() {
        let m = gaussian(1.0, 3);
        let modes = lattice_modes(&m, &LatticeSpec::new(3.0, 2).unwrap());
        let plus = modes.iter().filter(|m| m.class == ModeClass::Plus).count();
        let minus = modes.iter().filter(|m| m.class == ModeClass::Minus).count();
        assert_eq!(plus, minus);
        for mode in &modes {
            let neg: Vec<i64> = mode.index.iter().map(|s| -s).collect();
            let partner = modes.iter().find(|m| m.index == neg).expect("partner present");
            match mode.class {
                ModeClass::Zero => assert_eq!(partner.class, ModeClass::Zero),
                ModeClass::Plus => assert_eq!(partner.class, ModeClass::Minus),
                ModeClass::Minus => assert_eq!(partner.class, ModeClass::Plus),
            }
        }
    }

    #[test]
    fn declared_decay_dominates_on_lattice() {
        for kind in [
            ProfileKind::Gaussian { a: 0.3 },
            ProfileKind::Power { c: 2.0, p: 4.5 },
            ProfileKind::DeltaZero,
        ] {
            let m = Model::new(3, 0.5, 0.1, 1.0, CouplingProfile::with_default_decay(kind, 3).unwrap()).unwrap();
            let decay = m.profile().declared_decay;
            for mode in lattice_modes(&m, &LatticeSpec::new(4.0, 4).unwrap()) {
                let r = mode.k.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!(lambda_value(m.profile(), &mode.k) <= decay.bound(3, r));
            }
        }
    }

    #[test]
    fn delta_profile_norms() {
        let p = CouplingProfile::with_default_decay(ProfileKind::DeltaZero, 3).unwrap();
        let m = Model::new(3, 0.5, 0.1, 1.0, p).unwrap();
        let norms = coupling_norms_certified(&m, &LatticeSpec::new(7.0, 3).unwrap(), 1e-8).unwrap();
        assert_eq!(norms.m_norm, 1.0);
        assert_eq!(norms.n_norm, 0.0);
        assert_eq!(norms.c_norm, 0.0);
    }

    #[test]
    fn gaussian_three_mode_norm() {
        let a = 0.7;
        let m = gaussian(a, 1);
        let norms = coupling_norms(&m, &LatticeSpec::new(2.0 * PI, 1).unwrap());
        assert!((norms.m_norm - (1.0 + 2.0 * (-a).exp())).abs() < 1e-14);
        let volume = 2.0 * PI;
        assert!(norms.m_norm <= norms.m_estimate * volume);
        assert!(norms.n_norm <= norms.m_estimate * volume);
        assert!(norms.c_norm <= norms.m_estimate);
    }

    #[test]
    fn power_norms_converge_in_cutoff() {
        let p = CouplingProfile::with_default_decay(ProfileKind::Power { c: 1.0, p: 4.0 }, 3).unwrap();
        let m = Model::new(3, 0.5, 0.1, 1.0, p).unwrap();
        let coarse = coupling_norms(&m, &LatticeSpec::new(8.0, 24).unwrap());
        let fine = coupling_norms(&m, &LatticeSpec::new(8.0, 48).unwrap());
        assert!((coarse.m_estimate - fine.m_estimate).abs() <= 0.01 * fine.m_estimate);
        assert!(coarse.tail_bound.is_finite());
        assert!(fine.tail_bound < coarse.tail_bound);
    }

    #[test]
    fn tail_not_converged_for_tiny_cutoff() {
        let m = gaussian(0.1, 3);
        let err = coupling_norms_certified(&m, &LatticeSpec::new(20.0, 1).unwrap(), 1e-6).unwrap_err();
        assert!(matches!(err, Error::TailNotConverged { .. }));
    }
}
