//! Globally adaptive Gauss–Kronrod (G10/K21) quadrature on `[0, inf)` with
//! user breakpoints and a rational map for the tail.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

#[allow(unused_imports)] // float math for no_std builds; shadowed by inherent methods when std is linked
use num_traits::Float;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdiv: usize,
    pub radial_split: RadialSplit,
}

/// How `[0, inf)` is partitioned before adaptive refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialSplit {
    /// Breakpoints at the physical scales of the integrand plus a geometric
    /// cascade of `levels` panels towards the origin.
    Scales { levels: u32 },
    /// Uniform panels of width `width` up to `count * width`, then the tail.
    Uniform { width: f64, count: u32 },
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_subdiv: 4000,
            radial_split: RadialSplit::Scales { levels: 12 },
        }
    }
}

impl QuadratureConfig {
    pub fn with_tol(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) || self.max_subdiv == 0 {
            return Err(Error::InvalidParameter(
                "quadrature tolerances and subdivision budget must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Panel boundaries `0 = b_0 < ... < b_n`; the tail `[b_n, inf)` is added by the integrator.
    pub(crate) fn breakpoints(&self, scales: &[f64]) -> Vec<f64> {
        let mut points = alloc::vec![0.0];
        match self.radial_split {
            RadialSplit::Scales { levels } => {
                let mut finite: Vec<f64> =
                    scales.iter().copied().filter(|s| s.is_finite() && *s > 0.0).collect();
                finite.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
                if let Some(&smallest) = finite.first() {
                    for j in (1..=levels).rev() {
                        points.push(smallest * 0.5f64.powi(j as i32));
                    }
                }
                points.extend(finite.iter().copied());
                if let Some(&largest) = finite.last() {
                    points.push(2.0 * largest);
                }
            }
            RadialSplit::Uniform { width, count } => {
                for i in 1..=count {
                    points.push(width * i as f64);
                }
            }
        }
        points.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1e-300));
        points
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
    pub intervals: usize,
}

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208977196802,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[derive(Clone, Copy)]
enum Map {
    Linear,
    /// `r = origin + s / (1 - s)` for `s` in `[0, 1)`.
    Tail { origin: f64 },
}

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    map: Map,
    value: f64,
    error: f64,
    /// error estimate is at the rounding floor of the rule
    roundoff: bool,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

fn eval_mapped<F: Fn(f64) -> f64>(f: &F, map: Map, s: f64) -> f64 {
    match map {
        Map::Linear => f(s),
        Map::Tail { origin } => {
            let t = 1.0 - s;
            let value = f(origin + s / t);
            if value == 0.0 {
                0.0
            } else {
                value / (t * t)
            }
        }
    }
}

/// One 21-point Kronrod rule on `[a, b]` with the QUADPACK error heuristic.
fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, map: Map) -> (f64, f64, bool) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = eval_mapped(f, map, center);
    let mut resk = fc * WGK[10];
    let mut resg = 0.0;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = eval_mapped(f, map, center - dx);
        let f2 = eval_mapped(f, map, center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * resabs;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(floor);
    }
    (result, err, err <= floor)
}

/// Integrate `f` over `[0, inf)`; `scales` are the radii where the integrand changes character.
pub fn integrate_radial<F: Fn(f64) -> f64>(
    f: F,
    scales: &[f64],
    cfg: &QuadratureConfig,
) -> Result<QuadResult> {
    let points = cfg.breakpoints(scales);
    let mut panels: Vec<(f64, f64, Map)> = points
        .windows(2)
        .map(|w| (w[0], w[1], Map::Linear))
        .collect();
    let origin = *points.last().unwrap_or(&0.0);
    panels.push((0.0, 1.0, Map::Tail { origin }));
    adaptive(&f, &panels, cfg)
}

/// Integrate `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<QuadResult> {
    adaptive(&f, &[(a, b, Map::Linear)], cfg)
}

fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    panels: &[(f64, f64, Map)],
    cfg: &QuadratureConfig,
) -> Result<QuadResult> {
    cfg.validate()?;
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut evals = 0;
    for &(a, b, map) in panels {
        let (value, error, roundoff) = kronrod(f, a, b, map);
        evals += 21;
        total += value;
        total_err += error;
        heap.push(Segment { a, b, map, value, error, roundoff });
    }
    let target = |total: f64| cfg.abs_tol.max(cfg.rel_tol * total.abs());
    while total_err > target(total) {
        if !total.is_finite() || !total_err.is_finite() {
            return Err(Error::QuadratureFailure {
                estimate: total,
                error: total_err,
            });
        }
        if heap.len() >= cfg.max_subdiv {
            return Err(Error::QuadratureFailure {
                estimate: total,
                error: total_err,
            });
        }
        let Some(worst) = heap.pop() else { break };
        if worst.roundoff {
            // every remaining segment is at its rounding floor
            heap.push(worst);
            break;
        }
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval at machine resolution; cannot refine further
            return Err(Error::QuadratureFailure {
                estimate: total,
                error: total_err,
            });
        }
        let (v1, e1, r1) = kronrod(f, worst.a, mid, worst.map);
        let (v2, e2, r2) = kronrod(f, mid, worst.b, worst.map);
        evals += 42;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, map: worst.map, value: v1, error: e1, roundoff: r1 });
        heap.push(Segment { a: mid, b: worst.b, map: worst.map, value: v2, error: e2, roundoff: r2 });
        // re-sum periodically so that cancellation in the running totals cannot drift
        if heap.len() % 64 == 0 {
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    Ok(QuadResult {
        value,
        error,
        evals,
        intervals: heap.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::with_tol(1e-12, 1e-14)
    }

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, &cfg()).unwrap();
        assert!((r.value - 0.0).abs() < 1e-14);
        let r = integrate(|x| x.powi(6), -1.0, 1.0, &cfg()).unwrap();
        assert!((r.value - 2.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_half_line() {
        let r = integrate_radial(|x| (-x * x).exp(), &[1.0], &cfg()).unwrap();
        assert!((r.value - 0.5 * PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn bose_integral_with_log_singularity() {
        // int_0^inf r^2 / (e^{r^2} - 1) dr = Gamma(3/2) zeta(3/2) / 2
        let zeta32 = 2.612_375_348_685_488_3;
        let exact = 0.5 * (0.5 * PI.sqrt()) * zeta32;
        let r = integrate_radial(|x| x * x / libm::expm1(x * x), &[1.0], &cfg()).unwrap();
        assert!((r.value - exact).abs() < 1e-12 * exact);
        let log = integrate_radial(|x| x * x * (-libm::expm1(-x * x)).ln(), &[1.0], &cfg()).unwrap();
        assert!(log.value.is_finite() && log.value < 0.0);
    }

    #[test]
    fn algebraic_tail() {
        let r = integrate_radial(|x| 1.0 / (1.0 + x * x), &[1.0], &cfg()).unwrap();
        assert!((r.value - 0.5 * PI).abs() < 1e-12);
    }

    #[test]
    fn reports_failure_on_divergence() {
        let tight = QuadratureConfig {
            max_subdiv: 200,
            ..cfg()
        };
        assert!(matches!(
            integrate_radial(|x| 1.0 / x, &[1.0], &tight),
            Err(Error::QuadratureFailure { .. })
        ));
    }

    #[test]
    fn uniform_split() {
        let c = QuadratureConfig {
            radial_split: RadialSplit::Uniform { width: 0.5, count: 8 },
            ..cfg()
        };
        let r = integrate_radial(|x| (-x).exp(), &[], &c).unwrap();
        assert!((r.value - 1.0).abs() < 1e-13);
    }
}
