use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // float math for no_std builds; shadowed by inherent methods when std is linked
use num_traits::Float;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::fock::{Fock, FockSpec, Sparse};
use super::operators::{from_sparse, hamiltonian_sparse, number_diagonals, HamiltonianKind, OperatorMatrix, Parts};
use crate::error::{Error, Result};
use crate::model::{epsilon, lambda_value, Mode, Model};
use crate::pressure::{pressure_fv_modes, OrderPoint, ThermoPoint};

/// Slack allowed in every matrix inequality.
pub const INEQUALITY_TOL: f64 = 1e-10;

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Blocks of `H − μN`.
fn grand_blocks(h: &OperatorMatrix, fock: &Fock, mu: f64) -> Vec<DMatrix<Complex64>> {
    h.blocks()
        .iter()
        .zip(number_diagonals(fock))
        .map(|(b, n)| {
            let mut m = b.clone();
            for (i, n) in n.iter().enumerate() {
                m[(i, i)] -= re(mu * n);
            }
            m
        })
        .collect()
}

fn eigen_block(m: DMatrix<Complex64>) -> Result<nalgebra::SymmetricEigen<Complex64, nalgebra::Dyn>> {
    let n = m.nrows();
    nalgebra::SymmetricEigen::try_new(m, f64::EPSILON, 1_000_000)
        .ok_or_else(|| Error::EigenFailure(format!("block of size {n} did not converge")))
}

/// `(1/βV) ln Tr e^{−β(H − μN)}` over the working basis.
pub fn trace_pressure(h: &OperatorMatrix, fock: &Fock, tp: &ThermoPoint, volume: f64) -> Result<f64> {
    let mut exponents = Vec::with_capacity(h.dim());
    for block in grand_blocks(h, fock, tp.mu) {
        exponents.extend(eigen_block(block)?.eigenvalues.iter().map(|&e| -tp.beta * e));
    }
    Ok(log_sum_exp(&exponents) / (tp.beta * volume))
}

fn log_sum_exp(x: &[f64]) -> f64 {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + x.iter().map(|&v| (v - max).exp()).sum::<f64>().ln()
}

/// Gibbs average `Tr X e^{−β(H−μN)} / Tr e^{−β(H−μN)}`; `x` must share the sector structure.
pub fn gibbs_expectation(h: &OperatorMatrix, x: &OperatorMatrix, fock: &Fock, tp: &ThermoPoint) -> Result<Complex64> {
    let eigens = grand_blocks(h, fock, tp.mu).into_iter().map(eigen_block).collect::<Result<Vec<_>>>()?;
    let ground = eigens.iter().flat_map(|e| e.eigenvalues.iter().copied()).fold(f64::INFINITY, f64::min);
    let (mut z, mut acc) = (0.0, re(0.0));
    for (e, xb) in eigens.iter().zip(x.blocks()) {
        let rotated = e.eigenvectors.adjoint() * xb * &e.eigenvectors;
        for (i, &lambda) in e.eigenvalues.iter().enumerate() {
            let w = (-tp.beta * (lambda - ground)).exp();
            z += w;
            acc += rotated[(i, i)] * w;
        }
    }
    Ok(acc / z)
}

/// Shared sparse parts for repeated builds on one basis.
pub struct Builder<'a> {
    pub fock: &'a Fock,
    pub model: &'a Model,
    pub volume: f64,
    parts: Parts,
}

impl<'a> Builder<'a> {
    pub fn new(fock: &'a Fock, model: &'a Model, volume: f64) -> Result<Self> {
        if !(volume > 0.0) || !volume.is_finite() {
            return Err(Error::InvalidParameter(format!("volume must be positive, got {volume}")));
        }
        Ok(Self { fock, model, volume, parts: Parts::new(fock, model) })
    }

    pub fn hamiltonian(&self, kind: HamiltonianKind) -> OperatorMatrix {
        let mut h = from_sparse(self.fock, &hamiltonian_sparse(&self.parts, kind, self.model, self.volume));
        h.label = super::operators::OperatorLabel::Hamiltonian(kind);
        h.volume = Some(self.volume);
        h
    }

    pub fn pressure(&self, kind: HamiltonianKind, tp: &ThermoPoint) -> Result<f64> {
        trace_pressure(&self.hamiltonian(kind), self.fock, tp, self.volume)
    }

    fn sparse(&self, op: &Sparse) -> OperatorMatrix {
        from_sparse(self.fock, op)
    }
}

/// `M = max(Σ|λ|/V, Σ ε|λ|²/V, sup ε|λ|²)` over the mode set.
pub fn coupling_constant(modes: &[Mode], model: &Model, volume: f64) -> f64 {
    let (mut m, mut n, mut c) = (0.0, 0.0, 0.0f64);
    for mode in modes {
        let lam = lambda_value(model.profile(), &mode.k).abs();
        let w = epsilon(model, &mode.k) * lam * lam;
        m += lam;
        n += w;
        c = c.max(w);
    }
    (m / volume).max(n / volume).max(c)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperstabilityReport {
    pub coupling_m: f64,
    /// Minimum eigenvalue of `P(N² + MVN − Q†Q)P`.
    pub pair_bound_min_eig: f64,
    pub alpha: f64,
    pub r: f64,
    /// Minimum eigenvalue of `H − μN − [T + (α/2V)N² − (μ+R)N]`.
    pub stability_min_eig: f64,
    pub passed: bool,
}

/// Pair bound `Q†Q ≤ N² + MVN` and the superstability bound with `R = Mu/2`.
/// For `u ≤ 0` the second check uses `α = v`, `R = 0`.
pub fn check_superstability(fock: &Fock, model: &Model, volume: f64) -> Result<SuperstabilityReport> {
    let b = Builder::new(fock, model, volume)?;
    let m = coupling_constant(fock.modes(), model, volume);
    let p = &b.parts;
    let pair = b.sparse(&Sparse::combine(p.dim, &[(re(1.0), &p.n_sq), (re(m * volume), &p.n), (re(-1.0), &p.q_dag_q)]));
    let pair_bound_min_eig = pair.min_eigenvalue()?;
    let (alpha, r) = if model.u() > 0.0 { (model.alpha(), 0.5 * m * model.u()) } else { (model.v(), 0.0) };
    let h = b.hamiltonian(HamiltonianKind::full(0.0));
    // μ cancels between the two sides
    let lower = b.sparse(&Sparse::combine(p.dim, &[
        (re(1.0), &p.t),
        (re(alpha / (2.0 * volume)), &p.n_sq),
        (re(-r), &p.n),
    ]));
    let stability_min_eig = OperatorMatrix::combine(&[(1.0, &h), (-1.0, &lower)]).min_eigenvalue()?;
    let passed = pair_bound_min_eig >= -INEQUALITY_TOL && stability_min_eig >= -INEQUALITY_TOL;
    Ok(SuperstabilityReport { coupling_m: m, pair_bound_min_eig, alpha, r, stability_min_eig, passed })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairNumberCase {
    pub k: usize,
    pub k_prime: usize,
    pub sign: i8,
    pub min_eig: f64,
}

/// `(N_k+|λ(k)|)N_{k'} + (N_{−k'}+|λ(k')|)N_{−k} ∓ (λ(k)λ(k')A_k†A_{k'} + h.c.) ⪰ 0`
/// for every ordered pair with `k ∉ {k', −k'}`.
pub fn pair_number_bound(fock: &Fock, model: &Model) -> Result<Vec<PairNumberCase>> {
    let modes = fock.modes();
    let lam: Vec<f64> = modes.iter().map(|m| lambda_value(model.profile(), &m.k)).collect();
    let dim = fock.extended_dim();
    let mut cases = Vec::new();
    for k in 0..modes.len() {
        for kp in 0..modes.len() {
            if kp == k || kp == fock.partner(k) {
                continue;
            }
            let (mk, mkp) = (fock.partner(k), fock.partner(kp));
            let diag = fock.diagonal(|s| {
                (s[k] as f64 + lam[k].abs()) * s[kp] as f64 + (s[mkp] as f64 + lam[kp].abs()) * s[mk] as f64
            });
            let cross = fock.pair(k).adjoint().mul(&fock.pair(kp));
            let cross = Sparse::combine(dim, &[(re(lam[k] * lam[kp]), &cross)]);
            let cross_h = cross.adjoint();
            for sign in [1i8, -1] {
                let s = re(-(sign as f64));
                let op = Sparse::combine(dim, &[(re(1.0), &diag), (s, &cross), (s, &cross_h)]);
                let min_eig = from_sparse(fock, &op).min_eigenvalue()?;
                cases.push(PairNumberCase { k, k_prime: kp, sign, min_eig });
            }
        }
    }
    Ok(cases)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualSign {
    /// `H^r ⪯ 0`, expected for `u > 0`.
    NonPositive,
    /// `H^r ⪰ 0`, expected for `u ≤ 0`.
    NonNegative,
}

impl ResidualSign {
    pub fn for_coupling(u: f64) -> Self {
        if u > 0.0 { ResidualSign::NonPositive } else { ResidualSign::NonNegative }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualPoint {
    pub q: f64,
    pub min_eig: f64,
    pub max_eig: f64,
    pub passed: bool,
}

/// Spectrum extremes of `H^r(q)` judged against the expected sign.
pub fn residual_report(fock: &Fock, model: &Model, volume: f64, q_grid: &[f64], expect: ResidualSign) -> Result<Vec<ResidualPoint>> {
    let b = Builder::new(fock, model, volume)?;
    q_grid
        .iter()
        .map(|&q| {
            let eig = b.hamiltonian(HamiltonianKind::residual(q)).eigenvalues()?;
            let min_eig = eig.iter().copied().fold(f64::INFINITY, f64::min);
            let max_eig = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let passed = match expect {
                ResidualSign::NonPositive => max_eig <= INEQUALITY_TOL,
                ResidualSign::NonNegative => min_eig >= -INEQUALITY_TOL,
            };
            Ok(ResidualPoint { q, min_eig, max_eig, passed })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    /// `max |H − H⁽¹⁾(q) − H^r(q)|`
    pub full_minus_parts: f64,
    /// `max |H⁽¹⁾ − H⁽²⁾ − (v/2V)(N − Vρ)²|`
    pub approx_difference: f64,
    pub max_hermiticity_error: f64,
}

pub fn decomposition_report(fock: &Fock, model: &Model, volume: f64, q: f64, rho: f64, eta: f64) -> Result<DecompositionReport> {
    let b = Builder::new(fock, model, volume)?;
    let full = b.hamiltonian(HamiltonianKind::full(eta));
    let h1 = b.hamiltonian(HamiltonianKind::approx1(q, eta));
    let h2 = b.hamiltonian(HamiltonianKind::approx2(q, rho, eta));
    let hr = b.hamiltonian(HamiltonianKind::residual(q));
    let shifted = fock.diagonal(|s| {
        let d = s.iter().sum::<u32>() as f64 - volume * rho;
        model.v() / (2.0 * volume) * d * d
    });
    let square = b.sparse(&shifted);
    Ok(DecompositionReport {
        full_minus_parts: OperatorMatrix::combine(&[(1.0, &full), (-1.0, &h1), (-1.0, &hr)]).max_abs(),
        approx_difference: OperatorMatrix::combine(&[(1.0, &h1), (-1.0, &h2), (-1.0, &square)]).max_abs(),
        max_hermiticity_error: [&full, &h1, &h2, &hr].iter().map(|h| h.hermiticity_error()).fold(0.0, f64::max),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstSlack {
    pub q: f64,
    pub p1: f64,
    /// `p − p⁽¹⁾` for `u > 0`, `p⁽¹⁾ − p` otherwise.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecondSlack {
    pub q: f64,
    pub rho: f64,
    pub p2: f64,
    /// `p̃⁽²⁾ − p⁽¹⁾`
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub eta: f64,
    pub p_full: f64,
    pub first_direction: ResidualSign,
    pub first: Vec<FirstSlack>,
    pub second: Vec<SecondSlack>,
    pub min_first_slack: f64,
    pub min_second_slack: f64,
    /// `|⟨Q⟩|/V` in the full Gibbs state.
    pub gibbs_q: f64,
    /// `p − p⁽¹⁾` at `gibbs_q`.
    pub slack_at_gibbs_q: f64,
    /// `⟨N⟩/V` under `H⁽¹⁾(gibbs_q)`.
    pub gibbs_rho: f64,
    /// `p̃⁽²⁾ − p⁽¹⁾` at `(gibbs_q, gibbs_rho)`.
    pub slack_at_gibbs_rho: f64,
    pub passed: bool,
}

/// Trace pressures along `p(η) ≥ p⁽¹⁾(q,η) ≤ p̃⁽²⁾(q,ρ,η)`; the first direction
/// reverses for `u ≤ 0`.
pub fn variational_chain(
    fock: &Fock,
    model: &Model,
    tp: &ThermoPoint,
    volume: f64,
    q_grid: &[f64],
    rho_grid: &[f64],
    eta: f64,
) -> Result<ChainReport> {
    let b = Builder::new(fock, model, volume)?;
    let direction = ResidualSign::for_coupling(model.u());
    let orient = |d: f64| if direction == ResidualSign::NonPositive { d } else { -d };
    let full = b.hamiltonian(HamiltonianKind::full(eta));
    let p_full = trace_pressure(&full, fock, tp, volume)?;
    let mut first = Vec::with_capacity(q_grid.len());
    let mut second = Vec::with_capacity(q_grid.len() * rho_grid.len());
    for &q in q_grid {
        let p1 = b.pressure(HamiltonianKind::approx1(q, eta), tp)?;
        first.push(FirstSlack { q, p1, slack: orient(p_full - p1) });
        for &rho in rho_grid {
            let p2 = b.pressure(HamiltonianKind::approx2(q, rho, eta), tp)?;
            second.push(SecondSlack { q, rho, p2, slack: p2 - p1 });
        }
    }
    let min_first_slack = first.iter().map(|s| s.slack).fold(f64::INFINITY, f64::min);
    let min_second_slack = second.iter().map(|s| s.slack).fold(f64::INFINITY, f64::min);

    let q_op = b.sparse(&b.parts.q);
    let n_op = b.sparse(&b.parts.n);
    let gibbs_q = gibbs_expectation(&full, &q_op, fock, tp)?.norm() / volume;
    let h1 = b.hamiltonian(HamiltonianKind::approx1(gibbs_q, eta));
    let p1_star = trace_pressure(&h1, fock, tp, volume)?;
    let gibbs_rho = gibbs_expectation(&h1, &n_op, fock, tp)?.re / volume;
    let p2_star = b.pressure(HamiltonianKind::approx2(gibbs_q, gibbs_rho, eta), tp)?;

    Ok(ChainReport {
        eta,
        p_full,
        first_direction: direction,
        first,
        second,
        min_first_slack,
        min_second_slack,
        gibbs_q,
        slack_at_gibbs_q: orient(p_full - p1_star),
        gibbs_rho,
        slack_at_gibbs_rho: p2_star - p1_star,
        passed: min_first_slack >= -INEQUALITY_TOL && min_second_slack >= -INEQUALITY_TOL,
    })
}

/// [`variational_chain`] that fails on the first violated grid point.
pub fn check_variational_chain(
    fock: &Fock,
    model: &Model,
    tp: &ThermoPoint,
    volume: f64,
    q_grid: &[f64],
    rho_grid: &[f64],
    eta: f64,
) -> Result<ChainReport> {
    let report = variational_chain(fock, model, tp, volume, q_grid, rho_grid, eta)?;
    if let Some(s) = report.first.iter().find(|s| s.slack < -INEQUALITY_TOL) {
        return Err(Error::InequalityViolated(format!("p vs p1 at q = {}: slack {:.3e}", s.q, s.slack)));
    }
    if let Some(s) = report.second.iter().find(|s| s.slack < -INEQUALITY_TOL) {
        return Err(Error::InequalityViolated(format!("p1 vs p2 at q = {}, rho = {}: slack {:.3e}", s.q, s.rho, s.slack)));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationRow {
    pub n_max: u32,
    pub dim: usize,
    pub trace_pressure: f64,
    pub closed_form: Option<f64>,
    pub rel_error: Option<f64>,
}

/// Trace pressure of `H⁽²⁾(q,ρ,η)` at several cutoffs against the closed form
/// (absent where the closed form diverges).
pub fn truncation_study(
    model: &Model,
    modes: &[Mode],
    n_max_list: &[u32],
    tp: &ThermoPoint,
    volume: f64,
    op: &OrderPoint,
) -> Result<Vec<TruncationRow>> {
    let closed_form = pressure_fv_modes(model, tp, op, modes, volume).ok();
    n_max_list
        .iter()
        .map(|&n_max| {
            let fock = Fock::new(FockSpec::new(modes.to_vec(), n_max))?;
            let h = super::operators::build_hamiltonian(&fock, HamiltonianKind::approx2(op.q, op.rho, op.eta), model, volume)?;
            let p = trace_pressure(&h, &fock, tp, volume)?;
            Ok(TruncationRow {
                n_max,
                dim: fock.working_dim(),
                trace_pressure: p,
                closed_form,
                rel_error: closed_form.map(|c| ((p - c) / c).abs()),
            })
        })
        .collect()
}
