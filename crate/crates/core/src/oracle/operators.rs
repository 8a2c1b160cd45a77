use alloc::vec::Vec;

#[allow(unused_imports)] // float math for no_std builds; shadowed by inherent methods when std is linked
use num_traits::Float;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use super::fock::{Fock, Sparse};
use crate::error::{Error, Result};
use crate::model::{epsilon, lambda_value, Model};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "op")]
pub enum Which {
    N,
    Q,
    QDaggerQ,
    /// `A_k = a_k a_{-k}` for the mode at this position in the mode list.
    A { mode: usize },
    /// Kinetic energy `Σ ε(k) N_k`.
    T,
}

/// Hamiltonians with sources. `q`, `eta` and `nu` may carry phases; the solver's
/// real gauge is `q, η ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum HamiltonianKind {
    /// `T + (v/2V)N² − (u/2V)Q†Q − (νQ† + ν̄Q) − √V(ηa₀† + η̄a₀)`
    Full { eta: Complex64, nu: Complex64 },
    /// `T + (v/2V)N² − (u/2)(Q†q + Qq̄) + (V/2)u|q|² − (νQ† + ν̄Q) − √V(ηa₀† + η̄a₀)`
    Approx1 { q: Complex64, eta: Complex64, nu: Complex64 },
    /// `T + vρN − (u/2)(Q†q + Qq̄) − (V/2)vρ² + (V/2)u|q|² − √V(ηa₀† + η̄a₀)`
    Approx2 { q: Complex64, rho: f64, eta: Complex64 },
    /// `−(u/2V)(Q − Vq)†(Q − Vq)`
    Residual { q: Complex64 },
    /// `T + (v/2V)N²`
    MeanField,
}

impl HamiltonianKind {
    pub fn full(eta: f64) -> Self {
        HamiltonianKind::Full { eta: re(eta), nu: re(0.0) }
    }

    pub fn approx1(q: f64, eta: f64) -> Self {
        HamiltonianKind::Approx1 { q: re(q), eta: re(eta), nu: re(0.0) }
    }

    pub fn approx2(q: f64, rho: f64, eta: f64) -> Self {
        HamiltonianKind::Approx2 { q: re(q), rho, eta: re(eta) }
    }

    pub fn residual(q: f64) -> Self {
        HamiltonianKind::Residual { q: re(q) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorLabel {
    Operator(Which),
    Hamiltonian(HamiltonianKind),
    Derived,
}

/// Operator compressed to the working basis, block diagonal in total momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub label: OperatorLabel,
    pub volume: Option<f64>,
    blocks: Vec<DMatrix<Complex64>>,
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

impl OperatorMatrix {
    pub fn blocks(&self) -> &[DMatrix<Complex64>] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.nrows()).sum()
    }

    /// Element `⟨bra|X|ket⟩` between working-basis occupation vectors.
    pub fn element(&self, fock: &Fock, bra: &[u32], ket: &[u32]) -> Option<Complex64> {
        let (sb, i) = fock.locate(bra)?;
        let (sk, j) = fock.locate(ket)?;
        Some(if sb == sk { self.blocks[sb][(i, j)] } else { re(0.0) })
    }

    pub fn combine(terms: &[(f64, &OperatorMatrix)]) -> OperatorMatrix {
        let mut blocks = terms[0].1.blocks.iter().map(|b| b * re(terms[0].0)).collect::<Vec<_>>();
        for &(c, op) in &terms[1..] {
            for (acc, b) in blocks.iter_mut().zip(&op.blocks) {
                *acc += b * re(c);
            }
        }
        OperatorMatrix { label: OperatorLabel::Derived, volume: None, blocks }
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().flat_map(|b| b.iter()).fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &OperatorMatrix) -> f64 {
        OperatorMatrix::combine(&[(1.0, self), (-1.0, other)]).max_abs()
    }

    /// `max |X − X†|`
    pub fn hermiticity_error(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| (b - b.adjoint()).iter().fold(0.0, |m: f64, z| m.max(z.norm())))
            .fold(0.0, f64::max)
    }

    /// Eigendecomposition of each Hermitian block.
    pub fn eigen(&self) -> Result<Vec<SymmetricEigen<Complex64, nalgebra::Dyn>>> {
        self.blocks
            .iter()
            .map(|b| {
                SymmetricEigen::try_new(b.clone(), f64::EPSILON, 1_000_000)
                    .ok_or_else(|| Error::EigenFailure(alloc::format!("block of size {} did not converge", b.nrows())))
            })
            .collect()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.eigen()?.into_iter().flat_map(|e| e.eigenvalues.iter().copied().collect::<Vec<_>>()).collect())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.into_iter().fold(f64::INFINITY, f64::min))
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.into_iter().fold(f64::NEG_INFINITY, f64::max))
    }
}

/// Sparse building blocks on the extended basis for one model.
pub(crate) struct Parts {
    pub dim: usize,
    pub n: Sparse,
    pub n_sq: Sparse,
    pub t: Sparse,
    pub q: Sparse,
    pub q_dag: Sparse,
    pub q_dag_q: Sparse,
    pub a0: Sparse,
    pub a0_dag: Sparse,
    pub identity: Sparse,
}

impl Parts {
    pub fn new(fock: &Fock, model: &Model) -> Parts {
        let modes = fock.modes();
        let eps: Vec<f64> = modes.iter().map(|m| epsilon(model, &m.k)).collect();
        let lam: Vec<f64> = modes.iter().map(|m| lambda_value(model.profile(), &m.k)).collect();
        let dim = fock.extended_dim();
        let pairs: Vec<Sparse> = (0..modes.len()).map(|k| fock.pair(k)).collect();
        let terms: Vec<(Complex64, &Sparse)> = pairs.iter().zip(&lam).map(|(p, &l)| (re(l), p)).collect();
        let q = Sparse::combine(dim, &terms);
        let q_dag = q.adjoint();
        let q_dag_q = q_dag.mul(&q);
        let a0 = fock.annihilate(fock.zero_mode());
        Parts {
            dim,
            n: fock.diagonal(|s| s.iter().sum::<u32>() as f64),
            n_sq: fock.diagonal(|s| {
                let n = s.iter().sum::<u32>() as f64;
                n * n
            }),
            t: fock.diagonal(|s| s.iter().zip(&eps).map(|(&n, e)| n as f64 * e).sum()),
            q,
            q_dag,
            q_dag_q,
            a0_dag: a0.adjoint(),
            a0,
            identity: fock.identity(),
        }
    }
}

pub fn build_operator(fock: &Fock, which: Which, model: &Model) -> Result<OperatorMatrix> {
    let parts = Parts::new(fock, model);
    let op = match which {
        Which::N => parts.n,
        Which::Q => parts.q,
        Which::QDaggerQ => parts.q_dag_q,
        Which::A { mode } => {
            if mode >= fock.modes().len() {
                return Err(Error::InvalidParameter(alloc::format!("no mode at position {mode}")));
            }
            fock.pair(mode)
        }
        Which::T => parts.t,
    };
    Ok(OperatorMatrix { label: OperatorLabel::Operator(which), volume: None, blocks: fock.project(&op) })
}

pub fn build_hamiltonian(fock: &Fock, kind: HamiltonianKind, model: &Model, volume: f64) -> Result<OperatorMatrix> {
    if !(volume > 0.0) || !volume.is_finite() {
        return Err(Error::InvalidParameter(alloc::format!("volume must be positive, got {volume}")));
    }
    let parts = Parts::new(fock, model);
    let op = hamiltonian_sparse(&parts, kind, model, volume);
    Ok(OperatorMatrix { label: OperatorLabel::Hamiltonian(kind), volume: Some(volume), blocks: fock.project(&op) })
}

pub(crate) fn hamiltonian_sparse(p: &Parts, kind: HamiltonianKind, model: &Model, volume: f64) -> Sparse {
    let (u, v) = (model.u(), model.v());
    let sqrt_v = volume.sqrt();
    let source = |eta: Complex64| [(-sqrt_v * eta, &p.a0_dag), (-sqrt_v * eta.conj(), &p.a0)];
    match kind {
        HamiltonianKind::Full { eta, nu } => {
            let [s1, s2] = source(eta);
            Sparse::combine(p.dim, &[
                (re(1.0), &p.t),
                (re(v / (2.0 * volume)), &p.n_sq),
                (re(-u / (2.0 * volume)), &p.q_dag_q),
                (-nu, &p.q_dag),
                (-nu.conj(), &p.q),
                s1,
                s2,
            ])
        }
        HamiltonianKind::Approx1 { q, eta, nu } => {
            let [s1, s2] = source(eta);
            Sparse::combine(p.dim, &[
                (re(1.0), &p.t),
                (re(v / (2.0 * volume)), &p.n_sq),
                (-0.5 * u * q - nu, &p.q_dag),
                (-0.5 * u * q.conj() - nu.conj(), &p.q),
                (re(0.5 * volume * u * q.norm_sqr()), &p.identity),
                s1,
                s2,
            ])
        }
        HamiltonianKind::Approx2 { q, rho, eta } => {
            let [s1, s2] = source(eta);
            Sparse::combine(p.dim, &[
                (re(1.0), &p.t),
                (re(v * rho), &p.n),
                (-0.5 * u * q, &p.q_dag),
                (-0.5 * u * q.conj(), &p.q),
                (re(0.5 * volume * (u * q.norm_sqr() - v * rho * rho)), &p.identity),
                s1,
                s2,
            ])
        }
        HamiltonianKind::Residual { q } => {
            let shift = re(volume) * q;
            let x = Sparse::combine(p.dim, &[(re(1.0), &p.q), (-shift, &p.identity)]);
            let x_dag_x = x.adjoint().mul(&x);
            Sparse::combine(p.dim, &[(re(-u / (2.0 * volume)), &x_dag_x)])
        }
        HamiltonianKind::MeanField => {
            Sparse::combine(p.dim, &[(re(1.0), &p.t), (re(v / (2.0 * volume)), &p.n_sq)])
        }
    }
}

/// `(ΣNₖ)` restricted to the working basis, as per-sector diagonals.
pub(crate) fn number_diagonals(fock: &Fock) -> Vec<Vec<f64>> {
    fock.sectors().iter().map(|s| s.states.iter().map(|&i| fock.total(i) as f64).collect()).collect()
}

pub(crate) fn from_sparse(fock: &Fock, op: &Sparse) -> OperatorMatrix {
    OperatorMatrix { label: OperatorLabel::Derived, volume: None, blocks: fock.project(op) }
}
