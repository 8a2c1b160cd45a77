use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // float math for no_std builds; shadowed by inherent methods when std is linked
use num_traits::Float;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Mode, ModeClass};

pub const DEFAULT_MAX_DIM: usize = 20_000;

/// Extended bases may exceed the working limit by this factor.
const EXTENDED_FACTOR: usize = 16;

/// Truncated Fock space over a finite mode set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FockSpec {
    /// Closed under `k -> -k`, containing `k = 0`.
    pub modes: Vec<Mode>,
    pub n_max: u32,
    pub n_total_max: Option<u32>,
    /// Extra occupation layers kept while multiplying raising operators.
    pub headroom: u32,
    pub max_dim: usize,
}

impl FockSpec {
    pub fn new(modes: Vec<Mode>, n_max: u32) -> Self {
        Self { modes, n_max, n_total_max: None, headroom: 2, max_dim: DEFAULT_MAX_DIM }
    }

    /// Modes `2πs/L` along one axis with `|s| ≤ s_max`.
    pub fn axis_modes(l: f64, s_max: u32) -> Vec<Mode> {
        let s_max = s_max as i64;
        (-s_max..=s_max)
            .map(|s| Mode {
                index: vec![s],
                k: vec![2.0 * PI * s as f64 / l],
                class: match s {
                    0 => ModeClass::Zero,
                    s if s > 0 => ModeClass::Plus,
                    _ => ModeClass::Minus,
                },
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes.is_empty() {
            return Err(Error::InvalidParameter("empty mode set".into()));
        }
        for (i, mode) in self.modes.iter().enumerate() {
            if self.modes[..i].iter().any(|m| m.index == mode.index) {
                return Err(Error::InvalidParameter(format!("duplicate mode {:?}", mode.index)));
            }
            let negated: Vec<i64> = mode.index.iter().map(|s| -s).collect();
            if !self.modes.iter().any(|m| m.index == negated) {
                return Err(Error::InvalidParameter(format!("mode set not closed under k -> -k at {:?}", mode.index)));
            }
        }
        if !self.modes.iter().any(|m| m.index.iter().all(|&s| s == 0)) {
            return Err(Error::InvalidParameter("mode set must contain k = 0".into()));
        }
        Ok(())
    }

    /// Number of occupation vectors with per-mode cap `cap` and optional total cap.
    fn count(&self, cap: u32, total: Option<u32>) -> usize {
        let m = self.modes.len();
        match total {
            None => (0..m).fold(1usize, |acc, _| acc.saturating_mul(cap as usize + 1)),
            Some(t) => {
                let t = t as usize;
                let mut dp = vec![0usize; t + 1];
                dp[0] = 1;
                for _ in 0..m {
                    let mut next = vec![0usize; t + 1];
                    for (s, &c) in dp.iter().enumerate() {
                        for n in 0..=(cap as usize).min(t - s) {
                            next[s + n] = next[s + n].saturating_add(c);
                        }
                    }
                    dp = next;
                }
                dp.iter().fold(0usize, |a, &c| a.saturating_add(c))
            }
        }
    }

    pub fn working_dim(&self) -> usize {
        self.count(self.n_max, self.n_total_max)
    }
}

/// Basis states sharing one total momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct Sector {
    pub momentum: Vec<i64>,
    /// Indices into the extended basis, all in the working basis.
    pub states: Vec<usize>,
}

/// Enumerated headroom-extended basis, its working subspace and momentum sectors.
#[derive(Debug, Clone)]
pub struct Fock {
    spec: FockSpec,
    states: Vec<Vec<u32>>,
    lookup: BTreeMap<Vec<u32>, usize>,
    partner: Vec<usize>,
    zero: usize,
    sectors: Vec<Sector>,
    position: Vec<Option<(usize, usize)>>,
}

impl Fock {
    pub fn new(spec: FockSpec) -> Result<Self> {
        spec.validate()?;
        let dim = spec.working_dim();
        if dim > spec.max_dim {
            return Err(Error::DimensionExceeded { dim, limit: spec.max_dim });
        }
        let cap = spec.n_max + spec.headroom;
        let total_cap = spec.n_total_max.map(|t| t + spec.headroom);
        let extended = spec.count(cap, total_cap);
        let extended_limit = spec.max_dim.saturating_mul(EXTENDED_FACTOR);
        if extended > extended_limit {
            return Err(Error::DimensionExceeded { dim: extended, limit: extended_limit });
        }
        let states = enumerate(spec.modes.len(), cap, total_cap.unwrap_or(u32::MAX), extended);
        let lookup = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let partner = spec
            .modes
            .iter()
            .map(|m| {
                let negated: Vec<i64> = m.index.iter().map(|s| -s).collect();
                spec.modes.iter().position(|x| x.index == negated).unwrap()
            })
            .collect();
        let zero = spec.modes.iter().position(|m| m.index.iter().all(|&s| s == 0)).unwrap();

        let mut by_momentum: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
        for (i, state) in states.iter().enumerate() {
            if is_working(&spec, state) {
                by_momentum.entry(momentum(&spec.modes, state)).or_default().push(i);
            }
        }
        let mut position = vec![None; states.len()];
        let sectors: Vec<Sector> = by_momentum
            .into_iter()
            .map(|(momentum, states)| Sector { momentum, states })
            .collect();
        for (s, sector) in sectors.iter().enumerate() {
            for (local, &i) in sector.states.iter().enumerate() {
                position[i] = Some((s, local));
            }
        }
        Ok(Self { spec, states, lookup, partner, zero, sectors, position })
    }

    pub fn spec(&self) -> &FockSpec {
        &self.spec
    }

    pub fn modes(&self) -> &[Mode] {
        &self.spec.modes
    }

    pub fn zero_mode(&self) -> usize {
        self.zero
    }

    /// Index of the mode `-k`.
    pub fn partner(&self, mode: usize) -> usize {
        self.partner[mode]
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn extended_dim(&self) -> usize {
        self.states.len()
    }

    pub fn working_dim(&self) -> usize {
        self.sectors.iter().map(|s| s.states.len()).sum()
    }

    pub fn state(&self, index: usize) -> &[u32] {
        &self.states[index]
    }

    /// `(sector, local index)` of a working-basis occupation vector.
    pub fn locate(&self, occupation: &[u32]) -> Option<(usize, usize)> {
        self.lookup.get(occupation).and_then(|&i| self.position[i])
    }

    pub(crate) fn total(&self, index: usize) -> u32 {
        self.states[index].iter().sum()
    }

    fn shifted(&self, index: usize, mode: usize, up: bool) -> Option<(usize, f64)> {
        let mut target = self.states[index].clone();
        let n = target[mode];
        if up {
            target[mode] += 1;
            self.lookup.get(&target).map(|&j| (j, ((n + 1) as f64).sqrt()))
        } else if n == 0 {
            None
        } else {
            target[mode] -= 1;
            self.lookup.get(&target).map(|&j| (j, (n as f64).sqrt()))
        }
    }

    /// `a_k` on the extended basis.
    pub(crate) fn annihilate(&self, mode: usize) -> Sparse {
        Sparse::from_columns((0..self.states.len()).map(|j| {
            self.shifted(j, mode, false).map(|(i, c)| (i, Complex64::new(c, 0.0))).into_iter().collect()
        }))
    }

    /// `a_k†` on the extended basis; raises out of it are dropped.
    #[cfg(test)]
    pub(crate) fn create(&self, mode: usize) -> Sparse {
        Sparse::from_columns((0..self.states.len()).map(|j| {
            self.shifted(j, mode, true).map(|(i, c)| (i, Complex64::new(c, 0.0))).into_iter().collect()
        }))
    }

    pub(crate) fn diagonal(&self, f: impl Fn(&[u32]) -> f64) -> Sparse {
        Sparse::from_columns(self.states.iter().enumerate().map(|(j, s)| {
            let value = f(s);
            if value == 0.0 { Vec::new() } else { vec![(j, Complex64::new(value, 0.0))] }
        }))
    }

    pub(crate) fn identity(&self) -> Sparse {
        self.diagonal(|_| 1.0)
    }

    /// `A_k = a_k a_{-k}`.
    pub(crate) fn pair(&self, mode: usize) -> Sparse {
        self.annihilate(mode).mul(&self.annihilate(self.partner[mode]))
    }

    /// Compress to the working basis, one dense block per momentum sector.
    pub(crate) fn project(&self, op: &Sparse) -> Vec<DMatrix<Complex64>> {
        let mut blocks: Vec<DMatrix<Complex64>> =
            self.sectors.iter().map(|s| DMatrix::zeros(s.states.len(), s.states.len())).collect();
        for (s, sector) in self.sectors.iter().enumerate() {
            for (col, &j) in sector.states.iter().enumerate() {
                for &(i, value) in &op.cols[j] {
                    if let Some((si, row)) = self.position[i] {
                        debug_assert!(si == s || value == Complex64::new(0.0, 0.0), "operator mixes momentum sectors");
                        if si == s {
                            blocks[s][(row, col)] += value;
                        }
                    }
                }
            }
        }
        blocks
    }
}

fn is_working(spec: &FockSpec, state: &[u32]) -> bool {
    state.iter().all(|&n| n <= spec.n_max) && spec.n_total_max.map_or(true, |t| state.iter().sum::<u32>() <= t)
}

fn momentum(modes: &[Mode], state: &[u32]) -> Vec<i64> {
    let mut total = vec![0i64; modes[0].index.len()];
    for (mode, &n) in modes.iter().zip(state) {
        for (t, &s) in total.iter_mut().zip(&mode.index) {
            *t += s * n as i64;
        }
    }
    total
}

/// Occupation vectors in odometer order, last mode fastest.
fn enumerate(m: usize, cap: u32, total_cap: u32, expected: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::with_capacity(expected);
    let mut current = vec![0u32; m];
    let mut total = 0u32;
    loop {
        out.push(current.clone());
        let mut d = m;
        loop {
            if d == 0 {
                return out;
            }
            d -= 1;
            if current[d] < cap && total < total_cap {
                current[d] += 1;
                total += 1;
                break;
            }
            total -= current[d];
            current[d] = 0;
        }
    }
}

/// Column-sparse complex matrix on the extended basis.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Sparse {
    cols: Vec<Vec<(usize, Complex64)>>,
}

impl Sparse {
    fn from_columns(cols: impl Iterator<Item = Vec<(usize, Complex64)>>) -> Self {
        Self { cols: cols.collect() }
    }

    fn dim(&self) -> usize {
        self.cols.len()
    }

    pub(crate) fn adjoint(&self) -> Sparse {
        let mut cols = vec![Vec::new(); self.dim()];
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, v) in col {
                cols[i].push((j, v.conj()));
            }
        }
        Sparse { cols }
    }

    pub(crate) fn mul(&self, rhs: &Sparse) -> Sparse {
        let mut scratch = Accumulator::new(self.dim());
        let cols = rhs
            .cols
            .iter()
            .map(|col| {
                for &(l, b) in col {
                    for &(i, a) in &self.cols[l] {
                        scratch.add(i, a * b);
                    }
                }
                scratch.drain()
            })
            .collect();
        Sparse { cols }
    }

    /// `Σ cᵢ Xᵢ`.
    pub(crate) fn combine(dim: usize, terms: &[(Complex64, &Sparse)]) -> Sparse {
        let mut scratch = Accumulator::new(dim);
        let cols = (0..dim)
            .map(|j| {
                for &(c, op) in terms {
                    for &(i, v) in &op.cols[j] {
                        scratch.add(i, c * v);
                    }
                }
                scratch.drain()
            })
            .collect();
        Sparse { cols }
    }
}

struct Accumulator {
    values: Vec<Complex64>,
    touched: Vec<usize>,
    seen: Vec<bool>,
}

impl Accumulator {
    fn new(dim: usize) -> Self {
        Self { values: vec![Complex64::new(0.0, 0.0); dim], touched: Vec::new(), seen: vec![false; dim] }
    }

    fn add(&mut self, i: usize, v: Complex64) {
        if !self.seen[i] {
            self.seen[i] = true;
            self.touched.push(i);
        }
        self.values[i] += v;
    }

    fn drain(&mut self) -> Vec<(usize, Complex64)> {
        self.touched.sort_unstable();
        let out = self
            .touched
            .iter()
            .filter(|&&i| self.values[i] != Complex64::new(0.0, 0.0))
            .map(|&i| (i, self.values[i]))
            .collect();
        for &i in &self.touched {
            self.values[i] = Complex64::new(0.0, 0.0);
            self.seen[i] = false;
        }
        self.touched.clear();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three(n_max: u32) -> FockSpec {
        FockSpec::new(FockSpec::axis_modes(1.0, 1), n_max)
    }

    #[test]
    fn dimensions() {
        let fock = Fock::new(three(4)).unwrap();
        assert_eq!(fock.working_dim(), 125);
        assert_eq!(fock.extended_dim(), 343);
        let mut capped = three(4);
        capped.n_total_max = Some(3);
        assert_eq!(capped.working_dim(), 20);
        assert_eq!(Fock::new(capped).unwrap().working_dim(), 20);
    }

    #[test]
    fn refuses_large_spaces() {
        let spec = FockSpec::new(FockSpec::axis_modes(1.0, 2), 8);
        assert!(matches!(Fock::new(spec), Err(Error::DimensionExceeded { dim: 59049, .. })));
    }

    #[test]
    fn rejects_open_mode_sets() {
        let mut modes = FockSpec::axis_modes(1.0, 1);
        modes.pop();
        assert!(FockSpec::new(modes, 2).validate().is_err());
    }

    #[test]
    fn sectors_conserve_momentum() {
        let fock = Fock::new(three(3)).unwrap();
        assert_eq!(fock.sectors().len(), 7);
        for sector in fock.sectors() {
            for &i in &sector.states {
                let s = fock.state(i);
                assert_eq!(sector.momentum[0], s[2] as i64 - s[0] as i64);
            }
        }
    }
}
