//! Occupation-number bases of the cavity + vibrations boson space.
//!
//! The Hamiltonian conserves the total number of quanta, so the response
//! up to third order only needs the manifolds with 0, 1 and 2 quanta.
//! Enumeration is capped there on purpose; no truncation is involved.

use std::collections::HashMap;
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Highest excitation manifold the response ever visits.
pub const MAX_EXCITATION: usize = 2;

/// Occupations of the `m + 1` boson slots; slot 0 is the cavity photon.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState {
    occupations: Vec<u32>,
}

impl BasisState {
    pub fn new(occupations: Vec<u32>) -> Self {
        Self { occupations }
    }

    pub fn occupations(&self) -> &[u32] {
        &self.occupations
    }

    pub fn occupation(&self, slot: usize) -> u32 {
        self.occupations[slot]
    }

    pub fn slots(&self) -> usize {
        self.occupations.len()
    }

    pub fn excitation(&self) -> u32 {
        self.occupations.iter().sum()
    }

    /// Copy with the occupation of `slot` shifted by `delta`, or `None` below zero.
    pub fn shifted(&self, slot: usize, delta: i32) -> Option<Self> {
        let n = self.occupations[slot] as i64 + delta as i64;
        if n < 0 {
            return None;
        }
        let mut occupations = self.occupations.clone();
        occupations[slot] = n as u32;
        Some(Self { occupations })
    }
}

impl fmt::Display for BasisState {
    /// `ph1+v1_1` style label; `vac` for the vacuum.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (slot, &n) in self.occupations.iter().enumerate() {
            if n == 0 {
                continue;
            }
            if slot == 0 {
                parts.push(format!("ph{n}"));
            } else {
                parts.push(format!("v{slot}_{n}"));
            }
        }
        if parts.is_empty() {
            write!(f, "vac")
        } else {
            write!(f, "{}", parts.join("+"))
        }
    }
}

/// All basis states with exactly `n` quanta, in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldBasis {
    excitation: usize,
    modes: usize,
    states: Vec<BasisState>,
    index: HashMap<BasisState, usize>,
}

impl ManifoldBasis {
    pub fn excitation(&self) -> usize {
        self.excitation
    }

    /// Number of vibrational modes (slots minus the cavity).
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &BasisState {
        &self.states[i]
    }

    pub fn index_of(&self, state: &BasisState) -> Option<usize> {
        self.index.get(state).copied()
    }
}

/// Enumerates the `n`-quantum manifold of `m` modes plus the cavity.
///
/// Canonical order is lexicographically decreasing occupations, cavity slot
/// first, so the photon-rich states come first.
pub fn enumerate_manifold(m: usize, n: usize) -> Result<ManifoldBasis> {
    if m == 0 {
        return Err(Error::invalid("modes", "at least one vibrational mode is required"));
    }
    if n > MAX_EXCITATION {
        return Err(Error::UnsupportedManifold(n));
    }
    let mut states = Vec::new();
    let mut current = vec![0u32; m + 1];
    distribute(n as u32, 0, &mut current, &mut states);
    let index = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    Ok(ManifoldBasis {
        excitation: n,
        modes: m,
        states,
        index,
    })
}

fn distribute(remaining: u32, slot: usize, current: &mut Vec<u32>, out: &mut Vec<BasisState>) {
    if slot + 1 == current.len() {
        current[slot] = remaining;
        out.push(BasisState::new(current.clone()));
        return;
    }
    for k in (0..=remaining).rev() {
        current[slot] = k;
        distribute(remaining - k, slot + 1, current, out);
    }
    current[slot] = 0;
}

/// Dimension of the `n`-quantum manifold over `slots` boson slots.
pub fn manifold_dim(slots: usize, n: usize) -> usize {
    // C(n + slots - 1, n)
    (1..=n).fold(1usize, |acc, k| acc * (slots + k - 1) / k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Lower,
    Raise,
}

/// `<to| op_slot |from>` for a boson lowering or raising operator.
pub fn ladder_element(kind: Ladder, slot: usize, from: &BasisState, to: &BasisState) -> f64 {
    if slot >= from.slots() || from.slots() != to.slots() {
        return 0.0;
    }
    let (delta, amplitude) = match kind {
        Ladder::Lower => (-1, (from.occupation(slot) as f64).sqrt()),
        Ladder::Raise => (1, (from.occupation(slot) as f64 + 1.0).sqrt()),
    };
    match from.shifted(slot, delta) {
        Some(target) if &target == to => amplitude,
        _ => 0.0,
    }
}

/// Matrix of a ladder operator from one manifold into another
/// (`to.dim() x from.dim()`).
pub fn ladder_matrix(kind: Ladder, slot: usize, from: &ManifoldBasis, to: &ManifoldBasis) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(to.dim(), from.dim());
    let delta = match kind {
        Ladder::Lower => -1,
        Ladder::Raise => 1,
    };
    for (col, state) in from.states().iter().enumerate() {
        if let Some(target) = state.shifted(slot, delta) {
            if let Some(row) = to.index_of(&target) {
                out[(row, col)] = ladder_element(kind, slot, state, &target);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(v: &[u32]) -> BasisState {
        BasisState::new(v.to_vec())
    }

    #[test]
    fn single_mode_one_quantum() {
        let b = enumerate_manifold(1, 1).unwrap();
        assert_eq!(b.states(), &[st(&[1, 0]), st(&[0, 1])]);
    }

    #[test]
    fn vacuum_manifold() {
        let b = enumerate_manifold(1, 0).unwrap();
        assert_eq!(b.dim(), 1);
        assert_eq!(b.state(0).to_string(), "vac");
    }

    #[test]
    fn dimensions() {
        for m in 1..6 {
            assert_eq!(enumerate_manifold(m, 0).unwrap().dim(), 1);
            assert_eq!(enumerate_manifold(m, 1).unwrap().dim(), m + 1);
            assert_eq!(enumerate_manifold(m, 2).unwrap().dim(), (m + 1) * (m + 2) / 2);
            for n in 0..=2 {
                assert_eq!(manifold_dim(m + 1, n), enumerate_manifold(m, n).unwrap().dim());
            }
        }
        assert_eq!(enumerate_manifold(2, 2).unwrap().dim(), 6);
    }

    #[test]
    fn canonical_order_golden() {
        let labels: Vec<String> = enumerate_manifold(2, 2)
            .unwrap()
            .states()
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(
            labels,
            ["ph2", "ph1+v1_1", "ph1+v2_1", "v1_2", "v1_1+v2_1", "v2_2"]
        );
        for n in 0..=2 {
            let b = enumerate_manifold(3, n).unwrap();
            assert!(b.states().windows(2).all(|w| w[0] > w[1]));
            assert!(b.states().iter().all(|s| s.excitation() as usize == n));
        }
    }

    #[test]
    fn rejects_unsupported() {
        assert_eq!(enumerate_manifold(1, 3).unwrap_err(), Error::UnsupportedManifold(3));
        assert!(enumerate_manifold(0, 1).is_err());
    }

    #[test]
    fn ladder_amplitudes() {
        assert_eq!(ladder_element(Ladder::Lower, 1, &st(&[0, 2]), &st(&[0, 1])), 2f64.sqrt());
        assert_eq!(ladder_element(Ladder::Raise, 0, &st(&[0, 0]), &st(&[1, 0])), 1.0);
        assert_eq!(ladder_element(Ladder::Raise, 1, &st(&[0, 1]), &st(&[0, 2])), 2f64.sqrt());
        assert_eq!(ladder_element(Ladder::Lower, 1, &st(&[1, 1]), &st(&[0, 1])), 0.0);
        assert_eq!(ladder_element(Ladder::Lower, 0, &st(&[0, 1]), &st(&[0, 0])), 0.0);
    }

    #[test]
    fn raise_is_transpose_of_lower() {
        for m in 1..=3 {
            for n in 0..2 {
                let lo = enumerate_manifold(m, n).unwrap();
                let hi = enumerate_manifold(m, n + 1).unwrap();
                for slot in 0..=m {
                    let raise = ladder_matrix(Ladder::Raise, slot, &lo, &hi);
                    let lower = ladder_matrix(Ladder::Lower, slot, &hi, &lo);
                    assert_eq!(raise, lower.transpose());
                }
            }
        }
    }

    #[test]
    fn number_operator_is_diagonal() {
        let m = 2;
        for n in 1..=2 {
            let here = enumerate_manifold(m, n).unwrap();
            let below = enumerate_manifold(m, n - 1).unwrap();
            for slot in 0..=m {
                let lower = ladder_matrix(Ladder::Lower, slot, &here, &below);
                let raise = ladder_matrix(Ladder::Raise, slot, &below, &here);
                let number = raise * lower;
                for i in 0..here.dim() {
                    for j in 0..here.dim() {
                        let expect = if i == j { here.state(i).occupation(slot) as f64 } else { 0.0 };
                        assert!((number[(i, j)] - expect).abs() < 1e-14);
                    }
                }
            }
        }
    }
}
