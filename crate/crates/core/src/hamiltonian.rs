//! Matrix of the RWA cavity + vibrations Hamiltonian on each excitation manifold.
//!
//! H = w_c a+a + sum_i w_i b_i+b_i + sum_{i!=j} J_ij b_i+b_j
//!     - sum_ij D_ij/2 b_i+b_j+b_ib_j + sum_i g_i (a+b_i + b_i+a)

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::Result;
use crate::fock::{enumerate_manifold, BasisState, ManifoldBasis, MAX_EXCITATION};
use crate::model::SystemSpec;

/// Real symmetric Hamiltonian block on one manifold, in cm^-1.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianBlock {
    basis: ManifoldBasis,
    matrix: DMatrix<f64>,
}

impl HermitianBlock {
    pub fn excitation(&self) -> usize {
        self.basis.excitation()
    }

    pub fn basis(&self) -> &ManifoldBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Largest `|H_ij - H_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.matrix.amax();
        if scale == 0.0 {
            return 0.0;
        }
        (&self.matrix - self.matrix.transpose()).amax() / scale
    }

    /// CSV with canonical basis labels as the header row and first column.
    pub fn to_csv(&self) -> String {
        let labels: Vec<String> = self.basis.states().iter().map(|s| s.to_string()).collect();
        let mut out = String::from("state");
        for l in &labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (i, l) in labels.iter().enumerate() {
            out.push_str(l);
            for j in 0..self.dim() {
                let _ = write!(out, ",{}", crate::output::fmt_float(self.matrix[(i, j)]));
            }
            out.push('\n');
        }
        out
    }
}

/// Action of H on one basis state: every `(target, amplitude)` term, unmerged.
fn apply(spec: &SystemSpec, state: &BasisState) -> Vec<(BasisState, f64)> {
    let m = spec.mode_count();
    let modes = spec.modes();
    let occ = |slot: usize| state.occupation(slot) as f64;
    let mut terms = Vec::new();

    let mut diagonal = spec.cavity_frequency() * occ(0);
    for i in 0..m {
        diagonal += modes[i].frequency() * occ(i + 1);
    }
    let anh = spec.anharmonicity();
    for i in 0..m {
        for j in 0..m {
            // b_i+ b_j+ b_i b_j is diagonal: n_i(n_i - 1) for i == j, n_i n_j otherwise.
            let pairs = if i == j {
                occ(i + 1) * (occ(i + 1) - 1.0)
            } else if spec.cross_anharmonicity() {
                occ(i + 1) * occ(j + 1)
            } else {
                0.0
            };
            diagonal -= 0.5 * anh[(i, j)] * pairs;
        }
    }
    terms.push((state.clone(), diagonal));

    let hop = spec.scalar_coupling();
    for i in 0..m {
        for j in 0..m {
            if i == j || hop[(i, j)] == 0.0 {
                continue;
            }
            if let Some(t) = exchange(state, j + 1, i + 1) {
                terms.push(t.scaled(hop[(i, j)]));
            }
        }
    }

    for (i, &g) in spec.couplings().iter().enumerate() {
        if g == 0.0 {
            continue;
        }
        // a+ b_i and b_i+ a
        if let Some(t) = exchange(state, i + 1, 0) {
            terms.push(t.scaled(g));
        }
        if let Some(t) = exchange(state, 0, i + 1) {
            terms.push(t.scaled(g));
        }
    }
    terms
}

struct Term(BasisState, f64);

impl Term {
    fn scaled(self, factor: f64) -> (BasisState, f64) {
        (self.0, self.1 * factor)
    }
}

/// `c_to+ c_from |state>` with boson amplitudes.
fn exchange(state: &BasisState, from: usize, to: usize) -> Option<Term> {
    let lowered = state.shifted(from, -1)?;
    let amp_lower = (state.occupation(from) as f64).sqrt();
    let raised = lowered.shifted(to, 1)?;
    let amp_raise = (lowered.occupation(to) as f64 + 1.0).sqrt();
    Some(Term(raised, amp_lower * amp_raise))
}

/// Hamiltonian block on the `n`-quantum manifold.
///
/// Only the upper triangle is evaluated and mirrored, so the block is
/// exactly symmetric.
pub fn build_block(spec: &SystemSpec, n: usize) -> Result<HermitianBlock> {
    let basis = enumerate_manifold(spec.mode_count(), n)?;
    let d = basis.dim();
    let mut matrix = DMatrix::zeros(d, d);
    for (col, state) in basis.states().iter().enumerate() {
        for (target, amp) in apply(spec, state) {
            let row = basis
                .index_of(&target)
                .expect("Hamiltonian terms conserve the number of quanta");
            if row <= col {
                matrix[(row, col)] += amp;
            }
        }
    }
    for col in 0..d {
        for row in 0..col {
            matrix[(col, row)] = matrix[(row, col)];
        }
    }
    Ok(HermitianBlock { basis, matrix })
}

/// The three blocks for 0, 1 and 2 quanta.
pub fn build_blocks(spec: &SystemSpec) -> Result<[HermitianBlock; 3]> {
    Ok([build_block(spec, 0)?, build_block(spec, 1)?, build_block(spec, 2)?])
}

/// Outcome of assembling H over the whole space with at most two quanta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservationReport {
    pub conserved: bool,
    /// Largest `|H_ab|` between states of different manifolds (or leaving the space).
    pub max_off_block: f64,
}

/// Builds H on the full `<= 2` quantum space and checks that nothing couples
/// different manifolds.
pub fn conserves_excitation(spec: &SystemSpec) -> Result<ConservationReport> {
    let mut states = Vec::new();
    for n in 0..=MAX_EXCITATION {
        states.extend(enumerate_manifold(spec.mode_count(), n)?.states().iter().cloned());
    }
    let index: std::collections::HashMap<&BasisState, usize> =
        states.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let d = states.len();
    let mut full = DMatrix::<f64>::zeros(d, d);
    let mut escaped = 0.0f64;
    for (col, state) in states.iter().enumerate() {
        for (target, amp) in apply(spec, state) {
            match index.get(&target) {
                Some(&row) => full[(row, col)] += amp,
                None => escaped = escaped.max(amp.abs()),
            }
        }
    }
    let mut max_off_block = escaped;
    for col in 0..d {
        for row in 0..d {
            if states[row].excitation() != states[col].excitation() {
                max_off_block = max_off_block.max(full[(row, col)].abs());
            }
        }
    }
    Ok(ConservationReport {
        conserved: max_off_block == 0.0,
        max_off_block,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CavitySpec, CouplingSource, VibrationalMode};
    use crate::presets;

    fn amide_i(g: f64) -> SystemSpec {
        presets::amide_i().with_couplings(vec![g]).unwrap()
    }

    #[test]
    fn vacuum_block_is_zero() {
        let b = build_block(&amide_i(50.0), 0).unwrap();
        assert_eq!(b.matrix(), &DMatrix::<f64>::zeros(1, 1));
    }

    #[test]
    fn one_quantum_block_at_resonance() {
        let b = build_block(&amide_i(50.0), 1).unwrap();
        // basis {photon, vibration}
        let expect = DMatrix::from_row_slice(2, 2, &[1625.0, 50.0, 50.0, 1625.0]);
        assert_eq!(b.matrix(), &expect);
    }

    #[test]
    fn two_quantum_block_at_resonance() {
        let b = build_block(&amide_i(50.0), 2).unwrap();
        // basis {2 ph, ph + vib, 2 vib}; overtone at 2w - D = 3235.
        let s = 50.0 * 2f64.sqrt();
        let expect = DMatrix::from_row_slice(
            3,
            3,
            &[3250.0, s, 0.0, s, 3250.0, s, 0.0, s, 3235.0],
        );
        assert!((b.matrix() - expect).amax() < 1e-12);
        assert_eq!(b.asymmetry(), 0.0);
    }

    #[test]
    fn trace_of_one_quantum_block() {
        let spec = presets::amide_i_ii().with_couplings(vec![37.0, 12.0]).unwrap();
        let b = build_block(&spec, 1).unwrap();
        assert!((b.matrix().trace() - (1625.0 + 1625.0 + 1545.0)).abs() < 1e-12);
    }

    #[test]
    fn two_mode_combination_band() {
        let spec = presets::amide_i_ii();
        let b = build_block(&spec, 2).unwrap();
        let comb = b.basis().states().iter().position(|s| s.occupations() == [0, 1, 1]).unwrap();
        assert_eq!(b.matrix()[(comb, comb)], 1625.0 + 1545.0 - 10.0);
        let off = spec.clone();
        let off = SystemSpec::builder(off.modes().to_vec(), *off.cavity())
            .anharmonicity(vec![vec![15.0, 10.0], vec![10.0, 11.0]])
            .cross_anharmonicity(false)
            .build()
            .unwrap();
        let b = build_block(&off, 2).unwrap();
        assert_eq!(b.matrix()[(comb, comb)], 1625.0 + 1545.0);
        let over2 = b.basis().states().iter().position(|s| s.occupations() == [0, 0, 2]).unwrap();
        assert_eq!(b.matrix()[(over2, over2)], 2.0 * 1545.0 - 11.0);
    }

    #[test]
    fn doubling_coupling_doubles_exchange_only() {
        let spec = presets::amide_i_ii().with_couplings(vec![20.0, 20.0]).unwrap();
        let twice = spec.with_couplings(vec![40.0, 40.0]).unwrap();
        for n in 1..=2 {
            let a = build_block(&spec, n).unwrap();
            let b = build_block(&twice, n).unwrap();
            for i in 0..a.dim() {
                assert_eq!(a.matrix()[(i, i)], b.matrix()[(i, i)]);
                for j in 0..a.dim() {
                    let si = a.basis().state(i).occupation(0);
                    let sj = a.basis().state(j).occupation(0);
                    if si != sj {
                        assert!((b.matrix()[(i, j)] - 2.0 * a.matrix()[(i, j)]).abs() < 1e-12);
                    } else {
                        assert_eq!(b.matrix()[(i, j)], a.matrix()[(i, j)]);
                    }
                }
            }
        }
    }

    #[test]
    fn excitation_is_conserved() {
        let specs = [
            amide_i(50.0),
            presets::amide_i_ii().with_couplings(vec![60.0, 60.0]).unwrap(),
            presets::amide_i_ii(),
        ];
        for spec in &specs {
            let r = conserves_excitation(spec).unwrap();
            assert!(r.conserved);
            assert_eq!(r.max_off_block, 0.0);
        }
    }

    #[test]
    fn uncoupled_cavity_decouples_vibrations() {
        let modes = vec![
            VibrationalMode::new(1600.0, 20.0, 1.0, 1.0).unwrap(),
            VibrationalMode::new(1500.0, 20.0, 1.0, 1.0).unwrap(),
        ];
        let spec = SystemSpec::builder(modes, CavitySpec::at_normal_incidence(1650.0, 0.5, 0.0).unwrap())
            .scalar_coupling(vec![vec![0.0, 8.0], vec![8.0, 0.0]])
            .anharmonicity(vec![vec![12.0, 5.0], vec![5.0, 9.0]])
            .couplings(CouplingSource::Direct(vec![0.0, 0.0]))
            .build()
            .unwrap();
        for n in 1..=2 {
            let b = build_block(&spec, n).unwrap();
            for i in 0..b.dim() {
                for j in 0..b.dim() {
                    if b.basis().state(i).occupation(0) != b.basis().state(j).occupation(0) {
                        assert_eq!(b.matrix()[(i, j)], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn csv_dump_has_labels() {
        let csv = build_block(&amide_i(50.0), 1).unwrap().to_csv();
        let first = csv.lines().next().unwrap();
        assert_eq!(first, "state,ph1,v1_1");
        assert_eq!(csv.lines().count(), 3);
    }
}
