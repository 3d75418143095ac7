//! Polariton eigenstates of the g/e/f manifolds and the quantities the
//! third-order response needs: transition dipoles, coherence frequencies
//! and dephasing rates.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fock::{ladder_matrix, Ladder, ManifoldBasis};
use crate::hamiltonian::{build_block, HermitianBlock};
use crate::model::{DephasingModel, SystemSpec};

/// Eigenvalues closer than this (relative to the block scale) are treated as degenerate.
const DEGENERACY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ManifoldLabel {
    G,
    E,
    F,
}

impl ManifoldLabel {
    pub fn excitation(self) -> usize {
        match self {
            ManifoldLabel::G => 0,
            ManifoldLabel::E => 1,
            ManifoldLabel::F => 2,
        }
    }

    fn from_excitation(n: usize) -> Self {
        match n {
            0 => ManifoldLabel::G,
            1 => ManifoldLabel::E,
            _ => ManifoldLabel::F,
        }
    }
}

impl fmt::Display for ManifoldLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            ManifoldLabel::G => "g",
            ManifoldLabel::E => "e",
            ManifoldLabel::F => "f",
        };
        f.write_str(c)
    }
}

/// Eigenstates of one excitation manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct PolaritonManifold {
    label: ManifoldLabel,
    basis: ManifoldBasis,
    energies: Vec<f64>,
    vectors: DMatrix<f64>,
    occupations: DMatrix<f64>,
    linewidths: Vec<f64>,
    residual: f64,
}

impl PolaritonManifold {
    pub fn label(&self) -> ManifoldLabel {
        self.label
    }

    pub fn basis(&self) -> &ManifoldBasis {
        &self.basis
    }

    /// Ascending eigenenergies in cm^-1.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Columns are eigenvectors in canonical Fock order.
    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// `<n_slot>` of each eigenstate; rows are states, columns slots (cavity first).
    pub fn occupations(&self) -> &DMatrix<f64> {
        &self.occupations
    }

    /// Occupation-weighted linewidth of each state.
    pub fn linewidths(&self) -> &[f64] {
        &self.linewidths
    }

    /// `max |H V - V diag(E)|`, relative to `max |H|`.
    pub fn reconstruction_residual(&self) -> f64 {
        self.residual
    }

    /// `max |V^T V - 1|`.
    pub fn orthonormality_error(&self) -> f64 {
        let d = self.vectors.ncols();
        (self.vectors.transpose() * &self.vectors - DMatrix::identity(d, d)).amax()
    }

    /// `<n_slot>` summed over vibrational slots for state `k`.
    pub fn vibrational_weight(&self, k: usize) -> f64 {
        (1..self.occupations.ncols()).map(|s| self.occupations[(k, s)]).sum()
    }
}

/// Polariton eigenstates of the zero, one and two quantum manifolds.
#[derive(Debug, Clone, PartialEq)]
pub struct PolaritonSystem {
    ground: PolaritonManifold,
    single: PolaritonManifold,
    double: PolaritonManifold,
}

impl PolaritonSystem {
    pub fn ground(&self) -> &PolaritonManifold {
        &self.ground
    }

    /// One-quantum (e) manifold.
    pub fn single(&self) -> &PolaritonManifold {
        &self.single
    }

    /// Two-quantum (f) manifold.
    pub fn double(&self) -> &PolaritonManifold {
        &self.double
    }

    pub fn manifold(&self, label: ManifoldLabel) -> &PolaritonManifold {
        match label {
            ManifoldLabel::G => &self.ground,
            ManifoldLabel::E => &self.single,
            ManifoldLabel::F => &self.double,
        }
    }

    pub fn manifolds(&self) -> [&PolaritonManifold; 3] {
        [&self.ground, &self.single, &self.double]
    }
}

/// Sorted eigendecomposition of a symmetric block with a reproducible gauge.
///
/// Degenerate clusters are rotated onto the Fock states they overlap most,
/// and every eigenvector has its largest component positive.
pub fn diagonalize_block(block: &HermitianBlock) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let h = block.matrix();
    let d = h.nrows();
    if h.iter().any(|x| !x.is_finite()) {
        return Err(Error::Eigen(block.excitation()));
    }
    let eig = SymmetricEigen::try_new(h.clone(), f64::EPSILON, 0).ok_or(Error::Eigen(block.excitation()))?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);

    let scale = h.amax().max(1.0);
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && energies[end] - energies[end - 1] <= DEGENERACY_TOLERANCE * scale {
            end += 1;
        }
        if end - start > 1 {
            fix_degenerate_cluster(&mut vectors, start, end);
        }
        start = end;
    }

    for c in 0..d {
        let mut col = vectors.column_mut(c);
        let lead = col.iter().copied().enumerate().fold((0, 0.0f64), |best, (i, x)| {
            if x.abs() > best.1.abs() + 1e-12 {
                (i, x)
            } else {
                best
            }
        });
        if lead.1 < 0.0 {
            col.neg_mut();
        }
    }
    Ok((energies, vectors))
}

/// Replaces columns `start..end` with an orthonormal basis of the same
/// subspace built from projections of the best-overlapping Fock states.
fn fix_degenerate_cluster(vectors: &mut DMatrix<f64>, start: usize, end: usize) {
    let d = vectors.nrows();
    let k = end - start;
    let sub = vectors.columns(start, k).into_owned();
    let projector = &sub * sub.transpose();
    let mut chosen: Vec<(usize, DVector<f64>)> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best: Option<(usize, DVector<f64>, f64)> = None;
        for r in 0..d {
            if chosen.iter().any(|(i, _)| *i == r) {
                continue;
            }
            let mut v = projector.column(r).into_owned();
            for (_, q) in &chosen {
                let overlap = q.dot(&v);
                v -= q * overlap;
            }
            let norm = v.norm();
            if best.as_ref().is_none_or(|b| norm > b.2 + 1e-12) {
                best = Some((r, v, norm));
            }
        }
        let (r, v, norm) = best.expect("cluster rank does not exceed dimension");
        chosen.push((r, v / norm));
    }
    chosen.sort_by_key(|(r, _)| *r);
    for (offset, (_, v)) in chosen.into_iter().enumerate() {
        vectors.set_column(start + offset, &v);
    }
}

fn occupation_matrix(basis: &ManifoldBasis, vectors: &DMatrix<f64>) -> DMatrix<f64> {
    let slots = basis.modes() + 1;
    let d = basis.dim();
    DMatrix::from_fn(d, slots, |k, s| {
        (0..d)
            .map(|r| vectors[(r, k)] * vectors[(r, k)] * basis.state(r).occupation(s) as f64)
            .sum()
    })
}

fn diagonalize_manifold(spec: &SystemSpec, n: usize) -> Result<PolaritonManifold> {
    let block = build_block(spec, n)?;
    let (energies, vectors) = diagonalize_block(&block)?;
    let h = block.matrix();
    let lambda = DMatrix::from_diagonal(&DVector::from_column_slice(&energies));
    let scale = h.amax().max(f64::MIN_POSITIVE);
    let residual = (h * &vectors - &vectors * lambda).amax() / scale;
    let occupations = occupation_matrix(block.basis(), &vectors);
    let rates = spec.slot_rates();
    let linewidths = (0..energies.len())
        .map(|k| (0..rates.len()).map(|s| occupations[(k, s)] * rates[s]).sum())
        .collect();
    Ok(PolaritonManifold {
        label: ManifoldLabel::from_excitation(n),
        basis: block.basis().clone(),
        energies,
        vectors,
        occupations,
        linewidths,
        residual,
    })
}

/// Diagonalizes the g, e and f blocks of the Hamiltonian.
pub fn diagonalize_system(spec: &SystemSpec) -> Result<PolaritonSystem> {
    Ok(PolaritonSystem {
        ground: diagonalize_manifold(spec, 0)?,
        single: diagonalize_manifold(spec, 1)?,
        double: diagonalize_manifold(spec, 2)?,
    })
}

/// Occupation-weighted linewidths: cavity slot decays at kappa, mode i at gamma_i.
pub fn state_linewidths(manifold: &PolaritonManifold, spec: &SystemSpec) -> Vec<f64> {
    let rates = spec.slot_rates();
    let occ = manifold.occupations();
    (0..occ.nrows())
        .map(|k| (0..rates.len()).map(|s| occ[(k, s)] * rates[s]).sum())
        .collect()
}

/// Transition dipoles, coherence frequencies and dephasing rates in the
/// polariton basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionTable {
    e_energies: Vec<f64>,
    f_energies: Vec<f64>,
    mu_eg: Vec<f64>,
    mu_fe: DMatrix<f64>,
    gamma_eg: Vec<f64>,
    gamma_fg: Vec<f64>,
    gamma_fe: DMatrix<f64>,
}

impl TransitionTable {
    /// Assembles a table from explicit values; checks shapes and signs.
    pub fn new(
        e_energies: Vec<f64>,
        f_energies: Vec<f64>,
        mu_eg: Vec<f64>,
        mu_fe: DMatrix<f64>,
        gamma_eg: Vec<f64>,
        gamma_fg: Vec<f64>,
        gamma_fe: DMatrix<f64>,
    ) -> Result<Self> {
        let ne = e_energies.len();
        let nf = f_energies.len();
        if mu_eg.len() != ne || gamma_eg.len() != ne {
            return Err(Error::invalid("transition_table", "e-manifold lengths differ"));
        }
        if gamma_fg.len() != nf || mu_fe.shape() != (nf, ne) || gamma_fe.shape() != (nf, ne) {
            return Err(Error::invalid("transition_table", "f-manifold shapes differ"));
        }
        let rates = gamma_eg.iter().chain(&gamma_fg).chain(gamma_fe.iter());
        if rates.clone().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(Error::invalid("transition_table", "dephasing rates must be >= 0"));
        }
        Ok(Self {
            e_energies,
            f_energies,
            mu_eg,
            mu_fe,
            gamma_eg,
            gamma_fg,
            gamma_fe,
        })
    }

    pub fn e_count(&self) -> usize {
        self.e_energies.len()
    }

    pub fn f_count(&self) -> usize {
        self.f_energies.len()
    }

    pub fn omega_eg(&self, e: usize) -> f64 {
        self.e_energies[e]
    }

    pub fn omega_fg(&self, f: usize) -> f64 {
        self.f_energies[f]
    }

    pub fn omega_fe(&self, f: usize, e: usize) -> f64 {
        self.f_energies[f] - self.e_energies[e]
    }

    /// `Omega_{e'f} = -Omega_{fe'}`.
    pub fn omega_ef(&self, e: usize, f: usize) -> f64 {
        -self.omega_fe(f, e)
    }

    /// Dipole `<e|V|g>` in Debye.
    pub fn mu_eg(&self, e: usize) -> f64 {
        self.mu_eg[e]
    }

    /// Dipole `<f|V|e>` in Debye.
    pub fn mu_fe(&self, f: usize, e: usize) -> f64 {
        self.mu_fe[(f, e)]
    }

    pub fn mu_eg_all(&self) -> &[f64] {
        &self.mu_eg
    }

    pub fn mu_fe_all(&self) -> &DMatrix<f64> {
        &self.mu_fe
    }

    pub fn gamma_eg(&self, e: usize) -> f64 {
        self.gamma_eg[e]
    }

    pub fn gamma_fg(&self, f: usize) -> f64 {
        self.gamma_fg[f]
    }

    pub fn gamma_fe(&self, f: usize, e: usize) -> f64 {
        self.gamma_fe[(f, e)]
    }

    /// Copy with every coherence decaying at `gamma`.
    pub fn with_flat_dephasing(&self, gamma: f64) -> Self {
        Self {
            gamma_eg: vec![gamma; self.e_count()],
            gamma_fg: vec![gamma; self.f_count()],
            gamma_fe: DMatrix::from_element(self.f_count(), self.e_count(), gamma),
            ..self.clone()
        }
    }

    /// Largest violation of `Omega_fg = Omega_fe + Omega_eg`.
    pub fn bookkeeping_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for f in 0..self.f_count() {
            for e in 0..self.e_count() {
                worst = worst.max((self.omega_fg(f) - self.omega_fe(f, e) - self.omega_eg(e)).abs());
            }
        }
        worst
    }
}

/// Dipole operator `sum_slot d_slot (c + c+)` restricted to the raising
/// block from manifold `n` to `n + 1`.
fn dipole_raising_block(spec: &SystemSpec, lower: &ManifoldBasis, upper: &ManifoldBasis) -> DMatrix<f64> {
    let mut v = DMatrix::zeros(upper.dim(), lower.dim());
    for (slot, d) in spec.slot_dipoles().into_iter().enumerate() {
        if d != 0.0 {
            v += ladder_matrix(Ladder::Raise, slot, lower, upper) * d;
        }
    }
    v
}

/// Transition dipoles and coherence dephasings of a diagonalized system.
pub fn transition_dipoles(system: &PolaritonSystem, spec: &SystemSpec) -> TransitionTable {
    let (g, e, f) = (&system.ground, &system.single, &system.double);
    let v10 = dipole_raising_block(spec, &g.basis, &e.basis);
    let v21 = dipole_raising_block(spec, &e.basis, &f.basis);
    let mu_eg_matrix = e.vectors.transpose() * v10 * &g.vectors;
    let mu_eg: Vec<f64> = mu_eg_matrix.column(0).iter().copied().collect();
    let mu_fe = f.vectors.transpose() * v21 * &e.vectors;

    let ne = e.len();
    let nf = f.len();
    let (gamma_eg, gamma_fg, gamma_fe) = match spec.dephasing_model() {
        DephasingModel::Flat(gamma) => (
            vec![gamma; ne],
            vec![gamma; nf],
            DMatrix::from_element(nf, ne, gamma),
        ),
        DephasingModel::StateSum => (
            e.linewidths.clone(),
            f.linewidths.clone(),
            DMatrix::from_fn(nf, ne, |fi, ei| f.linewidths[fi] + e.linewidths[ei]),
        ),
        DephasingModel::Composition => {
            let rates = spec.slot_rates();
            let gamma_fe = DMatrix::from_fn(nf, ne, |fi, ei| {
                (0..rates.len())
                    .map(|s| (f.occupations[(fi, s)] - e.occupations[(ei, s)]).abs() * rates[s])
                    .sum()
            });
            (e.linewidths.clone(), f.linewidths.clone(), gamma_fe)
        }
    };

    TransitionTable {
        e_energies: e.energies.iter().map(|x| x - g.energies[0]).collect(),
        f_energies: f.energies.iter().map(|x| x - g.energies[0]).collect(),
        mu_eg,
        mu_fe,
        gamma_eg,
        gamma_fg,
        gamma_fe,
    }
}

/// Diagonalizes and tabulates transitions in one call.
pub fn transition_table(spec: &SystemSpec) -> Result<(PolaritonSystem, TransitionTable)> {
    let system = diagonalize_system(spec)?;
    let table = transition_dipoles(&system, spec);
    Ok((system, table))
}

/// Printed single-mode polariton anharmonicity
/// `16 D |g^4 / (delta^2 - 16 g^2)^2|`.
pub fn anharmonicity_closed_form(anharmonicity: f64, detuning: f64, coupling: f64) -> Result<f64> {
    let denom = detuning * detuning - 16.0 * coupling * coupling;
    if denom == 0.0 {
        return Err(Error::FormulaPole { detuning, coupling });
    }
    let g4 = coupling.powi(4);
    Ok(16.0 * anharmonicity * (g4 / (denom * denom)).abs())
}

/// Tabulated polariton anharmonicity `D_ij / 2 |X_i|^2 |X_j|^2`.
pub fn anharmonicity_table_form(anharmonicity: f64, weight_i: f64, weight_j: f64) -> f64 {
    0.5 * anharmonicity * weight_i * weight_j
}

/// Evaluations of the printed polariton-anharmonicity formulas for modes `i`, `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnharmonicityFormulas {
    /// Closed single-mode form; only defined for `i == j`.
    pub closed_form: Option<Result<f64>>,
    /// `D_ij / 2 |X_i|^2 |X_j|^2`.
    pub table_form: f64,
    pub weight_i: f64,
    pub weight_j: f64,
}

/// Printed formulas for the polariton anharmonicity between modes `i` and `j`.
///
/// `|X_i|^2` defaults to the weight of mode `i` in the lowest one-quantum
/// polariton; pass `weights` to override.
pub fn polariton_anharmonicity_formula(
    spec: &SystemSpec,
    i: usize,
    j: usize,
    weights: Option<(f64, f64)>,
) -> Result<AnharmonicityFormulas> {
    let m = spec.mode_count();
    if i >= m || j >= m {
        return Err(Error::invalid("mode", format!("index out of range for {m} modes")));
    }
    let (weight_i, weight_j) = match weights {
        Some(w) => w,
        None => {
            let system = diagonalize_system(spec)?;
            let occ = system.single().occupations();
            (occ[(0, i + 1)], occ[(0, j + 1)])
        }
    };
    let delta = spec.anharmonicity()[(i, j)];
    let closed_form = (i == j).then(|| {
        anharmonicity_closed_form(delta, spec.detunings()[i], spec.couplings()[i])
    });
    Ok(AnharmonicityFormulas {
        closed_form,
        table_form: anharmonicity_table_form(delta, weight_i, weight_j),
        weight_i,
        weight_j,
    })
}

/// The three zero-detuning values in circulation for a single mode with
/// anharmonicity `d`: the closed form (`d/16`), the quoted limit (`d/32`)
/// and the table form at equal mixing (`d/8`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroDetuningValues {
    pub closed_form: f64,
    pub quoted_limit: f64,
    pub table_form: f64,
}

pub fn zero_detuning_values(anharmonicity: f64) -> ZeroDetuningValues {
    ZeroDetuningValues {
        closed_form: anharmonicity / 16.0,
        quoted_limit: anharmonicity / 32.0,
        table_form: anharmonicity_table_form(anharmonicity, 0.5, 0.5),
    }
}

/// Dominant one-quantum pair character of an f state and its energy shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnharmonicShift {
    pub f: usize,
    pub e: usize,
    pub e_prime: usize,
    /// `|<f|e e'>|^2` with the normalized symmetrized product state.
    pub overlap: f64,
    /// `Omega_eg + Omega_e'g - Omega_fg`.
    pub shift: f64,
}

/// Effective anharmonic shift of every f state relative to its dominant
/// pair of one-quantum polaritons.
pub fn polariton_anharmonicity_numeric(system: &PolaritonSystem) -> Vec<AnharmonicShift> {
    let e = system.single();
    let f = system.double();
    let slots = e.basis.modes() + 1;
    let raises: Vec<DMatrix<f64>> = (0..slots)
        .map(|s| ladder_matrix(Ladder::Raise, s, &e.basis, &f.basis))
        .collect();
    // Amplitude of polariton e on the single-quantum Fock state of each slot.
    let slot_index: Vec<usize> = (0..slots)
        .map(|s| {
            let mut occ = vec![0u32; slots];
            occ[s] = 1;
            e.basis
                .index_of(&crate::fock::BasisState::new(occ))
                .expect("one-quantum basis covers every slot")
        })
        .collect();

    let mut pairs = Vec::new();
    for a in 0..e.len() {
        for b in a..e.len() {
            let vb = e.vectors.column(b);
            let mut psi = DVector::zeros(f.basis.dim());
            for s in 0..slots {
                let amp = e.vectors[(slot_index[s], a)];
                if amp != 0.0 {
                    psi += &raises[s] * vb * amp;
                }
            }
            let norm = psi.norm();
            if norm > 0.0 {
                pairs.push((a, b, psi / norm));
            }
        }
    }

    (0..f.len())
        .map(|k| {
            let fk = f.vectors.column(k);
            let (a, b, overlap) = pairs
                .iter()
                .map(|(a, b, psi)| (*a, *b, fk.dot(psi).powi(2)))
                .fold((0, 0, -1.0), |best, cand| if cand.2 > best.2 + 1e-12 { cand } else { best });
            let e0 = system.ground.energies[0];
            AnharmonicShift {
                f: k,
                e: a,
                e_prime: b,
                overlap,
                shift: (e.energies[a] - e0) + (e.energies[b] - e0) - (f.energies[k] - e0),
            }
        })
        .collect()
}

/// Index map from `prev` states to the `next` states they overlap most with.
pub fn track_states(prev: &PolaritonManifold, next: &PolaritonManifold) -> Vec<usize> {
    let overlaps = prev.vectors.transpose() * &next.vectors;
    (0..prev.len())
        .map(|i| {
            (0..next.len())
                .fold((0, -1.0f64), |best, j| {
                    let o = overlaps[(i, j)].abs();
                    if o > best.1 + 1e-12 {
                        (j, o)
                    } else {
                        best
                    }
                })
                .0
        })
        .collect()
}
