//! Double-quantum-coherence (k_III = k1 + k2 - k3) third-order signal.
//!
//! With `c_fe = mu_eg mu_fe` the two ladder-diagram contributions are
//!
//! ```text
//! S_i  =  sum_{f,e,e'} c_fe c_fe' phi_e(t1) / [(W2 - W_fg + i g_fg)(W3 - W_e'g + i g_e'g)]
//! S_ii = -sum_{f,e,e'} c_fe c_fe' phi_e(t1) / [(W2 - W_fg + i g_fg)(W3 - W_fe' + i g_fe')]
//! ```
//!
//! where `phi_e(t1) = exp[(-i W_eg - g_eg) tau1]` and `tau = 2 pi c t`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::SystemSpec;
use crate::polariton::{transition_table, PolaritonSystem, TransitionTable};
use crate::units::fs_to_reduced_time;

/// Dipole products below this fraction of the largest one are dropped.
const PRUNE_RELATIVE: f64 = 1e-12;

/// Uniformly spaced frequency axis in cm^-1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    lo: f64,
    hi: f64,
    step: f64,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && step.is_finite()) {
            return Err(Error::invalid("grid", "axis bounds must be finite"));
        }
        if lo >= hi {
            return Err(Error::invalid("grid", format!("lo ({lo}) must be below hi ({hi})")));
        }
        if step <= 0.0 {
            return Err(Error::invalid("grid", format!("step must be > 0, got {step}")));
        }
        let axis = Self { lo, hi, step };
        if axis.len() < 2 {
            return Err(Error::invalid("grid", "each axis needs at least two points"));
        }
        Ok(axis)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, k: usize) -> f64 {
        self.lo + k as f64 * self.step
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.value(k)).collect()
    }
}

/// Rectangle in (Omega_2, Omega_3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    pub omega2: Axis,
    pub omega3: Axis,
}

impl FrequencyGrid {
    pub fn new(omega2: Axis, omega3: Axis) -> Self {
        Self { omega2, omega3 }
    }

    /// Omega_2 in [2950, 3450], Omega_3 in [1400, 1850], 1 cm^-1 steps.
    pub fn default_grid() -> Self {
        Self {
            omega2: Axis::new(2950.0, 3450.0, 1.0).expect("default axis"),
            omega3: Axis::new(1400.0, 1850.0, 1.0).expect("default axis"),
        }
    }

    /// Same window with a coarser step on both axes.
    pub fn with_step(&self, step: f64) -> Result<Self> {
        Ok(Self {
            omega2: Axis::new(self.omega2.lo, self.omega2.hi, step)?,
            omega3: Axis::new(self.omega3.lo, self.omega3.hi, step)?,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.omega2.len(), self.omega3.len())
    }
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        Self::default_grid()
    }
}

/// The two pathway contributions and their sum at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalValue {
    pub s_i: Complex64,
    pub s_ii: Complex64,
    pub total: Complex64,
}

/// Which part of the signal to look at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pathway {
    /// Excited-state emission ending in an e'g coherence.
    I,
    /// Ending in an fe' coherence.
    II,
    Total,
}

#[derive(Debug, Clone)]
struct Branch {
    e: usize,
    c: f64,
    omega_eg: f64,
    gamma_eg: f64,
    omega_fe: f64,
    gamma_fe: f64,
}

#[derive(Debug, Clone)]
struct DoubleState {
    f: usize,
    omega_fg: f64,
    gamma_fg: f64,
    branches: Vec<Branch>,
}

/// Dipole products and coherences of every pathway that carries amplitude.
#[derive(Debug, Clone)]
pub struct ResponseTerms {
    states: Vec<DoubleState>,
}

impl ResponseTerms {
    pub fn new(table: &TransitionTable) -> Self {
        let mut c_max = 0.0f64;
        for f in 0..table.f_count() {
            for e in 0..table.e_count() {
                c_max = c_max.max((table.mu_eg(e) * table.mu_fe(f, e)).abs());
            }
        }
        let cutoff = PRUNE_RELATIVE * c_max;
        let states = (0..table.f_count())
            .filter_map(|f| {
                let branches: Vec<Branch> = (0..table.e_count())
                    .filter_map(|e| {
                        let c = table.mu_eg(e) * table.mu_fe(f, e);
                        (c.abs() > cutoff).then(|| Branch {
                            e,
                            c,
                            omega_eg: table.omega_eg(e),
                            gamma_eg: table.gamma_eg(e),
                            omega_fe: table.omega_fe(f, e),
                            gamma_fe: table.gamma_fe(f, e),
                        })
                    })
                    .collect();
                (!branches.is_empty()).then(|| DoubleState {
                    f,
                    omega_fg: table.omega_fg(f),
                    gamma_fg: table.gamma_fg(f),
                    branches,
                })
            })
            .collect();
        Self { states }
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// `(f, e)` index pairs of every pathway that carries amplitude.
    pub fn pathways(&self) -> Vec<(usize, usize)> {
        self.states
            .iter()
            .flat_map(|s| s.branches.iter().map(move |b| (s.f, b.e)))
            .collect()
    }

    /// Errors when a contributing coherence has zero dephasing.
    pub fn check_dephasing(&self) -> Result<()> {
        for s in &self.states {
            if s.gamma_fg <= 0.0 {
                return Err(Error::ZeroDephasing {
                    label: format!("f{} g (Omega = {})", s.f + 1, s.omega_fg),
                });
            }
            for b in &s.branches {
                if b.gamma_eg <= 0.0 {
                    return Err(Error::ZeroDephasing {
                        label: format!("e{} g (Omega = {})", b.e + 1, b.omega_eg),
                    });
                }
                if b.gamma_fe <= 0.0 {
                    return Err(Error::ZeroDephasing {
                        label: format!("f e{} (Omega = {})", b.e + 1, b.omega_fe),
                    });
                }
            }
        }
        Ok(())
    }

    /// `P_f(t1) = sum_e c_fe phi_e(t1)` for every contributing f.
    fn t1_weights(&self, t1_fs: f64) -> Vec<Complex64> {
        let tau = fs_to_reduced_time(t1_fs);
        self.states
            .iter()
            .map(|s| {
                s.branches
                    .iter()
                    .map(|b| b.c * phase(b.omega_eg, b.gamma_eg, tau))
                    .sum()
            })
            .collect()
    }

    /// Resonance positions along Omega_2 (Omega_fg) with their widths.
    pub fn omega2_poles(&self) -> Vec<(f64, f64)> {
        self.states.iter().map(|s| (s.omega_fg, s.gamma_fg)).collect()
    }

    /// Resonance positions along Omega_3 (Omega_e'g and Omega_fe') with their widths.
    pub fn omega3_poles(&self) -> Vec<(f64, f64)> {
        self.omega3_poles_of(Pathway::Total)
    }

    /// Omega_3 resonances that appear in one pathway.
    pub fn omega3_poles_of(&self, pathway: Pathway) -> Vec<(f64, f64)> {
        let mut poles = Vec::new();
        for s in &self.states {
            for b in &s.branches {
                if pathway != Pathway::II {
                    poles.push((b.omega_eg, b.gamma_eg));
                }
                if pathway != Pathway::I {
                    poles.push((b.omega_fe, b.gamma_fe));
                }
            }
        }
        poles
    }

    /// Smallest dephasing among contributing coherences.
    pub fn min_dephasing(&self) -> f64 {
        self.omega2_poles()
            .into_iter()
            .chain(self.omega3_poles())
            .map(|(_, g)| g)
            .fold(f64::INFINITY, f64::min)
    }

    /// Omega_3 column factors `Q_i[f]`, `Q_ii[f]` at one frequency.
    fn column(&self, omega3: f64) -> Vec<(Complex64, Complex64)> {
        self.states
            .iter()
            .map(|s| {
                let mut qi = Complex64::new(0.0, 0.0);
                let mut qii = Complex64::new(0.0, 0.0);
                for b in &s.branches {
                    qi += b.c * resolvent(omega3, b.omega_eg, b.gamma_eg);
                    qii += b.c * resolvent(omega3, b.omega_fe, b.gamma_fe);
                }
                (qi, qii)
            })
            .collect()
    }

    /// Omega_2 row factors `P_f(t1) / (W2 - W_fg + i g_fg)`.
    fn row(&self, omega2: f64, weights: &[Complex64]) -> Vec<Complex64> {
        self.states
            .iter()
            .zip(weights)
            .map(|(s, w)| w * resolvent(omega2, s.omega_fg, s.gamma_fg))
            .collect()
    }

    fn combine(row: &[Complex64], column: &[(Complex64, Complex64)]) -> SignalValue {
        let mut s_i = Complex64::new(0.0, 0.0);
        let mut s_ii = Complex64::new(0.0, 0.0);
        for (a, (qi, qii)) in row.iter().zip(column) {
            s_i += a * qi;
            s_ii -= a * qii;
        }
        SignalValue {
            s_i,
            s_ii,
            total: s_i + s_ii,
        }
    }

    /// Time-domain pathways at delays in fs.
    pub fn time_value(&self, t3_fs: f64, t2_fs: f64, t1_fs: f64) -> SignalValue {
        let weights = self.t1_weights(t1_fs);
        let (tau3, tau2) = (fs_to_reduced_time(t3_fs), fs_to_reduced_time(t2_fs));
        let mut s_i = Complex64::new(0.0, 0.0);
        let mut s_ii = Complex64::new(0.0, 0.0);
        for (s, w) in self.states.iter().zip(&weights) {
            let a = w * phase(s.omega_fg, s.gamma_fg, tau2);
            for b in &s.branches {
                s_i += a * b.c * phase(b.omega_eg, b.gamma_eg, tau3);
                s_ii -= a * b.c * phase(b.omega_fe, b.gamma_fe, tau3);
            }
        }
        SignalValue {
            s_i,
            s_ii,
            total: s_i + s_ii,
        }
    }

    /// Time signal of one pathway on a rectangular grid of reduced times,
    /// row-major with `tau2` along rows. Samples are multiplied by
    /// `exp(i (c2 tau2 + c3 tau3))` for the carrier frequencies `(c2, c3)`.
    pub(crate) fn time_grid(
        &self,
        pathway: Pathway,
        tau2: &[f64],
        tau3: &[f64],
        t1_fs: f64,
        carriers: (f64, f64),
    ) -> Vec<Complex64> {
        let weights = self.t1_weights(t1_fs);
        let n3 = tau3.len();
        // Per-f Omega_3 traces, including the carrier.
        let traces: Vec<Vec<Complex64>> = self
            .states
            .iter()
            .map(|s| {
                tau3.iter()
                    .map(|&t| {
                        let carrier = Complex64::from_polar(1.0, carriers.1 * t);
                        let mut v = Complex64::new(0.0, 0.0);
                        for b in &s.branches {
                            if pathway != Pathway::II {
                                v += b.c * phase(b.omega_eg, b.gamma_eg, t);
                            }
                            if pathway != Pathway::I {
                                v -= b.c * phase(b.omega_fe, b.gamma_fe, t);
                            }
                        }
                        v * carrier
                    })
                    .collect()
            })
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); tau2.len() * n3];
        out.par_chunks_mut(n3).zip(tau2.par_iter()).for_each(|(row, &t2)| {
            let carrier = Complex64::from_polar(1.0, carriers.0 * t2);
            for ((s, w), trace) in self.states.iter().zip(&weights).zip(&traces) {
                let a = w * phase(s.omega_fg, s.gamma_fg, t2) * carrier;
                for (o, x) in row.iter_mut().zip(trace) {
                    *o += a * x;
                }
            }
        });
        out
    }
}

/// `exp[(-i omega - gamma) tau]`
fn phase(omega: f64, gamma: f64, tau: f64) -> Complex64 {
    Complex64::from_polar((-gamma * tau).exp(), -omega * tau)
}

/// `1 / (w - w0 + i gamma)`
fn resolvent(w: f64, w0: f64, gamma: f64) -> Complex64 {
    Complex64::new(w - w0, gamma).inv()
}

/// Signal at one frequency point.
pub fn signal_at(omega3: f64, omega2: f64, t1_fs: f64, table: &TransitionTable) -> Result<SignalValue> {
    let terms = ResponseTerms::new(table);
    terms.check_dephasing()?;
    let weights = terms.t1_weights(t1_fs);
    Ok(ResponseTerms::combine(&terms.row(omega2, &weights), &terms.column(omega3)))
}

/// Time-domain signal at delays `(t3, t2, t1)` in fs.
pub fn time_signal(table: &TransitionTable, t3_fs: f64, t2_fs: f64, t1_fs: f64) -> Result<SignalValue> {
    if t3_fs < 0.0 || t2_fs < 0.0 {
        return Err(Error::invalid("delay", "t2 and t3 must be >= 0"));
    }
    Ok(ResponseTerms::new(table).time_value(t3_fs, t2_fs, t1_fs))
}

/// Signal sampled on a grid; arrays are row-major with Omega_2 along rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumGrid {
    grid: FrequencyGrid,
    t1_fs: f64,
    s_i: Vec<Complex64>,
    s_ii: Vec<Complex64>,
    total: Vec<Complex64>,
    spec_hash: String,
}

impl SpectrumGrid {
    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn t1_fs(&self) -> f64 {
        self.t1_fs
    }

    pub fn shape(&self) -> (usize, usize) {
        self.grid.shape()
    }

    pub fn spec_hash(&self) -> &str {
        &self.spec_hash
    }

    pub fn values(&self, pathway: Pathway) -> &[Complex64] {
        match pathway {
            Pathway::I => &self.s_i,
            Pathway::II => &self.s_ii,
            Pathway::Total => &self.total,
        }
    }

    pub fn at(&self, pathway: Pathway, row: usize, col: usize) -> Complex64 {
        self.values(pathway)[row * self.grid.omega3.len() + col]
    }

    /// `|S|` of one pathway, row-major.
    pub fn magnitudes(&self, pathway: Pathway) -> Vec<f64> {
        self.values(pathway).iter().map(|z| z.norm()).collect()
    }

    pub fn max_abs(&self, pathway: Pathway) -> f64 {
        self.values(pathway).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Sum of `|S|` over Omega_3 for every Omega_2.
    pub fn project_omega2(&self, pathway: Pathway) -> Vec<f64> {
        let n3 = self.grid.omega3.len();
        self.values(pathway)
            .chunks(n3)
            .map(|row| row.iter().map(|z| z.norm()).sum())
            .collect()
    }

    /// Sum of `|S|` over Omega_2 for every Omega_3.
    pub fn project_omega3(&self, pathway: Pathway) -> Vec<f64> {
        let n3 = self.grid.omega3.len();
        let mut out = vec![0.0; n3];
        for row in self.values(pathway).chunks(n3) {
            for (o, z) in out.iter_mut().zip(row) {
                *o += z.norm();
            }
        }
        out
    }
}

/// Evaluates the signal of a transition table on a grid, rows in parallel.
pub fn spectrum_from_table(
    table: &TransitionTable,
    grid: &FrequencyGrid,
    t1_fs: f64,
    spec_hash: String,
) -> Result<SpectrumGrid> {
    let terms = ResponseTerms::new(table);
    terms.check_dephasing()?;
    let weights = terms.t1_weights(t1_fs);
    let (n2, n3) = grid.shape();
    let columns: Vec<Vec<(Complex64, Complex64)>> =
        (0..n3).map(|k| terms.column(grid.omega3.value(k))).collect();
    let rows: Vec<Vec<SignalValue>> = (0..n2)
        .into_par_iter()
        .map(|r| {
            let row = terms.row(grid.omega2.value(r), &weights);
            columns.iter().map(|c| ResponseTerms::combine(&row, c)).collect()
        })
        .collect();
    let mut s_i = Vec::with_capacity(n2 * n3);
    let mut s_ii = Vec::with_capacity(n2 * n3);
    let mut total = Vec::with_capacity(n2 * n3);
    for v in rows.into_iter().flatten() {
        s_i.push(v.s_i);
        s_ii.push(v.s_ii);
        total.push(v.total);
    }
    Ok(SpectrumGrid {
        grid: *grid,
        t1_fs,
        s_i,
        s_ii,
        total,
        spec_hash,
    })
}

/// Diagonalizes `spec` and evaluates its signal on `grid`.
pub fn spectrum(spec: &SystemSpec, grid: &FrequencyGrid, t1_fs: f64) -> Result<SpectrumGrid> {
    let (_, table) = transition_table(spec)?;
    spectrum_from_table(&table, grid, t1_fs, crate::output::spec_hash(spec))
}

/// One point of a coupling sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub scale: f64,
    pub spec: SystemSpec,
    pub system: PolaritonSystem,
    pub table: TransitionTable,
    pub spectrum: SpectrumGrid,
    /// For each e (f) state of the previous point, the index of the state it
    /// continues into here. Empty for the first point.
    pub e_links: Vec<usize>,
    pub f_links: Vec<usize>,
}

/// Spectra for couplings `scale * base` over a monotone list of scales.
pub fn coupling_sweep(
    spec: &SystemSpec,
    base: &[f64],
    scales: &[f64],
    grid: &FrequencyGrid,
    t1_fs: f64,
) -> Result<Vec<SweepPoint>> {
    if scales.is_empty() {
        return Err(Error::invalid("sweep", "at least one coupling value is required"));
    }
    let increasing = scales.windows(2).all(|w| w[0] < w[1]);
    let decreasing = scales.windows(2).all(|w| w[0] > w[1]);
    if !(increasing || decreasing) {
        return Err(Error::invalid("sweep", "coupling values must be strictly monotone"));
    }
    let specs = scales
        .iter()
        .map(|&s| spec.with_scaled_couplings(base, s))
        .collect::<Result<Vec<_>>>()?;
    let mut points = specs
        .into_par_iter()
        .zip(scales.par_iter())
        .map(|(spec, &scale)| {
            let (system, table) = transition_table(&spec)?;
            let spectrum = spectrum_from_table(&table, grid, t1_fs, crate::output::spec_hash(&spec))?;
            Ok(SweepPoint {
                scale,
                spec,
                system,
                table,
                spectrum,
                e_links: Vec::new(),
                f_links: Vec::new(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    for k in 1..points.len() {
        let (before, after) = points.split_at_mut(k);
        let prev = &before[k - 1].system;
        let next = &mut after[0];
        next.e_links = crate::polariton::track_states(prev.single(), next.system.single());
        next.f_links = crate::polariton::track_states(prev.double(), next.system.double());
    }
    Ok(points)
}
