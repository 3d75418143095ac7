//! Invariant suite run by `polariton selfcheck`.

use std::fmt;

use crate::error::Result;
use crate::fourier::{fourier_check, FourierSettings};
use crate::hamiltonian::build_blocks;
use crate::model::{effective_coupling, SystemSpec};
use crate::polariton::{diagonalize_system, transition_table};
use crate::presets;
use crate::signal::{spectrum, FrequencyGrid, Pathway};

/// Signature of an effective-coupling implementation under test.
pub type EffectiveCoupling = fn(f64, f64, f64, f64) -> Result<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub note: String,
}

impl Check {
    fn new(name: &'static str, residual: f64, tolerance: f64) -> Self {
        Self {
            name,
            residual,
            tolerance,
            passed: residual <= tolerance,
            note: String::new(),
        }
    }

    fn failed(name: &'static str, note: String) -> Self {
        Self {
            name,
            residual: f64::NAN,
            tolerance: 0.0,
            passed: false,
            note,
        }
    }

    fn from_result(name: &'static str, tolerance: f64, value: Result<f64>) -> Self {
        match value {
            Ok(r) => Self::new(name, r, tolerance),
            Err(e) => Self::failed(name, e.to_string()),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {:<24} residual {:.3e} (tolerance {:.1e})", self.name, self.residual, self.tolerance)?;
        if !self.note.is_empty() {
            write!(f, " {}", self.note)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfcheckReport {
    pub checks: Vec<Check>,
}

impl SelfcheckReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for SelfcheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

fn amide_i(g: f64) -> SystemSpec {
    presets::amide_i().with_couplings(vec![g]).expect("valid coupling")
}

fn amide_i_ii(g: f64) -> SystemSpec {
    presets::amide_i_ii().with_couplings(vec![g, g]).expect("valid coupling")
}

/// Relative deviation of the single-mode e gap from 2 g~ at zero detuning.
fn rabi_residual() -> Result<f64> {
    let mut worst = 0.0f64;
    for g in [1.0, 20.0, 50.0, 80.0] {
        let e = diagonalize_system(&amide_i(g))?.single().energies().to_vec();
        worst = worst.max(((e[1] - e[0]) - 2.0 * g).abs() / (2.0 * g));
    }
    Ok(worst)
}

/// Harmonic bipolaritons at pair sums of polaritons.
fn sum_rule_residual() -> Result<f64> {
    let mut worst = 0.0f64;
    for spec in [amide_i(30.0).harmonic(), amide_i_ii(30.0).harmonic()] {
        let system = diagonalize_system(&spec)?;
        let e = system.single().energies();
        let mut sums = Vec::new();
        for i in 0..e.len() {
            for j in i..e.len() {
                sums.push(e[i] + e[j]);
            }
        }
        sums.sort_by(f64::total_cmp);
        for (f, s) in system.double().energies().iter().zip(&sums) {
            worst = worst.max((f - s).abs() / s.abs());
        }
    }
    Ok(worst)
}

fn hermiticity_residual() -> Result<f64> {
    let mut worst = 0.0f64;
    for spec in [amide_i(50.0), amide_i_ii(60.0)] {
        for block in build_blocks(&spec)? {
            worst = worst.max(block.asymmetry());
        }
    }
    Ok(worst)
}

fn eigen_residual() -> Result<f64> {
    let mut worst = 0.0f64;
    for spec in [amide_i(50.0), amide_i_ii(60.0), amide_i_ii(0.0)] {
        for m in diagonalize_system(&spec)?.manifolds() {
            worst = worst.max(m.reconstruction_residual()).max(m.orthonormality_error());
        }
    }
    Ok(worst)
}

/// `sum_e mu_eg^2` and `sum_fe mu_fe^2` against their Fock-basis values.
fn dipole_sum_residual() -> Result<f64> {
    let mut worst = 0.0f64;
    for spec in [amide_i(50.0), amide_i_ii(60.0)] {
        let (system, table) = transition_table(&spec)?;
        let d = spec.slot_dipoles();
        let eg: f64 = table.mu_eg_all().iter().map(|x| x * x).sum();
        let eg_want: f64 = d.iter().map(|x| x * x).sum();
        let fe: f64 = table.mu_fe_all().iter().map(|x| x * x).sum();
        let fe_want: f64 = system
            .single()
            .basis()
            .states()
            .iter()
            .map(|s| (0..d.len()).map(|k| d[k] * d[k] * (s.occupation(k) as f64 + 1.0)).sum::<f64>())
            .sum();
        worst = worst.max((eg - eg_want).abs() / eg_want).max((fe - fe_want).abs() / fe_want);
    }
    Ok(worst)
}

fn harmonic_null_residual(grid: &FrequencyGrid) -> Result<f64> {
    let mut worst = 0.0f64;
    for g in [0.0, 20.0, 50.0, 80.0] {
        for spec in [amide_i(g).harmonic(), amide_i_ii(g).harmonic()] {
            let s = spectrum(&spec, grid, 0.0)?;
            worst = worst.max(s.max_abs(Pathway::Total) / s.max_abs(Pathway::I));
        }
    }
    Ok(worst)
}

/// Largest relative deviation of `effective` from independent reference values.
fn effective_coupling_residual(effective: EffectiveCoupling) -> Result<f64> {
    // (g, N, kappa, gamma) -> g~, with N g^2 and (kappa - gamma)^2 / 4 chosen as
    // exact integers.
    let cases = [
        (5.0, 100.0, 0.0, 20.0, 2400f64.sqrt()),
        (5.0, 100.0, 30.0, 10.0, 2400f64.sqrt()),
        (5.0, 100.0, 10.0, 30.0, 2400f64.sqrt()),
        (50.0, 1.0, 20.0, 20.0, 50.0),
        (3.0, 4.0, 2.0, 0.0, 35f64.sqrt()),
    ];
    let mut worst = 0.0f64;
    for (g, n, kappa, gamma, want) in cases {
        let got = effective(g, n, kappa, gamma)?;
        worst = worst.max((got - want).abs() / want);
    }
    Ok(worst)
}

fn mu4_residual(grid: &FrequencyGrid) -> Result<f64> {
    let spec = amide_i_ii(60.0);
    let a = spectrum(&spec, grid, 0.0)?;
    let b = spectrum(&spec.with_dipole_scale(2.0)?, grid, 0.0)?;
    Ok(a.values(Pathway::Total)
        .iter()
        .zip(b.values(Pathway::Total))
        .map(|(x, y)| (16.0 * x - y).norm() / (16.0 * x).norm().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max))
}

fn fourier_residual() -> Result<f64> {
    let (_, table) = transition_table(&amide_i(50.0))?;
    let report = fourier_check(
        &table,
        0.0,
        Pathway::Total,
        &FrequencyGrid::default_grid(),
        &FourierSettings::default(),
    )?;
    Ok(report.max_relative_error)
}

/// Runs every invariant with the library's own effective coupling.
pub fn run_selfcheck() -> SelfcheckReport {
    run_selfcheck_with(effective_coupling)
}

/// Runs every invariant, testing `effective` as the effective-coupling formula.
pub fn run_selfcheck_with(effective: EffectiveCoupling) -> SelfcheckReport {
    let grid = FrequencyGrid::default_grid();
    let coarse = grid.with_step(5.0).expect("valid step");
    SelfcheckReport {
        checks: vec![
            Check::from_result("hermiticity", 1e-12, hermiticity_residual()),
            Check::from_result("eigen-residual", 1e-9, eigen_residual()),
            Check::from_result("rabi-splitting", 1e-9, rabi_residual()),
            Check::from_result("harmonic-sum-rule", 1e-9, sum_rule_residual()),
            Check::from_result("dipole-sum-rule", 1e-10, dipole_sum_residual()),
            Check::from_result("effective-coupling", 1e-12, effective_coupling_residual(effective)),
            Check::from_result("harmonic-null", 1e-8, harmonic_null_residual(&grid)),
            Check::from_result("dipole-fourth-power", 0.0, mu4_residual(&coarse)),
            Check::from_result("fourier-consistency", 0.02, fourier_residual()),
        ],
    }
}
