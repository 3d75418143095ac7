//! Physical parameters of the cavity + vibrations system and the scalar
//! relations between cavity geometry and coupling strength.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::units;

/// A molecular vibrational mode coupled to the cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VibrationalMode {
    frequency: f64,
    dephasing: f64,
    dipole: f64,
    orientation: f64,
}

impl VibrationalMode {
    /// `frequency` and `dephasing` in cm^-1, `dipole` in Debye, `orientation`
    /// is the projection of the dipole direction on the cavity field.
    pub fn new(frequency: f64, dephasing: f64, dipole: f64, orientation: f64) -> Result<Self> {
        if !(frequency.is_finite() && frequency > 0.0) {
            return Err(Error::invalid("mode.frequency", format!("must be > 0, got {frequency}")));
        }
        if !(dephasing.is_finite() && dephasing >= 0.0) {
            return Err(Error::invalid("mode.dephasing", format!("must be >= 0, got {dephasing}")));
        }
        if !(dipole.is_finite() && dipole >= 0.0) {
            return Err(Error::invalid("mode.dipole", format!("must be >= 0, got {dipole}")));
        }
        if !(orientation.is_finite() && (-1.0..=1.0).contains(&orientation)) {
            return Err(Error::invalid(
                "mode.orientation",
                format!("must lie in [-1, 1], got {orientation}"),
            ));
        }
        Ok(Self {
            frequency,
            dephasing,
            dipole,
            orientation,
        })
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn dephasing(&self) -> f64 {
        self.dephasing
    }

    pub fn dipole(&self) -> f64 {
        self.dipole
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    /// Dipole projected on the cavity field, in Debye.
    pub fn projected_dipole(&self) -> f64 {
        self.dipole * self.orientation
    }
}

/// Fabry-Perot cavity mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavitySpec {
    cutoff: f64,
    angle_deg: f64,
    n_eff: f64,
    decay: f64,
    molecules: f64,
}

impl CavitySpec {
    pub fn new(cutoff: f64, angle_deg: f64, n_eff: f64, decay: f64, molecules: f64) -> Result<Self> {
        if !(cutoff.is_finite() && cutoff > 0.0) {
            return Err(Error::invalid("cavity.cutoff", format!("must be > 0, got {cutoff}")));
        }
        if !angle_deg.is_finite() {
            return Err(Error::invalid("cavity.angle", "must be finite"));
        }
        if !(n_eff.is_finite() && n_eff > 0.0) {
            return Err(Error::invalid("cavity.n_eff", format!("must be > 0, got {n_eff}")));
        }
        if !(decay.is_finite() && decay >= 0.0) {
            return Err(Error::invalid("cavity.decay", format!("must be >= 0, got {decay}")));
        }
        if !(molecules.is_finite() && molecules >= 1.0) {
            return Err(Error::invalid("cavity.molecules", format!("must be >= 1, got {molecules}")));
        }
        let cavity = Self {
            cutoff,
            angle_deg,
            n_eff,
            decay,
            molecules,
        };
        cavity_frequency(&cavity)?;
        Ok(cavity)
    }

    /// Normal-incidence cavity with a single molecule.
    pub fn at_normal_incidence(cutoff: f64, n_eff: f64, decay: f64) -> Result<Self> {
        Self::new(cutoff, 0.0, n_eff, decay, 1.0)
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn angle_deg(&self) -> f64 {
        self.angle_deg
    }

    pub fn n_eff(&self) -> f64 {
        self.n_eff
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn molecules(&self) -> f64 {
        self.molecules
    }

    pub fn with_angle(self, angle_deg: f64) -> Result<Self> {
        Self::new(self.cutoff, angle_deg, self.n_eff, self.decay, self.molecules)
    }

    pub fn with_molecules(self, molecules: f64) -> Result<Self> {
        Self::new(self.cutoff, self.angle_deg, self.n_eff, self.decay, molecules)
    }
}

/// Angle-dependent cavity frequency `w0 (1 - sin^2(theta)/n_eff^2)^(-1/2)`.
pub fn cavity_frequency(cavity: &CavitySpec) -> Result<f64> {
    if cavity.angle_deg == 0.0 {
        return Ok(cavity.cutoff);
    }
    let s = cavity.angle_deg.to_radians().sin();
    let ratio = s * s / (cavity.n_eff * cavity.n_eff);
    // sin(30 deg) is not exactly 1/2 in binary; treat ratios within rounding of 1 as the edge.
    if ratio >= 1.0 - 4.0 * f64::EPSILON {
        return Err(Error::Evanescent {
            angle_deg: cavity.angle_deg,
            n_eff: cavity.n_eff,
            ratio,
        });
    }
    Ok(cavity.cutoff / (1.0 - ratio).sqrt())
}

/// Collective light-matter coupling `sqrt(N) mu.e_c sqrt(hbar w_c / (2 eps0 V))`
/// with mode volume `V = (lambda / n_eff)^3`, returned in cm^-1.
pub fn coupling_from_geometry(mode: &VibrationalMode, cavity: &CavitySpec) -> Result<f64> {
    let omega_c = cavity_frequency(cavity)?;
    let wavelength_m = 0.01 / omega_c;
    let volume = (wavelength_m / cavity.n_eff).powi(3);
    let photon_energy = units::wavenumber_to_joule(omega_c);
    let field = (photon_energy / (2.0 * units::VACUUM_PERMITTIVITY * volume)).sqrt();
    let energy = cavity.molecules.sqrt() * mode.projected_dipole() * units::DEBYE * field;
    Ok(units::joule_to_wavenumber(energy))
}

/// `sqrt(N g^2 - (kappa - gamma)^2 / 4)`; errors when the radicand is negative.
pub fn effective_coupling(coupling: f64, molecules: f64, decay: f64, dephasing: f64) -> Result<f64> {
    let radicand = molecules * coupling * coupling - 0.25 * (decay - dephasing).powi(2);
    if radicand < 0.0 {
        return Err(Error::WeakCoupling { mode: 0, radicand });
    }
    Ok(radicand.sqrt())
}

/// Vibration-cavity detuning `w_i - w_c(theta)`.
pub fn detuning(mode: &VibrationalMode, cavity: &CavitySpec) -> Result<f64> {
    Ok(mode.frequency - cavity_frequency(cavity)?)
}

/// How coherence dephasing rates are assembled from slot rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DephasingModel {
    /// `gamma_ab = sum_slot |<n>_a - <n>_b| gamma_slot`.
    Composition,
    /// `gamma_ab = gamma_a + gamma_b` with `gamma_k = sum_slot <n>_k gamma_slot`.
    StateSum,
    /// Every coherence decays at the same rate.
    Flat(f64),
}

/// What to do when a geometry-derived coupling is below the weak-coupling bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeakCouplingPolicy {
    Refuse,
    /// Use zero coupling for that mode.
    Zero,
}

/// Where the effective couplings g~_i come from.
#[derive(Debug, Clone, PartialEq)]
pub enum CouplingSource {
    Direct(Vec<f64>),
    Geometry(WeakCouplingPolicy),
}

/// Validated parameter set of the polariton Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    modes: Vec<VibrationalMode>,
    cavity: CavitySpec,
    scalar_coupling: DMatrix<f64>,
    anharmonicity: DMatrix<f64>,
    couplings: Vec<f64>,
    dephasing: DephasingModel,
    cross_anharmonicity: bool,
    cavity_leak_dipole: f64,
}

pub struct SystemSpecBuilder {
    modes: Vec<VibrationalMode>,
    cavity: CavitySpec,
    scalar_coupling: Option<Vec<Vec<f64>>>,
    anharmonicity: Option<Vec<Vec<f64>>>,
    couplings: CouplingSource,
    dephasing: DephasingModel,
    cross_anharmonicity: bool,
    cavity_leak_dipole: f64,
}

impl SystemSpecBuilder {
    pub fn scalar_coupling(mut self, rows: Vec<Vec<f64>>) -> Self {
        self.scalar_coupling = Some(rows);
        self
    }

    pub fn anharmonicity(mut self, rows: Vec<Vec<f64>>) -> Self {
        self.anharmonicity = Some(rows);
        self
    }

    pub fn couplings(mut self, source: CouplingSource) -> Self {
        self.couplings = source;
        self
    }

    pub fn dephasing(mut self, model: DephasingModel) -> Self {
        self.dephasing = model;
        self
    }

    pub fn cross_anharmonicity(mut self, on: bool) -> Self {
        self.cross_anharmonicity = on;
        self
    }

    pub fn cavity_leak_dipole(mut self, dipole: f64) -> Self {
        self.cavity_leak_dipole = dipole;
        self
    }

    pub fn build(self) -> Result<SystemSpec> {
        let m = self.modes.len();
        if m == 0 {
            return Err(Error::invalid("modes", "at least one vibrational mode is required"));
        }
        let scalar_coupling = match self.scalar_coupling {
            Some(rows) => symmetric_matrix("scalar_coupling", &rows, m)?,
            None => DMatrix::zeros(m, m),
        };
        if let Some(i) = (0..m).find(|&i| scalar_coupling[(i, i)] != 0.0) {
            return Err(Error::invalid(
                "scalar_coupling",
                format!("diagonal entry ({i},{i}) must be zero"),
            ));
        }
        let anharmonicity = match self.anharmonicity {
            Some(rows) => symmetric_matrix("anharmonicity", &rows, m)?,
            None => DMatrix::zeros(m, m),
        };
        let couplings = match self.couplings {
            CouplingSource::Direct(values) => {
                if values.len() != m {
                    return Err(Error::invalid(
                        "couplings",
                        format!("expected {m} values, got {}", values.len()),
                    ));
                }
                values
            }
            CouplingSource::Geometry(policy) => derive_couplings(&self.modes, &self.cavity, policy)?,
        };
        validate_couplings(&couplings)?;
        if let DephasingModel::Flat(g) = self.dephasing {
            if !(g.is_finite() && g >= 0.0) {
                return Err(Error::invalid("gamma_override", format!("must be >= 0, got {g}")));
            }
        }
        if !self.cavity_leak_dipole.is_finite() {
            return Err(Error::invalid("cavity_leak_dipole", "must be finite"));
        }
        Ok(SystemSpec {
            modes: self.modes,
            cavity: self.cavity,
            scalar_coupling,
            anharmonicity,
            couplings,
            dephasing: self.dephasing,
            cross_anharmonicity: self.cross_anharmonicity,
            cavity_leak_dipole: self.cavity_leak_dipole,
        })
    }
}

fn validate_couplings(couplings: &[f64]) -> Result<()> {
    match couplings.iter().position(|g| !(g.is_finite() && *g >= 0.0)) {
        Some(i) => Err(Error::invalid(
            "couplings",
            format!("g~_{} must be >= 0, got {}", i + 1, couplings[i]),
        )),
        None => Ok(()),
    }
}

fn derive_couplings(
    modes: &[VibrationalMode],
    cavity: &CavitySpec,
    policy: WeakCouplingPolicy,
) -> Result<Vec<f64>> {
    // The collective sqrt(N) enters once, through the effective coupling.
    let single = cavity.with_molecules(1.0)?;
    modes
        .iter()
        .enumerate()
        .map(|(i, mode)| {
            let g = coupling_from_geometry(mode, &single)?;
            match effective_coupling(g, cavity.molecules, cavity.decay, mode.dephasing) {
                Ok(value) => Ok(value),
                Err(Error::WeakCoupling { radicand, .. }) => match policy {
                    WeakCouplingPolicy::Refuse => Err(Error::WeakCoupling { mode: i, radicand }),
                    WeakCouplingPolicy::Zero => Ok(0.0),
                },
                Err(e) => Err(e),
            }
        })
        .collect()
}

fn symmetric_matrix(field: &str, rows: &[Vec<f64>], m: usize) -> Result<DMatrix<f64>> {
    if rows.len() != m || rows.iter().any(|r| r.len() != m) {
        return Err(Error::invalid(field, format!("must be a {m}x{m} matrix")));
    }
    let matrix = DMatrix::from_fn(m, m, |i, j| rows[i][j]);
    if matrix.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid(field, "entries must be finite"));
    }
    let scale = matrix.amax().max(1.0);
    for i in 0..m {
        for j in 0..i {
            if (matrix[(i, j)] - matrix[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::invalid(
                    field,
                    format!("not symmetric: ({i},{j}) = {} but ({j},{i}) = {}", matrix[(i, j)], matrix[(j, i)]),
                ));
            }
        }
    }
    Ok(matrix)
}

impl SystemSpec {
    pub fn builder(modes: Vec<VibrationalMode>, cavity: CavitySpec) -> SystemSpecBuilder {
        let m = modes.len();
        SystemSpecBuilder {
            modes,
            cavity,
            scalar_coupling: None,
            anharmonicity: None,
            couplings: CouplingSource::Direct(vec![0.0; m]),
            dephasing: DephasingModel::Composition,
            cross_anharmonicity: true,
            cavity_leak_dipole: 0.0,
        }
    }

    /// Number of vibrational modes.
    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[VibrationalMode] {
        &self.modes
    }

    pub fn cavity(&self) -> &CavitySpec {
        &self.cavity
    }

    pub fn cavity_frequency(&self) -> f64 {
        // Validated at construction.
        cavity_frequency(&self.cavity).expect("validated cavity")
    }

    pub fn scalar_coupling(&self) -> &DMatrix<f64> {
        &self.scalar_coupling
    }

    pub fn anharmonicity(&self) -> &DMatrix<f64> {
        &self.anharmonicity
    }

    /// Effective cavity couplings g~_i in cm^-1.
    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn dephasing_model(&self) -> DephasingModel {
        self.dephasing
    }

    pub fn cross_anharmonicity(&self) -> bool {
        self.cross_anharmonicity
    }

    pub fn cavity_leak_dipole(&self) -> f64 {
        self.cavity_leak_dipole
    }

    pub fn detunings(&self) -> Vec<f64> {
        let wc = self.cavity_frequency();
        self.modes.iter().map(|m| m.frequency - wc).collect()
    }

    pub fn with_couplings(&self, couplings: Vec<f64>) -> Result<Self> {
        if couplings.len() != self.modes.len() {
            return Err(Error::invalid(
                "couplings",
                format!("expected {} values, got {}", self.modes.len(), couplings.len()),
            ));
        }
        validate_couplings(&couplings)?;
        Ok(Self {
            couplings,
            ..self.clone()
        })
    }

    /// Couplings set to `scale * base`.
    pub fn with_scaled_couplings(&self, base: &[f64], scale: f64) -> Result<Self> {
        self.with_couplings(base.iter().map(|g| g * scale).collect())
    }

    pub fn with_anharmonicity(&self, rows: Vec<Vec<f64>>) -> Result<Self> {
        let anharmonicity = symmetric_matrix("anharmonicity", &rows, self.modes.len())?;
        Ok(Self {
            anharmonicity,
            ..self.clone()
        })
    }

    pub fn with_dephasing(&self, model: DephasingModel) -> Self {
        Self {
            dephasing: model,
            ..self.clone()
        }
    }

    pub fn with_cross_anharmonicity(&self, on: bool) -> Self {
        Self {
            cross_anharmonicity: on,
            ..self.clone()
        }
    }

    pub fn with_cavity_leak_dipole(&self, dipole: f64) -> Result<Self> {
        if !dipole.is_finite() {
            return Err(Error::invalid("cavity_leak_dipole", "must be finite"));
        }
        Ok(Self {
            cavity_leak_dipole: dipole,
            ..self.clone()
        })
    }

    pub fn with_cavity(&self, cavity: CavitySpec) -> Self {
        Self {
            cavity,
            ..self.clone()
        }
    }

    /// Every transition dipole multiplied by `factor`.
    pub fn with_dipole_scale(&self, factor: f64) -> Result<Self> {
        let modes = self
            .modes
            .iter()
            .map(|m| VibrationalMode::new(m.frequency, m.dephasing, m.dipole * factor, m.orientation))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            modes,
            cavity_leak_dipole: self.cavity_leak_dipole * factor,
            ..self.clone()
        })
    }

    /// Harmonic copy: all anharmonicities zeroed.
    pub fn harmonic(&self) -> Self {
        let m = self.modes.len();
        Self {
            anharmonicity: DMatrix::zeros(m, m),
            ..self.clone()
        }
    }

    /// Dephasing rate of each occupation slot: cavity first, then modes.
    pub fn slot_rates(&self) -> Vec<f64> {
        std::iter::once(self.cavity.decay)
            .chain(self.modes.iter().map(|m| m.dephasing))
            .collect()
    }

    /// Dipole carried by each slot: cavity leak first, then projected mode dipoles.
    pub fn slot_dipoles(&self) -> Vec<f64> {
        std::iter::once(self.cavity_leak_dipole)
            .chain(self.modes.iter().map(|m| m.projected_dipole()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn amide_cavity() -> CavitySpec {
        CavitySpec::new(1625.0, 0.0, 0.5, 0.0, 1.0).unwrap()
    }

    #[test]
    fn normal_incidence_is_cutoff() {
        for n_eff in [0.1, 0.5, 1.0, 3.7] {
            let c = CavitySpec::new(1625.0, 0.0, n_eff, 0.0, 1.0).unwrap();
            assert_eq!(cavity_frequency(&c).unwrap(), 1625.0);
        }
    }

    #[test]
    fn evanescent_angle_rejected() {
        let err = CavitySpec::new(1625.0, 30.0, 0.5, 0.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::Evanescent { .. }), "{err}");
        assert!(CavitySpec::new(1625.0, 45.0, 0.5, 0.0, 1.0).is_err());
    }

    #[test]
    fn tilted_cavity_frequency() {
        // Closed form evaluated independently: 1625 / sqrt(1 - sin^2(10 deg) / 2.25).
        let c = CavitySpec::new(1625.0, 10.0, 1.5, 0.0, 1.0).unwrap();
        let wc = cavity_frequency(&c).unwrap();
        assert!((wc - 1636.0).abs() < 0.05, "{wc}");
        assert!((wc - 1_635.999_515_321_682).abs() < 1e-9, "{wc}");
    }

    #[test]
    fn cavity_frequency_increases_with_angle() {
        let mut last = 0.0;
        for k in 0..90 {
            let c = CavitySpec::new(1625.0, k as f64, 1.5, 0.0, 1.0).unwrap();
            let wc = cavity_frequency(&c).unwrap();
            assert!(wc > last);
            last = wc;
        }
    }

    #[test]
    fn effective_coupling_examples() {
        let g = effective_coupling(50.0, 1.0, 0.0, 20.0).unwrap();
        assert!((g - 2400f64.sqrt()).abs() < 1e-12);
        assert!((g - 48.989_794_855_663_56).abs() < 1e-10);
        assert!((effective_coupling(7.3, 9.0, 20.0, 20.0).unwrap() - 3.0 * 7.3).abs() < 1e-12);
        assert!(matches!(
            effective_coupling(5.0, 1.0, 0.0, 20.0),
            Err(Error::WeakCoupling { .. })
        ));
    }

    #[test]
    fn detuning_examples() {
        let cavity = amide_cavity();
        let amide_i = VibrationalMode::new(1625.0, 20.0, 1.0, 1.0).unwrap();
        let amide_ii = VibrationalMode::new(1545.0, 20.0, 1.0, 1.0).unwrap();
        assert_eq!(detuning(&amide_i, &cavity).unwrap(), 0.0);
        assert_eq!(detuning(&amide_ii, &cavity).unwrap(), -80.0);
        let tilted = CavitySpec::new(1625.0, 20.0, 1.0, 0.0, 1.0).unwrap();
        assert!(detuning(&amide_i, &tilted).unwrap() < 0.0);
    }

    #[test]
    fn zero_dipole_zero_coupling() {
        let mode = VibrationalMode::new(1625.0, 20.0, 0.0, 1.0).unwrap();
        assert_eq!(coupling_from_geometry(&mode, &amide_cavity()).unwrap(), 0.0);
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(VibrationalMode::new(0.0, 20.0, 1.0, 1.0).is_err());
        assert!(VibrationalMode::new(1625.0, -1.0, 1.0, 1.0).is_err());
        assert!(VibrationalMode::new(1625.0, 20.0, -1.0, 1.0).is_err());
        assert!(VibrationalMode::new(1625.0, 20.0, 1.0, 1.5).is_err());
        assert!(VibrationalMode::new(f64::NAN, 20.0, 1.0, 1.0).is_err());
        assert!(CavitySpec::new(-1.0, 0.0, 0.5, 0.0, 1.0).is_err());
        assert!(CavitySpec::new(1625.0, 0.0, 0.0, 0.0, 1.0).is_err());
        assert!(CavitySpec::new(1625.0, 0.0, 0.5, -2.0, 1.0).is_err());
        assert!(CavitySpec::new(1625.0, 0.0, 0.5, 0.0, 0.5).is_err());
    }

    #[test]
    fn builder_validates_matrices() {
        let modes = vec![
            VibrationalMode::new(1625.0, 20.0, 1.0, 1.0).unwrap(),
            VibrationalMode::new(1545.0, 20.0, 1.0, 1.0).unwrap(),
        ];
        let asym = SystemSpec::builder(modes.clone(), amide_cavity())
            .scalar_coupling(vec![vec![0.0, 15.0], vec![14.0, 0.0]])
            .build();
        assert!(asym.is_err());
        let diag = SystemSpec::builder(modes.clone(), amide_cavity())
            .scalar_coupling(vec![vec![1.0, 15.0], vec![15.0, 0.0]])
            .build();
        assert!(diag.is_err());
        let wrong_len = SystemSpec::builder(modes.clone(), amide_cavity())
            .couplings(CouplingSource::Direct(vec![1.0]))
            .build();
        assert!(wrong_len.is_err());
        let negative = SystemSpec::builder(modes.clone(), amide_cavity())
            .couplings(CouplingSource::Direct(vec![1.0, -1.0]))
            .build();
        assert!(negative.is_err());
        let shape = SystemSpec::builder(modes, amide_cavity())
            .anharmonicity(vec![vec![15.0]])
            .build();
        assert!(shape.is_err());
    }

    #[test]
    fn geometry_couplings_respect_weak_policy() {
        // A single molecule couples at ~1e-4 cm^-1, far below |kappa - gamma| / 2.
        let modes = vec![VibrationalMode::new(1625.0, 20.0, 1.0, 1.0).unwrap()];
        let refused = SystemSpec::builder(modes.clone(), amide_cavity())
            .couplings(CouplingSource::Geometry(WeakCouplingPolicy::Refuse))
            .build();
        assert!(matches!(refused, Err(Error::WeakCoupling { mode: 0, .. })));
        let zeroed = SystemSpec::builder(modes.clone(), amide_cavity())
            .couplings(CouplingSource::Geometry(WeakCouplingPolicy::Zero))
            .build()
            .unwrap();
        assert_eq!(zeroed.couplings(), &[0.0]);

        // With gamma == kappa the radicand is N g^2.
        let matched = vec![VibrationalMode::new(1625.0, 0.0, 1.0, 1.0).unwrap()];
        let crowd = CavitySpec::new(1625.0, 0.0, 0.5, 0.0, 1e14).unwrap();
        let spec = SystemSpec::builder(matched.clone(), crowd)
            .couplings(CouplingSource::Geometry(WeakCouplingPolicy::Refuse))
            .build()
            .unwrap();
        let single = coupling_from_geometry(&matched[0], &amide_cavity()).unwrap();
        assert!((spec.couplings()[0] / single - 1e7).abs() < 1e-3);
    }
}
