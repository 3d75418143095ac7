use num_complex::Complex64;
use polariton_dqc::analysis::{self, assign_peaks, default_tolerance};
use polariton_dqc::config::{GridConfig, SystemConfig};
use polariton_dqc::{presets, selfcheck, DephasingModel, Error, FrequencyGrid, Pathway, SpectrumGrid, SystemSpec};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: Error) -> PyErr {
    match e {
        Error::Eigen(_) | Error::Io { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn pathway(name: &str) -> PyResult<Pathway> {
    match name {
        "i" | "I" => Ok(Pathway::I),
        "ii" | "II" => Ok(Pathway::II),
        "total" => Ok(Pathway::Total),
        _ => Err(PyValueError::new_err(format!("pathway must be 'i', 'ii' or 'total', got {name:?}"))),
    }
}

/// Molecules in a cavity: vibrational modes, anharmonicities and couplings.
#[pyclass(name = "System", module = "polariton_py", frozen)]
struct PySystem(SystemSpec);

#[pymethods]
impl PySystem {
    /// Preset by name: "amide-I" or "amide-I+II".
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        presets::by_name(name).map(Self).map_err(err)
    }

    /// Parses the `[system]` table layout of a run configuration.
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        SystemConfig::parse(text).and_then(|c| c.to_spec()).map(Self).map_err(err)
    }

    fn to_toml(&self) -> String {
        SystemConfig::from_spec(&self.0).to_toml()
    }

    /// Same system with the given effective couplings g~ (cm^-1), one per mode.
    fn with_couplings(&self, couplings: Vec<f64>) -> PyResult<Self> {
        self.0.with_couplings(couplings).map(Self).map_err(err)
    }

    /// Same system with every anharmonicity set to zero.
    fn harmonic(&self) -> Self {
        Self(self.0.harmonic())
    }

    /// Same system with one dephasing rate (cm^-1) for every coherence.
    fn with_flat_dephasing(&self, gamma: f64) -> Self {
        Self(self.0.with_dephasing(DephasingModel::Flat(gamma)))
    }

    fn with_cross_anharmonicity(&self, on: bool) -> Self {
        Self(self.0.with_cross_anharmonicity(on))
    }

    #[getter]
    fn couplings(&self) -> Vec<f64> {
        self.0.couplings().to_vec()
    }

    #[getter]
    fn mode_count(&self) -> usize {
        self.0.mode_count()
    }

    #[getter]
    fn cavity_frequency(&self) -> f64 {
        self.0.cavity_frequency()
    }

    fn __repr__(&self) -> String {
        format!("System(modes={}, couplings={:?})", self.0.mode_count(), self.0.couplings())
    }
}

/// Eigenstructure and transitions of the g, e and f manifolds.
#[pyclass(name = "Transitions", module = "polariton_py", frozen)]
struct PyTransitions {
    e_energies: Vec<f64>,
    f_energies: Vec<f64>,
    e_linewidths: Vec<f64>,
    f_linewidths: Vec<f64>,
    mu_eg: Vec<f64>,
    mu_fe: Vec<Vec<f64>>,
}

#[pymethods]
impl PyTransitions {
    /// One-quantum polariton energies Omega_eg (cm^-1), ascending.
    #[getter]
    fn e_energies(&self) -> Vec<f64> {
        self.e_energies.clone()
    }

    /// Two-quantum bipolariton energies Omega_fg (cm^-1), ascending.
    #[getter]
    fn f_energies(&self) -> Vec<f64> {
        self.f_energies.clone()
    }

    #[getter]
    fn e_linewidths(&self) -> Vec<f64> {
        self.e_linewidths.clone()
    }

    #[getter]
    fn f_linewidths(&self) -> Vec<f64> {
        self.f_linewidths.clone()
    }

    #[getter]
    fn mu_eg(&self) -> Vec<f64> {
        self.mu_eg.clone()
    }

    /// `mu_fe[f][e]`.
    #[getter]
    fn mu_fe(&self) -> Vec<Vec<f64>> {
        self.mu_fe.clone()
    }
}

#[pyfunction]
fn transition_table(system: &PySystem) -> PyResult<PyTransitions> {
    let (levels, table) = polariton_dqc::transition_table(&system.0).map_err(err)?;
    let mu_fe = table.mu_fe_all();
    Ok(PyTransitions {
        e_energies: levels.single().energies().to_vec(),
        f_energies: levels.double().energies().to_vec(),
        e_linewidths: levels.single().linewidths().to_vec(),
        f_linewidths: levels.double().linewidths().to_vec(),
        mu_eg: table.mu_eg_all().to_vec(),
        mu_fe: (0..mu_fe.nrows()).map(|f| mu_fe.row(f).iter().copied().collect()).collect(),
    })
}

/// A detected, labelled spectral maximum.
#[pyclass(name = "Peak", module = "polariton_py", frozen, get_all)]
struct PyPeak {
    omega3: f64,
    omega2: f64,
    height: f64,
    label: String,
    residual: f64,
}

#[pymethods]
impl PyPeak {
    fn __repr__(&self) -> String {
        format!(
            "Peak(omega3={:.2}, omega2={:.2}, height={:.4e}, label={:?})",
            self.omega3, self.omega2, self.height, self.label
        )
    }
}

/// DQC signal sampled on an (Omega2, Omega3) grid.
#[pyclass(name = "Spectrum", module = "polariton_py", frozen)]
struct PySpectrum {
    grid: SpectrumGrid,
    table: polariton_dqc::TransitionTable,
}

#[pymethods]
impl PySpectrum {
    /// (len(omega2), len(omega3)).
    #[getter]
    fn shape(&self) -> (usize, usize) {
        self.grid.shape()
    }

    #[getter]
    fn omega2(&self) -> Vec<f64> {
        self.grid.grid().omega2.values()
    }

    #[getter]
    fn omega3(&self) -> Vec<f64> {
        self.grid.grid().omega3.values()
    }

    #[getter]
    fn spec_hash(&self) -> String {
        self.grid.spec_hash().to_string()
    }

    /// Complex values in rows of constant Omega2.
    #[pyo3(signature = (pathway = "total"))]
    fn values(&self, pathway: &str) -> PyResult<Vec<Vec<Complex64>>> {
        let (_, n3) = self.grid.shape();
        Ok(self.grid.values(self::pathway(pathway)?).chunks(n3).map(<[_]>::to_vec).collect())
    }

    #[pyo3(signature = (pathway = "total"))]
    fn max_abs(&self, pathway: &str) -> PyResult<f64> {
        Ok(self.grid.max_abs(self::pathway(pathway)?))
    }

    /// Local maxima of |S| above `threshold` times the maximum, labelled by
    /// the nearest resonance crossing.
    #[pyo3(signature = (threshold = analysis::DEFAULT_THRESHOLD, pathway = "total", tolerance = None))]
    fn peaks(&self, threshold: f64, pathway: &str, tolerance: Option<f64>) -> PyResult<Vec<PyPeak>> {
        let pathway = self::pathway(pathway)?;
        let found = analysis::find_peaks_in(&self.grid, pathway, threshold).map_err(err)?;
        let tolerance = tolerance.unwrap_or_else(|| default_tolerance(&self.table));
        let found = if tolerance > 0.0 {
            assign_peaks(&found, &self.table, pathway, tolerance).map_err(err)?
        } else {
            found
        };
        Ok(found
            .into_iter()
            .map(|p| PyPeak {
                label: p.label(),
                omega3: p.omega3,
                omega2: p.omega2,
                height: p.height,
                residual: p.residual,
            })
            .collect())
    }
}

/// Computes the DQC spectrum. `grid` is "lo2:hi2:step2,lo3:hi3:step3" in
/// cm^-1; `t1` is the first delay in fs.
#[pyfunction]
#[pyo3(signature = (system, grid = None, t1 = 0.0))]
fn spectrum(py: Python<'_>, system: &PySystem, grid: Option<&str>, t1: f64) -> PyResult<PySpectrum> {
    let grid = match grid {
        Some(text) => GridConfig::parse(text).and_then(|g| g.to_grid()).map_err(err)?,
        None => FrequencyGrid::default_grid(),
    };
    let spec = system.0.clone();
    py.detach(move || {
        let (_, table) = polariton_dqc::transition_table(&spec)?;
        let grid = polariton_dqc::spectrum(&spec, &grid, t1)?;
        Ok(PySpectrum { grid, table })
    })
    .map_err(err)
}

/// Runs the invariant suite; returns (name, residual, tolerance, passed) rows.
#[pyfunction]
fn run_selfcheck(py: Python<'_>) -> Vec<(String, f64, f64, bool)> {
    py.detach(selfcheck::run_selfcheck)
        .checks
        .into_iter()
        .map(|c| (c.name.to_string(), c.residual, c.tolerance, c.passed))
        .collect()
}

#[pymodule]
fn polariton_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystem>()?;
    m.add_class::<PyTransitions>()?;
    m.add_class::<PySpectrum>()?;
    m.add_class::<PyPeak>()?;
    m.add_function(wrap_pyfunction!(transition_table, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(run_selfcheck, m)?)?;
    Ok(())
}
