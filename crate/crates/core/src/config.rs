//! Run configuration: a TOML document naming a preset or spelling out the
//! system, plus grid, delay, coupling sweep, output and toggles.
//!
//! ```toml
//! preset = "amide-I"
//! sweep = [0.0, 20.0, 50.0]
//! t1 = 0.0
//! out = "out"
//!
//! [grid]
//! omega2 = [2950.0, 3450.0, 1.0]
//! omega3 = [1400.0, 1850.0, 1.0]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::DEFAULT_THRESHOLD;
use crate::error::{Error, Result};
use crate::model::{
    CavitySpec, CouplingSource, DephasingModel, SystemSpec, VibrationalMode, WeakCouplingPolicy,
};
use crate::presets;
use crate::signal::{Axis, FrequencyGrid};

fn default_one() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

fn default_out() -> String {
    "out".to_string()
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub frequency: f64,
    pub dephasing: f64,
    #[serde(default = "default_one")]
    pub dipole: f64,
    #[serde(default = "default_one")]
    pub orientation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityConfig {
    pub cutoff: f64,
    #[serde(default)]
    pub angle: f64,
    pub n_eff: f64,
    #[serde(default)]
    pub decay: f64,
    #[serde(default = "default_one")]
    pub molecules: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum WeakCoupling {
    #[default]
    Refuse,
    Zero,
}

/// Inline system. Couplings left out are derived from the cavity geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub modes: Vec<ModeConfig>,
    pub cavity: CavityConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scalar_coupling: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anharmonicity: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings: Option<Vec<f64>>,
    #[serde(default)]
    pub weak_coupling: WeakCoupling,
}

impl SystemConfig {
    /// Parses a standalone system document (the `[system]` table's contents).
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("system config serializes")
    }

    pub fn to_spec(&self) -> Result<SystemSpec> {
        let modes = self
            .modes
            .iter()
            .map(|m| VibrationalMode::new(m.frequency, m.dephasing, m.dipole, m.orientation))
            .collect::<Result<Vec<_>>>()?;
        let c = &self.cavity;
        let cavity = CavitySpec::new(c.cutoff, c.angle, c.n_eff, c.decay, c.molecules)?;
        let source = match &self.couplings {
            Some(values) => CouplingSource::Direct(values.clone()),
            None => CouplingSource::Geometry(match self.weak_coupling {
                WeakCoupling::Refuse => WeakCouplingPolicy::Refuse,
                WeakCoupling::Zero => WeakCouplingPolicy::Zero,
            }),
        };
        let mut builder = SystemSpec::builder(modes, cavity).couplings(source);
        if let Some(rows) = &self.scalar_coupling {
            builder = builder.scalar_coupling(rows.clone());
        }
        if let Some(rows) = &self.anharmonicity {
            builder = builder.anharmonicity(rows.clone());
        }
        builder.build()
    }

    /// Fully explicit description of `spec` (couplings resolved).
    pub fn from_spec(spec: &SystemSpec) -> Self {
        let rows = |m: &nalgebra::DMatrix<f64>| (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
        let c = spec.cavity();
        Self {
            modes: spec
                .modes()
                .iter()
                .map(|m| ModeConfig {
                    frequency: m.frequency(),
                    dephasing: m.dephasing(),
                    dipole: m.dipole(),
                    orientation: m.orientation(),
                })
                .collect(),
            cavity: CavityConfig {
                cutoff: c.cutoff(),
                angle: c.angle_deg(),
                n_eff: c.n_eff(),
                decay: c.decay(),
                molecules: c.molecules(),
            },
            scalar_coupling: Some(rows(spec.scalar_coupling())),
            anharmonicity: Some(rows(spec.anharmonicity())),
            couplings: Some(spec.couplings().to_vec()),
            weak_coupling: WeakCoupling::Refuse,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DephasingChoice {
    /// Coherence width from the difference of slot occupations.
    #[default]
    Composition,
    /// Coherence width as the sum of the two state widths.
    StateSum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Toggles {
    #[serde(default = "default_true")]
    pub cross_anharmonicity: bool,
    /// One dephasing rate for every coherence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_override: Option<f64>,
    /// Dipole of the bare cavity photon (0: dark cavity).
    #[serde(default)]
    pub cavity_leak_dipole: f64,
    #[serde(default)]
    pub dephasing_model: DephasingChoice,
}

impl Default for Toggles {
    fn default() -> Self {
        Self {
            cross_anharmonicity: true,
            gamma_override: None,
            cavity_leak_dipole: 0.0,
            dephasing_model: DephasingChoice::Composition,
        }
    }
}

impl Toggles {
    pub fn apply(&self, spec: &SystemSpec) -> Result<SystemSpec> {
        let model = match (self.gamma_override, self.dephasing_model) {
            (Some(g), _) => {
                if !(g.is_finite() && g >= 0.0) {
                    return Err(Error::invalid("toggles.gamma_override", format!("must be >= 0, got {g}")));
                }
                DephasingModel::Flat(g)
            }
            (None, DephasingChoice::Composition) => DephasingModel::Composition,
            (None, DephasingChoice::StateSum) => DephasingModel::StateSum,
        };
        spec.with_dephasing(model)
            .with_cross_anharmonicity(self.cross_anharmonicity)
            .with_cavity_leak_dipole(self.cavity_leak_dipole)
    }

    pub fn from_spec(spec: &SystemSpec) -> Self {
        let (gamma_override, dephasing_model) = match spec.dephasing_model() {
            DephasingModel::Composition => (None, DephasingChoice::Composition),
            DephasingModel::StateSum => (None, DephasingChoice::StateSum),
            DephasingModel::Flat(g) => (Some(g), DephasingChoice::Composition),
        };
        Self {
            cross_anharmonicity: spec.cross_anharmonicity(),
            gamma_override,
            cavity_leak_dipole: spec.cavity_leak_dipole(),
            dephasing_model,
        }
    }
}

/// `[lo, hi, step]` per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub omega2: [f64; 3],
    pub omega3: [f64; 3],
}

impl Default for GridConfig {
    fn default() -> Self {
        Self::from_grid(&FrequencyGrid::default_grid())
    }
}

impl GridConfig {
    pub fn to_grid(&self) -> Result<FrequencyGrid> {
        let [a, b, c] = self.omega2;
        let [d, e, f] = self.omega3;
        Ok(FrequencyGrid::new(Axis::new(a, b, c)?, Axis::new(d, e, f)?))
    }

    pub fn from_grid(grid: &FrequencyGrid) -> Self {
        let a = |x: &Axis| [x.lo(), x.hi(), x.step()];
        Self {
            omega2: a(&grid.omega2),
            omega3: a(&grid.omega3),
        }
    }

    /// Parses `lo2:hi2:step2,lo3:hi3:step3`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::Config(format!("grid `{text}`: expected lo2:hi2:step2,lo3:hi3:step3"));
        let axes: Vec<&str> = text.split(',').collect();
        if axes.len() != 2 {
            return Err(bad());
        }
        let parse_axis = |s: &str| -> Result<[f64; 3]> {
            let v = s
                .split(':')
                .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?;
            v.try_into().map_err(|_| bad())
        };
        let grid = Self {
            omega2: parse_axis(axes[0])?,
            omega3: parse_axis(axes[1])?,
        };
        grid.to_grid()?;
        Ok(grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// g~ values applied to every mode; absent means the system's own couplings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<f64>>,
    /// Delay t1 in fs.
    #[serde(default)]
    pub t1: f64,
    #[serde(default = "default_out")]
    pub out: String,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub toggles: Toggles,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            preset: Some(presets::AMIDE_I.to_string()),
            sweep: Some(vec![0.0]),
            t1: 0.0,
            out: default_out(),
            threshold: DEFAULT_THRESHOLD,
            grid: GridConfig::default(),
            toggles: Toggles::default(),
            system: None,
        }
    }
}

/// One spectrum to compute.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanPoint {
    /// File stem, e.g. `gt50`.
    pub stem: String,
    /// Swept g~, if any.
    pub gt: Option<f64>,
    pub spec: SystemSpec,
}

/// Validated, fully resolved run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub points: Vec<PlanPoint>,
    pub grid: FrequencyGrid,
    pub t1_fs: f64,
    pub threshold: f64,
    pub out: PathBuf,
}

impl RunPlan {
    /// The base spec and scale list in the form [`crate::signal::coupling_sweep`] takes.
    pub fn sweep_arguments(&self) -> (Vec<f64>, Vec<f64>) {
        match self.points.first().and_then(|p| p.gt) {
            Some(_) => (
                vec![1.0; self.points[0].spec.mode_count()],
                self.points.iter().map(|p| p.gt.unwrap_or(1.0)).collect(),
            ),
            None => (self.points[0].spec.couplings().to_vec(), vec![1.0]),
        }
    }
}

/// Name used in file stems for a sweep value.
pub fn gt_stem(gt: f64) -> String {
    format!("gt{gt}")
}

impl RunConfig {
    /// Parses and validates a TOML document.
    pub fn parse(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
        config.plan()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// System before any sweep override, with toggles applied.
    pub fn base_spec(&self) -> Result<SystemSpec> {
        let spec = match (&self.preset, &self.system) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("give either `preset` or `[system]`, not both".into()));
            }
            (None, None) => return Err(Error::Config("one of `preset` or `[system]` is required".into())),
            (Some(name), None) => presets::by_name(name)?,
            (None, Some(system)) => system.to_spec()?,
        };
        self.toggles.apply(&spec)
    }

    /// Validates everything and resolves the spectra to compute.
    pub fn plan(&self) -> Result<RunPlan> {
        let spec = self.base_spec()?;
        let grid = self.grid.to_grid()?;
        if !(self.t1.is_finite() && self.t1 >= 0.0) {
            return Err(Error::invalid("t1", format!("must be a finite delay >= 0 fs, got {}", self.t1)));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::invalid("threshold", format!("must lie in (0, 1), got {}", self.threshold)));
        }
        if self.out.is_empty() {
            return Err(Error::invalid("out", "output directory must be named"));
        }
        let points = match &self.sweep {
            None => vec![PlanPoint {
                stem: "spectrum".to_string(),
                gt: None,
                spec,
            }],
            Some(values) => {
                if values.is_empty() {
                    return Err(Error::invalid("sweep", "list must not be empty"));
                }
                let increasing = values.windows(2).all(|w| w[0] < w[1]);
                let decreasing = values.windows(2).all(|w| w[0] > w[1]);
                if !(increasing || decreasing) {
                    return Err(Error::invalid("sweep", "values must be strictly monotone"));
                }
                values
                    .iter()
                    .map(|&gt| {
                        Ok(PlanPoint {
                            stem: gt_stem(gt),
                            gt: Some(gt),
                            spec: spec.with_couplings(vec![gt; spec.mode_count()])?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        Ok(RunPlan {
            points,
            grid,
            t1_fs: self.t1,
            threshold: self.threshold,
            out: PathBuf::from(&self.out),
        })
    }
}

/// Parses a comma-separated list of g~ values.
pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("`{x}` in `{text}` is not a number")))
        })
        .collect()
}
