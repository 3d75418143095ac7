//! File outputs: spectrum grids, metadata sidecars, peak and level tables.
//!
//! Every number goes through [`fmt_float`] so identical inputs give
//! byte-identical files.

use std::fmt::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{assign_peaks, default_tolerance, find_peaks, peaks_csv};
use crate::config::{GridConfig, RunConfig, RunPlan, SystemConfig, Toggles};
use crate::error::{Error, Result};
use crate::model::SystemSpec;
use crate::polariton::{PolaritonSystem, TransitionTable};
use crate::signal::{coupling_sweep, Pathway, SpectrumGrid};

pub const TOOL: &str = concat!("polariton-dqc ", env!("CARGO_PKG_VERSION"));

/// Twelve significant digits in scientific notation.
pub fn fmt_float(x: f64) -> String {
    // -0 and 0 print the same.
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

/// Explicit system parameters as stored in sidecars and hashed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolvedSystem {
    pub toggles: Toggles,
    pub system: SystemConfig,
}

impl ResolvedSystem {
    pub fn from_spec(spec: &SystemSpec) -> Self {
        Self {
            toggles: Toggles::from_spec(spec),
            system: SystemConfig::from_spec(spec),
        }
    }
}

/// SHA-256 of the resolved parameter document.
pub fn spec_hash(spec: &SystemSpec) -> String {
    let text = toml::to_string(&ResolvedSystem::from_spec(spec)).expect("system serializes");
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Metadata written next to every grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub tool: String,
    pub spec_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt: Option<f64>,
    pub t1_fs: f64,
    pub shape: [usize; 2],
    pub grid: GridConfig,
    pub resolved: ResolvedSystem,
    /// The configuration that produced this file.
    pub run: RunConfig,
}

impl Sidecar {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("sidecar serializes")
    }
}

/// Grid CSV: `omega2,omega3,re_s_i,im_s_i,re_s_ii,im_s_ii,re_s,im_s`.
pub fn grid_csv(grid: &SpectrumGrid) -> String {
    let (n2, n3) = grid.shape();
    let mut out = String::with_capacity(n2 * n3 * 150 + 64);
    out.push_str("omega2,omega3,re_s_i,im_s_i,re_s_ii,im_s_ii,re_s,im_s\n");
    for r in 0..n2 {
        let w2 = fmt_float(grid.grid().omega2.value(r));
        for c in 0..n3 {
            let _ = write!(out, "{w2},{}", fmt_float(grid.grid().omega3.value(c)));
            for p in [Pathway::I, Pathway::II, Pathway::Total] {
                let z = grid.at(p, r, c);
                let _ = write!(out, ",{},{}", fmt_float(z.re), fmt_float(z.im));
            }
            out.push('\n');
        }
    }
    out
}

/// State table: `manifold,index,energy,linewidth,photon_weight,basis...`.
pub fn levels_csv(system: &PolaritonSystem) -> String {
    let mut out = String::from("manifold,index,energy,linewidth,photon_weight\n");
    for m in system.manifolds() {
        for k in 0..m.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                m.label(),
                k + 1,
                fmt_float(m.energies()[k]),
                fmt_float(m.linewidths()[k]),
                fmt_float(1.0 - m.vibrational_weight(k))
            );
        }
    }
    out
}

/// Transition table: `kind,upper,lower,omega,mu,gamma`.
pub fn transitions_csv(table: &TransitionTable) -> String {
    let mut out = String::from("kind,upper,lower,omega,mu,gamma\n");
    for e in 0..table.e_count() {
        let _ = writeln!(
            out,
            "eg,e{},g,{},{},{}",
            e + 1,
            fmt_float(table.omega_eg(e)),
            fmt_float(table.mu_eg(e)),
            fmt_float(table.gamma_eg(e))
        );
    }
    for f in 0..table.f_count() {
        for e in 0..table.e_count() {
            let _ = writeln!(
                out,
                "fe,f{},e{},{},{},{}",
                f + 1,
                e + 1,
                fmt_float(table.omega_fe(f, e)),
                fmt_float(table.mu_fe(f, e)),
                fmt_float(table.gamma_fe(f, e))
            );
        }
    }
    for f in 0..table.f_count() {
        let _ = writeln!(
            out,
            "fg,f{},g,{},{},{}",
            f + 1,
            fmt_float(table.omega_fg(f)),
            fmt_float(0.0),
            fmt_float(table.gamma_fg(f))
        );
    }
    out
}

/// A file to write: path and contents.
pub type Rendered = (PathBuf, String);

/// Computes every sweep point and renders grid, sidecar and peak table, without
/// touching the file system.
pub fn render_spectra(config: &RunConfig) -> Result<Vec<Rendered>> {
    let plan = config.plan()?;
    let (base, scales) = plan.sweep_arguments();
    let points = coupling_sweep(&plan.points[0].spec, &base, &scales, &plan.grid, plan.t1_fs)?;
    let mut files = Vec::new();
    for (point, plan_point) in points.iter().zip(&plan.points) {
        let peaks = find_peaks(&point.spectrum, plan.threshold)?;
        let tolerance = default_tolerance(&point.table);
        let peaks = if tolerance > 0.0 {
            assign_peaks(&peaks, &point.table, Pathway::Total, tolerance)?
        } else {
            peaks
        };
        let sidecar = Sidecar {
            tool: TOOL.to_string(),
            spec_hash: point.spectrum.spec_hash().to_string(),
            gt: plan_point.gt,
            t1_fs: plan.t1_fs,
            shape: {
                let (a, b) = point.spectrum.shape();
                [a, b]
            },
            grid: GridConfig::from_grid(&plan.grid),
            resolved: ResolvedSystem::from_spec(&point.spec),
            run: config.clone(),
        };
        let stem = &plan_point.stem;
        files.push((plan.out.join(format!("{stem}.csv")), grid_csv(&point.spectrum)));
        files.push((plan.out.join(format!("{stem}.toml")), sidecar.to_toml()));
        files.push((plan.out.join(format!("{stem}_peaks.csv")), peaks_csv(&peaks)));
    }
    Ok(files)
}

/// Level and transition tables for every sweep point.
pub fn render_levels(config: &RunConfig) -> Result<Vec<Rendered>> {
    let plan: RunPlan = config.plan()?;
    let mut files = Vec::new();
    for p in &plan.points {
        let (system, table) = crate::polariton::transition_table(&p.spec)?;
        files.push((plan.out.join(format!("{}_levels.csv", p.stem)), levels_csv(&system)));
        files.push((plan.out.join(format!("{}_transitions.csv", p.stem)), transitions_csv(&table)));
    }
    Ok(files)
}

/// Writes rendered files, creating the directory if needed.
pub fn write_all(files: &[Rendered]) -> Result<Vec<PathBuf>> {
    let io = |path: &Path, e: std::io::Error| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    for (path, _) in files {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
            }
        }
    }
    for (path, text) in files {
        std::fs::write(path, text).map_err(|e| io(path, e))?;
    }
    Ok(files.iter().map(|(p, _)| p.clone()).collect())
}

/// Validates, computes everything, then writes. Nothing is written on error.
pub fn run_spectrum(config: &RunConfig) -> Result<Vec<PathBuf>> {
    write_all(&render_spectra(config)?)
}
