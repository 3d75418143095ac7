//! Peak picking on |S| maps and assignment to polariton resonance lines.
//!
//! Lines along Omega_2 are the bipolaritons `f_k` (at Omega_{f_k g}); lines
//! along Omega_3 are `e_j` (Omega_{e_j g}, pathway I) and `f_k e_j`
//! (Omega_{f_k e_j}, pathway II). Indices are 1-based in ascending energy and
//! only lines carrying dipole amplitude are considered.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::polariton::TransitionTable;
use crate::signal::{Pathway, ResponseTerms, SpectrumGrid};

/// Default detection threshold as a fraction of the global maximum.
pub const DEFAULT_THRESHOLD: f64 = 0.05;

/// A total signal this far below pathway I is treated as cancelled.
const NULL_RATIO: f64 = 1e-8;

/// Label of peaks that match no crossing.
pub const UNASSIGNED: &str = "unassigned";

#[derive(Debug, Clone, PartialEq)]
pub struct Peak {
    pub omega3: f64,
    pub omega2: f64,
    pub height: f64,
    /// Omega_2 labels (`f2`, or `f2+f3` when merged).
    pub omega2_labels: Vec<String>,
    /// Omega_3 labels (`e1`, `f1e2`, ...).
    pub omega3_labels: Vec<String>,
    /// Distance to the nearest crossing (cm^-1).
    pub residual: f64,
}

impl Peak {
    fn unlabelled(omega3: f64, omega2: f64, height: f64) -> Self {
        Self {
            omega3,
            omega2,
            height,
            omega2_labels: Vec::new(),
            omega3_labels: Vec::new(),
            residual: f64::NAN,
        }
    }

    pub fn is_assigned(&self) -> bool {
        !self.omega2_labels.is_empty()
    }

    /// `f2|e1` style label, or `unassigned`.
    pub fn label(&self) -> String {
        if !self.is_assigned() {
            return UNASSIGNED.to_string();
        }
        format!("{}|{}", self.omega2_labels.join("+"), self.omega3_labels.join("+"))
    }
}

/// Strict local maxima of `values` on an `n` grid (row-major), where a point
/// beats equal neighbours that come later in raster order. Boundary points are
/// never maxima.
fn local_maxima(values: &[f64], rows: usize, cols: usize, floor: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    if rows < 3 && cols < 3 {
        return out;
    }
    let interior = |n: usize| if n >= 3 { 1..n - 1 } else { 0..n };
    for r in interior(rows) {
        for c in interior(cols) {
            let v = values[r * cols + c];
            if v <= floor {
                continue;
            }
            let mut best = true;
            'scan: for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    if dr == 0 && dc == 0 {
                        continue;
                    }
                    let (rr, cc) = (r as i64 + dr, c as i64 + dc);
                    if rr < 0 || cc < 0 || rr >= rows as i64 || cc >= cols as i64 {
                        continue;
                    }
                    let w = values[rr as usize * cols + cc as usize];
                    let earlier = (rr, cc) < (r as i64, c as i64);
                    if w > v || (w == v && earlier) {
                        best = false;
                        break 'scan;
                    }
                }
            }
            if best {
                out.push((r, c));
            }
        }
    }
    out
}

/// Vertex offset (in steps) and value of the parabola through three samples.
fn parabola(left: f64, mid: f64, right: f64) -> (f64, f64) {
    let curvature = left - 2.0 * mid + right;
    if curvature >= 0.0 {
        return (0.0, mid);
    }
    let offset = (0.5 * (left - right) / curvature).clamp(-0.5, 0.5);
    (offset, mid - 0.25 * (left - right) * offset)
}

/// 8-neighbour maxima of `|S|` for one pathway, refined to sub-grid precision.
pub fn find_peaks_in(grid: &SpectrumGrid, pathway: Pathway, threshold_fraction: f64) -> Result<Vec<Peak>> {
    if !(threshold_fraction > 0.0 && threshold_fraction < 1.0) {
        return Err(Error::invalid(
            "threshold",
            format!("must lie in (0, 1), got {threshold_fraction}"),
        ));
    }
    let max = grid.max_abs(pathway);
    if max == 0.0 || (pathway == Pathway::Total && max <= NULL_RATIO * grid.max_abs(Pathway::I)) {
        return Ok(Vec::new());
    }
    let (rows, cols) = grid.shape();
    let mag = grid.magnitudes(pathway);
    let (a2, a3) = (grid.grid().omega2, grid.grid().omega3);
    let peaks = local_maxima(&mag, rows, cols, threshold_fraction * max)
        .into_iter()
        .map(|(r, c)| {
            let at = |r: usize, c: usize| mag[r * cols + c];
            let (o2, h2) = parabola(at(r - 1, c), at(r, c), at(r + 1, c));
            let (o3, h3) = parabola(at(r, c - 1), at(r, c), at(r, c + 1));
            Peak::unlabelled(
                a3.value(c) + o3 * a3.step(),
                a2.value(r) + o2 * a2.step(),
                h2 + h3 - at(r, c),
            )
        })
        .collect();
    Ok(peaks)
}

/// Peaks of `|S_total|`.
pub fn find_peaks(grid: &SpectrumGrid, threshold_fraction: f64) -> Result<Vec<Peak>> {
    find_peaks_in(grid, Pathway::Total, threshold_fraction)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeakAxis {
    Omega2,
    Omega3,
}

/// A maximum of a one-dimensional projection.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisPeak {
    pub position: f64,
    pub height: f64,
    pub labels: Vec<String>,
}

/// Maxima of the projection of `|S|` onto one axis (sum over the other).
pub fn axis_peaks(grid: &SpectrumGrid, pathway: Pathway, axis: PeakAxis, threshold_fraction: f64) -> Result<Vec<AxisPeak>> {
    if !(threshold_fraction > 0.0 && threshold_fraction < 1.0) {
        return Err(Error::invalid(
            "threshold",
            format!("must lie in (0, 1), got {threshold_fraction}"),
        ));
    }
    if pathway == Pathway::Total && grid.max_abs(Pathway::Total) <= NULL_RATIO * grid.max_abs(Pathway::I) {
        return Ok(Vec::new());
    }
    let (profile, values) = match axis {
        PeakAxis::Omega2 => (grid.project_omega2(pathway), grid.grid().omega2),
        PeakAxis::Omega3 => (grid.project_omega3(pathway), grid.grid().omega3),
    };
    let max = profile.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(Vec::new());
    }
    Ok(local_maxima(&profile, 1, profile.len(), threshold_fraction * max)
        .into_iter()
        .map(|(_, k)| {
            let (o, h) = parabola(profile[k - 1], profile[k], profile[k + 1]);
            AxisPeak {
                position: values.value(k) + o * values.step(),
                height: h,
                labels: Vec::new(),
            }
        })
        .collect())
}

/// A resonance line of the transition table.
#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub label: String,
    pub position: f64,
    pub width: f64,
}

/// Contributing resonance lines along one axis, optionally for one pathway.
pub fn resonance_lines(table: &TransitionTable, axis: PeakAxis, pathway: Pathway) -> Vec<Line> {
    let mut lines: Vec<Line> = Vec::new();
    let mut push = |label: String, position: f64, width: f64| {
        if !lines.iter().any(|l| l.label == label) {
            lines.push(Line { label, position, width });
        }
    };
    for (f, e) in ResponseTerms::new(table).pathways() {
        match axis {
            PeakAxis::Omega2 => push(format!("f{}", f + 1), table.omega_fg(f), table.gamma_fg(f)),
            PeakAxis::Omega3 => {
                if pathway != Pathway::II {
                    push(format!("e{}", e + 1), table.omega_eg(e), table.gamma_eg(e));
                }
                if pathway != Pathway::I {
                    push(format!("f{}e{}", f + 1, e + 1), table.omega_fe(f, e), table.gamma_fe(f, e));
                }
            }
        }
    }
    lines.sort_by(|a, b| a.position.total_cmp(&b.position).then_with(|| a.label.cmp(&b.label)));
    lines
}

/// Crossings `(Omega_2 line, Omega_3 line)` of contributing pathways.
fn crossings(table: &TransitionTable, pathway: Pathway) -> Vec<(Line, Line)> {
    let mut out = Vec::new();
    for (f, e) in ResponseTerms::new(table).pathways() {
        let row = Line {
            label: format!("f{}", f + 1),
            position: table.omega_fg(f),
            width: table.gamma_fg(f),
        };
        if pathway != Pathway::II {
            out.push((
                row.clone(),
                Line {
                    label: format!("e{}", e + 1),
                    position: table.omega_eg(e),
                    width: table.gamma_eg(e),
                },
            ));
        }
        if pathway != Pathway::I {
            out.push((
                row,
                Line {
                    label: format!("f{}e{}", f + 1, e + 1),
                    position: table.omega_fe(f, e),
                    width: table.gamma_fe(f, e),
                },
            ));
        }
    }
    out
}

/// Largest dephasing among contributing coherences.
pub fn default_tolerance(table: &TransitionTable) -> f64 {
    let terms = ResponseTerms::new(table);
    terms
        .omega2_poles()
        .into_iter()
        .chain(terms.omega3_poles())
        .map(|(_, g)| g)
        .fold(0.0, f64::max)
}

fn add_label(labels: &mut Vec<String>, label: &str) {
    if !labels.iter().any(|l| l == label) {
        labels.push(label.to_string());
    }
}

/// Labels every peak with all crossings within `tolerance` on both axes.
pub fn assign_peaks(peaks: &[Peak], table: &TransitionTable, pathway: Pathway, tolerance: f64) -> Result<Vec<Peak>> {
    if !(tolerance > 0.0) {
        return Err(Error::invalid("tolerance", format!("must be > 0, got {tolerance}")));
    }
    let crossings = crossings(table, pathway);
    Ok(peaks
        .iter()
        .map(|p| {
            let mut out = Peak::unlabelled(p.omega3, p.omega2, p.height);
            let mut residual = f64::INFINITY;
            let mut matched = Vec::new();
            for (row, col) in &crossings {
                let (d2, d3) = (p.omega2 - row.position, p.omega3 - col.position);
                residual = residual.min(d2.hypot(d3));
                if d2.abs() <= tolerance && d3.abs() <= tolerance {
                    matched.push((row, col, d2.hypot(d3)));
                }
            }
            // Closest crossing first, then by label for a stable order.
            matched.sort_by(|a, b| a.2.total_cmp(&b.2).then_with(|| a.1.label.cmp(&b.1.label)));
            for (row, col, _) in matched {
                add_label(&mut out.omega2_labels, &row.label);
                add_label(&mut out.omega3_labels, &col.label);
            }
            out.residual = residual;
            out
        })
        .collect())
}

/// Labels one-dimensional peaks with every line within `tolerance`.
pub fn assign_axis_peaks(peaks: &[AxisPeak], lines: &[Line], tolerance: f64) -> Vec<AxisPeak> {
    peaks
        .iter()
        .map(|p| {
            let mut near: Vec<&Line> = lines.iter().filter(|l| (p.position - l.position).abs() <= tolerance).collect();
            near.sort_by(|a, b| {
                (p.position - a.position)
                    .abs()
                    .total_cmp(&(p.position - b.position).abs())
                    .then_with(|| a.label.cmp(&b.label))
            });
            AxisPeak {
                labels: near.into_iter().map(|l| l.label.clone()).collect(),
                ..p.clone()
            }
        })
        .collect()
}

/// Signed distance `position(b) - position(a)` between the strongest peaks
/// carrying labels `a` and `b` on `axis`. A peak labelled with both counts as
/// unresolved.
pub fn measure_splitting(peaks: &[Peak], axis: PeakAxis, a: &str, b: &str) -> Result<f64> {
    let labels = |p: &Peak| match axis {
        PeakAxis::Omega2 => p.omega2_labels.clone(),
        PeakAxis::Omega3 => p.omega3_labels.clone(),
    };
    let position = |p: &Peak| match axis {
        PeakAxis::Omega2 => p.omega2,
        PeakAxis::Omega3 => p.omega3,
    };
    let strongest = |name: &str, other: &str| {
        peaks
            .iter()
            .filter(|p| {
                let l = labels(p);
                l.iter().any(|x| x == name) && !l.iter().any(|x| x == other)
            })
            .max_by(|x, y| x.height.total_cmp(&y.height))
            .ok_or_else(|| Error::MissingPeak(name.to_string()))
    };
    let pa = strongest(a, b)?;
    let pb = strongest(b, a)?;
    Ok(position(pb) - position(pa))
}

/// Peak table with columns `omega3,omega2,height,label,residual`.
pub fn peaks_csv(peaks: &[Peak]) -> String {
    use crate::output::fmt_float;
    let mut out = String::from("omega3,omega2,height,label,residual\n");
    for p in peaks {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_float(p.omega3),
            fmt_float(p.omega2),
            fmt_float(p.height),
            p.label(),
            fmt_float(p.residual)
        );
    }
    out
}
