//! Spectrum by numerical double Fourier transform of the time-domain signal.
//!
//! `S(W3, W2) = -int int dt3 dt2 exp(i W3 t3 + i W2 t2) S(t3, t2)`; the minus
//! sign absorbs the `i^2` from the two one-sided transforms. Samples are taken
//! in a frame rotating at the window centre so the sampling only has to
//! resolve detunings, not absolute frequencies.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::polariton::TransitionTable;
use crate::signal::{signal_at, FrequencyGrid, Pathway, ResponseTerms};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierSettings {
    /// Window length in units of `1 / gamma_min`.
    pub window_factor: f64,
    /// Sampling rate relative to the Nyquist rate of the largest detuning.
    pub oversampling: f64,
    /// Refuse transforms longer than this per axis.
    pub max_samples: usize,
}

impl Default for FourierSettings {
    fn default() -> Self {
        Self {
            window_factor: 10.0,
            oversampling: 16.0,
            max_samples: 1 << 14,
        }
    }
}

/// Transform output restricted to the requested window; row-major, Omega_2 rows.
#[derive(Debug, Clone)]
pub struct FourierSpectrum {
    pub omega2: Vec<f64>,
    pub omega3: Vec<f64>,
    pub values: Vec<Complex64>,
    pub samples: (usize, usize),
}

impl FourierSpectrum {
    pub fn at(&self, row: usize, col: usize) -> Complex64 {
        self.values[row * self.omega3.len() + col]
    }
}

struct Sampling {
    carrier: f64,
    step: f64,
    len: usize,
}

impl Sampling {
    fn new(lo: f64, hi: f64, poles: &[(f64, f64)], settings: &FourierSettings) -> Result<Self> {
        let carrier = 0.5 * (lo + hi);
        let mut band = 0.5 * (hi - lo);
        let mut gamma_min = f64::INFINITY;
        for &(p, g) in poles {
            band = band.max((p - lo).abs()).max((p - hi).abs());
            gamma_min = gamma_min.min(g);
        }
        if !(gamma_min > 0.0) {
            return Err(Error::invalid("fourier", "all contributing coherences need gamma > 0"));
        }
        let step = std::f64::consts::PI / (settings.oversampling * band);
        let window = settings.window_factor / gamma_min;
        let len = (window / step).ceil() as usize + 1;
        if len > settings.max_samples {
            return Err(Error::invalid(
                "fourier",
                format!("{len} samples per axis needed, limit is {}", settings.max_samples),
            ));
        }
        Ok(Self { carrier, step, len })
    }

    fn times(&self) -> Vec<f64> {
        (0..self.len).map(|n| n as f64 * self.step).collect()
    }

    /// DFT bin `k` (signed) to absolute frequency.
    fn frequency(&self, k: i64) -> f64 {
        self.carrier + 2.0 * std::f64::consts::PI * k as f64 / (self.len as f64 * self.step)
    }

    /// Signed bins whose frequency lies in `[lo, hi]`.
    fn bins(&self, lo: f64, hi: f64) -> Vec<i64> {
        let half = self.len as i64 / 2;
        (-half..self.len as i64 - half)
            .filter(|&k| {
                let w = self.frequency(k);
                w >= lo && w <= hi
            })
            .collect()
    }

    fn index(&self, k: i64) -> usize {
        k.rem_euclid(self.len as i64) as usize
    }
}

/// Transforms the time signal of `pathway` and keeps the bins inside `window`.
pub fn fourier_spectrum(
    table: &TransitionTable,
    t1_fs: f64,
    pathway: Pathway,
    window: &FrequencyGrid,
    settings: &FourierSettings,
) -> Result<FourierSpectrum> {
    let terms = ResponseTerms::new(table);
    terms.check_dephasing()?;
    let s2 = Sampling::new(window.omega2.lo(), window.omega2.hi(), &terms.omega2_poles(), settings)?;
    let s3 = Sampling::new(window.omega3.lo(), window.omega3.hi(), &terms.omega3_poles_of(pathway), settings)?;
    let (n2, n3) = (s2.len, s3.len);
    let mut data = terms.time_grid(pathway, &s2.times(), &s3.times(), t1_fs, (s2.carrier, s3.carrier));

    // Trapezoid end-point weight at t = 0 on both axes.
    for v in data.iter_mut().take(n3) {
        *v *= 0.5;
    }
    for row in data.chunks_mut(n3) {
        row[0] *= 0.5;
    }

    // exp(+i k n) kernel on both axes: the unnormalized inverse transform.
    let mut planner = FftPlanner::<f64>::new();
    let fft3 = planner.plan_fft_inverse(n3);
    data.par_chunks_mut(n3).for_each(|row| fft3.process(row));
    let mut transposed = vec![Complex64::new(0.0, 0.0); n2 * n3];
    transpose(&data, &mut transposed, n2, n3);
    drop(data);
    let fft2 = planner.plan_fft_inverse(n2);
    transposed.par_chunks_mut(n2).for_each(|col| fft2.process(col));

    let scale = -s2.step * s3.step;
    let bins2 = s2.bins(window.omega2.lo(), window.omega2.hi());
    let bins3 = s3.bins(window.omega3.lo(), window.omega3.hi());
    let mut values = Vec::with_capacity(bins2.len() * bins3.len());
    for &k2 in &bins2 {
        for &k3 in &bins3 {
            values.push(scale * transposed[s3.index(k3) * n2 + s2.index(k2)]);
        }
    }
    Ok(FourierSpectrum {
        omega2: bins2.iter().map(|&k| s2.frequency(k)).collect(),
        omega3: bins3.iter().map(|&k| s3.frequency(k)).collect(),
        values,
        samples: (n2, n3),
    })
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    dst.par_chunks_mut(rows).enumerate().for_each(|(c, out)| {
        for (r, o) in out.iter_mut().enumerate() {
            *o = src[r * cols + c];
        }
    });
}

/// Agreement between the transform and the resolvent formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierReport {
    /// Largest `|S_fft - S| / |S|` over the compared points.
    pub max_relative_error: f64,
    pub compared: usize,
    pub samples: (usize, usize),
}

/// Compares the transform against [`signal_at`] at every bin inside `window`
/// that is farther than `3 gamma` from every resonance line.
pub fn fourier_check(
    table: &TransitionTable,
    t1_fs: f64,
    pathway: Pathway,
    window: &FrequencyGrid,
    settings: &FourierSettings,
) -> Result<FourierReport> {
    let fft = fourier_spectrum(table, t1_fs, pathway, window, settings)?;
    let terms = ResponseTerms::new(table);
    let far = |w: f64, poles: &[(f64, f64)]| poles.iter().all(|&(p, g)| (w - p).abs() > 3.0 * g);
    let (p2, p3) = (terms.omega2_poles(), terms.omega3_poles_of(pathway));
    let mut worst = 0.0f64;
    let mut compared = 0;
    for (r, &w2) in fft.omega2.iter().enumerate() {
        if !far(w2, &p2) {
            continue;
        }
        for (c, &w3) in fft.omega3.iter().enumerate() {
            if !far(w3, &p3) {
                continue;
            }
            let v = signal_at(w3, w2, t1_fs, table)?;
            let exact = match pathway {
                Pathway::I => v.s_i,
                Pathway::II => v.s_ii,
                Pathway::Total => v.total,
            };
            worst = worst.max((fft.at(r, c) - exact).norm() / exact.norm());
            compared += 1;
        }
    }
    Ok(FourierReport {
        max_relative_error: worst,
        compared,
        samples: fft.samples,
    })
}
