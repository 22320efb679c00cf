use std::fmt;
use std::str::FromStr;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{EslError, Result};

pub const MIN_SERIES_LEN: usize = 64;

/// Power of a unit-amplitude sinusoid centred on a bin; the 0 dB reference.
pub const UNIT_TONE_POWER: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    #[default]
    Hann,
    None,
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Window::Hann => "hann",
            Window::None => "none",
        })
    }
}

impl FromStr for Window {
    type Err = EslError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hann" => Ok(Window::Hann),
            "none" | "rect" => Ok(Window::None),
            other => Err(EslError::InvalidInput(format!("unknown window '{other}'"))),
        }
    }
}

/// One-sided periodogram on `0, 1/(N dt), ..., 1/(2 dt)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
    pub window: Window,
    pub dt: f64,
}

impl Spectrum {
    pub fn bin_width(&self) -> f64 {
        self.freqs.get(1).copied().unwrap_or(0.0)
    }

    /// Power relative to a unit sinusoid, in decibels.
    pub fn decibels(&self) -> Vec<f64> {
        self.power.iter().map(|p| 10.0 * (p / UNIT_TONE_POWER).log10()).collect()
    }
}

/// Mean-removed, windowed one-sided periodogram.
///
/// `P_k = s_k |X_k|^2 / (sum w)^2` with `s_k = 2` except at DC and Nyquist,
/// so that without a window the powers sum to the series variance and a
/// unit-amplitude tone on a bin centre has power 1/2 for either window.
pub fn power_spectrum(series: &[f64], dt: f64, window: Window) -> Result<Spectrum> {
    let n = series.len();
    if n < MIN_SERIES_LEN {
        return Err(EslError::SeriesTooShort { len: n, min: MIN_SERIES_LEN });
    }
    if !(dt > 0.0) {
        return Err(EslError::InvalidInput(format!("sample spacing must be positive, got {dt}")));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let weights: Vec<f64> = match window {
        Window::None => vec![1.0; n],
        Window::Hann => (0..n)
            .map(|i| 0.5 * (1.0 - (std::f64::consts::TAU * i as f64 / (n - 1) as f64).cos()))
            .collect(),
    };
    let gain: f64 = weights.iter().sum();
    let mut buf: Vec<Complex64> =
        series.iter().zip(&weights).map(|(x, w)| Complex64::new((x - mean) * w, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let bins = n / 2 + 1;
    let norm = 1.0 / (gain * gain);
    let power = (0..bins)
        .map(|k| {
            let single = k == 0 || (n % 2 == 0 && k == n / 2);
            let scale = if single { 1.0 } else { 2.0 };
            scale * buf[k].norm_sqr() * norm
        })
        .collect();
    let freqs = (0..bins).map(|k| k as f64 / (n as f64 * dt)).collect();
    Ok(Spectrum { freqs, power, window, dt })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub freq: f64,
    pub power: f64,
    /// Height above the higher of the two flanking minima, in power units.
    pub prominence: f64,
}

/// Local maxima with prominence at least `min_prominence`, strongest first.
pub fn detect_peaks(spec: &Spectrum, min_prominence: f64, max_peaks: usize) -> Vec<Peak> {
    let p = &spec.power;
    let n = p.len();
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if p[i] > p[i - 1] {
            // walk across a flat top
            let mut j = i;
            while j + 1 < n && p[j + 1] == p[i] {
                j += 1;
            }
            if j + 1 < n && p[j + 1] < p[i] {
                let top = (i + j) / 2;
                let prominence = p[top] - flank_min(p, i, -1).max(flank_min(p, j, 1));
                if prominence >= min_prominence && prominence > 0.0 {
                    peaks.push(Peak { freq: spec.freqs[top], power: p[top], prominence });
                }
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks.sort_by(|a, b| b.power.total_cmp(&a.power));
    peaks.truncate(max_peaks);
    peaks
}

/// Lowest value between `start` and the first strictly higher sample in direction `dir`.
fn flank_min(p: &[f64], start: usize, dir: isize) -> f64 {
    let level = p[start];
    let mut lowest = level;
    let mut k = start as isize + dir;
    while k >= 0 && (k as usize) < p.len() {
        let v = p[k as usize];
        if v > level {
            break;
        }
        lowest = lowest.min(v);
        k += dir;
    }
    lowest
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn unit_tone_is_reference() {
        let n = 4096;
        let dt = 0.1;
        // bin 410 centre: f = 410 / (4096 * 0.1)
        let f = 410.0 / (n as f64 * dt);
        let x: Vec<f64> = (0..n).map(|i| (TAU * f * i as f64 * dt).sin()).collect();
        for w in [Window::None, Window::Hann] {
            let s = power_spectrum(&x, dt, w).unwrap();
            let peaks = detect_peaks(&s, 0.0, 1);
            assert!((peaks[0].freq - f).abs() < 1e-12);
            let tol = if w == Window::None { 1e-12 } else { 2e-3 };
            assert!((peaks[0].power - UNIT_TONE_POWER).abs() < tol, "{w}: {}", peaks[0].power);
        }
    }

    #[test]
    fn flat_has_no_peaks() {
        let s = Spectrum { freqs: (0..10).map(f64::from).collect(), power: vec![1.0; 10], window: Window::None, dt: 1.0 };
        assert!(detect_peaks(&s, 0.0, 5).is_empty());
    }

    #[test]
    fn too_short() {
        assert!(matches!(power_spectrum(&[0.0; 10], 1.0, Window::Hann), Err(EslError::SeriesTooShort { .. })));
    }
}
