//! Welch-averaged amplitude spectrum.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSpectrum {
    /// Bin centres in Hz, from 0 to the Nyquist frequency.
    pub frequencies: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub n_segments: usize,
}

impl AmplitudeSpectrum {
    /// Sum of amplitudes over bins whose centre lies in `[lo, hi]`.
    pub fn band_sum(&self, lo: f64, hi: f64) -> f64 {
        self.frequencies
            .iter()
            .zip(&self.amplitudes)
            .filter(|(f, _)| **f >= lo && **f <= hi)
            .map(|(_, a)| a)
            .sum()
    }
}

/// Periodic Hann window of length `n`.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// Number of Welch segments of length `seg` with hop `hop` in `n` samples.
pub fn segment_count(n: usize, seg: usize, hop: usize) -> usize {
    if n < seg {
        0
    } else {
        1 + (n - seg) / hop
    }
}

/// Averages Hann-windowed magnitude spectra of overlapping segments.
///
/// Magnitudes are scaled by `2 / sum(window)` so a sinusoid centred on a bin
/// reads its own amplitude; the DC and Nyquist bins have no mirror image and
/// are scaled by `1 / sum(window)`.
pub fn welch_amplitude_spectrum(
    x: &[f64],
    fs: f64,
    win_s: f64,
    overlap: f64,
) -> Result<AmplitudeSpectrum> {
    if !(fs > 0.0 && win_s > 0.0 && (0.0..1.0).contains(&overlap)) {
        return Err(Error::InvalidParameter(format!(
            "Welch needs fs > 0, window > 0 and overlap in [0, 1); got {fs}, {win_s}, {overlap}"
        )));
    }
    let seg = (win_s * fs).round() as usize;
    if seg < 2 {
        return Err(Error::InvalidParameter(format!(
            "Welch window of {seg} samples"
        )));
    }
    if x.len() < seg {
        return Err(Error::TooShort(format!(
            "{} samples is shorter than one {seg}-sample Welch window",
            x.len()
        )));
    }
    let hop = ((seg as f64 * (1.0 - overlap)).round() as usize).max(1);
    let n_segments = segment_count(x.len(), seg, hop);
    let window = hann(seg);
    let wsum: f64 = window.iter().sum();
    let n_bins = seg / 2 + 1;

    let fft = FftPlanner::new().plan_fft_forward(seg);
    let mut buf = vec![Complex64::new(0.0, 0.0); seg];
    let mut acc = vec![0.0; n_bins];
    for s in 0..n_segments {
        let chunk = &x[s * hop..s * hop + seg];
        for ((b, &v), &w) in buf.iter_mut().zip(chunk).zip(&window) {
            *b = Complex64::new(v * w, 0.0);
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm();
        }
    }
    let amplitudes = acc
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let edge = k == 0 || (seg % 2 == 0 && k == seg / 2);
            let scale = if edge { 1.0 } else { 2.0 } / wsum;
            a / n_segments as f64 * scale
        })
        .collect();
    let frequencies = (0..n_bins).map(|k| k as f64 * fs / seg as f64).collect();
    Ok(AmplitudeSpectrum {
        frequencies,
        amplitudes,
        n_segments,
    })
}
