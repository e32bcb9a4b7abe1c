//! Pathological vibrato index (PVI).
//!
//! The f0 contour is divided by its mean, bandpassed to 9–14 Hz with a
//! 3rd-order Butterworth filter, and its Welch amplitude spectrum is summed
//! over the bins of the same band. Healthy vibrato (5–8 Hz) falls in the
//! filter stopband; tremor-like modulation in 9–14 Hz does not.

mod filter;
mod welch;

pub use filter::{design_bandpass, filter_contour, BandpassFilter, Section};
pub use welch::{hann, segment_count, welch_amplitude_spectrum, AmplitudeSpectrum};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pitch::F0Contour;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PviConfig {
    pub band_lo: f64,
    pub band_hi: f64,
    pub order: usize,
    pub win_s: f64,
    pub overlap: f64,
    /// Filter the deviation from the mean (f0'/1 - 1) rather than f0' itself.
    /// Equivalent to starting the filter in its steady state for the DC
    /// level, so the start-up step response does not leak into the band.
    pub remove_mean: bool,
}

impl Default for PviConfig {
    fn default() -> Self {
        Self {
            band_lo: 9.0,
            band_hi: 14.0,
            order: 3,
            win_s: 1.0,
            overlap: 0.95,
            remove_mean: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PviResult {
    pub pvi: f64,
    pub band_lo: f64,
    pub band_hi: f64,
    pub spectrum: AmplitudeSpectrum,
    pub normalized: Vec<f64>,
    pub filtered: Vec<f64>,
}

/// Divides every value by the mean of the voiced (positive) values.
/// Unvoiced frames stay at zero.
pub fn normalize_contour(c: &F0Contour) -> Result<Vec<f64>> {
    let (sum, n) = c.voiced().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        return Err(Error::AllUnvoiced);
    }
    let mean = sum / n as f64;
    Ok(c.values
        .iter()
        .map(|&v| if v > 0.0 { v / mean } else { 0.0 })
        .collect())
}

/// Runs the full PVI pipeline on a contour, bridging short unvoiced gaps.
pub fn compute_pvi(c: &F0Contour, cfg: &PviConfig) -> Result<PviResult> {
    let fs = c.rate();
    let bridged = c.bridged()?;
    if (bridged.len() as f64) < (cfg.win_s * fs).round() {
        return Err(Error::TooShort(format!(
            "contour covers {:.3} s, PVI needs at least {} s",
            bridged.len() as f64 / fs,
            cfg.win_s
        )));
    }
    let normalized = normalize_contour(&bridged)?;
    let input: Vec<f64> = if cfg.remove_mean {
        normalized.iter().map(|v| v - 1.0).collect()
    } else {
        normalized.clone()
    };
    let bp = design_bandpass(cfg.band_lo, cfg.band_hi, fs, cfg.order)?;
    let filtered = filter_contour(&input, &bp)?;
    let spectrum = welch_amplitude_spectrum(&filtered, fs, cfg.win_s, cfg.overlap)?;
    let pvi = spectrum.band_sum(cfg.band_lo, cfg.band_hi);
    Ok(PviResult {
        pvi,
        band_lo: cfg.band_lo,
        band_hi: cfg.band_hi,
        spectrum,
        normalized,
        filtered,
    })
}
