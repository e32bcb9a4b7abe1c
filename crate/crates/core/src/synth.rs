//! Synthetic sustained vowels with known cycle boundaries.
//!
//! Signals are built cycle by cycle. Each cycle is one period of a fixed
//! harmonic waveshape stretched to the cycle length and scaled by the cycle
//! amplitude, so the true boundaries, periods and amplitudes are known
//! exactly and can serve as ground truth for segmentation and perturbation
//! measurements.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::pitch::F0Contour;
use crate::signal::{Waveform, MIN_SAMPLE_RATE};

/// Expected |x_i - x_{i+1}| of two i.i.d. N(0, s^2) draws is 2s/sqrt(pi).
/// Scaling the requested percentage by sqrt(pi)/2 makes the expected local
/// jitter (or shimmer) of the generated sequence equal the requested value.
const MEAN_ABS_DIFF_TO_SD: f64 = 0.886_226_925_452_758; // sqrt(pi) / 2

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub f0: f64,
    pub duration_s: f64,
    pub sample_rate: u32,
    /// Target local jitter in percent.
    pub jitter_pct: f64,
    /// Target local shimmer in percent.
    pub shimmer_pct: f64,
    pub vibrato_rate: f64,
    /// Peak frequency deviation as a fraction of `f0`.
    pub vibrato_depth: f64,
    /// Additive white noise level; `None` for a clean signal.
    pub noise_snr_db: Option<f64>,
    pub harmonics: usize,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            f0: 130.0,
            duration_s: 4.0,
            sample_rate: 44100,
            jitter_pct: 0.0,
            shimmer_pct: 0.0,
            vibrato_rate: 0.0,
            vibrato_depth: 0.0,
            noise_snr_db: None,
            harmonics: 8,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.f0 > 0.0 && self.f0.is_finite()) {
            return bad(format!("f0 must be positive, got {}", self.f0));
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return bad(format!(
                "duration must be positive, got {}",
                self.duration_s
            ));
        }
        if self.sample_rate < MIN_SAMPLE_RATE {
            return bad(format!(
                "sample rate {} below {MIN_SAMPLE_RATE}",
                self.sample_rate
            ));
        }
        if self.f0 >= self.sample_rate as f64 / 4.0 {
            return bad(format!(
                "f0 {} too high for sample rate {}",
                self.f0, self.sample_rate
            ));
        }
        if !(0.0..0.5).contains(&self.vibrato_depth) {
            return bad(format!(
                "vibrato depth must lie in [0, 0.5), got {}",
                self.vibrato_depth
            ));
        }
        if !(self.vibrato_rate >= 0.0) {
            return bad(format!(
                "vibrato rate must be non-negative, got {}",
                self.vibrato_rate
            ));
        }
        if !(self.jitter_pct >= 0.0 && self.jitter_pct < 20.0) {
            return bad(format!(
                "jitter must lie in [0, 20) percent, got {}",
                self.jitter_pct
            ));
        }
        if !(self.shimmer_pct >= 0.0 && self.shimmer_pct < 50.0) {
            return bad(format!(
                "shimmer must lie in [0, 50) percent, got {}",
                self.shimmer_pct
            ));
        }
        if self.harmonics == 0 {
            return bad("at least one harmonic is required".into());
        }
        if let Some(snr) = self.noise_snr_db {
            if !snr.is_finite() {
                return bad(format!("SNR must be finite, got {snr}"));
            }
        }
        Ok(())
    }

    /// Instantaneous fundamental frequency at time `t` seconds.
    pub fn instantaneous_f0(&self, t: f64) -> f64 {
        self.f0 * (1.0 + self.vibrato_depth * (2.0 * PI * self.vibrato_rate * t).sin())
    }

    /// The programmed f0 trajectory sampled on a frame grid.
    pub fn reference_contour(&self, hop_s: f64) -> F0Contour {
        let n = (self.duration_s / hop_s).floor() as usize + 1;
        let values = (0..n)
            .map(|m| self.instantaneous_f0(m as f64 * hop_s))
            .collect();
        F0Contour::new(values, hop_s, 0.0)
    }
}

/// Exact cycle-level description of a synthesized signal.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// Cycle start positions in (fractional) samples, plus the end of the last
    /// complete cycle; `positions.len() == periods.len() + 1`.
    pub positions: Vec<f64>,
    /// Cycle lengths in samples.
    pub periods: Vec<f64>,
    /// Peak-to-peak amplitude of each cycle before noise is added.
    pub amplitudes: Vec<f64>,
}

impl GroundTruth {
    /// Boundary positions rounded to the sample grid.
    pub fn boundary_samples(&self) -> Vec<usize> {
        self.positions.iter().map(|p| p.round() as usize).collect()
    }

    pub fn n_cycles(&self) -> usize {
        self.periods.len()
    }
}

#[derive(Debug, Clone)]
pub struct Synthesized {
    pub waveform: Waveform,
    pub truth: GroundTruth,
}

/// Generates a sustained vowel according to `spec`.
pub fn synth_voice(spec: &SynthSpec) -> Result<Synthesized> {
    spec.validate()?;
    let fs = spec.sample_rate as f64;
    let n_samples = (spec.duration_s * fs).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let jitter =
        Normal::new(0.0, spec.jitter_pct / 100.0 * MEAN_ABS_DIFF_TO_SD).expect("finite sd");
    let shimmer =
        Normal::new(0.0, spec.shimmer_pct / 100.0 * MEAN_ABS_DIFF_TO_SD).expect("finite sd");

    let mut periods = Vec::new();
    let mut amplitudes = Vec::new();
    let mut pos = 0.0;
    // One extra cycle past the end so the tail is filled with signal.
    while pos < n_samples as f64 {
        let nominal = fs / spec.instantaneous_f0(pos / fs);
        let j = clamped_draw(&jitter, &mut rng, 0.3);
        let s = clamped_draw(&shimmer, &mut rng, 0.6);
        let period = nominal * (1.0 + j);
        periods.push(period);
        amplitudes.push(1.0 + s);
        pos += period;
    }
    synth_cycles(
        &periods,
        &amplitudes,
        spec.sample_rate,
        n_samples,
        spec.harmonics,
        spec.noise_snr_db,
        spec.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ 0x5eed,
    )
}

fn clamped_draw(d: &Normal<f64>, rng: &mut ChaCha8Rng, limit: f64) -> f64 {
    if d.std_dev() == 0.0 {
        return 0.0;
    }
    loop {
        let v = d.sample(rng);
        if v.abs() < limit {
            return v;
        }
    }
}

/// Renders an explicit cycle sequence into `n_samples` samples.
///
/// Cycles that do not fit completely are rendered but left out of the
/// returned ground truth. If the sequence ends before `n_samples`, the last
/// cycle is repeated to fill the signal.
pub fn synth_cycles(
    periods: &[f64],
    amplitudes: &[f64],
    sample_rate: u32,
    n_samples: usize,
    harmonics: usize,
    noise_snr_db: Option<f64>,
    noise_seed: u64,
) -> Result<Synthesized> {
    if periods.is_empty() || periods.len() != amplitudes.len() {
        return Err(Error::InvalidParameter(
            "periods and amplitudes must be non-empty and of equal length".into(),
        ));
    }
    if let Some((i, &p)) = periods.iter().enumerate().find(|(_, &p)| !(p >= 2.0)) {
        return Err(Error::NonPositive { index: i, value: p });
    }
    if harmonics == 0 {
        return Err(Error::InvalidParameter(
            "at least one harmonic is required".into(),
        ));
    }
    let shape = WaveShape::new(harmonics);
    let mut samples = vec![0.0; n_samples];
    let mut truth = GroundTruth {
        positions: vec![0.0],
        periods: Vec::new(),
        amplitudes: Vec::new(),
    };
    let mut start = 0.0f64;
    let mut i = 0usize;
    while start < n_samples as f64 {
        let k = i.min(periods.len() - 1);
        let (period, amp) = (periods[k], amplitudes[k]);
        let end = start + period;
        let first = start.ceil() as usize;
        let last = (end.ceil() as usize).min(n_samples);
        for (n, out) in samples.iter_mut().enumerate().take(last).skip(first) {
            *out = amp * shape.eval((n as f64 - start) / period);
        }
        if end <= n_samples as f64 && i < periods.len() {
            truth.positions.push(end);
            truth.periods.push(period);
            truth.amplitudes.push(amp);
        }
        start = end;
        i += 1;
    }

    if let Some(snr_db) = noise_snr_db {
        let power = samples.iter().map(|x| x * x).sum::<f64>() / n_samples.max(1) as f64;
        let sd = (power / 10f64.powf(snr_db / 10.0)).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
        let noise = Normal::new(0.0, sd).expect("finite sd");
        for x in samples.iter_mut() {
            *x += noise.sample(&mut rng);
        }
    }
    Ok(Synthesized {
        waveform: Waveform::new(samples, sample_rate)?,
        truth,
    })
}

/// Sum of cosine partials with 1/k amplitude decay, normalized to unit
/// peak-to-peak. The phase origin is shifted by a quarter cycle so the
/// waveform extremes sit inside the cycle rather than on its boundaries.
struct WaveShape {
    harmonics: usize,
    norm: f64,
}

impl WaveShape {
    fn new(harmonics: usize) -> Self {
        let raw = |phi: f64| -> f64 {
            (1..=harmonics)
                .map(|k| (2.0 * PI * k as f64 * (phi - 0.25)).cos() / k as f64)
                .sum()
        };
        let grid = 20_000;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for g in 0..grid {
            let v = raw(g as f64 / grid as f64);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Self {
            harmonics,
            norm: 1.0 / (hi - lo),
        }
    }

    fn eval(&self, phi: f64) -> f64 {
        let mut acc = 0.0;
        for k in 1..=self.harmonics {
            acc += (2.0 * PI * k as f64 * (phi - 0.25)).cos() / k as f64;
        }
        acc * self.norm
    }
}
