//! Frame-wise f0 estimation and conversion to a per-sample frequency track.
//!
//! Each frame is analysed with the normalized cross-correlation between a
//! window of half the frame length and the same window shifted by each
//! candidate lag. The first strong peak is refined by parabolic
//! interpolation. A 5-point median filter over voiced frames removes isolated
//! octave jumps.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::signal::Waveform;

/// Longest run of unvoiced frames that [`F0Contour::bridged`] will fill in.
pub const MAX_BRIDGED_GAP: usize = 2;

/// Peaks within this fraction of the strongest correlation peak compete;
/// the one with the shortest lag wins.
const PEAK_RATIO: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F0Config {
    pub f_min: f64,
    pub f_max: f64,
    pub hop_s: f64,
    pub frame_s: f64,
    pub voicing_threshold: f64,
}

impl Default for F0Config {
    fn default() -> Self {
        Self {
            f_min: 50.0,
            f_max: 400.0,
            hop_s: 0.005,
            frame_s: 0.040,
            voicing_threshold: 0.5,
        }
    }
}

impl F0Config {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.f_min > 0.0 && self.f_min < self.f_max) {
            return bad(format!(
                "need 0 < f_min < f_max, got {} / {}",
                self.f_min, self.f_max
            ));
        }
        if !(self.hop_s > 0.0) {
            return bad(format!("hop must be positive, got {}", self.hop_s));
        }
        if !(self.frame_s >= 2.0 / self.f_max) {
            return bad(format!(
                "frame of {} s is shorter than two periods of f_max ({} s)",
                self.frame_s,
                2.0 / self.f_max
            ));
        }
        if !(self.voicing_threshold > 0.0 && self.voicing_threshold < 1.0) {
            return bad(format!(
                "voicing threshold must lie in (0, 1), got {}",
                self.voicing_threshold
            ));
        }
        Ok(())
    }
}

/// f0 estimates on a uniform frame grid; 0 marks an unvoiced frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F0Contour {
    pub values: Vec<f64>,
    pub hop_s: f64,
    /// Time of the first frame centre.
    pub start_s: f64,
}

impl F0Contour {
    pub fn new(values: Vec<f64>, hop_s: f64, start_s: f64) -> Self {
        Self {
            values,
            hop_s,
            start_s,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Frame rate in Hz.
    pub fn rate(&self) -> f64 {
        1.0 / self.hop_s
    }

    pub fn time(&self, frame: usize) -> f64 {
        self.start_s + frame as f64 * self.hop_s
    }

    pub fn voiced(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().copied().filter(|&v| v > 0.0)
    }

    pub fn voiced_count(&self) -> usize {
        self.voiced().count()
    }

    /// Returns the contour with short unvoiced gaps filled.
    ///
    /// Interior gaps of at most [`MAX_BRIDGED_GAP`] frames are linearly
    /// interpolated; longer interior gaps are an error. Unvoiced frames before
    /// the first and after the last voiced frame take the nearest voiced value.
    pub fn bridged(&self) -> Result<F0Contour> {
        let voiced: Vec<usize> = (0..self.values.len())
            .filter(|&i| self.values[i] > 0.0)
            .collect();
        let (first, last) = match (voiced.first(), voiced.last()) {
            (Some(&f), Some(&l)) => (f, l),
            _ => return Err(Error::AllUnvoiced),
        };
        let mut out = self.values.clone();
        for w in voiced.windows(2) {
            let (a, b) = (w[0], w[1]);
            let gap = b - a - 1;
            if gap == 0 {
                continue;
            }
            if gap > MAX_BRIDGED_GAP {
                return Err(Error::UnvoicedGap {
                    at: a + 1,
                    frames: gap,
                    limit: MAX_BRIDGED_GAP,
                });
            }
            let (va, vb) = (self.values[a], self.values[b]);
            for i in a + 1..b {
                let t = (i - a) as f64 / (b - a) as f64;
                out[i] = va + (vb - va) * t;
            }
        }
        for v in out.iter_mut().take(first) {
            *v = self.values[first];
        }
        for v in out.iter_mut().skip(last + 1) {
            *v = self.values[last];
        }
        Ok(F0Contour::new(out, self.hop_s, self.start_s))
    }
}

/// Estimates the f0 contour of `w`.
pub fn estimate_f0(w: &Waveform, cfg: &F0Config) -> Result<F0Contour> {
    cfg.validate()?;
    let fs = w.sample_rate() as f64;
    let frame_len = (cfg.frame_s * fs).round() as usize;
    let window = frame_len / 2;
    let lag_lo = (fs / cfg.f_max).floor().max(2.0) as usize;
    let lag_hi = ((fs / cfg.f_min).ceil() as usize).min(frame_len - window);
    if lag_hi < lag_lo + 2 {
        return Err(Error::InvalidParameter(format!(
            "frame of {frame_len} samples leaves no usable lag range"
        )));
    }
    let x = w.samples();
    if x.len() < frame_len {
        return Err(Error::TooShort(format!(
            "{} samples is shorter than one {frame_len}-sample analysis frame",
            x.len()
        )));
    }
    let hop = cfg.hop_s * fs;
    let n_frames = ((x.len() - frame_len) as f64 / hop).floor() as usize + 1;
    let fft_len = (window + frame_len).next_power_of_two();
    let mut planner = FftPlanner::new();
    let analyzer = FrameAnalyzer {
        forward: planner.plan_fft_forward(fft_len),
        inverse: planner.plan_fft_inverse(fft_len),
        fft_len,
        window,
        frame_len,
        lag_lo,
        lag_hi,
        threshold: cfg.voicing_threshold,
    };

    // Each estimate is timed at the centre of the span its correlation
    // covers, `start + (window + lag) / 2`, then moved onto the frame grid.
    let raw = par::map_indexed(n_frames, |m| {
        let start = ((m as f64 * hop).round() as usize).min(x.len() - frame_len);
        let lag = analyzer.best_lag(&x[start..start + frame_len]);
        let f0 = lag
            .map(|l| fs / l)
            .filter(|&f| f >= cfg.f_min && f <= cfg.f_max);
        match (lag, f0) {
            (Some(l), Some(f)) => (start as f64 + (window as f64 + l) / 2.0, f),
            _ => (start as f64 + frame_len as f64 / 2.0, 0.0),
        }
    });
    if raw.iter().all(|&(_, f)| f == 0.0) {
        return Err(Error::AllUnvoiced);
    }
    let centre = frame_len as f64 / 2.0;
    let gridded: Vec<f64> = (0..n_frames)
        .map(|k| regrid(&raw, k, k as f64 * hop + centre))
        .collect();
    let values = median5_voiced(&gridded);
    let start_s = (frame_len as f64 / 2.0) / fs;
    Ok(F0Contour::new(values, cfg.hop_s, start_s))
}

struct FrameAnalyzer {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    fft_len: usize,
    window: usize,
    frame_len: usize,
    lag_lo: usize,
    lag_hi: usize,
    threshold: f64,
}

impl FrameAnalyzer {
    /// Fractional lag of the selected correlation peak, or `None` if the
    /// frame is unvoiced.
    fn best_lag(&self, frame: &[f64]) -> Option<f64> {
        let nccf = self.nccf(frame)?;
        // nccf[i] corresponds to lag lag_lo + i
        let mut peaks = Vec::new();
        for i in 1..nccf.len() - 1 {
            if nccf[i] >= nccf[i - 1] && nccf[i] > nccf[i + 1] {
                peaks.push(i);
            }
        }
        let best = peaks
            .iter()
            .map(|&i| nccf[i])
            .fold(f64::NEG_INFINITY, f64::max);
        if !(best >= self.threshold) {
            return None;
        }
        let i = *peaks.iter().find(|&&i| nccf[i] >= PEAK_RATIO * best)?;
        let (a, b, c) = (nccf[i - 1], nccf[i], nccf[i + 1]);
        let denom = a - 2.0 * b + c;
        let shift = if denom < 0.0 {
            0.5 * (a - c) / denom
        } else {
            0.0
        };
        Some((self.lag_lo + i) as f64 + shift.clamp(-0.5, 0.5))
    }

    fn nccf(&self, frame: &[f64]) -> Option<Vec<f64>> {
        let n = self.fft_len;
        let mut a: Vec<Complex<f64>> = vec![Complex::default(); n];
        let mut b: Vec<Complex<f64>> = vec![Complex::default(); n];
        for (dst, &s) in a.iter_mut().zip(&frame[..self.window]) {
            dst.re = s;
        }
        for (dst, &s) in b.iter_mut().zip(frame) {
            dst.re = s;
        }
        self.forward.process(&mut a);
        self.forward.process(&mut b);
        for (bv, av) in b.iter_mut().zip(&a) {
            *bv *= av.conj();
        }
        self.inverse.process(&mut b);
        let scale = 1.0 / n as f64;

        let mut prefix = Vec::with_capacity(self.frame_len + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for &s in frame {
            acc += s * s;
            prefix.push(acc);
        }
        let e0 = prefix[self.window];
        if e0 <= f64::MIN_POSITIVE {
            return None;
        }
        Some(
            (self.lag_lo..=self.lag_hi)
                .map(|lag| {
                    let e = prefix[lag + self.window] - prefix[lag];
                    let denom = (e0 * e).sqrt();
                    if denom > 0.0 {
                        b[lag].re * scale / denom
                    } else {
                        0.0
                    }
                })
                .collect(),
        )
    }
}

/// Value at sample time `t` (grid frame `k`) from estimates timed at or
/// slightly before their own frame centre. Neighbours are interpolated when
/// both are voiced; otherwise the nearer one is taken as is.
fn regrid(raw: &[(f64, f64)], k: usize, t: f64) -> f64 {
    let last = raw.len() - 1;
    let prev = (k..=(k + 3).min(last))
        .rev()
        .find(|&j| raw[j].0 <= t)
        .unwrap_or(k);
    if prev == last {
        return raw[last].1;
    }
    let ((ta, fa), (tb, fb)) = (raw[prev], raw[prev + 1]);
    if t <= ta {
        return fa;
    }
    if fa > 0.0 && fb > 0.0 {
        fa + (fb - fa) * (t - ta) / (tb - ta)
    } else if t - ta <= tb - t {
        fa
    } else {
        fb
    }
}

fn median5_voiced(raw: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; raw.len()];
    let mut buf = Vec::with_capacity(5);
    for i in 0..raw.len() {
        if raw[i] == 0.0 {
            continue;
        }
        buf.clear();
        let lo = i.saturating_sub(2);
        let hi = (i + 2).min(raw.len() - 1);
        buf.extend(raw[lo..=hi].iter().copied().filter(|&v| v > 0.0));
        buf.sort_by(f64::total_cmp);
        let m = buf.len();
        out[i] = if m % 2 == 1 {
            buf[m / 2]
        } else {
            0.5 * (buf[m / 2 - 1] + buf[m / 2])
        };
    }
    out
}

/// Expands a contour to a per-sample angular frequency `2*pi*f0/fs` for
/// `n_samples` samples, interpolating linearly between frame centres and
/// holding the edge values outside the frame grid.
pub fn expand_to_radians(c: &F0Contour, sample_rate: u32, n_samples: usize) -> Result<Vec<f64>> {
    let filled = c.bridged()?;
    let fs = sample_rate as f64;
    let v = &filled.values;
    let last = v.len() - 1;
    let k = 2.0 * PI / fs;
    Ok((0..n_samples)
        .map(|n| {
            let u = (n as f64 / fs - c.start_s) / c.hop_s;
            let f0 = if u <= 0.0 {
                v[0]
            } else if u >= last as f64 {
                v[last]
            } else {
                let i = u.floor() as usize;
                let t = u - i as f64;
                v[i] + (v[i + 1] - v[i]) * t
            };
            k * f0
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{synth_voice, SynthSpec};

    fn sine(f: f64, fs: u32, secs: f64) -> Waveform {
        let n = (secs * fs as f64) as usize;
        Waveform::new(
            (0..n)
                .map(|i| (2.0 * PI * f * i as f64 / fs as f64).sin() * 0.5)
                .collect(),
            fs,
        )
        .unwrap()
    }

    #[test]
    fn pure_tone_is_tracked() {
        let c = estimate_f0(&sine(150.0, 44100, 3.0), &F0Config::default()).unwrap();
        assert_eq!(c.voiced_count(), c.len());
        for v in c.voiced() {
            assert!((v - 150.0).abs() < 1.0, "{v}");
        }
        // frame grid: 40 ms frames every 5 ms
        assert_eq!(c.len(), ((3.0 * 44100.0 - 1764.0) / 220.5) as usize + 1);
        assert!((c.start_s - 0.02).abs() < 1e-12);
    }

    #[test]
    fn white_noise_is_unvoiced() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let d = Normal::new(0.0, 0.3).unwrap();
        let w = Waveform::new((0..44100).map(|_| d.sample(&mut rng)).collect(), 44100).unwrap();
        assert!(matches!(
            estimate_f0(&w, &F0Config::default()),
            Err(Error::AllUnvoiced)
        ));
    }

    #[test]
    fn shorter_than_frame_is_error() {
        let w = sine(150.0, 44100, 0.02);
        assert!(matches!(
            estimate_f0(&w, &F0Config::default()),
            Err(Error::TooShort(_))
        ));
    }

    #[test]
    fn vibrato_is_followed() {
        let spec = SynthSpec {
            f0: 130.0,
            vibrato_rate: 6.0,
            vibrato_depth: 0.02,
            duration_s: 3.0,
            ..Default::default()
        };
        let out = synth_voice(&spec).unwrap();
        let c = estimate_f0(&out.waveform, &F0Config::default()).unwrap();
        let mean = c.voiced().sum::<f64>() / c.voiced_count() as f64;
        assert!((mean - 130.0).abs() < 1.0, "mean {mean}");
        // Correlate against the programmed trajectory: the contour must swing
        // with the 6 Hz modulation.
        let truth: Vec<f64> = (0..c.len())
            .map(|m| spec.instantaneous_f0(c.time(m)))
            .collect();
        let dev: Vec<f64> = c.values.iter().map(|v| v - mean).collect();
        let tdev: Vec<f64> = truth.iter().map(|v| v - 130.0).collect();
        let dot: f64 = dev.iter().zip(&tdev).map(|(a, b)| a * b).sum();
        let na: f64 = dev.iter().map(|a| a * a).sum::<f64>().sqrt();
        let nb: f64 = tdev.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(dot / (na * nb) > 0.95, "correlation {}", dot / (na * nb));
    }

    #[test]
    fn gain_does_not_change_contour() {
        let out = synth_voice(&SynthSpec {
            duration_s: 1.0,
            jitter_pct: 0.5,
            noise_snr_db: Some(25.0),
            ..Default::default()
        })
        .unwrap();
        let cfg = F0Config::default();
        let a = estimate_f0(&out.waveform, &cfg).unwrap();
        let b = estimate_f0(&out.waveform.scaled(0.125), &cfg).unwrap();
        assert_eq!(a, b);
        let c = estimate_f0(&out.waveform.scaled(0.3), &cfg).unwrap();
        for (x, y) in a.values.iter().zip(&c.values) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn synthetic_tones_within_one_hz() {
        for &f0 in &[80.0, 123.0, 200.0, 275.0, 350.0] {
            let out = synth_voice(&SynthSpec {
                f0,
                duration_s: 1.0,
                ..Default::default()
            })
            .unwrap();
            let c = estimate_f0(&out.waveform, &F0Config::default()).unwrap();
            let good = c.voiced().filter(|v| (v - f0).abs() <= 1.0).count();
            assert!(
                good as f64 >= 0.99 * c.len() as f64,
                "f0 {f0}: {good}/{}",
                c.len()
            );
        }
    }

    #[test]
    fn invalid_config() {
        let w = sine(150.0, 44100, 0.5);
        for cfg in [
            F0Config {
                f_min: 400.0,
                f_max: 50.0,
                ..Default::default()
            },
            F0Config {
                frame_s: 0.004,
                ..Default::default()
            },
            F0Config {
                hop_s: 0.0,
                ..Default::default()
            },
            F0Config {
                voicing_threshold: 1.5,
                ..Default::default()
            },
        ] {
            assert!(matches!(
                estimate_f0(&w, &cfg),
                Err(Error::InvalidParameter(_))
            ));
        }
    }

    #[test]
    fn constant_contour_expands_to_constant_omega() {
        let c = F0Contour::new(vec![100.0; 20], 0.005, 0.0);
        let w = expand_to_radians(&c, 44100, 5000).unwrap();
        let expected = 2.0 * PI * 100.0 / 44100.0;
        assert!(w.iter().all(|&v| v == expected));
    }

    #[test]
    fn expansion_interpolates_linearly() {
        let c = F0Contour::new(vec![100.0, 102.0], 0.005, 0.0);
        let w = expand_to_radians(&c, 8000, 41).unwrap();
        let hz = |v: f64| v * 8000.0 / (2.0 * PI);
        assert!((hz(w[20]) - 101.0).abs() < 1e-9);
        assert!((hz(w[0]) - 100.0).abs() < 1e-9);
        assert!((hz(w[40]) - 102.0).abs() < 1e-9);
    }

    #[test]
    fn short_gaps_bridged_long_gaps_rejected() {
        let c = F0Contour::new(vec![100.0, 0.0, 0.0, 106.0, 106.0], 0.005, 0.0);
        let b = c.bridged().unwrap();
        assert_eq!(b.values, vec![100.0, 102.0, 104.0, 106.0, 106.0]);

        let c = F0Contour::new(vec![100.0, 0.0, 0.0, 0.0, 106.0], 0.005, 0.0);
        assert!(matches!(
            expand_to_radians(&c, 8000, 100),
            Err(Error::UnvoicedGap { frames: 3, .. })
        ));

        let c = F0Contour::new(vec![0.0, 0.0, 0.0, 120.0, 0.0], 0.005, 0.0);
        assert_eq!(c.bridged().unwrap().values, vec![120.0; 5]);
    }

    #[test]
    fn median_removes_isolated_octave_jump() {
        let raw = [100.0, 101.0, 200.0, 100.5, 100.0, 0.0, 99.0];
        let m = median5_voiced(&raw);
        assert!((m[2] - 100.5).abs() < 1e-12);
        assert_eq!(m[5], 0.0);
    }
}
