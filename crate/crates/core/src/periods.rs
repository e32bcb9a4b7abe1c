//! Segmentation of a voiced signal into fundamental periods.
//!
//! Two methods are provided:
//!
//! * [`segment_wm_pc`] anchors every boundary to the cumulative phase of the
//!   f0 contour. Boundary `k` is predicted where the phase function first
//!   exceeds `2*pi*k` and then refined by waveform matching within a window
//!   around that prediction. The phase accumulator is global and never reset,
//!   so matching errors cannot accumulate from cycle to cycle.
//! * [`segment_wm`] is conventional chained waveform matching: each boundary
//!   is found relative to the previous one only. Small errors propagate and
//!   the boundaries slowly slip out of phase with the signal.
//!
//! The phase function follows the 1-based convention `Phi(n) = sum of
//! omega(1..=n)`; in 0-based storage `phi[i] = Phi(i + 1)`, which is also the
//! phase reached at the start of sample `i + 1`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pitch::{expand_to_radians, F0Contour};
use crate::signal::Waveform;

/// Relative tolerance when testing whether the phase exceeds a multiple of
/// 2*pi; absorbs rounding in sums that land exactly on the level.
const PHASE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationConfig {
    /// Half-width of the refinement window as a fraction of the nominal period.
    pub refine_window_frac: f64,
    pub min_cycles: usize,
    /// Pitch band used for the period plausibility limits.
    pub f_min: f64,
    pub f_max: f64,
    /// Fraction of the residual between the matched boundary and the
    /// phase-predicted crossing that is removed at every cycle.
    pub phase_pull: f64,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self {
            refine_window_frac: 0.15,
            min_cycles: 30,
            f_min: 50.0,
            f_max: 400.0,
            phase_pull: 0.1,
        }
    }
}

impl SegmentationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.refine_window_frac > 0.0 && self.refine_window_frac <= 0.3) {
            return Err(Error::InvalidParameter(format!(
                "refine window fraction must lie in (0, 0.3], got {}",
                self.refine_window_frac
            )));
        }
        if !(self.f_min > 0.0 && self.f_min < self.f_max) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < f_min < f_max, got {} / {}",
                self.f_min, self.f_max
            )));
        }
        if !(0.0..1.0).contains(&self.phase_pull) {
            return Err(Error::InvalidParameter(format!(
                "phase pull must lie in [0, 1), got {}",
                self.phase_pull
            )));
        }
        if self.min_cycles < 2 {
            return Err(Error::InvalidParameter(
                "min_cycles must be at least 2".into(),
            ));
        }
        Ok(())
    }

    /// Shortest and longest admissible period in samples.
    pub fn period_limits(&self, sample_rate: u32) -> (f64, f64) {
        let fs = sample_rate as f64;
        (fs / self.f_max * 0.7, fs / self.f_min * 1.3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// Waveform matching with phase constraint.
    WmPc,
    /// Chained waveform matching.
    Wm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleSegmentation {
    pub method: Method,
    /// Cycle boundaries on the sample grid, `b_0 < b_1 < ... < b_N`.
    pub boundaries: Vec<usize>,
    /// Sub-sample boundary positions; equal to `boundaries` for [`Method::Wm`].
    pub positions: Vec<f64>,
    /// Cycle lengths in samples, `positions[i] - positions[i - 1]`.
    pub periods: Vec<f64>,
    /// Peak-to-peak amplitude of each cycle.
    pub amplitudes: Vec<f64>,
}

impl CycleSegmentation {
    pub fn n_cycles(&self) -> usize {
        self.periods.len()
    }

    /// `|Phi(b_k) - 2*pi*k|` for every boundary.
    pub fn phase_drift(&self, phi: &[f64]) -> Vec<f64> {
        phase_drift(phi, &self.boundaries)
    }
}

/// Running sum of `omega`, with compensated summation.
pub fn phase_function(omega: &[f64]) -> Result<Vec<f64>> {
    if omega.is_empty() {
        return Err(Error::TooShort("empty frequency track".into()));
    }
    let mut out = Vec::with_capacity(omega.len());
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for (index, &w) in omega.iter().enumerate() {
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::NonPositive { index, value: w });
        }
        let t = sum + w;
        if sum.abs() >= w.abs() {
            comp += (sum - t) + w;
        } else {
            comp += (w - t) + sum;
        }
        sum = t;
        out.push(sum + comp);
    }
    Ok(out)
}

/// Cumulative phase of `contour` over the samples of `w`.
pub fn phase_of(w: &Waveform, contour: &F0Contour) -> Result<Vec<f64>> {
    let omega = expand_to_radians(contour, w.sample_rate(), w.len())?;
    phase_function(&omega)
}

fn exceeds(value: f64, level: f64) -> bool {
    value > level + PHASE_TOL * level.abs()
}

/// Phase reached at the start of sample `n`, i.e. `Phi(n)` in 1-based terms.
fn phase_at(phi: &[f64], n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        phi[n - 1]
    }
}

/// Boundary where the phase passes `2*pi*k`: the integer index from the
/// "first n with Phi(n) > level, boundary n - 1" rule, and the interpolated
/// sub-sample crossing.
fn crossing(phi: &[f64], k: usize) -> Option<(usize, f64)> {
    let level = TAU * k as f64;
    let i = phi.partition_point(|&v| !exceeds(v, level));
    if i >= phi.len() {
        return None;
    }
    let before = phase_at(phi, i);
    let step = phi[i] - before;
    let frac = ((level - before) / step).clamp(0.0, 1.0);
    Some((i, i as f64 + frac))
}

/// Length of the first period: `n - 1` for the smallest `n` with
/// `Phi(n) > 2*pi`.
pub fn first_period(phi: &[f64]) -> Result<usize> {
    crossing(phi, 1)
        .map(|(i, _)| i)
        .ok_or_else(|| Error::TooShort("phase never completes one cycle; signal too short".into()))
}

/// `|Phi(b_k) - 2*pi*k|` for each boundary `b_k`.
pub fn phase_drift(phi: &[f64], boundaries: &[usize]) -> Vec<f64> {
    boundaries
        .iter()
        .enumerate()
        .map(|(k, &b)| (phase_at(phi, b.min(phi.len())) - TAU * k as f64).abs())
        .collect()
}

/// Peak-to-peak amplitude of each cycle `[b_{i-1}, b_i)`.
pub fn cycle_amplitudes(x: &[f64], boundaries: &[usize]) -> Result<Vec<f64>> {
    boundaries
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            if w[1] <= w[0] || w[1] > x.len() {
                return Err(Error::InvalidParameter(format!(
                    "cycle {} spans [{}, {}) which is empty or outside the signal",
                    i + 1,
                    w[0],
                    w[1]
                )));
            }
            let cyc = &x[w[0]..w[1]];
            let hi = cyc.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = cyc.iter().copied().fold(f64::INFINITY, f64::min);
            Ok(hi - lo)
        })
        .collect()
}

fn mean_abs_diff(x: &[f64], a: usize, b: usize, m: usize) -> f64 {
    x[a..a + m]
        .iter()
        .zip(&x[b..b + m])
        .map(|(p, q)| (p - q).abs())
        .sum::<f64>()
        / m as f64
}

fn mean_sq_diff(x: &[f64], a: usize, b: usize, m: usize) -> f64 {
    x[a..a + m]
        .iter()
        .zip(&x[b..b + m])
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        / m as f64
}

/// Index of the minimum cost; among equal costs the candidate closest to
/// `anchor` wins (then the earlier one).
fn argmin_toward(costs: &[(usize, f64)], anchor: usize) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &(c, v)) in costs.iter().enumerate() {
        match best {
            None => best = Some(i),
            Some(j) => {
                let (bc, bv) = costs[j];
                if v < bv || (v == bv && c.abs_diff(anchor) < bc.abs_diff(anchor)) {
                    best = Some(i);
                }
            }
        }
    }
    best
}

/// Sub-sample offset of a V-shaped minimum from its two neighbours
/// (equiangular line fit; exact for |error| costs of a linear shift).
fn v_offset(left: f64, mid: f64, right: f64) -> f64 {
    let rise = if left >= right {
        left - mid
    } else {
        right - mid
    };
    if rise <= 0.0 {
        return 0.0;
    }
    (0.5 * (left - right) / rise).clamp(-0.5, 0.5)
}

/// Waveform matching with phase constraint.
pub fn segment_wm_pc(
    w: &Waveform,
    contour: &F0Contour,
    cfg: &SegmentationConfig,
) -> Result<CycleSegmentation> {
    cfg.validate()?;
    let x = w.samples();
    let n = x.len();
    let omega = expand_to_radians(contour, w.sample_rate(), n)?;
    let phi = phase_function(&omega)?;
    let (min_p, max_p) = cfg.period_limits(w.sample_rate());

    let first = first_period(&phi).map_err(|_| Error::TooFewCycles {
        found: 0,
        required: cfg.min_cycles,
    })?;
    let mut positions = vec![0.0, first as f64];
    let mut boundaries = vec![0usize, first];
    let mut costs: Vec<(usize, f64)> = Vec::new();

    for k in 2.. {
        let Some((pred, pred_frac)) = crossing(&phi, k) else {
            break;
        };
        let Some((next_pred, _)) = crossing(&phi, k + 1) else {
            break;
        };
        let prev = *positions.last().expect("non-empty");
        let start = prev.round() as usize;
        let residual = prev - start as f64;
        let nominal = TAU / omega[pred];
        let half = (cfg.refine_window_frac * nominal).round().max(1.0) as usize;

        let lo = pred.saturating_sub(half).max(start + min_p.ceil() as usize);
        let hi = (pred + half).min(start + max_p.floor() as usize);
        if lo > hi {
            break;
        }
        // Neighbours of the window are scored as well for the sub-sample fit.
        costs.clear();
        let mut out_of_signal = false;
        for c in lo.saturating_sub(1)..=hi + 1 {
            let m = (c - start).min(next_pred.saturating_sub(c));
            if m < 2 {
                continue;
            }
            if c + m > n {
                out_of_signal = true;
                break;
            }
            costs.push((c, mean_abs_diff(x, start, c, m)));
        }
        if out_of_signal {
            break;
        }
        let in_window: Vec<(usize, f64)> = costs
            .iter()
            .copied()
            .filter(|&(c, _)| c >= lo && c <= hi)
            .collect();
        let Some(best) = argmin_toward(&in_window, pred) else {
            break;
        };
        let (c_best, v_best) = in_window[best];
        let pos = costs
            .iter()
            .position(|&(c, _)| c == c_best)
            .expect("present");
        let offset = match (pos.checked_sub(1).map(|p| costs[p]), costs.get(pos + 1)) {
            (Some((cl, vl)), Some(&(cr, vr))) if cl + 1 == c_best && cr == c_best + 1 => {
                v_offset(vl, v_best, vr)
            }
            _ => 0.0,
        };
        let matched = c_best as f64 + offset + residual;
        let mut next = matched + cfg.phase_pull * (pred_frac - matched);
        next = next.clamp(pred as f64 - half as f64, pred as f64 + half as f64);
        next = next.clamp(prev + min_p, prev + max_p);
        let b = next.round() as usize;
        if b <= *boundaries.last().expect("non-empty") || b > n {
            break;
        }
        positions.push(next);
        boundaries.push(b);
    }
    finish(Method::WmPc, x, boundaries, positions, cfg)
}

/// Conventional chained waveform matching by least squared difference.
pub fn segment_wm(
    w: &Waveform,
    contour: &F0Contour,
    cfg: &SegmentationConfig,
) -> Result<CycleSegmentation> {
    cfg.validate()?;
    let x = w.samples();
    let n = x.len();
    let omega = expand_to_radians(contour, w.sample_rate(), n)?;
    let phi = phase_function(&omega)?;
    let (min_p, max_p) = cfg.period_limits(w.sample_rate());

    let first = first_period(&phi).map_err(|_| Error::TooFewCycles {
        found: 0,
        required: cfg.min_cycles,
    })?;
    let mut boundaries = vec![0usize, first];
    let mut costs: Vec<(usize, f64)> = Vec::new();
    loop {
        let start = *boundaries.last().expect("non-empty");
        if start >= n {
            break;
        }
        let nominal = TAU / omega[start];
        let half = (cfg.refine_window_frac * nominal).round().max(1.0) as usize;
        let centre = start + nominal.round() as usize;
        let lo = centre
            .saturating_sub(half)
            .max(start + min_p.ceil() as usize);
        let hi = (centre + half).min(start + max_p.floor() as usize);
        if lo > hi || hi + (hi - start) > n {
            break;
        }
        costs.clear();
        costs.extend((lo..=hi).map(|c| (c, mean_sq_diff(x, start, c, c - start))));
        let Some(best) = argmin_toward(&costs, centre) else {
            break;
        };
        boundaries.push(costs[best].0);
    }
    let positions = boundaries.iter().map(|&b| b as f64).collect();
    finish(Method::Wm, x, boundaries, positions, cfg)
}

fn finish(
    method: Method,
    x: &[f64],
    boundaries: Vec<usize>,
    positions: Vec<f64>,
    cfg: &SegmentationConfig,
) -> Result<CycleSegmentation> {
    let found = boundaries.len() - 1;
    if found < cfg.min_cycles {
        return Err(Error::TooFewCycles {
            found,
            required: cfg.min_cycles,
        });
    }
    let periods = positions.windows(2).map(|p| p[1] - p[0]).collect();
    let amplitudes = cycle_amplitudes(x, &boundaries)?;
    Ok(CycleSegmentation {
        method,
        boundaries,
        positions,
        periods,
        amplitudes,
    })
}
