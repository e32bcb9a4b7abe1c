//! Jitter and shimmer.
//!
//! All measures are percentages and ratios of means, so periods may be given
//! in samples or seconds and amplitudes in any unit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalization of the three-point relative average perturbation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum RapNormalization {
    /// Sum over the N-3 interior points divided by N-1.
    #[default]
    AsPrinted,
    /// Classical RAP: sum over the N-2 interior points of a 3-point window
    /// (i = 2..N-1) divided by N-2.
    Classical,
}

/// APQ window lengths reported in [`PerturbationReport`].
pub const APQ_WINDOWS: [usize; 3] = [3, 5, 11];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub jitter_local: f64,
    pub jitter_rap: f64,
    pub jitter_ppq5: f64,
    pub shimmer_local: f64,
    pub shimmer_apq3: f64,
    pub shimmer_apq5: f64,
    pub shimmer_apq11: f64,
}

impl PerturbationReport {
    /// Computes every measure; needs at least 11 cycles for APQ11.
    pub fn compute(periods: &[f64], amplitudes: &[f64], rap: RapNormalization) -> Result<Self> {
        Ok(Self {
            jitter_local: jitter_local(periods)?,
            jitter_rap: jitter_rap_with(periods, rap)?,
            jitter_ppq5: jitter_ppq5(periods)?,
            shimmer_local: shimmer_local(amplitudes)?,
            shimmer_apq3: shimmer_apq(amplitudes, 3)?,
            shimmer_apq5: shimmer_apq(amplitudes, 5)?,
            shimmer_apq11: shimmer_apq(amplitudes, 11)?,
        })
    }

    /// Values in the fixed order J1, J3, J5, S1, S3, S5, S11.
    pub fn as_array(&self) -> [f64; 7] {
        [
            self.jitter_local,
            self.jitter_rap,
            self.jitter_ppq5,
            self.shimmer_local,
            self.shimmer_apq3,
            self.shimmer_apq5,
            self.shimmer_apq11,
        ]
    }
}

fn check(xs: &[f64], min_len: usize) -> Result<f64> {
    if xs.len() < min_len {
        return Err(Error::NotEnoughValues {
            required: min_len,
            got: xs.len(),
        });
    }
    if let Some((index, &value)) = xs
        .iter()
        .enumerate()
        .find(|(_, &v)| !(v > 0.0) || !v.is_finite())
    {
        return Err(Error::NonPositive { index, value });
    }
    Ok(xs.iter().sum::<f64>() / xs.len() as f64)
}

fn mean_abs_successive_diff(xs: &[f64]) -> f64 {
    let s: f64 = xs.windows(2).map(|w| (w[0] - w[1]).abs()).sum();
    s / (xs.len() - 1) as f64
}

/// Sum of |x(i) - mean of the centred `width`-point window| over all
/// positions where the window fits.
fn centred_deviation_sum(xs: &[f64], width: usize) -> f64 {
    let half = width / 2;
    xs.windows(width)
        .map(|w| {
            let avg = w.iter().sum::<f64>() / width as f64;
            (w[half] - avg).abs()
        })
        .sum()
}

/// Local jitter: mean absolute difference of consecutive periods over the
/// mean period, in percent.
pub fn jitter_local(periods: &[f64]) -> Result<f64> {
    let mean = check(periods, 2)?;
    Ok(mean_abs_successive_diff(periods) / mean * 100.0)
}

/// Relative average perturbation with the default normalization.
pub fn jitter_rap(periods: &[f64]) -> Result<f64> {
    jitter_rap_with(periods, RapNormalization::AsPrinted)
}

pub fn jitter_rap_with(periods: &[f64], norm: RapNormalization) -> Result<f64> {
    let mean = check(periods, 4)?;
    let n = periods.len();
    let avg_dev = match norm {
        // i = 2..N-2 (1-based): windows centred on those points
        RapNormalization::AsPrinted => centred_deviation_sum(&periods[..n - 1], 3) / (n - 1) as f64,
        RapNormalization::Classical => centred_deviation_sum(periods, 3) / (n - 2) as f64,
    };
    Ok(avg_dev / mean * 100.0)
}

/// Five-point period perturbation quotient.
pub fn jitter_ppq5(periods: &[f64]) -> Result<f64> {
    let mean = check(periods, 5)?;
    let n = periods.len();
    Ok(centred_deviation_sum(periods, 5) / (n - 4) as f64 / mean * 100.0)
}

/// Local shimmer: mean absolute difference of consecutive amplitudes over
/// the mean amplitude, in percent.
pub fn shimmer_local(amplitudes: &[f64]) -> Result<f64> {
    let mean = check(amplitudes, 2)?;
    Ok(mean_abs_successive_diff(amplitudes) / mean * 100.0)
}

/// Amplitude perturbation quotient over an odd window of `width` cycles.
pub fn shimmer_apq(amplitudes: &[f64], width: usize) -> Result<f64> {
    if width < 3 || width % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "APQ window must be odd and at least 3, got {width}"
        )));
    }
    let mean = check(amplitudes, width)?;
    let n = amplitudes.len();
    Ok(centred_deviation_sum(amplitudes, width) / (n - width + 1) as f64 / mean * 100.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_sequences_are_zero() {
        let t = [100.0; 12];
        assert_eq!(jitter_local(&t).unwrap(), 0.0);
        assert_eq!(jitter_rap(&t).unwrap(), 0.0);
        assert_eq!(jitter_ppq5(&t).unwrap(), 0.0);
        assert_eq!(shimmer_local(&[1.0; 3]).unwrap(), 0.0);
        for l in APQ_WINDOWS {
            assert_eq!(shimmer_apq(&t, l).unwrap(), 0.0);
        }
    }

    #[test]
    fn local_jitter_hand_value() {
        // mean |diff| = 2, mean period = 101
        let j = jitter_local(&[100.0, 102.0, 100.0, 102.0]).unwrap();
        assert!((j - 200.0 / 101.0).abs() < 1e-12);
        assert!((j - 1.9802).abs() < 1e-4);
    }

    #[test]
    fn rap_alternating_as_printed() {
        // interior points 2..3 each deviate by 4/3; (8/3)/4 over mean 100.8
        let j = jitter_rap(&[100.0, 102.0, 100.0, 102.0, 100.0]).unwrap();
        assert!((j - 0.661_375_661_375_661_4).abs() < 1e-12, "{j}");
        let c = jitter_rap_with(
            &[100.0, 102.0, 100.0, 102.0, 100.0],
            RapNormalization::Classical,
        )
        .unwrap();
        assert!((c - 1.322_751_322_751_322_8).abs() < 1e-12, "{c}");
    }

    #[test]
    fn ppq5_of_linear_ramp_is_zero() {
        let t: Vec<f64> = (1..=30).map(|i| 100.0 + i as f64).collect();
        assert!(jitter_ppq5(&t).unwrap().abs() < 1e-12);
    }

    #[test]
    fn shimmer_hand_values() {
        let s = shimmer_local(&[1.0, 1.1]).unwrap();
        assert!((s - 0.1 / 1.05 * 100.0).abs() < 1e-12);
        assert!((s - 9.5238).abs() < 1e-4);
        let a = shimmer_apq(&[1.0, 1.2, 1.0], 3).unwrap();
        assert!((a - 12.5).abs() < 1e-12, "{a}");
    }

    #[test]
    fn apq11_suppresses_slow_drift() {
        let a: Vec<f64> = (1..=200).map(|i| 1.0 + 0.001 * i as f64).collect();
        let s1 = shimmer_local(&a).unwrap();
        let s11 = shimmer_apq(&a, 11).unwrap();
        assert!(s11 < 1e-9 && s11 < s1 * 1e-6, "{s11} vs {s1}");
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            jitter_local(&[100.0]),
            Err(Error::NotEnoughValues { .. })
        ));
        assert!(matches!(
            jitter_rap(&[1.0, 2.0, 3.0]),
            Err(Error::NotEnoughValues { .. })
        ));
        assert!(matches!(
            jitter_ppq5(&[1.0; 4]),
            Err(Error::NotEnoughValues { .. })
        ));
        assert!(matches!(
            shimmer_apq(&[1.0; 10], 11),
            Err(Error::NotEnoughValues { .. })
        ));
        assert!(matches!(
            shimmer_apq(&[1.0; 10], 4),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            jitter_local(&[100.0, 0.0]),
            Err(Error::NonPositive { index: 1, .. })
        ));
        assert!(matches!(
            shimmer_local(&[-1.0, 1.0]),
            Err(Error::NonPositive { index: 0, .. })
        ));
    }

    proptest! {
        #[test]
        fn scale_invariant(xs in prop::collection::vec(0.5f64..2.0, 11..60), c in 0.01f64..100.0) {
            let ys: Vec<f64> = xs.iter().map(|x| x * c).collect();
            let a = PerturbationReport::compute(&xs, &xs, RapNormalization::AsPrinted).unwrap();
            let b = PerturbationReport::compute(&ys, &ys, RapNormalization::AsPrinted).unwrap();
            for (u, v) in a.as_array().iter().zip(b.as_array()) {
                prop_assert!((u - v).abs() <= 1e-9 * u.abs().max(1e-12));
                prop_assert!(*u >= 0.0);
            }
        }
    }
}
