//! Butterworth bandpass design and second-order-section filtering.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One biquad, `b0 + b1 z^-1 + b2 z^-2` over `1 + a1 z^-1 + a2 z^-2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Section {
    fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        let num = self.b[0] + z_inv * self.b[1] + z2 * self.b[2];
        let den = self.a[0] + z_inv * self.a[1] + z2 * self.a[2];
        num / den
    }

    fn poles(&self) -> [Complex64; 2] {
        let (a1, a2) = (self.a[1], self.a[2]);
        let disc = Complex64::new(a1 * a1 - 4.0 * a2, 0.0).sqrt();
        [(-a1 + disc) / 2.0, (-a1 - disc) / 2.0]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandpassFilter {
    pub sections: Vec<Section>,
    pub order: usize,
    pub f_lo: f64,
    pub f_hi: f64,
    pub fs: f64,
}

impl BandpassFilter {
    /// Complex frequency response at `f` Hz.
    pub fn response(&self, f: f64) -> Complex64 {
        let z_inv = Complex64::from_polar(1.0, -2.0 * PI * f / self.fs);
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(z_inv))
    }

    pub fn magnitude_db(&self, f: f64) -> f64 {
        20.0 * self.response(f).norm().log10()
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.sections.iter().flat_map(|s| s.poles()).collect()
    }

    pub fn is_stable(&self) -> bool {
        self.poles().iter().all(|p| p.norm() < 1.0)
    }
}

/// Digital Butterworth bandpass of the given prototype order, from the
/// analog prototype by lowpass-to-bandpass transform and bilinear mapping
/// with the band edges prewarped. Yields `order` sections (filter order
/// `2 * order`), each with zeros at z = 1 and z = -1.
pub fn design_bandpass(f_lo: f64, f_hi: f64, fs: f64, order: usize) -> Result<BandpassFilter> {
    if !(fs > 0.0 && f_lo > 0.0 && f_lo < f_hi && f_hi < fs / 2.0) {
        return Err(Error::InvalidParameter(format!(
            "band edges must satisfy 0 < {f_lo} < {f_hi} < fs/2 = {}",
            fs / 2.0
        )));
    }
    if order == 0 {
        return Err(Error::InvalidParameter(
            "filter order must be at least 1".into(),
        ));
    }
    let k = 2.0 * fs;
    let w_lo = k * (PI * f_lo / fs).tan();
    let w_hi = k * (PI * f_hi / fs).tan();
    let bw = w_hi - w_lo;
    let w0_sq = w_lo * w_hi;

    // Analog prototype poles in the upper half plane (plus the real pole for
    // odd orders); conjugates are implied.
    let mut analog_pairs: Vec<(Complex64, Complex64)> = Vec::with_capacity(order);
    for m in 0..order.div_ceil(2) {
        let theta = PI * (2 * m + order + 1) as f64 / (2 * order) as f64;
        let p = Complex64::from_polar(1.0, theta);
        // roots of s^2 - p*bw*s + w0^2
        let pb = p * bw;
        let disc = (pb * pb - 4.0 * w0_sq).sqrt();
        let r1 = (pb + disc) / 2.0;
        let r2 = (pb - disc) / 2.0;
        if p.im.abs() < 1e-12 {
            analog_pairs.push((r1, r2));
        } else {
            analog_pairs.push((r1, r1.conj()));
            analog_pairs.push((r2, r2.conj()));
        }
    }

    let bilinear = |s: Complex64| (k + s) / (k - s);
    let mut sections: Vec<Section> = analog_pairs
        .into_iter()
        .map(|(s1, s2)| {
            let (z1, z2) = (bilinear(s1), bilinear(s2));
            Section {
                b: [1.0, 0.0, -1.0],
                a: [1.0, -(z1 + z2).re, (z1 * z2).re],
            }
        })
        .collect();

    let mut filt = BandpassFilter {
        sections: Vec::new(),
        order,
        f_lo,
        f_hi,
        fs,
    };
    // Unit gain at the digital image of the analog centre frequency.
    let f_centre = fs / PI * (w0_sq.sqrt() / k).atan();
    filt.sections = sections.clone();
    let gain = 1.0 / filt.response(f_centre).norm();
    for v in sections[0].b.iter_mut() {
        *v *= gain;
    }
    filt.sections = sections;
    Ok(filt)
}

/// Causal filtering through the section cascade from zero state
/// (transposed direct form II).
pub fn filter_contour(x: &[f64], f: &BandpassFilter) -> Result<Vec<f64>> {
    let min_len = 3 * 2 * f.order;
    if x.len() < min_len {
        return Err(Error::TooShort(format!(
            "filter input has {} samples, need at least {min_len}",
            x.len()
        )));
    }
    let mut y = x.to_vec();
    for s in &f.sections {
        let (mut z1, mut z2) = (0.0, 0.0);
        for v in y.iter_mut() {
            let input = *v;
            let out = s.b[0] * input + z1;
            z1 = s.b[1] * input - s.a[1] * out + z2;
            z2 = s.b[2] * input - s.a[2] * out;
            *v = out;
        }
    }
    Ok(y)
}
