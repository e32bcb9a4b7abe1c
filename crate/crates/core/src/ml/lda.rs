//! Fisher linear discriminant for two classes labelled ±1.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::linalg::{mean, scatter, spd_factor};
use crate::error::{Error, Result};

/// Placement of the decision threshold along the Fisher direction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum LdaBias {
    /// Midpoint of the projected class means shifted by the log prior ratio,
    /// with `w` scaled to the pooled covariance. This is the Bayes threshold
    /// for Gaussian classes with shared covariance.
    #[default]
    Prior,
    /// Midpoint of the projected class means.
    Midpoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub w: Vec<f64>,
    pub b: f64,
    /// Whether the within-class scatter needed a ridge to be inverted.
    pub ridge: bool,
}

impl LdaModel {
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.w.len() {
            return Err(Error::DimensionMismatch {
                expected: self.w.len(),
                got: x.len(),
            });
        }
        Ok(self.w.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.b)
    }

    /// Sign of the score, with 0 mapped to +1.
    pub fn predict(&self, x: &[f64]) -> Result<i8> {
        Ok(if self.score(x)? >= 0.0 { 1 } else { -1 })
    }
}

pub(crate) fn split_classes<'a>(
    x: &'a [Vec<f64>],
    y: &[i8],
) -> Result<(Vec<&'a [f64]>, Vec<&'a [f64]>)> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let d = x.first().map_or(0, Vec::len);
    if d == 0 {
        return Err(Error::InvalidParameter("no features".into()));
    }
    if let Some(r) = x.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: r.len(),
        });
    }
    let pos: Vec<&[f64]> = x
        .iter()
        .zip(y)
        .filter(|(_, &l)| l > 0)
        .map(|(r, _)| r.as_slice())
        .collect();
    let neg: Vec<&[f64]> = x
        .iter()
        .zip(y)
        .filter(|(_, &l)| l <= 0)
        .map(|(r, _)| r.as_slice())
        .collect();
    if pos.is_empty() {
        return Err(Error::ClassTooSmall(
            "ALS",
            "no positive training samples".into(),
        ));
    }
    if neg.is_empty() {
        return Err(Error::ClassTooSmall(
            "HC",
            "no negative training samples".into(),
        ));
    }
    Ok((pos, neg))
}

/// Trains `w = (n - 2) * S_W^-1 (mu+ - mu-)` with `S_W` the summed
/// within-class scatter.
pub fn lda_train(x: &[Vec<f64>], y: &[i8], bias: LdaBias) -> Result<LdaModel> {
    let (pos, neg) = split_classes(x, y)?;
    let n = x.len();
    if n < 3 {
        return Err(Error::NotEnoughValues {
            required: 3,
            got: n,
        });
    }
    let (mp, mn) = (mean(&pos), mean(&neg));
    let sw = scatter(&pos, &mp) + scatter(&neg, &mn);
    let (chol, ridge) = spd_factor(&sw)?;
    let w: DVector<f64> = chol.solve(&(&mp - &mn)) * (n - 2) as f64;
    if w.iter().all(|&v| v == 0.0) {
        return Err(Error::Dataset(
            "class means coincide; no discriminant direction".into(),
        ));
    }
    let centre = (&mp + &mn) * 0.5;
    let mut b = -w.dot(&centre);
    if bias == LdaBias::Prior {
        b += (pos.len() as f64 / neg.len() as f64).ln();
    }
    Ok(LdaModel {
        w: w.iter().copied().collect(),
        b,
        ridge,
    })
}

pub fn lda_predict(m: &LdaModel, x: &[f64]) -> Result<i8> {
    m.predict(x)
}
