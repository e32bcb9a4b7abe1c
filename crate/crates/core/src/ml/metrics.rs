use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }

    /// Records one prediction; +1 is the positive (ALS) class.
    pub fn add(&mut self, truth: i8, predicted: i8) {
        match (truth > 0, predicted > 0) {
            (true, true) => self.tp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
        }
    }

    pub fn metrics(&self) -> Result<Metrics> {
        confusion_metrics(self.tp, self.tn, self.fp, self.fn_)
    }
}

/// Rates in percent. A rate whose denominator is zero is `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub acc: f64,
    pub sens: Option<f64>,
    pub spec: Option<f64>,
    pub r_avg: Option<f64>,
}

fn pct(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| 100.0 * num as f64 / den as f64)
}

pub fn confusion_metrics(tp: usize, tn: usize, fp: usize, fn_: usize) -> Result<Metrics> {
    let total = tp + tn + fp + fn_;
    if total == 0 {
        return Err(Error::InvalidParameter("empty confusion matrix".into()));
    }
    let sens = pct(tp, tp + fn_);
    let spec = pct(tn, tn + fp);
    Ok(Metrics {
        acc: 100.0 * (tp + tn) as f64 / total as f64,
        sens,
        spec,
        r_avg: sens.zip(spec).map(|(a, b)| (a + b) / 2.0),
    })
}
