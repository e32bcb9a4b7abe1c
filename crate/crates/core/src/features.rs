//! Per-recording feature vectors, datasets and their CSV form, age
//! correction, and per-group summary statistics.

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::periods::{segment_wm_pc, SegmentationConfig};
use crate::perturbation::{PerturbationReport, RapNormalization};
use crate::pitch::{estimate_f0, F0Config};
use crate::signal::Waveform;
use crate::vibrato::{compute_pvi, PviConfig};

/// Feature order used everywhere: extraction, CSV columns, classification.
pub const FEATURE_NAMES: [&str; 8] = ["J1", "J3", "J5", "S1", "S3", "S5", "S11", "PVI"];

const META_COLUMNS: [&str; 4] = ["id", "label", "age", "sex"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "ALS")]
    Als,
    #[serde(rename = "HC")]
    Hc,
}

impl Label {
    /// +1 for ALS (the positive class), -1 for healthy controls.
    pub fn sign(self) -> i8 {
        match self {
            Label::Als => 1,
            Label::Hc => -1,
        }
    }

    pub fn from_sign(s: i8) -> Self {
        if s > 0 {
            Label::Als
        } else {
            Label::Hc
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Als => "ALS",
            Label::Hc => "HC",
        })
    }
}

impl FromStr for Label {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "ALS" => Ok(Label::Als),
            "HC" => Ok(Label::Hc),
            other => Err(Error::InvalidParameter(format!(
                "unknown label {other:?}; expected ALS or HC"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sex {
    M,
    F,
}

impl fmt::Display for Sex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sex::M => "M",
            Sex::F => "F",
        })
    }
}

impl FromStr for Sex {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "M" => Ok(Sex::M),
            "F" => Ok(Sex::F),
            other => Err(Error::InvalidParameter(format!(
                "unknown sex {other:?}; expected M or F"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub id: String,
    pub label: Option<Label>,
    pub age: Option<f64>,
    pub sex: Option<Sex>,
    pub features: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    #[default]
    Raw,
    AgeCorrected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    feature_names: Vec<String>,
    samples: Vec<FeatureVector>,
    pub provenance: Provenance,
}

impl Dataset {
    /// Validates unique ids, dimensionality and finiteness.
    pub fn new(feature_names: Vec<String>, samples: Vec<FeatureVector>) -> Result<Self> {
        if feature_names.is_empty() {
            return Err(Error::Dataset("no feature columns".into()));
        }
        let mut seen = HashSet::new();
        for s in &samples {
            if !seen.insert(s.id.as_str()) {
                return Err(Error::Dataset(format!("duplicate id {:?}", s.id)));
            }
            if s.features.len() != feature_names.len() {
                return Err(Error::DimensionMismatch {
                    expected: feature_names.len(),
                    got: s.features.len(),
                });
            }
            if let Some(v) = s.features.iter().find(|v| !v.is_finite()) {
                return Err(Error::Dataset(format!(
                    "sample {:?} has non-finite value {v}",
                    s.id
                )));
            }
        }
        Ok(Self {
            feature_names,
            samples,
            provenance: Provenance::Raw,
        })
    }

    /// Dataset with the standard eight feature columns.
    pub fn standard(samples: Vec<FeatureVector>) -> Result<Self> {
        Self::new(
            FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            samples,
        )
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn samples(&self) -> &[FeatureVector] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names
            .iter()
            .position(|n| n.eq_ignore_ascii_case(name))
    }

    /// Parses a comma-separated list of feature names into column indices.
    pub fn parse_subset(&self, spec: &str) -> Result<Vec<usize>> {
        let idx: Vec<usize> = spec
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|name| {
                self.feature_index(name)
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown feature {name:?}")))
            })
            .collect::<Result<_>>()?;
        if idx.is_empty() {
            return Err(Error::InvalidParameter("empty feature subset".into()));
        }
        Ok(idx)
    }

    /// (ALS count, HC count); unlabelled samples are not counted.
    pub fn class_counts(&self) -> (usize, usize) {
        self.samples.iter().fold((0, 0), |(p, n), s| match s.label {
            Some(Label::Als) => (p + 1, n),
            Some(Label::Hc) => (p, n + 1),
            None => (p, n),
        })
    }

    /// Feature rows restricted to `subset` and their ±1 labels. Every sample
    /// must be labelled.
    pub fn design(&self, subset: &[usize]) -> Result<(Vec<Vec<f64>>, Vec<i8>)> {
        if let Some(&bad) = subset.iter().find(|&&j| j >= self.dim()) {
            return Err(Error::InvalidParameter(format!(
                "feature index {bad} out of range"
            )));
        }
        let mut x = Vec::with_capacity(self.len());
        let mut y = Vec::with_capacity(self.len());
        for s in &self.samples {
            let label = s
                .label
                .ok_or_else(|| Error::Dataset(format!("sample {:?} has no label", s.id)))?;
            x.push(subset.iter().map(|&j| s.features[j]).collect());
            y.push(label.sign());
        }
        Ok((x, y))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExtractConfig {
    pub f0: F0Config,
    pub segmentation: SegmentationConfig,
    pub pvi: PviConfig,
    pub rap: RapNormalization,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    /// Values in [`FEATURE_NAMES`] order.
    pub features: [f64; 8],
    pub n_cycles: usize,
    pub mean_f0: f64,
}

/// f0 tracking, phase-constrained segmentation, perturbation measures and
/// PVI for one recording.
pub fn extract_features(w: &Waveform, cfg: &ExtractConfig) -> Result<Extraction> {
    let contour = estimate_f0(w, &cfg.f0)?;
    let pvi = compute_pvi(&contour, &cfg.pvi)?;
    let seg = segment_wm_pc(w, &contour, &cfg.segmentation)?;
    let p = PerturbationReport::compute(&seg.periods, &seg.amplitudes, cfg.rap)?;
    let [j1, j3, j5, s1, s3, s5, s11] = p.as_array();
    let voiced = contour.voiced_count().max(1) as f64;
    Ok(Extraction {
        features: [j1, j3, j5, s1, s3, s5, s11, pvi.pvi],
        n_cycles: seg.n_cycles(),
        mean_f0: contour.voiced().sum::<f64>() / voiced,
    })
}

/// Slope of the least-squares line through `(x, y)`.
fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Removes the linear age trend fitted on healthy controls from every
/// feature: `value - beta * (age - mean HC age)`.
pub fn age_correct(d: &Dataset) -> Result<Dataset> {
    for s in &d.samples {
        if s.age.is_none() {
            return Err(Error::Dataset(format!("sample {:?} has no age", s.id)));
        }
    }
    let hc: Vec<&FeatureVector> = d
        .samples
        .iter()
        .filter(|s| s.label == Some(Label::Hc))
        .collect();
    if hc.len() < 2 {
        return Err(Error::ClassTooSmall(
            "HC",
            format!("{} samples, need 2 for age regression", hc.len()),
        ));
    }
    let ages: Vec<f64> = hc.iter().map(|s| s.age.expect("checked")).collect();
    let mean_age = ages.iter().sum::<f64>() / ages.len() as f64;
    if ages.iter().all(|&a| a == ages[0]) {
        return Err(Error::Dataset(
            "all healthy controls have the same age".into(),
        ));
    }
    let slopes: Vec<f64> = (0..d.dim())
        .map(|j| {
            let y: Vec<f64> = hc.iter().map(|s| s.features[j]).collect();
            ols_slope(&ages, &y)
        })
        .collect();
    let samples = d
        .samples
        .iter()
        .map(|s| {
            let shift = s.age.expect("checked") - mean_age;
            let mut out = s.clone();
            for (v, b) in out.features.iter_mut().zip(&slopes) {
                *v -= b * shift;
            }
            out
        })
        .collect();
    let mut out = Dataset::new(d.feature_names.clone(), samples)?;
    out.provenance = Provenance::AgeCorrected;
    Ok(out)
}

/// Shortest decimal form of `v` rounded to 12 significant digits.
fn fmt12(v: f64) -> String {
    let rounded: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    rounded.to_string()
}

pub fn write_csv<W: Write>(d: &Dataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<&str> = META_COLUMNS
        .iter()
        .copied()
        .chain(d.feature_names.iter().map(String::as_str))
        .collect();
    w.write_record(&header)?;
    for s in &d.samples {
        let mut rec = vec![
            s.id.clone(),
            s.label.map(|l| l.to_string()).unwrap_or_default(),
            s.age.map(fmt12).unwrap_or_default(),
            s.sex.map(|x| x.to_string()).unwrap_or_default(),
        ];
        rec.extend(s.features.iter().map(|&v| fmt12(v)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(d: &Dataset, path: &Path) -> Result<()> {
    write_csv(d, std::fs::File::create(path)?)
}

pub fn read_csv<R: Read>(input: R) -> Result<Dataset> {
    let mut r = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let header = r.headers()?.clone();
    if header.len() <= META_COLUMNS.len()
        || header
            .iter()
            .zip(META_COLUMNS)
            .any(|(h, m)| !h.trim().eq_ignore_ascii_case(m))
    {
        return Err(Error::Parse {
            row: 0,
            message: format!(
                "header must start with {} followed by feature columns",
                META_COLUMNS.join(",")
            ),
        });
    }
    let names: Vec<String> = header
        .iter()
        .skip(META_COLUMNS.len())
        .map(|h| h.trim().to_string())
        .collect();
    let mut samples = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        let err = |message: String| Error::Parse { row, message };
        if rec.len() != header.len() {
            return Err(err(format!(
                "expected {} columns ({} features), found {}",
                header.len(),
                names.len(),
                rec.len()
            )));
        }
        let opt = |s: &str| {
            let t = s.trim();
            (!t.is_empty()).then_some(t.to_string())
        };
        let id = opt(&rec[0]).ok_or_else(|| err("empty id".into()))?;
        let label = opt(&rec[1])
            .map(|s| s.parse::<Label>())
            .transpose()
            .map_err(|e| err(e.to_string()))?;
        let age = opt(&rec[2])
            .map(|s| s.parse::<f64>())
            .transpose()
            .map_err(|e| err(format!("age: {e}")))?;
        let sex = opt(&rec[3])
            .map(|s| s.parse::<Sex>())
            .transpose()
            .map_err(|e| err(e.to_string()))?;
        let features = rec
            .iter()
            .skip(META_COLUMNS.len())
            .zip(&names)
            .map(|(v, name)| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| err(format!("{name}: {e}")))
                    .and_then(|x| {
                        if x.is_finite() {
                            Ok(x)
                        } else {
                            Err(err(format!("{name}: not finite")))
                        }
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        samples.push(FeatureVector {
            id,
            label,
            age,
            sex,
            features,
        });
    }
    Dataset::new(names, samples)
}

pub fn read_csv_file(path: &Path) -> Result<Dataset> {
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    read_csv(std::fs::File::open(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
    pub bandwidth: f64,
    /// Gaussian KDE evaluated on [`GroupStats::grid`].
    pub density: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub feature: String,
    pub grid: Vec<f64>,
    pub hc: GroupSummary,
    pub als: GroupSummary,
}

pub const KDE_POINTS: usize = 200;

/// Type-7 (linear interpolation) quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn silverman(sd: f64, iqr: f64, n: usize) -> f64 {
    let spread = match (sd, iqr / 1.34) {
        (s, q) if q > 0.0 && q < s => q,
        (s, _) => s,
    };
    0.9 * spread * (n as f64).powf(-0.2)
}

struct Moments {
    sorted: Vec<f64>,
    mean: f64,
    sd: f64,
}

fn moments(values: &[f64]) -> Moments {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Moments { sorted, mean, sd }
}

fn kde(values: &[f64], h: f64, grid: &[f64]) -> Vec<f64> {
    let norm = 1.0 / (values.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    grid.iter()
        .map(|&g| {
            values
                .iter()
                .map(|&v| {
                    let z = (g - v) / h;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
                * norm
        })
        .collect()
}

/// Summary statistics and kernel density estimates of one feature per group.
pub fn group_stats(d: &Dataset, feature: usize) -> Result<GroupStats> {
    if feature >= d.dim() {
        return Err(Error::InvalidParameter(format!(
            "feature index {feature} out of range"
        )));
    }
    let pick = |l: Label| -> Vec<f64> {
        d.samples
            .iter()
            .filter(|s| s.label == Some(l))
            .map(|s| s.features[feature])
            .collect()
    };
    let (hc, als) = (pick(Label::Hc), pick(Label::Als));
    if hc.is_empty() {
        return Err(Error::ClassTooSmall("HC", "group is empty".into()));
    }
    if als.is_empty() {
        return Err(Error::ClassTooSmall("ALS", "group is empty".into()));
    }
    let (mh, ma) = (moments(&hc), moments(&als));
    let lo = mh.sorted[0].min(ma.sorted[0]);
    let hi = mh.sorted[hc.len() - 1].max(ma.sorted[als.len() - 1]);
    // Degenerate groups fall back to a bandwidth tied to the pooled range
    // (or to the value's magnitude when every value is identical).
    let fallback = if hi > lo {
        0.05 * (hi - lo)
    } else {
        1e-3 * lo.abs().max(1.0)
    };
    let bw = |m: &Moments, n: usize| {
        let iqr = quantile(&m.sorted, 0.75) - quantile(&m.sorted, 0.25);
        let h = silverman(m.sd, iqr, n);
        if h > 0.0 {
            h
        } else {
            fallback
        }
    };
    let (hh, ha) = (bw(&mh, hc.len()), bw(&ma, als.len()));
    let pad = 3.0 * hh.max(ha);
    let (g0, g1) = (lo - pad, hi + pad);
    let grid: Vec<f64> = (0..KDE_POINTS)
        .map(|i| g0 + (g1 - g0) * i as f64 / (KDE_POINTS - 1) as f64)
        .collect();
    let summary = |m: &Moments, values: &[f64], h: f64| GroupSummary {
        n: values.len(),
        mean: m.mean,
        sd: m.sd,
        median: quantile(&m.sorted, 0.5),
        q1: quantile(&m.sorted, 0.25),
        q3: quantile(&m.sorted, 0.75),
        min: m.sorted[0],
        max: m.sorted[values.len() - 1],
        bandwidth: h,
        density: kde(values, h, &grid),
    };
    Ok(GroupStats {
        feature: d.feature_names[feature].clone(),
        hc: summary(&mh, &hc, hh),
        als: summary(&ma, &als, ha),
        grid,
    })
}
