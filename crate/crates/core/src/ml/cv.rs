//! Repeated k-fold cross-validation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::knn::{knn_train, DEFAULT_K};
use super::lda::{lda_train, LdaBias};
use super::metrics::Confusion;
use crate::error::{Error, Result};
use crate::features::Dataset;
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lda,
    Knn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub k_neighbors: usize,
    pub lda_bias: LdaBias,
}

impl ModelSpec {
    pub fn lda() -> Self {
        Self {
            kind: ModelKind::Lda,
            k_neighbors: DEFAULT_K,
            lda_bias: LdaBias::default(),
        }
    }

    pub fn knn() -> Self {
        Self {
            kind: ModelKind::Knn,
            ..Self::lda()
        }
    }

    /// Trains on `(x, y)` and predicts every row of `test`.
    pub fn fit_predict(&self, x: &[Vec<f64>], y: &[i8], test: &[&[f64]]) -> Result<Vec<i8>> {
        match self.kind {
            ModelKind::Lda => {
                let m = lda_train(x, y, self.lda_bias)?;
                test.iter().map(|q| m.predict(q)).collect()
            }
            ModelKind::Knn => {
                let m = knn_train(x, y, self.k_neighbors)?;
                test.iter().map(|q| m.predict(q)).collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            folds: 7,
            repetitions: 40,
            seed: 0,
            stratified: true,
        }
    }
}

/// Fold index for every sample. The shuffled order (positives first, then
/// negatives, when stratified) is dealt round-robin, so fold sizes differ by
/// at most one and each class is spread as evenly as possible.
pub fn fold_assignment(
    y: &[i8],
    folds: usize,
    stratified: bool,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let order: Vec<usize> = if stratified {
        let mut pos: Vec<usize> = (0..y.len()).filter(|&i| y[i] > 0).collect();
        let mut neg: Vec<usize> = (0..y.len()).filter(|&i| y[i] <= 0).collect();
        pos.shuffle(rng);
        neg.shuffle(rng);
        pos.into_iter().chain(neg).collect()
    } else {
        let mut all: Vec<usize> = (0..y.len()).collect();
        all.shuffle(rng);
        all
    };
    let mut fold = vec![0; y.len()];
    for (p, &i) in order.iter().enumerate() {
        fold[i] = p % folds;
    }
    fold
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
    /// Repetitions contributing to the statistic.
    pub n: usize,
}

impl MeanSd {
    fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Self {
            mean,
            sd,
            n: values.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub confusions: Vec<Confusion>,
    pub acc: MeanSd,
    pub sens: Option<MeanSd>,
    pub spec: Option<MeanSd>,
    /// Mean of the mean sensitivity and mean specificity.
    pub r_avg: Option<f64>,
    /// Repetitions whose sensitivity or specificity was undefined.
    pub undefined_sens: usize,
    pub undefined_spec: usize,
}

impl EvalReport {
    pub fn from_confusions(confusions: Vec<Confusion>) -> Result<Self> {
        let mut acc = Vec::new();
        let mut sens = Vec::new();
        let mut spec = Vec::new();
        for c in &confusions {
            let m = c.metrics()?;
            acc.push(m.acc);
            sens.extend(m.sens);
            spec.extend(m.spec);
        }
        let acc =
            MeanSd::of(&acc).ok_or_else(|| Error::InvalidParameter("no repetitions".into()))?;
        let (sens_s, spec_s) = (MeanSd::of(&sens), MeanSd::of(&spec));
        Ok(Self {
            r_avg: sens_s.zip(spec_s).map(|(a, b)| (a.mean + b.mean) / 2.0),
            undefined_sens: confusions.len() - sens.len(),
            undefined_spec: confusions.len() - spec.len(),
            acc,
            sens: sens_s,
            spec: spec_s,
            confusions,
        })
    }
}

fn check_config(y: &[i8], cfg: &CvConfig) -> Result<()> {
    if cfg.folds < 2 || cfg.folds > y.len() {
        return Err(Error::InvalidParameter(format!(
            "folds must lie in [2, {}], got {}",
            y.len(),
            cfg.folds
        )));
    }
    if cfg.repetitions == 0 {
        return Err(Error::InvalidParameter(
            "at least one repetition is required".into(),
        ));
    }
    if cfg.stratified {
        let pos = y.iter().filter(|&&v| v > 0).count();
        let neg = y.len() - pos;
        if pos < cfg.folds {
            return Err(Error::ClassTooSmall(
                "ALS",
                format!("{pos} samples for {} stratified folds", cfg.folds),
            ));
        }
        if neg < cfg.folds {
            return Err(Error::ClassTooSmall(
                "HC",
                format!("{neg} samples for {} stratified folds", cfg.folds),
            ));
        }
    }
    Ok(())
}

/// One repetition: shuffle with `seed`, train on k-1 folds, test on the rest.
pub fn cv_repetition(
    x: &[Vec<f64>],
    y: &[i8],
    model: &ModelSpec,
    folds: usize,
    stratified: bool,
    seed: u64,
) -> Result<Confusion> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fold = fold_assignment(y, folds, stratified, &mut rng);
    let mut conf = Confusion::default();
    for f in 0..folds {
        let (mut tx, mut ty, mut qx, mut qy) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for i in 0..y.len() {
            if fold[i] == f {
                qx.push(x[i].as_slice());
                qy.push(y[i]);
            } else {
                tx.push(x[i].clone());
                ty.push(y[i]);
            }
        }
        for (truth, pred) in qy.iter().zip(model.fit_predict(&tx, &ty, &qx)?) {
            conf.add(*truth, pred);
        }
    }
    Ok(conf)
}

/// Cross-validates on a design matrix; repetition `r` uses `seed + r`.
pub fn cross_validate_xy(
    x: &[Vec<f64>],
    y: &[i8],
    model: &ModelSpec,
    cfg: &CvConfig,
) -> Result<EvalReport> {
    check_config(y, cfg)?;
    let confusions = par::try_map_indexed(cfg.repetitions, |r| {
        cv_repetition(
            x,
            y,
            model,
            cfg.folds,
            cfg.stratified,
            cfg.seed.wrapping_add(r as u64),
        )
    })?;
    EvalReport::from_confusions(confusions)
}

pub fn cross_validate(
    d: &Dataset,
    model: &ModelSpec,
    subset: &[usize],
    cfg: &CvConfig,
) -> Result<EvalReport> {
    if subset.is_empty() {
        return Err(Error::InvalidParameter("empty feature subset".into()));
    }
    let (x, y) = d.design(subset)?;
    cross_validate_xy(&x, &y, model, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(pos: usize, neg: usize) -> Vec<i8> {
        std::iter::repeat(1)
            .take(pos)
            .chain(std::iter::repeat(-1).take(neg))
            .collect()
    }

    #[test]
    fn fold_sizes_54_by_7() {
        let y = labels(15, 39);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for stratified in [true, false] {
            let f = fold_assignment(&y, 7, stratified, &mut rng);
            let mut sizes = vec![0; 7];
            for &k in &f {
                sizes[k] += 1;
            }
            sizes.sort_unstable_by(|a, b| b.cmp(a));
            assert_eq!(sizes, vec![8, 8, 8, 8, 8, 7, 7]);
        }
    }

    #[test]
    fn stratified_folds_keep_class_ratio() {
        let y = labels(15, 39);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = fold_assignment(&y, 7, true, &mut rng);
        for k in 0..7 {
            let pos = (0..54).filter(|&i| f[i] == k && y[i] > 0).count();
            assert!((2..=3).contains(&pos), "fold {k}: {pos}");
        }
    }

    fn gaussian_classes(sep: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<i8>) {
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = labels(15, 39);
        let x = y
            .iter()
            .map(|&l| {
                let shift = if l > 0 { sep } else { 0.0 };
                (0..2)
                    .map(|j| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        z + if j == 0 { shift } else { 0.0 }
                    })
                    .collect()
            })
            .collect();
        (x, y)
    }

    #[test]
    fn separable_classes_are_learned() {
        let (x, y) = gaussian_classes(6.0, 4);
        for model in [ModelSpec::lda(), ModelSpec::knn()] {
            let r = cross_validate_xy(
                &x,
                &y,
                &model,
                &CvConfig {
                    seed: 1,
                    ..Default::default()
                },
            )
            .unwrap();
            assert!(r.acc.mean >= 99.0, "{:?}: {}", model.kind, r.acc.mean);
            assert_eq!(r.confusions.len(), 40);
            assert!(r.confusions.iter().all(|c| c.total() == 54));
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let (x, y) = gaussian_classes(1.0, 8);
        let cfg = CvConfig {
            seed: 77,
            repetitions: 10,
            ..Default::default()
        };
        let a = cross_validate_xy(&x, &y, &ModelSpec::lda(), &cfg).unwrap();
        let b = cross_validate_xy(&x, &y, &ModelSpec::lda(), &cfg).unwrap();
        assert_eq!(a, b);
        let single = cv_repetition(&x, &y, &ModelSpec::lda(), 7, true, 80).unwrap();
        assert_eq!(a.confusions[3], single);
    }

    #[test]
    fn r_avg_from_mean_rates() {
        let r = EvalReport::from_confusions(vec![
            Confusion {
                tp: 10,
                tn: 30,
                fp: 9,
                fn_: 5,
            },
            Confusion {
                tp: 14,
                tn: 35,
                fp: 4,
                fn_: 1,
            },
        ])
        .unwrap();
        let sens = r.sens.unwrap().mean;
        let spec = r.spec.unwrap().mean;
        assert!((r.r_avg.unwrap() - (sens + spec) / 2.0).abs() < 1e-12);
        assert!((r.acc.mean - (40.0 / 54.0 + 49.0 / 54.0) * 50.0).abs() < 1e-12);
        assert!((r.acc.sd - (9.0f64 / 54.0 * 100.0) / 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn config_errors() {
        let (x, y) = gaussian_classes(1.0, 2);
        let bad = |cfg: CvConfig| cross_validate_xy(&x, &y, &ModelSpec::lda(), &cfg).is_err();
        assert!(bad(CvConfig {
            folds: 1,
            ..Default::default()
        }));
        assert!(bad(CvConfig {
            folds: 55,
            ..Default::default()
        }));
        assert!(bad(CvConfig {
            folds: 16,
            ..Default::default()
        }));
        assert!(bad(CvConfig {
            repetitions: 0,
            ..Default::default()
        }));
        assert!(!bad(CvConfig {
            folds: 16,
            stratified: false,
            repetitions: 2,
            ..Default::default()
        }));
    }
}
