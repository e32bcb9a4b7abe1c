//! Synthetic feature cohorts shaped like a small clinical study: 39 healthy
//! controls and 15 ALS speakers with matching age distributions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{Dataset, FeatureVector, Label, Sex, FEATURE_NAMES};

/// Healthy-control feature means in [`FEATURE_NAMES`] order; jitter and
/// shimmer in percent, PVI dimensionless.
pub const HC_MEANS: [f64; 8] = [0.45, 0.25, 0.27, 3.2, 1.7, 1.9, 2.6, 0.012];

/// Coefficient of variation of every feature.
pub const FEATURE_CV: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgeModel {
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSpec {
    pub n_healthy: usize,
    pub n_als: usize,
    pub hc_age: AgeModel,
    pub als_age: AgeModel,
    /// Shift of the ALS mean on informative features, in feature SDs.
    pub separation: f64,
    /// Feature columns that carry the class difference.
    pub informative: Vec<usize>,
}

impl Default for CohortSpec {
    fn default() -> Self {
        Self {
            n_healthy: 39,
            n_als: 15,
            hc_age: AgeModel {
                mean: 41.9,
                sd: 16.3,
                min: 18.0,
                max: 82.0,
            },
            als_age: AgeModel {
                mean: 57.7,
                sd: 9.0,
                min: 40.0,
                max: 70.0,
            },
            separation: 1.0,
            // S1, S3, S11, PVI
            informative: vec![3, 4, 6, 7],
        }
    }
}

impl CohortSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_healthy == 0 || self.n_als == 0 {
            return Err(Error::InvalidParameter(
                "both groups need at least one speaker".into(),
            ));
        }
        for a in [&self.hc_age, &self.als_age] {
            if !(a.sd > 0.0 && a.min <= a.max) {
                return Err(Error::InvalidParameter(format!("invalid age model {a:?}")));
            }
        }
        if !self.separation.is_finite() {
            return Err(Error::InvalidParameter("separation must be finite".into()));
        }
        if let Some(&j) = self.informative.iter().find(|&&j| j >= FEATURE_NAMES.len()) {
            return Err(Error::InvalidParameter(format!(
                "informative feature index {j} out of range"
            )));
        }
        Ok(())
    }
}

/// Draws `n` ages and matches their sample mean and SD to the model,
/// alternating standardization with clipping to the allowed range.
fn draw_ages(model: &AgeModel, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let dist = Normal::new(model.mean, model.sd).expect("validated");
    let mut ages: Vec<f64> = (0..n).map(|_| dist.sample(rng)).collect();
    if n > 1 {
        for _ in 0..50 {
            let m = ages.iter().sum::<f64>() / n as f64;
            let sd = (ages.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
            if sd == 0.0 {
                break;
            }
            for a in ages.iter_mut() {
                *a = (model.mean + (*a - m) / sd * model.sd).clamp(model.min, model.max);
            }
        }
    }
    ages.into_iter()
        .map(|a| a.clamp(model.min, model.max).round())
        .collect()
}

/// Draws a cohort with independent Gaussian features. ALS speakers are
/// shifted by `separation` SDs on the informative features.
pub fn make_cohort(spec: &CohortSpec, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups = [
        (Label::Hc, spec.n_healthy, &spec.hc_age),
        (Label::Als, spec.n_als, &spec.als_age),
    ];
    let mut samples = Vec::with_capacity(spec.n_healthy + spec.n_als);
    for (label, n, ages) in groups {
        let drawn = draw_ages(ages, n, &mut rng);
        for (i, age) in drawn.into_iter().enumerate() {
            let sex = if rng.gen_bool(0.5) { Sex::F } else { Sex::M };
            let features = HC_MEANS
                .iter()
                .enumerate()
                .map(|(j, &m)| {
                    let sd = m * FEATURE_CV;
                    let shift = if label == Label::Als && spec.informative.contains(&j) {
                        spec.separation * sd
                    } else {
                        0.0
                    };
                    let v = Normal::new(m + shift, sd)
                        .expect("positive sd")
                        .sample(&mut rng);
                    v.max(m * 1e-3)
                })
                .collect();
            samples.push(FeatureVector {
                id: format!("{label}{:02}", i + 1),
                label: Some(label),
                age: Some(age),
                sex: Some(sex),
                features,
            });
        }
    }
    Dataset::standard(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_shape() {
        let d = make_cohort(&CohortSpec::default(), 1).unwrap();
        assert_eq!(d.len(), 54);
        assert_eq!(d.class_counts(), (15, 39));
        assert_eq!(d.dim(), 8);
    }

    #[test]
    fn reproducible() {
        let a = make_cohort(&CohortSpec::default(), 9).unwrap();
        assert_eq!(a, make_cohort(&CohortSpec::default(), 9).unwrap());
        assert_ne!(a, make_cohort(&CohortSpec::default(), 10).unwrap());
    }

    #[test]
    fn ages_follow_spec() {
        let spec = CohortSpec::default();
        for seed in 0..50 {
            let d = make_cohort(&spec, seed).unwrap();
            for (label, model) in [(Label::Hc, &spec.hc_age), (Label::Als, &spec.als_age)] {
                let ages: Vec<f64> = d
                    .samples()
                    .iter()
                    .filter(|s| s.label == Some(label))
                    .map(|s| s.age.unwrap())
                    .collect();
                let n = ages.len() as f64;
                let mean = ages.iter().sum::<f64>() / n;
                let sd = (ages.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
                assert!(
                    (mean - model.mean).abs() <= 0.15 * model.mean,
                    "{label}: mean {mean}"
                );
                assert!((sd - model.sd).abs() <= 0.15 * model.sd, "{label}: sd {sd}");
                assert!(ages.iter().all(|&a| a >= model.min && a <= model.max));
            }
        }
    }

    #[test]
    fn invalid_specs() {
        let bad = CohortSpec {
            n_als: 0,
            ..Default::default()
        };
        assert!(make_cohort(&bad, 0).is_err());
        let bad = CohortSpec {
            informative: vec![8],
            ..Default::default()
        };
        assert!(make_cohort(&bad, 0).is_err());
    }
}
