//! Exhaustive feature-subset search.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::cv::{cross_validate_xy, CvConfig, EvalReport, ModelSpec};
use crate::error::{Error, Result};
use crate::features::Dataset;
use crate::par;

/// Largest feature count accepted by [`subset_search`].
pub const MAX_SEARCH_DIM: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedSubset {
    pub mask: u32,
    pub features: Vec<usize>,
    pub names: Vec<String>,
    pub report: EvalReport,
}

/// Columns selected by the bits of `mask`, in increasing order.
pub fn mask_to_subset(mask: u32) -> Vec<usize> {
    (0..32).filter(|b| mask >> b & 1 == 1).collect()
}

/// Ranking order: higher R_avg, then higher accuracy, then fewer features,
/// then lower mask. Undefined R_avg sorts last.
pub fn rank_order(a: &RankedSubset, b: &RankedSubset) -> Ordering {
    let r = |s: &RankedSubset| s.report.r_avg.unwrap_or(f64::NEG_INFINITY);
    r(b).total_cmp(&r(a))
        .then_with(|| b.report.acc.mean.total_cmp(&a.report.acc.mean))
        .then_with(|| a.features.len().cmp(&b.features.len()))
        .then_with(|| a.mask.cmp(&b.mask))
}

/// Cross-validates every non-empty feature subset and ranks the results.
pub fn subset_search(d: &Dataset, model: &ModelSpec, cfg: &CvConfig) -> Result<Vec<RankedSubset>> {
    let dim = d.dim();
    if dim > MAX_SEARCH_DIM {
        return Err(Error::InvalidParameter(format!(
            "{dim} features exceed the exhaustive search limit of {MAX_SEARCH_DIM}"
        )));
    }
    let all: Vec<usize> = (0..dim).collect();
    let (x, y) = d.design(&all)?;
    let n_subsets = (1usize << dim) - 1;
    let mut ranked = par::try_map_indexed(n_subsets, |i| {
        let mask = (i + 1) as u32;
        let features = mask_to_subset(mask);
        let xs: Vec<Vec<f64>> = x
            .iter()
            .map(|r| features.iter().map(|&j| r[j]).collect())
            .collect();
        let report = cross_validate_xy(&xs, &y, model, cfg)?;
        Ok::<_, Error>(RankedSubset {
            mask,
            names: features
                .iter()
                .map(|&j| d.feature_names()[j].clone())
                .collect(),
            features,
            report,
        })
    })?;
    ranked.sort_by(rank_order);
    Ok(ranked)
}
