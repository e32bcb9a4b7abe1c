//! Two-class screening models and their evaluation.
//!
//! Labels are ±1 with +1 the ALS (positive) class.

pub mod cv;
pub mod knn;
pub mod lda;
mod linalg;
pub mod metrics;
pub mod search;

pub use cv::{
    cross_validate, cross_validate_xy, fold_assignment, CvConfig, EvalReport, MeanSd, ModelKind,
    ModelSpec,
};
pub use knn::{knn_predict, knn_train, mahalanobis, KnnModel};
pub use lda::{lda_predict, lda_train, LdaBias, LdaModel};
pub use metrics::{confusion_metrics, Confusion, Metrics};
pub use search::{mask_to_subset, subset_search, RankedSubset, MAX_SEARCH_DIM};
