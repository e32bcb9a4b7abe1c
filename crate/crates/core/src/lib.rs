//! Sustained-vowel voice analysis.
//!
//! The crate covers the whole screening pipeline for a held vowel recording:
//!
//! * [`signal`]: 16-bit PCM WAV loading and edge trimming,
//! * [`synth`]: calibrated synthetic vowels with known cycle boundaries,
//! * [`pitch`]: normalized cross-correlation f0 tracking at a fixed hop,
//! * [`periods`]: cycle segmentation by waveform matching, either anchored
//!   to the cumulative phase of the f0 contour or chained cycle to cycle,
//! * [`perturbation`]: jitter and shimmer quotients,
//! * [`vibrato`]: the pathological vibrato index (PVI) computed from the
//!   9–14 Hz band of the normalized f0 contour,
//! * [`features`]: per-recording feature vectors, datasets, age correction
//!   and group statistics,
//! * [`ml`]: Fisher LDA, Mahalanobis k-NN, repeated k-fold cross-validation
//!   and exhaustive feature-subset search,
//! * [`cohort`]: synthetic cohorts shaped like a small clinical study.
//!
//! With the default `parallel` feature, per-frame pitch analysis,
//! cross-validation repetitions and subset evaluation run on the rayon
//! thread pool. Results are reduced in index order, so output does not
//! depend on the thread count or on whether the feature is enabled.

pub mod cohort;
pub mod error;
pub mod features;
pub mod ml;
mod par;
pub mod periods;
pub mod perturbation;
pub mod pitch;
pub mod signal;
pub mod synth;
pub mod vibrato;

pub use error::{Error, Result};
pub use features::{Dataset, FeatureVector, Label, Sex, FEATURE_NAMES};
pub use periods::CycleSegmentation;
pub use pitch::{F0Config, F0Contour};
pub use signal::Waveform;
