//! Fraud-detection toolkit for heavily imbalanced transaction data.
//!
//! The crate covers the whole experiment flow: load or generate a labelled
//! table ([`dataset`]), balance it by random undersampling, scale it, inspect
//! feature/label correlations and strip extreme outliers ([`preprocess`]),
//! fit four classic classifiers ([`models`]) and score them with
//! precision/recall/F1 and ROC-AUC ([`metrics`]). [`pipeline`] ties the stages
//! together behind a single seeded config.

pub mod dataset;
pub mod error;
pub mod metrics;
pub mod models;
pub mod pipeline;
pub mod preprocess;
pub(crate) mod rng;

pub use dataset::{Dataset, SyntheticSpec};
pub use error::{Error, ErrorKind, Result};
pub use metrics::{ConfusionMatrix, EvalReport, RocCurve};
pub use models::{Hyperparams, ModelKind, TrainedModel};
pub use pipeline::PipelineConfig;
pub use preprocess::{CorrelationMatrix, ScalerMethod, ScalerParams};
