//! Preprocessing for the imbalanced subsample: balancing, per-feature
//! scaling, correlation analysis and Tukey-fence outlier removal.

mod correlation;
mod outliers;
mod sampling;
mod scaler;

pub use correlation::{correlation_matrix, pearson, top_correlated_features, CorrelationMatrix};
pub use outliers::{
    quantile, remove_extreme_outliers, FeatureFence, OutlierReport, DEFAULT_IQR_MULTIPLIER,
};
pub use sampling::random_undersample;
pub use scaler::{apply_scaler, fit_scaler, FeatureStats, ScalerMethod, ScalerParams};
