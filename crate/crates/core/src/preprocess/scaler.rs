use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Per-feature affine rescaling.
///
/// * `MinMax`: `(m - min) / (max - min)`, lands in `[0, 1]`.
/// * `MeanNorm`: `(m - mean) / (max - min)`, zero mean, lands in `[-1, 1]`.
/// * `Standardize`: `(m - mean) / stddev` with the population stddev.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalerMethod {
    MinMax,
    MeanNorm,
    Standardize,
}

impl ScalerMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ScalerMethod::MinMax => "min_max",
            ScalerMethod::MeanNorm => "mean_norm",
            ScalerMethod::Standardize => "standardize",
        }
    }
}

impl fmt::Display for ScalerMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScalerMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "min_max" | "minmax" => Ok(ScalerMethod::MinMax),
            "mean_norm" | "meannorm" | "mean" => Ok(ScalerMethod::MeanNorm),
            "standardize" | "zscore" | "z_score" => Ok(ScalerMethod::Standardize),
            _ => Err(Error::Config(format!(
                "unknown scaler '{s}' (expected min_max, mean_norm or standardize)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Population form (divides by n).
    pub stddev: f64,
}

impl FeatureStats {
    pub fn of(column: &[f64]) -> FeatureStats {
        let n = column.len() as f64;
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        for &v in column {
            min = min.min(v);
            max = max.max(v);
        }
        let mut mean = column.iter().sum::<f64>() / n;
        // one refinement pass; keeps the rescaled mean at rounding level
        mean += column.iter().map(|v| v - mean).sum::<f64>() / n;
        let mean = mean.clamp(min, max);
        let var = column.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        FeatureStats {
            min,
            max,
            mean,
            stddev: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub method: ScalerMethod,
    pub feature_names: Vec<String>,
    pub stats: Vec<FeatureStats>,
}

impl ScalerParams {
    /// The denominator is zero for this feature under the fitted method.
    pub fn is_degenerate(&self, j: usize) -> bool {
        let s = &self.stats[j];
        match self.method {
            ScalerMethod::MinMax | ScalerMethod::MeanNorm => s.max == s.min,
            ScalerMethod::Standardize => s.stddev == 0.0,
        }
    }

    pub fn degenerate_features(&self) -> Vec<&str> {
        (0..self.stats.len())
            .filter(|&j| self.is_degenerate(j))
            .map(|j| self.feature_names[j].as_str())
            .collect()
    }

    fn transform(&self, j: usize, m: f64) -> f64 {
        if self.is_degenerate(j) {
            return 0.0;
        }
        let s = &self.stats[j];
        match self.method {
            ScalerMethod::MinMax => (m - s.min) / (s.max - s.min),
            ScalerMethod::MeanNorm => (m - s.mean) / (s.max - s.min),
            ScalerMethod::Standardize => (m - s.mean) / s.stddev,
        }
    }
}

pub fn fit_scaler(data: &Dataset, method: ScalerMethod) -> Result<ScalerParams> {
    if data.n_rows() < 2 {
        return Err(Error::Data(format!(
            "scaler needs at least 2 rows, got {}",
            data.n_rows()
        )));
    }
    let stats = (0..data.n_features())
        .map(|j| FeatureStats::of(&data.column(j)))
        .collect();
    Ok(ScalerParams {
        method,
        feature_names: data.feature_names().to_vec(),
        stats,
    })
}

/// Degenerate features (constant under the fitted stats) map to 0.0 and are
/// logged at warn level.
pub fn apply_scaler(data: &Dataset, params: &ScalerParams) -> Result<Dataset> {
    if data.feature_names() != params.feature_names.as_slice() {
        return Err(Error::Data(format!(
            "scaler was fitted on features {:?}, data has {:?}",
            params.feature_names,
            data.feature_names()
        )));
    }
    for name in params.degenerate_features() {
        log::warn!(
            "feature '{name}' is constant under {} scaling; emitting 0.0",
            params.method
        );
    }
    data.map_values(|j, m| params.transform(j, m))
}
