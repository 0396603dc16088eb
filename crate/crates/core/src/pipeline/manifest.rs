use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{InputSource, StageSeeds};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::metrics::{EvalReport, TableDecimals};
use crate::preprocess::{OutlierReport, ScalerParams};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub rows: usize,
    pub negatives: usize,
    pub positives: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_rows: Option<usize>,
}

impl StageRecord {
    pub(super) fn of(stage: &str, data: &Dataset) -> StageRecord {
        let (negatives, positives) = data.class_counts();
        log::info!(
            "{stage}: {} rows ({negatives} negatives, {positives} positives)",
            data.n_rows()
        );
        StageRecord {
            stage: stage.to_string(),
            rows: data.n_rows(),
            negatives,
            positives,
            train_rows: None,
            test_rows: None,
        }
    }

    pub(super) fn split(all: &Dataset, train: &Dataset, test: &Dataset) -> StageRecord {
        StageRecord {
            train_rows: Some(train.n_rows()),
            test_rows: Some(test.n_rows()),
            ..StageRecord::of("split", all)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub source: InputSource,
    /// SHA-256 of the input file; absent for generated data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sha256: Option<String>,
}

/// Audit record of one run. Contains no timestamps or absolute paths, so it
/// is a pure function of the input and the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub config_sha256: String,
    pub input: InputRecord,
    pub seed: u64,
    pub stage_seeds: StageSeeds,
    pub feature_names: Vec<String>,
    pub stages: Vec<StageRecord>,
    pub scaler: ScalerParams,
    pub outliers: Option<OutlierReport>,
    pub table_decimals: TableDecimals,
    pub models: Vec<EvalReport>,
    pub artifacts: Vec<String>,
}

impl Manifest {
    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Manifest> {
        let manifest: Manifest = serde_json::from_str(text)?;
        if manifest.schema_version != MANIFEST_SCHEMA_VERSION {
            return Err(Error::Data(format!(
                "manifest schema version {} is not supported",
                manifest.schema_version
            )));
        }
        Ok(manifest)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Manifest> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Manifest::from_json(&text)
    }

    pub fn stage(&self, name: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.stage == name)
    }
}
