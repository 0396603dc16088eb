use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{SyntheticSpec, DEFAULT_LABEL_COLUMN};
use crate::error::{Error, Result};
use crate::metrics::{ReportFormat, TableDecimals};
use crate::models::{
    Hyperparams, KnnParams, LogRegParams, ModelKind, SvmParams, SvmSchedule, TreeParams,
};
use crate::preprocess::{ScalerMethod, DEFAULT_IQR_MULTIPLIER};

/// Environment variable that overrides `output_dir`.
pub const OUT_DIR_ENV: &str = "FRAUDLAB_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputSource {
    Csv,
    Synthetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleName {
    Pegasos,
    Constant,
}

/// One deterministic run, as a flat TOML document. Every key except `seed`
/// has a default; see the README for the full list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    /// Master seed. Must be set here or on the command line.
    pub seed: Option<u64>,

    pub input: InputSource,
    pub csv_path: Option<PathBuf>,
    pub label_column: String,

    pub synthetic_n: usize,
    pub synthetic_positive_fraction: f64,
    pub synthetic_features: usize,
    pub synthetic_separation: f64,
    pub synthetic_noise: f64,

    pub scaler: ScalerMethod,
    /// Majority rows kept per minority row.
    pub undersample_ratio: f64,
    pub outliers: bool,
    pub outlier_top_k: usize,
    pub outlier_iqr_multiplier: f64,
    pub test_fraction: f64,

    pub models: Vec<ModelKind>,
    pub logreg_learning_rate: f64,
    pub logreg_epochs: usize,
    pub logreg_l2: f64,
    pub knn_k: usize,
    pub tree_max_depth: usize,
    pub tree_min_samples_leaf: usize,
    pub svm_c: f64,
    pub svm_epochs: usize,
    pub svm_schedule: ScheduleName,
    /// Only used with `svm_schedule = "constant"`.
    pub svm_learning_rate: f64,

    pub output_dir: PathBuf,
    pub report_formats: Vec<ReportFormat>,
    pub table_decimals: usize,
    pub table_auc_decimals: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let synth = SyntheticSpec::default();
        let hp = Hyperparams::default();
        PipelineConfig {
            seed: None,
            input: InputSource::Synthetic,
            csv_path: None,
            label_column: DEFAULT_LABEL_COLUMN.to_string(),
            synthetic_n: synth.n_total,
            synthetic_positive_fraction: synth.positive_fraction,
            synthetic_features: synth.d,
            synthetic_separation: synth.class_mean_separation,
            synthetic_noise: synth.noise_stddev,
            scaler: ScalerMethod::Standardize,
            undersample_ratio: 1.0,
            outliers: true,
            outlier_top_k: 3,
            outlier_iqr_multiplier: DEFAULT_IQR_MULTIPLIER,
            test_fraction: 0.3,
            models: ModelKind::ALL.to_vec(),
            logreg_learning_rate: hp.logreg.learning_rate,
            logreg_epochs: hp.logreg.epochs,
            logreg_l2: hp.logreg.l2,
            knn_k: hp.knn.k,
            tree_max_depth: hp.tree.max_depth,
            tree_min_samples_leaf: hp.tree.min_samples_leaf,
            svm_c: hp.svm.c,
            svm_epochs: hp.svm.epochs,
            svm_schedule: ScheduleName::Pegasos,
            svm_learning_rate: 0.01,
            output_dir: PathBuf::from("fraudlab-out"),
            report_formats: ReportFormat::ALL.to_vec(),
            table_decimals: TableDecimals::default().prf,
            table_auc_decimals: TableDecimals::default().auc,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<PipelineConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file. A relative `csv_path` is resolved against the
    /// config file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<PipelineConfig> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = PipelineConfig::from_toml_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if let (Some(csv), Some(dir)) = (&config.csv_path, path.parent()) {
            if csv.is_relative() {
                config.csv_path = Some(dir.join(csv));
            }
        }
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("no seed: set `seed` in the config or pass --seed".into()))
    }

    pub fn synthetic_spec(&self) -> SyntheticSpec {
        SyntheticSpec {
            n_total: self.synthetic_n,
            positive_fraction: self.synthetic_positive_fraction,
            d: self.synthetic_features,
            class_mean_separation: self.synthetic_separation,
            noise_stddev: self.synthetic_noise,
        }
    }

    pub fn hyperparams(&self) -> Hyperparams {
        Hyperparams {
            logreg: LogRegParams {
                learning_rate: self.logreg_learning_rate,
                epochs: self.logreg_epochs,
                l2: self.logreg_l2,
            },
            knn: KnnParams { k: self.knn_k },
            tree: TreeParams {
                max_depth: self.tree_max_depth,
                min_samples_leaf: self.tree_min_samples_leaf,
            },
            svm: SvmParams {
                c: self.svm_c,
                epochs: self.svm_epochs,
                schedule: match self.svm_schedule {
                    ScheduleName::Pegasos => SvmSchedule::Pegasos,
                    ScheduleName::Constant => SvmSchedule::Constant {
                        rate: self.svm_learning_rate,
                    },
                },
            },
        }
    }

    pub fn table_decimals(&self) -> TableDecimals {
        TableDecimals {
            prf: self.table_decimals,
            auc: self.table_auc_decimals,
        }
    }

    /// Enabled models in report order, duplicates removed.
    pub fn model_order(&self) -> Vec<ModelKind> {
        ModelKind::ALL
            .into_iter()
            .filter(|k| self.models.contains(k))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.require_seed()?;
        match self.input {
            InputSource::Csv if self.csv_path.is_none() => {
                return Err(Error::Config("input = \"csv\" needs csv_path".into()));
            }
            InputSource::Synthetic => self.synthetic_spec().validate()?,
            InputSource::Csv => {}
        }
        if self.label_column.trim().is_empty() {
            return Err(Error::Config("label_column must not be empty".into()));
        }
        if !(self.undersample_ratio > 0.0 && self.undersample_ratio.is_finite()) {
            return Err(Error::Config(format!(
                "undersample_ratio must be > 0, got {}",
                self.undersample_ratio
            )));
        }
        if self.outliers {
            if self.outlier_top_k == 0 {
                return Err(Error::Config("outlier_top_k must be >= 1".into()));
            }
            if !(self.outlier_iqr_multiplier > 0.0 && self.outlier_iqr_multiplier.is_finite()) {
                return Err(Error::Config(format!(
                    "outlier_iqr_multiplier must be > 0, got {}",
                    self.outlier_iqr_multiplier
                )));
            }
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Config(format!(
                "test_fraction must be in (0, 1), got {}",
                self.test_fraction
            )));
        }
        if self.models.is_empty() {
            return Err(Error::Config("models must list at least one model".into()));
        }
        self.hyperparams().validate()
    }

    /// SHA-256 of the canonical TOML form with `output_dir` blanked, so
    /// the hash identifies the experiment rather than where it was written.
    pub fn fingerprint(&self) -> Result<String> {
        let mut canonical = self.clone();
        canonical.output_dir = PathBuf::new();
        let text = canonical.to_toml_string()?;
        Ok(hex::encode(Sha256::digest(text.as_bytes())))
    }
}

/// Per-stage seeds, fixed offsets from the master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSeeds {
    pub generate: u64,
    pub undersample: u64,
    pub split: u64,
    pub logreg: u64,
    pub knn: u64,
    pub tree: u64,
    pub svm: u64,
}

impl StageSeeds {
    pub fn from_master(seed: u64) -> StageSeeds {
        StageSeeds {
            generate: seed,
            undersample: seed.wrapping_add(1),
            split: seed.wrapping_add(2),
            logreg: seed.wrapping_add(10),
            knn: seed.wrapping_add(11),
            tree: seed.wrapping_add(12),
            svm: seed.wrapping_add(13),
        }
    }

    pub fn model(&self, kind: ModelKind) -> u64 {
        match kind {
            ModelKind::Logreg => self.logreg,
            ModelKind::Knn => self.knn,
            ModelKind::Tree => self.tree,
            ModelKind::Svm => self.svm,
        }
    }
}
