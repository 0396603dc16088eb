//! End-to-end experiment driver.
//!
//! Stage order: load -> undersample -> scale -> correlate -> outlier filter
//! -> split -> train -> evaluate. Every random stage draws from its own
//! seed, derived from the master seed by a fixed offset ([`StageSeeds`]).
//!
//! Files written to the output directory:
//!
//! | file | content |
//! |------|---------|
//! | `subsample.csv` | undersampled rows, original units |
//! | `correlation.csv` | Pearson matrix of the scaled subsample, label last |
//! | `<model>/model.json` | versioned model document |
//! | `<model>/roc.csv` | `threshold,fpr,tpr` on the test split |
//! | `report.{table,json,csv}` | one row per model |
//! | `manifest.json` | config hash, seeds, per-stage row counts, metrics |

mod config;
mod inspect;
mod manifest;

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::dataset::{self, Dataset};
use crate::error::{Error, Result};
use crate::metrics::{self, EvalReport, ReportFormat};
use crate::models::{self, ModelKind, TrainedModel};
use crate::preprocess;

pub use config::{InputSource, PipelineConfig, ScheduleName, StageSeeds, OUT_DIR_ENV};
pub use inspect::{inspect, significant};
pub use manifest::{InputRecord, Manifest, StageRecord, MANIFEST_FILE, MANIFEST_SCHEMA_VERSION};

#[derive(Debug)]
pub struct RunOutcome {
    pub manifest: Manifest,
    pub reports: Vec<EvalReport>,
    pub output_dir: PathBuf,
}

/// Loads the configured input. Returns the dataset and the SHA-256 of the
/// CSV bytes (None for synthetic input).
pub fn load_input(
    config: &PipelineConfig,
    seeds: &StageSeeds,
) -> Result<(Dataset, Option<String>)> {
    match config.input {
        InputSource::Synthetic => Ok((
            dataset::generate_synthetic(&config.synthetic_spec(), seeds.generate)?,
            None,
        )),
        InputSource::Csv => {
            let path = config
                .csv_path
                .as_ref()
                .ok_or_else(|| Error::Config("input = \"csv\" needs csv_path".into()))?;
            let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
            let digest = hex::encode(Sha256::digest(&bytes));
            let data = dataset::read_csv(bytes.as_slice(), &config.label_column, path)?;
            Ok((data, Some(digest)))
        }
    }
}

/// Tracks files this run creates so a failed run can remove them.
struct Artifacts {
    root: PathBuf,
    created_root: bool,
    files: Vec<PathBuf>,
    dirs: Vec<PathBuf>,
}

impl Artifacts {
    fn open(root: &Path) -> Result<Artifacts> {
        let created_root = !root.exists();
        std::fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        Ok(Artifacts {
            root: root.to_path_buf(),
            created_root,
            files: Vec::new(),
            dirs: Vec::new(),
        })
    }

    fn path(&mut self, relative: &str) -> Result<PathBuf> {
        let path = self.root.join(relative);
        if let Some(parent) = path.parent() {
            if !parent.exists() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
                self.dirs.push(parent.to_path_buf());
            }
        }
        self.files.push(path.clone());
        Ok(path)
    }

    fn write(&mut self, relative: &str, contents: &[u8]) -> Result<()> {
        let path = self.path(relative)?;
        std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))
    }

    fn discard(self) {
        for f in &self.files {
            let _ = std::fs::remove_file(f);
        }
        for d in self.dirs.iter().rev() {
            let _ = std::fs::remove_dir(d);
        }
        if self.created_root {
            let _ = std::fs::remove_dir(&self.root);
        }
    }
}

/// Runs every stage and writes all artifacts into `config.output_dir`. On
/// failure, files created by this call are removed and the error names the
/// stage that failed.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunOutcome> {
    config.validate().map_err(|e| e.in_stage("config"))?;
    let mut artifacts = Artifacts::open(&config.output_dir).map_err(|e| e.in_stage("output"))?;
    match run_stages(config, &mut artifacts) {
        Ok((manifest, reports)) => Ok(RunOutcome {
            manifest,
            reports,
            output_dir: config.output_dir.clone(),
        }),
        Err(e) => {
            artifacts.discard();
            Err(e)
        }
    }
}

fn run_stages(
    config: &PipelineConfig,
    artifacts: &mut Artifacts,
) -> Result<(Manifest, Vec<EvalReport>)> {
    let seed = config.require_seed()?;
    let seeds = StageSeeds::from_master(seed);
    let label = config.label_column.as_str();
    let mut stages = Vec::new();

    let (raw, input_sha256) = load_input(config, &seeds).map_err(|e| e.in_stage("load"))?;
    stages.push(StageRecord::of("load", &raw));

    let subsample =
        preprocess::random_undersample(&raw, config.undersample_ratio, seeds.undersample)
            .map_err(|e| e.in_stage("undersample"))?;
    drop(raw);
    stages.push(StageRecord::of("undersample", &subsample));
    let path = artifacts.path("subsample.csv")?;
    dataset::write_csv(&subsample, &path, label).map_err(|e| e.in_stage("undersample"))?;

    let scaler =
        preprocess::fit_scaler(&subsample, config.scaler).map_err(|e| e.in_stage("scale"))?;
    let scaled = preprocess::apply_scaler(&subsample, &scaler).map_err(|e| e.in_stage("scale"))?;
    stages.push(StageRecord::of("scale", &scaled));

    let corr =
        preprocess::correlation_matrix(&scaled, label).map_err(|e| e.in_stage("correlate"))?;
    let path = artifacts.path("correlation.csv")?;
    corr.write_csv(&path).map_err(|e| e.in_stage("correlate"))?;
    stages.push(StageRecord::of("correlate", &scaled));

    let (filtered, outlier_report) = if config.outliers {
        let k = config.outlier_top_k.min(scaled.n_features());
        let features =
            preprocess::top_correlated_features(&corr, k).map_err(|e| e.in_stage("outlier"))?;
        let (kept, report) =
            preprocess::remove_extreme_outliers(&scaled, &features, config.outlier_iqr_multiplier)
                .map_err(|e| e.in_stage("outlier"))?;
        (kept, Some(report))
    } else {
        (scaled, None)
    };
    stages.push(StageRecord::of("outlier", &filtered));

    let (train, test) = dataset::stratified_split(&filtered, config.test_fraction, seeds.split)
        .map_err(|e| e.in_stage("split"))?;
    stages.push(StageRecord::split(&filtered, &train, &test));

    let hp = config.hyperparams();
    let kinds = config.model_order();
    // independent jobs; results are collected back in report order
    let fitted: Vec<Result<(TrainedModel, EvalReport)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = kinds
            .iter()
            .map(|&kind| {
                let (train, test, hp) = (&train, &test, &hp);
                scope.spawn(move || fit_and_evaluate(kind, train, test, hp, seeds.model(kind)))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("model job panicked"))
            .collect()
    });

    let mut reports = Vec::with_capacity(kinds.len());
    for (kind, result) in kinds.iter().zip(fitted) {
        let (model, report) = result?;
        artifacts.write(
            &format!("{}/model.json", kind.id()),
            model.to_json()?.as_bytes(),
        )?;
        let path = artifacts.path(&format!("{}/roc.csv", kind.id()))?;
        report.roc.write_csv(&path)?;
        reports.push(report);
    }

    let decimals = config.table_decimals();
    for &format in &config.report_formats {
        let text =
            metrics::render_report(&reports, format, decimals).map_err(|e| e.in_stage("report"))?;
        artifacts.write(&format!("report.{}", format.as_str()), text.as_bytes())?;
    }

    let mut manifest = Manifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        config_sha256: config.fingerprint()?,
        input: InputRecord {
            source: config.input,
            sha256: input_sha256,
        },
        seed,
        stage_seeds: seeds,
        feature_names: filtered.feature_names().to_vec(),
        stages,
        scaler,
        outliers: outlier_report,
        table_decimals: decimals,
        models: reports.clone(),
        artifacts: Vec::new(),
    };
    manifest.artifacts = artifacts
        .files
        .iter()
        .filter_map(|p| p.strip_prefix(&artifacts.root).ok())
        .map(|p| p.to_string_lossy().replace('\\', "/"))
        .collect();
    manifest.artifacts.push(MANIFEST_FILE.to_string());
    artifacts.write(MANIFEST_FILE, manifest.to_json()?.as_bytes())?;
    Ok((manifest, reports))
}

fn fit_and_evaluate(
    kind: ModelKind,
    train: &Dataset,
    test: &Dataset,
    hp: &models::Hyperparams,
    seed: u64,
) -> Result<(TrainedModel, EvalReport)> {
    let model = models::train(kind, train, hp, seed).map_err(|e| e.in_stage("train"))?;
    let scores = model.score_all(test).map_err(|e| e.in_stage("evaluate"))?;
    let report = metrics::evaluate(
        kind.display_name(),
        test.labels(),
        &scores,
        kind.default_threshold(),
    )
    .map_err(|e| e.in_stage("evaluate"))?;
    Ok((model, report))
}

/// Re-renders the model table stored in a manifest.
pub fn render_from_manifest(manifest: &Manifest, format: ReportFormat) -> Result<String> {
    metrics::render_report(&manifest.models, format, manifest.table_decimals)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config(dir: &Path) -> PipelineConfig {
        PipelineConfig {
            seed: Some(5),
            synthetic_n: 3000,
            synthetic_positive_fraction: 0.05,
            synthetic_features: 4,
            synthetic_separation: 2.5,
            logreg_epochs: 100,
            svm_epochs: 20,
            output_dir: dir.to_path_buf(),
            ..PipelineConfig::default()
        }
    }

    #[test]
    fn writes_every_artifact() {
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().join("run");
        let outcome = run_pipeline(&small_config(&out)).unwrap();
        for f in [
            "subsample.csv",
            "correlation.csv",
            "report.table",
            "report.json",
            "report.csv",
            "manifest.json",
            "logreg/model.json",
            "knn/roc.csv",
            "svm/model.json",
            "tree/roc.csv",
        ] {
            assert!(out.join(f).is_file(), "missing {f}");
            assert!(
                outcome.manifest.artifacts.iter().any(|a| a == f),
                "{f} not in manifest"
            );
        }
        let names: Vec<&str> = outcome
            .manifest
            .stages
            .iter()
            .map(|s| s.stage.as_str())
            .collect();
        assert_eq!(
            names,
            [
                "load",
                "undersample",
                "scale",
                "correlate",
                "outlier",
                "split"
            ]
        );
        assert_eq!(outcome.manifest.stages[0].rows, 3000);
        assert_eq!(outcome.manifest.stages[1].negatives, 150);
        assert_eq!(outcome.manifest.stages[1].positives, 150);
        assert_eq!(outcome.reports.len(), 4);
    }

    #[test]
    fn failure_cleans_up_partial_output() {
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().join("run");
        let mut config = small_config(&out);
        // more majority rows than exist: fails at undersample
        config.undersample_ratio = 1000.0;
        let err = run_pipeline(&config).unwrap_err();
        assert!(err.to_string().starts_with("undersample stage"), "{err}");
        assert_eq!(err.exit_code(), 2);
        assert!(!out.exists());

        let mut config = small_config(&out);
        config.knn_k = 10_000;
        let err = run_pipeline(&config).unwrap_err();
        assert_eq!(err.exit_code(), 4);
        assert!(!out.exists(), "partial artifacts left behind");
    }
}
