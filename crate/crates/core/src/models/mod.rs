//! The four classifiers behind one train/score/predict contract.
//!
//! Scores only need to rank rows within one model: logistic regression
//! returns a probability, KNN and the tree return positive fractions, and
//! the SVM returns its raw signed margin.

mod knn;
mod logreg;
mod svm;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

pub use knn::{train_knn, KnnModel, KnnParams};
pub use logreg::{logistic_loss_and_gradient, sigmoid, train_logreg, LogRegParams, LogisticModel};
pub use svm::{train_svm, SvmModel, SvmParams, SvmSchedule};
pub use tree::{train_tree, TreeModel, TreeNode, TreeParams};

/// Version written into every serialized model document.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Logreg,
    Knn,
    Tree,
    Svm,
}

impl ModelKind {
    /// Report order.
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Logreg,
        ModelKind::Knn,
        ModelKind::Svm,
        ModelKind::Tree,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ModelKind::Logreg => "logreg",
            ModelKind::Knn => "knn",
            ModelKind::Tree => "tree",
            ModelKind::Svm => "svm",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::Logreg => "logistic regression",
            ModelKind::Knn => "k-nearest neighbors",
            ModelKind::Tree => "decision tree",
            ModelKind::Svm => "linear svm",
        }
    }

    /// Decision threshold applied to `score` by default.
    pub fn default_threshold(self) -> f64 {
        match self {
            ModelKind::Svm => 0.0,
            _ => 0.5,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "logreg" | "logistic" | "logistic_regression" => Ok(ModelKind::Logreg),
            "knn" => Ok(ModelKind::Knn),
            "tree" | "decision_tree" | "cart" => Ok(ModelKind::Tree),
            "svm" | "linear_svm" => Ok(ModelKind::Svm),
            _ => Err(Error::Config(format!(
                "unknown model '{s}' (expected logreg, knn, tree or svm)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub logreg: LogRegParams,
    pub knn: KnnParams,
    pub tree: TreeParams,
    pub svm: SvmParams,
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        self.logreg.validate()?;
        self.knn.validate()?;
        self.tree.validate()?;
        self.svm.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainedModel {
    Logreg(LogisticModel),
    Knn(KnnModel),
    Tree(TreeModel),
    Svm(SvmModel),
}

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format_version: u32,
    model: TrainedModel,
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::Logreg(_) => ModelKind::Logreg,
            TrainedModel::Knn(_) => ModelKind::Knn,
            TrainedModel::Tree(_) => ModelKind::Tree,
            TrainedModel::Svm(_) => ModelKind::Svm,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            TrainedModel::Logreg(m) => m.weights.len(),
            TrainedModel::Knn(m) => m.train.n_features(),
            TrainedModel::Tree(m) => m.n_features,
            TrainedModel::Svm(m) => m.weights.len(),
        }
    }

    pub fn score(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.n_features() {
            return Err(Error::Dimension {
                expected: self.n_features(),
                got: row.len(),
            });
        }
        Ok(match self {
            TrainedModel::Logreg(m) => m.score(row),
            TrainedModel::Knn(m) => m.score(row),
            TrainedModel::Tree(m) => m.score(row),
            TrainedModel::Svm(m) => m.score(row),
        })
    }

    /// 1 iff `score(row) >= threshold`.
    pub fn predict(&self, row: &[f64], threshold: f64) -> Result<u8> {
        Ok(u8::from(self.score(row)? >= threshold))
    }

    pub fn default_threshold(&self) -> f64 {
        self.kind().default_threshold()
    }

    pub fn score_all(&self, data: &Dataset) -> Result<Vec<f64>> {
        if data.n_features() != self.n_features() {
            return Err(Error::Dimension {
                expected: self.n_features(),
                got: data.n_features(),
            });
        }
        data.rows().map(|r| self.score(r)).collect()
    }

    /// Structural checks for models that did not come out of a trainer.
    pub fn validate(&self) -> Result<()> {
        match self {
            TrainedModel::Logreg(m) => finite_params(&m.weights, m.bias),
            TrainedModel::Svm(m) => finite_params(&m.weights, m.bias),
            TrainedModel::Knn(m) => m.validate(),
            TrainedModel::Tree(m) => m.validate(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ModelDocument {
            format_version: MODEL_FORMAT_VERSION,
            model: self.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<TrainedModel> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        if doc.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Data(format!(
                "model format version {} is not supported (expected {MODEL_FORMAT_VERSION})",
                doc.format_version
            )));
        }
        doc.model.validate()?;
        Ok(doc.model)
    }
}

fn finite_params(weights: &[f64], bias: f64) -> Result<()> {
    if weights.is_empty() || !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::Data(
            "model weights must be finite and non-empty".into(),
        ));
    }
    Ok(())
}

/// Fits the model of the given kind with its slice of `hp`.
pub fn train(kind: ModelKind, data: &Dataset, hp: &Hyperparams, seed: u64) -> Result<TrainedModel> {
    match kind {
        ModelKind::Logreg => train_logreg(data, &hp.logreg, seed),
        ModelKind::Knn => train_knn(data, &hp.knn),
        ModelKind::Tree => train_tree(data, &hp.tree, seed),
        ModelKind::Svm => train_svm(data, &hp.svm, seed),
    }
}

pub(crate) fn require_both_classes(data: &Dataset, model: &str) -> Result<()> {
    let (neg, pos) = data.class_counts();
    if neg == 0 || pos == 0 {
        return Err(Error::Training(format!(
            "{model} needs both classes in the training data (got {neg} negatives, {pos} positives)"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Dataset {
        Dataset::from_rows(
            vec!["x".into(), "y".into()],
            vec![
                vec![-1.0, 0.3],
                vec![-0.5, -0.2],
                vec![-1.5, 0.1],
                vec![1.0, 0.0],
                vec![0.7, 0.4],
                vec![1.2, -0.3],
            ],
            vec![0, 0, 0, 1, 1, 1],
        )
        .unwrap()
    }

    fn fast_hp() -> Hyperparams {
        let mut hp = Hyperparams::default();
        hp.knn.k = 3;
        hp.tree.min_samples_leaf = 1;
        hp.logreg.epochs = 50;
        hp.svm.epochs = 20;
        hp
    }

    #[test]
    fn json_round_trip_is_bit_exact_on_scores() {
        let data = tiny();
        let probes = [[0.1, 0.2], [-0.7, 1.3], [3.0, -2.0], [1e-3, 0.123456789]];
        for kind in ModelKind::ALL {
            let model = train(kind, &data, &fast_hp(), 9).unwrap();
            let text = model.to_json().unwrap();
            assert!(text.contains("\"format_version\": 1"));
            let back = TrainedModel::from_json(&text).unwrap();
            assert_eq!(back, model);
            for p in &probes {
                assert_eq!(
                    back.score(p).unwrap().to_bits(),
                    model.score(p).unwrap().to_bits(),
                    "{kind}"
                );
            }
        }
    }

    #[test]
    fn rejects_unknown_format_version() {
        let model = train(ModelKind::Logreg, &tiny(), &fast_hp(), 0).unwrap();
        let text = model
            .to_json()
            .unwrap()
            .replace("\"format_version\": 1", "\"format_version\": 7");
        assert!(TrainedModel::from_json(&text).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        for kind in ModelKind::ALL {
            let model = train(kind, &tiny(), &fast_hp(), 0).unwrap();
            assert!(matches!(
                model.score(&[1.0]),
                Err(Error::Dimension {
                    expected: 2,
                    got: 1
                })
            ));
            assert!(model.predict(&[1.0, 2.0, 3.0], 0.5).is_err());
        }
    }

    #[test]
    fn predict_threshold_contract() {
        let lr = TrainedModel::Logreg(LogisticModel::zero(2));
        assert_eq!(lr.score(&[4.0, -9.0]).unwrap(), 0.5);
        assert_eq!(lr.predict(&[4.0, -9.0], 0.5).unwrap(), 1);
        assert_eq!(lr.predict(&[4.0, -9.0], 1.1).unwrap(), 0);

        let svm = TrainedModel::Svm(SvmModel {
            params: SvmParams::default(),
            seed: 0,
            weights: vec![1.0],
            bias: 0.0,
        });
        assert_eq!(svm.predict(&[-0.1], svm.default_threshold()).unwrap(), 0);
        assert_eq!(svm.predict(&[0.0], svm.default_threshold()).unwrap(), 1);
    }

    #[test]
    fn kinds_parse_and_order() {
        for k in ModelKind::ALL {
            assert_eq!(k.id().parse::<ModelKind>().unwrap(), k);
        }
        assert!("forest".parse::<ModelKind>().is_err());
        assert_eq!(ModelKind::Svm.default_threshold(), 0.0);
        assert_eq!(ModelKind::Knn.default_threshold(), 0.5);
    }

    #[test]
    fn same_inputs_same_model() {
        for kind in ModelKind::ALL {
            let a = train(kind, &tiny(), &fast_hp(), 4).unwrap();
            let b = train(kind, &tiny(), &fast_hp(), 4).unwrap();
            assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        }
    }
}
