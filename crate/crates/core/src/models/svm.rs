use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::logreg::dot;
use super::{require_both_classes, TrainedModel};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SvmSchedule {
    /// `eta_t = 1 / (lambda * t)`.
    Pegasos,
    Constant {
        rate: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    /// Soft-margin C. The L2 strength is `lambda = 1 / (C * n)`.
    pub c: f64,
    pub epochs: usize,
    pub schedule: SvmSchedule,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            epochs: 200,
            schedule: SvmSchedule::Pegasos,
        }
    }
}

impl SvmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("svm C must be > 0, got {}", self.c)));
        }
        if self.epochs == 0 {
            return Err(Error::Config("svm epochs must be >= 1".into()));
        }
        if let SvmSchedule::Constant { rate } = self.schedule {
            if !(rate > 0.0 && rate.is_finite()) {
                return Err(Error::Config(format!(
                    "svm learning rate must be > 0, got {rate}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub params: SvmParams,
    pub seed: u64,
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl SvmModel {
    /// Signed margin `w.x + b`; positive means fraud side.
    pub(super) fn score(&self, row: &[f64]) -> f64 {
        dot(&self.weights, row) + self.bias
    }
}

/// Primal linear SVM by stochastic subgradient descent on
/// `lambda/2 * (||w||^2 + b^2) + mean(hinge)`. Labels map to -1/+1, rows
/// are visited in a seeded shuffle each epoch. The bias is treated as the
/// weight of a constant feature and shrinks with the rest.
pub fn train_svm(data: &Dataset, params: &SvmParams, seed: u64) -> Result<TrainedModel> {
    params.validate()?;
    require_both_classes(data, "svm")?;
    let n = data.n_rows();
    let lambda = 1.0 / (params.c * n as f64);
    let targets: Vec<f64> = data
        .labels()
        .iter()
        .map(|&y| if y == 1 { 1.0 } else { -1.0 })
        .collect();

    let mut rng = rng::seeded(seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut weights = vec![0.0; data.n_features()];
    let mut bias = 0.0;
    let mut t = 0u64;
    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = match params.schedule {
                SvmSchedule::Pegasos => 1.0 / (lambda * t as f64),
                SvmSchedule::Constant { rate } => rate,
            };
            let x = data.row(i);
            let y = targets[i];
            let margin = y * (dot(&weights, x) + bias);
            let shrink = 1.0 - eta * lambda;
            for w in weights.iter_mut() {
                *w *= shrink;
            }
            bias *= shrink;
            if margin < 1.0 {
                for (w, xj) in weights.iter_mut().zip(x) {
                    *w += eta * y * xj;
                }
                bias += eta * y;
            }
        }
    }
    if weights.iter().any(|w| !w.is_finite()) || !bias.is_finite() {
        return Err(Error::Training(
            "svm diverged; lower the learning rate".into(),
        ));
    }
    Ok(TrainedModel::Svm(SvmModel {
        params: params.clone(),
        seed,
        weights,
        bias,
    }))
}
