use serde::{Deserialize, Serialize};

use super::{require_both_classes, TrainedModel};
use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegParams {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Coefficient of `0.5 * ||w||^2`; the bias is not penalised.
    pub l2: f64,
}

impl Default for LogRegParams {
    fn default() -> Self {
        LogRegParams {
            learning_rate: 0.1,
            epochs: 500,
            l2: 1e-4,
        }
    }
}

impl LogRegParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "logreg learning rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(Error::Config("logreg epochs must be >= 1".into()));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::Config(format!(
                "logreg l2 must be >= 0, got {}",
                self.l2
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub params: LogRegParams,
    pub seed: u64,
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Objective before the first step and after every epoch.
    pub loss_history: Vec<f64>,
}

impl LogisticModel {
    /// Untrained model with all parameters at zero.
    pub fn zero(d: usize) -> LogisticModel {
        LogisticModel {
            params: LogRegParams::default(),
            seed: 0,
            weights: vec![0.0; d],
            bias: 0.0,
            loss_history: Vec::new(),
        }
    }

    pub(super) fn score(&self, row: &[f64]) -> f64 {
        sigmoid(dot(&self.weights, row) + self.bias)
    }
}

pub(super) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Mean binary cross-entropy plus `0.5 * l2 * ||w||^2`, with its gradient
/// with respect to the weights and the bias.
pub fn logistic_loss_and_gradient(
    data: &Dataset,
    weights: &[f64],
    bias: f64,
    l2: f64,
) -> (f64, Vec<f64>, f64) {
    let n = data.n_rows() as f64;
    let mut loss = 0.0;
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for (row, &y) in data.rows().zip(data.labels()) {
        let z = dot(weights, row) + bias;
        let y = f64::from(y);
        // -[y log p + (1-y) log(1-p)] = softplus(z) - y z
        loss += softplus(z) - y * z;
        let residual = sigmoid(z) - y;
        for (g, x) in grad_w.iter_mut().zip(row) {
            *g += residual * x;
        }
        grad_b += residual;
    }
    loss /= n;
    grad_b /= n;
    let mut penalty = 0.0;
    for (g, w) in grad_w.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
        penalty += w * w;
    }
    (loss + 0.5 * l2 * penalty, grad_w, grad_b)
}

/// Full-batch gradient descent from all-zero parameters. The seed is kept
/// for provenance only; the procedure is deterministic.
pub fn train_logreg(data: &Dataset, params: &LogRegParams, seed: u64) -> Result<TrainedModel> {
    params.validate()?;
    require_both_classes(data, "logistic regression")?;
    let d = data.n_features();
    let mut weights = vec![0.0; d];
    let mut bias = 0.0;
    let mut loss_history = Vec::with_capacity(params.epochs + 1);
    for _ in 0..params.epochs {
        let (loss, grad_w, grad_b) = logistic_loss_and_gradient(data, &weights, bias, params.l2);
        loss_history.push(loss);
        for (w, g) in weights.iter_mut().zip(&grad_w) {
            *w -= params.learning_rate * g;
        }
        bias -= params.learning_rate * grad_b;
    }
    loss_history.push(logistic_loss_and_gradient(data, &weights, bias, params.l2).0);
    if weights.iter().any(|w| !w.is_finite()) || !bias.is_finite() {
        return Err(Error::Training(
            "logistic regression diverged; lower the learning rate".into(),
        ));
    }
    Ok(TrainedModel::Logreg(LogisticModel {
        params: params.clone(),
        seed,
        weights,
        bias,
        loss_history,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fit(data: &Dataset, params: &LogRegParams) -> LogisticModel {
        match train_logreg(data, params, 0).unwrap() {
            TrainedModel::Logreg(m) => m,
            _ => unreachable!(),
        }
    }

    #[test]
    fn separable_1d() {
        let data =
            Dataset::from_rows(vec!["x".into()], vec![vec![-1.0], vec![1.0]], vec![0, 1]).unwrap();
        let m = fit(&data, &LogRegParams::default());
        assert!(m.weights[0] > 0.0);
        assert!(m.score(&[-1.0]) < 0.5);
        assert!(m.score(&[1.0]) >= 0.5);
    }

    #[test]
    fn zero_features_learn_the_prior() {
        let labels = vec![1, 0, 0, 0, 1, 0, 0, 0];
        let rows = vec![vec![0.0, 0.0]; labels.len()];
        let data = Dataset::from_rows(vec!["a".into(), "b".into()], rows, labels).unwrap();
        let params = LogRegParams {
            epochs: 3000,
            learning_rate: 0.5,
            ..LogRegParams::default()
        };
        let m = fit(&data, &params);
        assert_eq!(m.weights, [0.0, 0.0]);
        let log_odds = (0.25f64 / 0.75).ln();
        assert!((m.bias - log_odds).abs() < 1e-6, "bias {}", m.bias);
    }

    #[test]
    fn loss_starts_at_ln2_and_never_increases() {
        let data = Dataset::from_rows(
            vec!["a".into(), "b".into()],
            vec![
                vec![-1.2, 0.4],
                vec![-0.3, -1.0],
                vec![0.9, 1.1],
                vec![1.4, -0.2],
                vec![0.1, 0.3],
                vec![-0.8, 0.9],
            ],
            vec![0, 0, 1, 1, 1, 0],
        )
        .unwrap();
        let m = fit(&data, &LogRegParams::default());
        assert_eq!(m.loss_history.len(), 501);
        assert!((m.loss_history[0] - std::f64::consts::LN_2).abs() < 1e-15);
        for w in m.loss_history.windows(2) {
            assert!(w[1] <= w[0], "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn single_class_is_a_training_error() {
        let data =
            Dataset::from_rows(vec!["x".into()], vec![vec![1.0], vec![2.0]], vec![1, 1]).unwrap();
        let err = train_logreg(&data, &LogRegParams::default(), 0).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert_eq!(sigmoid(1000.0), 1.0);
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert!((softplus(-800.0)).abs() < 1e-300);
        assert_eq!(softplus(800.0), 800.0);
    }
}
