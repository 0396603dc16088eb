use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::TrainedModel;
use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Distance is always Euclidean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 5 }
    }
}

impl KnnParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("knn k must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub train: Dataset,
}

impl KnnModel {
    pub(super) fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > self.train.n_rows() {
            return Err(Error::Data(format!(
                "knn k = {} must be in 1..={}",
                self.k,
                self.train.n_rows()
            )));
        }
        Ok(())
    }

    /// Fraction of positives among the `k` nearest stored rows. Equal
    /// distances are ordered by stored row index.
    pub(super) fn score(&self, row: &[f64]) -> f64 {
        let mut dist: Vec<(f64, usize)> = self
            .train
            .rows()
            .enumerate()
            .map(|(i, r)| (squared_distance(r, row), i))
            .collect();
        let by_distance = |a: &(f64, usize), b: &(f64, usize)| -> Ordering {
            a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
        };
        if self.k < dist.len() {
            dist.select_nth_unstable_by(self.k - 1, by_distance);
        }
        let labels = self.train.labels();
        let positives = dist[..self.k]
            .iter()
            .filter(|&&(_, i)| labels[i] == 1)
            .count();
        positives as f64 / self.k as f64
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lazy learner: stores the training rows verbatim.
pub fn train_knn(data: &Dataset, params: &KnnParams) -> Result<TrainedModel> {
    params.validate()?;
    if params.k > data.n_rows() {
        return Err(Error::Training(format!(
            "knn k = {} exceeds the {} training rows",
            params.k,
            data.n_rows()
        )));
    }
    Ok(TrainedModel::Knn(KnnModel {
        k: params.k,
        train: data.clone(),
    }))
}
