//! CART classification tree grown greedily on Gini impurity.

use serde::{Deserialize, Serialize};

use super::TrainedModel;
use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 6,
            min_samples_leaf: 5,
        }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth == 0 || self.min_samples_leaf == 0 {
            return Err(Error::Config(
                "tree max_depth and min_samples_leaf must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Rows with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        samples: usize,
        gini: f64,
    },
    Leaf {
        positives: usize,
        samples: usize,
        gini: f64,
    },
}

impl TreeNode {
    pub fn samples(&self) -> usize {
        match *self {
            TreeNode::Split { samples, .. } | TreeNode::Leaf { samples, .. } => samples,
        }
    }

    pub fn gini(&self) -> f64 {
        match *self {
            TreeNode::Split { gini, .. } | TreeNode::Leaf { gini, .. } => gini,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub params: TreeParams,
    pub seed: u64,
    pub n_features: usize,
    /// Pre-order; the root is node 0.
    pub nodes: Vec<TreeNode>,
}

impl TreeModel {
    pub(super) fn score(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    at = if row[feature] <= threshold {
                        left
                    } else {
                        right
                    }
                }
                TreeNode::Leaf {
                    positives, samples, ..
                } => return positives as f64 / samples as f64,
            }
        }
    }

    /// Number of split levels on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], at: usize) -> usize {
            match nodes[at] {
                TreeNode::Split { left, right, .. } => {
                    1 + walk(nodes, left).max(walk(nodes, right))
                }
                TreeNode::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }

    pub(super) fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Data(format!("invalid tree: {msg}")));
        if self.nodes.is_empty() {
            return bad("no nodes".into());
        }
        for (i, node) in self.nodes.iter().enumerate() {
            match *node {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    if feature >= self.n_features || !threshold.is_finite() {
                        return bad(format!("node {i} has an invalid split"));
                    }
                    // pre-order layout guarantees children come later; this also rules out cycles
                    if left <= i
                        || right <= i
                        || left >= self.nodes.len()
                        || right >= self.nodes.len()
                    {
                        return bad(format!("node {i} has invalid children"));
                    }
                }
                TreeNode::Leaf {
                    positives, samples, ..
                } => {
                    if samples == 0 || positives > samples {
                        return bad(format!("leaf {i} has {positives}/{samples} positives"));
                    }
                }
            }
        }
        if self.depth() > self.params.max_depth {
            return bad(format!(
                "depth {} exceeds max {}",
                self.depth(),
                self.params.max_depth
            ));
        }
        Ok(())
    }
}

fn gini(positives: usize, samples: usize) -> f64 {
    let p = positives as f64 / samples as f64;
    2.0 * p * (1.0 - p)
}

/// `sum over children of (pos^2 + neg^2) / n_child`. Larger is purer; the
/// weighted child Gini equals `1 - purity / n_parent`.
fn purity(pos: usize, n: usize) -> f64 {
    let (p, q) = (pos as f64, (n - pos) as f64);
    (p * p + q * q) / n as f64
}

struct Candidate {
    feature: usize,
    threshold: f64,
    purity: f64,
}

struct Builder<'a> {
    data: &'a Dataset,
    params: &'a TreeParams,
    nodes: Vec<TreeNode>,
}

impl Builder<'_> {
    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let labels = self.data.labels();
        let n = rows.len();
        let pos = rows.iter().filter(|&&i| labels[i] == 1).count();
        let id = self.nodes.len();
        let node_gini = gini(pos, n);
        self.nodes.push(TreeNode::Leaf {
            positives: pos,
            samples: n,
            gini: node_gini,
        });
        if pos == 0
            || pos == n
            || depth >= self.params.max_depth
            || n < 2 * self.params.min_samples_leaf
        {
            return id;
        }
        let Some(best) = self.best_split(&rows, pos) else {
            return id;
        };
        // weighted child Gini must not exceed the parent's
        if best.purity + 1e-12 * (n as f64) < purity(pos, n) {
            return id;
        }
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&i| self.data.row(i)[best.feature] <= best.threshold);
        let left = self.grow(left_rows, depth + 1);
        let right = self.grow(right_rows, depth + 1);
        self.nodes[id] = TreeNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
            samples: n,
            gini: node_gini,
        };
        id
    }

    /// Exhaustive scan over features in column order and midpoints in
    /// ascending order; the first strictly best candidate wins.
    fn best_split(&self, rows: &[usize], total_pos: usize) -> Option<Candidate> {
        let labels = self.data.labels();
        let n = rows.len();
        let min_leaf = self.params.min_samples_leaf;
        let mut best: Option<Candidate> = None;
        let mut sorted: Vec<(f64, u8)> = Vec::with_capacity(n);
        for feature in 0..self.data.n_features() {
            sorted.clear();
            sorted.extend(rows.iter().map(|&i| (self.data.row(i)[feature], labels[i])));
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left_pos = 0;
            for split in 1..n {
                left_pos += usize::from(sorted[split - 1].1);
                let (lo, hi) = (sorted[split - 1].0, sorted[split].0);
                if lo == hi || split < min_leaf || n - split < min_leaf {
                    continue;
                }
                let score = purity(left_pos, split) + purity(total_pos - left_pos, n - split);
                if best.as_ref().is_none_or(|b| score > b.purity) {
                    best = Some(Candidate {
                        feature,
                        threshold: midpoint(lo, hi),
                        purity: score,
                    });
                }
            }
        }
        best
    }
}

/// Midpoint that still separates `lo` from `hi` when they are adjacent floats.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid >= hi || !mid.is_finite() {
        lo
    } else {
        mid
    }
}

/// Fully deterministic; the seed is recorded for provenance only.
pub fn train_tree(data: &Dataset, params: &TreeParams, seed: u64) -> Result<TrainedModel> {
    params.validate()?;
    if data.is_empty() {
        return Err(Error::Training(
            "decision tree needs at least one row".into(),
        ));
    }
    let mut builder = Builder {
        data,
        params,
        nodes: Vec::new(),
    };
    builder.grow((0..data.n_rows()).collect(), 0);
    Ok(TrainedModel::Tree(TreeModel {
        params: params.clone(),
        seed,
        n_features: data.n_features(),
        nodes: builder.nodes,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fit(data: &Dataset, max_depth: usize, min_leaf: usize) -> TreeModel {
        let params = TreeParams {
            max_depth,
            min_samples_leaf: min_leaf,
        };
        match train_tree(data, &params, 0).unwrap() {
            TrainedModel::Tree(t) => t,
            _ => unreachable!(),
        }
    }

    fn xor() -> Dataset {
        Dataset::from_rows(
            vec!["a".into(), "b".into()],
            vec![
                vec![0.0, 0.0],
                vec![0.0, 1.0],
                vec![1.0, 0.0],
                vec![1.0, 1.0],
            ],
            vec![0, 1, 1, 0],
        )
        .unwrap()
    }

    #[test]
    fn pure_input_is_one_leaf() {
        let data = Dataset::from_rows(
            vec!["x".into()],
            vec![vec![1.0], vec![2.0], vec![3.0]],
            vec![1, 1, 1],
        )
        .unwrap();
        let t = fit(&data, 6, 1);
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.score(&[100.0]), 1.0);
    }

    #[test]
    fn xor_needs_two_levels() {
        let t = fit(&xor(), 2, 1);
        for (row, &y) in xor().rows().zip(xor().labels()) {
            assert_eq!(t.score(row), f64::from(y));
        }
        assert_eq!(t.depth(), 2);
        let shallow = fit(&xor(), 1, 1);
        assert_eq!(shallow.depth(), 1);
    }

    #[test]
    fn leaf_fraction() {
        let data = Dataset::from_rows(
            vec!["x".into()],
            (0..5).map(|i| vec![i as f64]).collect(),
            vec![1, 1, 0, 1, 1],
        )
        .unwrap();
        // min leaf 5 forbids any split
        let t = fit(&data, 6, 5);
        assert_eq!(t.score(&[0.0]), 0.8);
    }

    #[test]
    fn first_feature_wins_ties() {
        let data = Dataset::from_rows(
            vec!["a".into(), "b".into()],
            vec![vec![0.0, 0.0], vec![1.0, 1.0]],
            vec![0, 1],
        )
        .unwrap();
        let t = fit(&data, 3, 1);
        match t.nodes[0] {
            TreeNode::Split {
                feature, threshold, ..
            } => {
                assert_eq!(feature, 0);
                assert_eq!(threshold, 0.5);
            }
            _ => panic!("expected a split"),
        }
    }

    #[test]
    fn adjacent_floats_still_split() {
        let lo = 1.0f64;
        let hi = f64::from_bits(lo.to_bits() + 1);
        let data =
            Dataset::from_rows(vec!["x".into()], vec![vec![lo], vec![hi]], vec![0, 1]).unwrap();
        let t = fit(&data, 2, 1);
        assert_eq!(t.score(&[lo]), 0.0);
        assert_eq!(t.score(&[hi]), 1.0);
    }

    #[test]
    fn respects_depth_and_leaf_size() {
        let rows: Vec<Vec<f64>> = (0..64)
            .map(|i| vec![(i * 37 % 64) as f64, (i % 7) as f64])
            .collect();
        let labels: Vec<u8> = (0..64).map(|i| u8::from((i * 13) % 5 < 2)).collect();
        let data = Dataset::from_rows(vec!["a".into(), "b".into()], rows, labels).unwrap();
        let t = fit(&data, 3, 4);
        assert!(t.depth() <= 3);
        for node in &t.nodes {
            assert!(node.samples() >= 4);
        }
        assert!(TrainedModel::Tree(t).validate().is_ok());
    }

    #[test]
    fn children_never_worsen_gini() {
        let rows: Vec<Vec<f64>> = (0..80)
            .map(|i| vec![(i * 29 % 80) as f64, ((i * 7) % 11) as f64])
            .collect();
        let labels: Vec<u8> = (0..80).map(|i| u8::from((i * 31) % 7 < 3)).collect();
        let data = Dataset::from_rows(vec!["a".into(), "b".into()], rows, labels).unwrap();
        let t = fit(&data, 8, 1);
        for node in &t.nodes {
            if let TreeNode::Split {
                left,
                right,
                samples,
                gini,
                ..
            } = *node
            {
                let (l, r) = (&t.nodes[left], &t.nodes[right]);
                let weighted = (l.samples() as f64 * l.gini() + r.samples() as f64 * r.gini())
                    / samples as f64;
                assert!(weighted <= gini + 1e-12);
            }
        }
    }

    #[test]
    fn validate_catches_bad_structure() {
        let mut t = fit(&xor(), 2, 1);
        if let TreeNode::Split { ref mut left, .. } = t.nodes[0] {
            *left = 0;
        }
        assert!(TrainedModel::Tree(t).validate().is_err());
    }
}
