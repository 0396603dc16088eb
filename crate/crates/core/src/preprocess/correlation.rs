use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Pearson matrix over every feature plus the 0/1 label as the last axis.
///
/// Entries involving a zero-variance column are `None` rather than NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    names: Vec<String>,
    entries: Vec<Option<f64>>,
}

impl CorrelationMatrix {
    /// Axis count, `d + 1`.
    pub fn size(&self) -> usize {
        self.names.len()
    }

    /// Features followed by the label name.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn feature_names(&self) -> &[String] {
        &self.names[..self.names.len() - 1]
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.entries[i * self.size() + j]
    }

    /// Correlation of each feature with the label, in feature order.
    pub fn label_correlations(&self) -> Vec<(&str, Option<f64>)> {
        let label = self.size() - 1;
        self.feature_names()
            .iter()
            .enumerate()
            .map(|(j, name)| (name.as_str(), self.get(j, label)))
            .collect()
    }

    /// Square CSV with axis names in the header and first column; undefined
    /// entries are written as `NaN`.
    pub fn to_csv_writer(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, ",{}", self.names.join(","))?;
        for (i, name) in self.names.iter().enumerate() {
            let cells: Vec<String> = (0..self.size())
                .map(|j| match self.get(i, j) {
                    Some(r) => r.to_string(),
                    None => "NaN".to_string(),
                })
                .collect();
            writeln!(out, "{name},{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::new();
        self.to_csv_writer(&mut buf)
            .map_err(|e| Error::io(path, e))?;
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }
}

/// Pearson r, or `None` if either input has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let centered_x = centered(x);
    let centered_y = centered(y);
    pearson_centered(&centered_x, &centered_y)
}

fn centered(x: &[f64]) -> Vec<f64> {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| v - mean).collect()
}

fn pearson_centered(x: &[f64], y: &[f64]) -> Option<f64> {
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let syy: f64 = y.iter().map(|v| v * v).sum();
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

pub fn correlation_matrix(data: &Dataset, label_name: &str) -> Result<CorrelationMatrix> {
    if data.n_rows() < 2 {
        return Err(Error::Data(format!(
            "correlation needs at least 2 rows, got {}",
            data.n_rows()
        )));
    }
    let mut columns: Vec<Vec<f64>> = (0..data.n_features())
        .map(|j| centered(&data.column(j)))
        .collect();
    let label: Vec<f64> = data.labels().iter().map(|&y| f64::from(y)).collect();
    columns.push(centered(&label));

    let size = columns.len();
    let degenerate: Vec<bool> = columns
        .iter()
        .map(|c| c.iter().all(|&v| v == 0.0))
        .collect();
    let mut entries = vec![None; size * size];
    for i in 0..size {
        if degenerate[i] {
            continue;
        }
        entries[i * size + i] = Some(1.0);
        for j in i + 1..size {
            let r = pearson_centered(&columns[i], &columns[j]);
            entries[i * size + j] = r;
            entries[j * size + i] = r;
        }
    }
    let mut names = data.feature_names().to_vec();
    names.push(label_name.to_string());
    Ok(CorrelationMatrix { names, entries })
}

/// The `k` features most correlated with the label by `|r|`, strongest
/// first. Ties keep column order; undefined correlations rank last.
pub fn top_correlated_features(cm: &CorrelationMatrix, k: usize) -> Result<Vec<String>> {
    let d = cm.size() - 1;
    if k > d {
        return Err(Error::Config(format!(
            "asked for the top {k} features but only {d} exist"
        )));
    }
    let mut ranked: Vec<(usize, f64)> = cm
        .label_correlations()
        .iter()
        .enumerate()
        .map(|(j, (_, r))| (j, r.map_or(-1.0, f64::abs)))
        .collect();
    // stable sort keeps column order inside equal |r|
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(ranked
        .into_iter()
        .take(k)
        .map(|(j, _)| cm.feature_names()[j].clone())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cm_with_label_corr(corrs: &[(&str, f64)]) -> CorrelationMatrix {
        let d = corrs.len();
        let size = d + 1;
        let mut entries = vec![Some(0.0); size * size];
        for i in 0..size {
            entries[i * size + i] = Some(1.0);
        }
        for (j, (_, r)) in corrs.iter().enumerate() {
            entries[j * size + d] = Some(*r);
            entries[d * size + j] = Some(*r);
        }
        let mut names: Vec<String> = corrs.iter().map(|(n, _)| n.to_string()).collect();
        names.push("class".into());
        CorrelationMatrix { names, entries }
    }

    #[test]
    fn self_and_negated() {
        let x = [1.0, 4.0, 2.0, 8.0, 5.0];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&x, &[2.0; 5]), None);
    }

    #[test]
    fn matrix_shape_and_label_axis() {
        let data = Dataset::from_rows(
            vec!["a".into(), "b".into(), "k".into()],
            vec![
                vec![0.0, 1.0, 7.0],
                vec![1.0, 0.5, 7.0],
                vec![2.0, 0.0, 7.0],
                vec![3.0, 0.2, 7.0],
            ],
            vec![0, 0, 1, 1],
        )
        .unwrap();
        let cm = correlation_matrix(&data, "class").unwrap();
        assert_eq!(cm.size(), 4);
        assert_eq!(cm.names().last().unwrap(), "class");
        // constant column k is undefined everywhere, including its diagonal
        for i in 0..4 {
            assert_eq!(cm.get(2, i), None);
            assert_eq!(cm.get(i, 2), None);
        }
        assert_eq!(cm.get(0, 0), Some(1.0));
        let r_a = cm.get(0, 3).unwrap();
        assert!(r_a > 0.8);
        assert_eq!(cm.get(3, 0), Some(r_a));
    }

    #[test]
    fn csv_export() {
        let data =
            Dataset::from_rows(vec!["a".into()], vec![vec![0.0], vec![1.0]], vec![0, 1]).unwrap();
        let cm = correlation_matrix(&data, "class").unwrap();
        let mut buf = Vec::new();
        cm.to_csv_writer(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            ",a,class\na,1,1\nclass,1,1\n"
        );
    }

    #[test]
    fn top_k_by_absolute_correlation() {
        let cm = cm_with_label_corr(&[("V1", 0.1), ("V2", -0.9), ("V3", 0.5)]);
        assert_eq!(top_correlated_features(&cm, 2).unwrap(), ["V2", "V3"]);
        assert_eq!(top_correlated_features(&cm, 3).unwrap(), ["V2", "V3", "V1"]);
        assert!(top_correlated_features(&cm, 4).is_err());
    }

    #[test]
    fn top_k_ties_keep_column_order() {
        let cm = cm_with_label_corr(&[("V9", 0.4), ("V2", -0.4), ("V1", 0.1)]);
        for _ in 0..3 {
            assert_eq!(top_correlated_features(&cm, 2).unwrap(), ["V9", "V2"]);
        }
    }
}
