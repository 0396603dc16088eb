use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Fence multiplier used for "extreme" outliers; 1.5 is the usual mild one.
pub const DEFAULT_IQR_MULTIPLIER: f64 = 2.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureFence {
    pub feature: String,
    pub q1: f64,
    pub q3: f64,
    pub lower: f64,
    pub upper: f64,
    /// Rows outside this feature's fence. A row can be flagged by several
    /// features, so these may sum to more than `OutlierReport::removed`.
    pub flagged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierReport {
    pub fences: Vec<FeatureFence>,
    pub removed: usize,
}

/// Quantile of sorted data with linear interpolation between order
/// statistics at position `p * (n - 1)`.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Single-pass Tukey filter. Fences `[Q1 - m*IQR, Q3 + m*IQR]` are computed
/// once on the input for every listed feature; a row outside any fence is
/// dropped. Fence boundaries are inclusive.
pub fn remove_extreme_outliers(
    data: &Dataset,
    features: &[String],
    iqr_multiplier: f64,
) -> Result<(Dataset, OutlierReport)> {
    if !(iqr_multiplier > 0.0 && iqr_multiplier.is_finite()) {
        return Err(Error::Config(format!(
            "iqr multiplier must be a positive number, got {iqr_multiplier}"
        )));
    }
    if data.n_rows() < 4 {
        return Err(Error::Data(format!(
            "outlier removal needs at least 4 rows, got {}",
            data.n_rows()
        )));
    }
    let mut dropped = vec![false; data.n_rows()];
    let mut fences = Vec::with_capacity(features.len());
    for name in features {
        let j = data
            .feature_index(name)
            .ok_or_else(|| Error::Config(format!("unknown outlier feature '{name}'")))?;
        let column = data.column(j);
        let mut sorted = column.clone();
        sorted.sort_by(f64::total_cmp);
        let q1 = quantile(&sorted, 0.25);
        let q3 = quantile(&sorted, 0.75);
        let iqr = q3 - q1;
        let lower = q1 - iqr_multiplier * iqr;
        let upper = q3 + iqr_multiplier * iqr;
        let mut flagged = 0;
        for (i, &v) in column.iter().enumerate() {
            if v < lower || v > upper {
                flagged += 1;
                dropped[i] = true;
            }
        }
        fences.push(FeatureFence {
            feature: name.clone(),
            q1,
            q3,
            lower,
            upper,
            flagged,
        });
    }
    let keep: Vec<usize> = (0..data.n_rows()).filter(|&i| !dropped[i]).collect();
    let removed = data.n_rows() - keep.len();
    Ok((data.select(&keep), OutlierReport { fences, removed }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(values: &[f64]) -> Dataset {
        let rows = values.iter().map(|&v| vec![v]).collect();
        Dataset::from_rows(vec!["x".into()], rows, vec![0; values.len()]).unwrap()
    }

    fn x() -> Vec<String> {
        vec!["x".into()]
    }

    #[test]
    fn interpolated_quartiles() {
        let s = [1.0, 2.0, 3.0, 4.0, 100.0];
        assert_eq!(quantile(&s, 0.25), 2.0);
        assert_eq!(quantile(&s, 0.75), 4.0);
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0], 0.25), 1.75);
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0], 0.75), 3.25);
    }

    #[test]
    fn drops_the_far_value() {
        let (out, report) =
            remove_extreme_outliers(&single(&[1.0, 2.0, 3.0, 4.0, 100.0]), &x(), 1.5).unwrap();
        assert_eq!(out.column(0), [1.0, 2.0, 3.0, 4.0]);
        assert_eq!(report.removed, 1);
        assert_eq!(report.fences[0].flagged, 1);
        assert_eq!(report.fences[0].upper, 7.0);
    }

    #[test]
    fn identical_values_stay() {
        let (out, report) = remove_extreme_outliers(&single(&[5.0; 6]), &x(), 2.5).unwrap();
        assert_eq!(out.n_rows(), 6);
        assert_eq!(report.removed, 0);
    }

    #[test]
    fn huge_multiplier_keeps_everything() {
        let data = single(&[1.0, 2.0, 3.0, 4.0, 100.0, -1e6]);
        let (out, _) = remove_extreme_outliers(&data, &x(), 1e9).unwrap();
        assert_eq!(out, data);
    }

    #[test]
    fn row_flagged_by_two_features_counts_once() {
        let data = Dataset::from_rows(
            vec!["a".into(), "b".into()],
            vec![
                vec![1.0, 1.0],
                vec![2.0, 2.0],
                vec![3.0, 3.0],
                vec![4.0, 4.0],
                vec![90.0, 90.0],
                vec![2.5, -80.0],
            ],
            vec![0, 1, 0, 1, 0, 1],
        )
        .unwrap();
        let (out, report) = remove_extreme_outliers(&data, &["a".into(), "b".into()], 1.5).unwrap();
        assert_eq!(report.fences[0].flagged, 1);
        assert_eq!(report.fences[1].flagged, 2);
        assert_eq!(report.removed, 2);
        assert_eq!(out.n_rows(), 4);
    }

    #[test]
    fn single_pass_semantics() {
        // second pass sees new, tighter fences
        let data = single(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 12.0, 40.0]);
        let (once, r1) = remove_extreme_outliers(&data, &x(), 1.0).unwrap();
        assert_eq!(r1.removed, 1);
        let (twice, r2) = remove_extreme_outliers(&once, &x(), 1.0).unwrap();
        assert_eq!(r2.removed, 1);
        assert_eq!(twice.n_rows(), 8);
    }

    #[test]
    fn errors() {
        let data = single(&[1.0, 2.0, 3.0, 4.0]);
        assert!(remove_extreme_outliers(&data, &["nope".into()], 1.5).is_err());
        assert!(remove_extreme_outliers(&single(&[1.0, 2.0, 3.0]), &x(), 1.5).is_err());
        assert!(remove_extreme_outliers(&data, &x(), 0.0).is_err());
    }
}
