use std::fmt::Write as _;

use crate::dataset::Dataset;
use crate::preprocess::FeatureStats;

/// `x` rounded to `digits` significant digits, in plain decimal notation.
pub fn significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.prec$}", prec = digits.saturating_sub(1));
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Plain-text overview: shape, class balance and per-feature statistics.
pub fn inspect(data: &Dataset) -> String {
    let (neg, pos) = data.class_counts();
    let mut out = String::new();
    writeln!(out, "rows: {}", data.n_rows()).unwrap();
    writeln!(out, "features: {}", data.n_features()).unwrap();
    writeln!(out, "negatives (0): {neg}").unwrap();
    writeln!(out, "positives (1): {pos}").unwrap();
    writeln!(
        out,
        "positive fraction: {} ({pos}/{})",
        significant(data.positive_fraction(), 3),
        data.n_rows()
    )
    .unwrap();
    // the loader refuses empty or non-finite cells, so a loaded table has none
    writeln!(out, "missing or non-finite values: none").unwrap();
    writeln!(out).unwrap();

    let name_width = data
        .feature_names()
        .iter()
        .map(String::len)
        .max()
        .unwrap_or(0)
        .max(7);
    writeln!(
        out,
        "{:<name_width$}  {:>14}  {:>14}  {:>14}  {:>14}",
        "feature", "min", "max", "mean", "stddev"
    )
    .unwrap();
    for (j, name) in data.feature_names().iter().enumerate() {
        let s = FeatureStats::of(&data.column(j));
        writeln!(
            out,
            "{name:<name_width$}  {:>14.6}  {:>14.6}  {:>14.6}  {:>14.6}",
            s.min, s.max, s.mean, s.stddev
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_significant_digits() {
        assert_eq!(significant(0.002, 3), "0.00200");
        assert_eq!(significant(0.5, 3), "0.500");
        assert_eq!(significant(0.0017275, 3), "0.00173");
        assert_eq!(significant(12.345, 3), "12.3");
        assert_eq!(significant(0.0, 3), "0.00");
    }

    #[test]
    fn summary_lines() {
        let data = Dataset::from_rows(
            vec!["time".into(), "amount".into()],
            vec![
                vec![0.0, 10.0],
                vec![1.0, 20.0],
                vec![2.0, 30.0],
                vec![3.0, 40.0],
            ],
            vec![0, 0, 0, 1],
        )
        .unwrap();
        let text = inspect(&data);
        assert!(text.contains("rows: 4\n"));
        assert!(text.contains("features: 2\n"));
        assert!(text.contains("positive fraction: 0.250 (1/4)"));
        assert!(text.contains("amount"));
    }
}
