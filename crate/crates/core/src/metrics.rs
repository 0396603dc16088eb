//! Binary-classification metrics with fraud (label 1) as the positive class,
//! plus table/JSON/CSV report rendering.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Schema version of the JSON report document.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

pub fn confusion_matrix(labels: &[u8], preds: &[u8]) -> Result<ConfusionMatrix> {
    if labels.len() != preds.len() {
        return Err(Error::Data(format!(
            "{} labels but {} predictions",
            labels.len(),
            preds.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::Data(
            "cannot build a confusion matrix from no rows".into(),
        ));
    }
    let mut cm = ConfusionMatrix::default();
    for (&y, &p) in labels.iter().zip(preds) {
        match (y, p) {
            (1, 1) => cm.tp += 1,
            (0, 1) => cm.fp += 1,
            (1, 0) => cm.fn_ += 1,
            (0, 0) => cm.tn += 1,
            _ => return Err(Error::Data(format!("labels must be 0/1, got ({y}, {p})"))),
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionRecallF1 {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when a denominator was zero and the value defaulted to 0.
    pub precision_degenerate: bool,
    pub recall_degenerate: bool,
    pub f1_degenerate: bool,
}

pub fn precision_recall_f1(cm: &ConfusionMatrix) -> PrecisionRecallF1 {
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            (0.0, true)
        } else {
            (num as f64 / den as f64, false)
        }
    };
    let (precision, precision_degenerate) = ratio(cm.tp, cm.tp + cm.fp);
    let (recall, recall_degenerate) = ratio(cm.tp, cm.tp + cm.fn_);
    let (f1, f1_degenerate) = if precision + recall == 0.0 {
        (0.0, true)
    } else {
        (2.0 * precision * recall / (precision + recall), false)
    };
    PrecisionRecallF1 {
        precision,
        recall,
        f1,
        precision_degenerate,
        recall_degenerate,
        f1_degenerate,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// Rows with `score >= threshold` are predicted positive. The first
    /// point uses `+inf`.
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

impl RocCurve {
    /// `threshold,fpr,tpr` rows, one per point.
    pub fn to_csv_writer(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "threshold,fpr,tpr")?;
        for p in &self.points {
            writeln!(out, "{},{},{}", p.threshold, p.fpr, p.tpr)?;
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

/// Sweeps every distinct score from high to low. Tied scores move the curve
/// in a single step, so a tie block becomes one diagonal segment.
pub fn roc_curve(labels: &[u8], scores: &[f64]) -> Result<RocCurve> {
    if labels.len() != scores.len() {
        return Err(Error::Data(format!(
            "{} labels but {} scores",
            labels.len(),
            scores.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Data("scores contain NaN".into()));
    }
    let positives = labels.iter().filter(|&&y| y == 1).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::Data(
            "roc curve needs at least one positive and one negative label".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let (p, n) = (positives as f64, negatives as f64);
    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        while i < order.len() && scores[order[i]] == threshold {
            if labels[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            threshold,
            fpr: fp as f64 / n,
            tpr: tp as f64 / p,
        });
    }
    let mut curve = RocCurve { points, auc: 0.0 };
    curve.auc = auc(&curve);
    Ok(curve)
}

/// Trapezoidal area under the `(fpr, tpr)` polyline.
pub fn auc(curve: &RocCurve) -> f64 {
    curve
        .points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum()
}

/// Scalar evaluation of one model on one labelled set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub threshold: f64,
    #[serde(flatten)]
    pub confusion: ConfusionMatrix,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
    /// Metrics whose denominator was zero.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub degenerate: Vec<String>,
    #[serde(skip)]
    pub roc: RocCurve,
}

/// Thresholds `scores` to get predictions and computes every metric.
pub fn evaluate(model: &str, labels: &[u8], scores: &[f64], threshold: f64) -> Result<EvalReport> {
    let preds: Vec<u8> = scores.iter().map(|&s| u8::from(s >= threshold)).collect();
    let confusion = confusion_matrix(labels, &preds)?;
    let prf = precision_recall_f1(&confusion);
    let roc = roc_curve(labels, scores)?;
    let degenerate = [
        ("precision", prf.precision_degenerate),
        ("recall", prf.recall_degenerate),
        ("f1", prf.f1_degenerate),
    ]
    .into_iter()
    .filter(|&(_, d)| d)
    .map(|(name, _)| name.to_string())
    .collect();
    Ok(EvalReport {
        model: model.to_string(),
        threshold,
        confusion,
        precision: prf.precision,
        recall: prf.recall,
        f1: prf.f1,
        auc: roc.auc,
        degenerate,
        roc,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Table,
    Json,
    Csv,
}

impl ReportFormat {
    pub const ALL: [ReportFormat; 3] = [ReportFormat::Table, ReportFormat::Json, ReportFormat::Csv];

    /// Also used as the report file extension.
    pub fn as_str(self) -> &'static str {
        match self {
            ReportFormat::Table => "table",
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "table" => Ok(ReportFormat::Table),
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(Error::Config(format!(
                "unknown report format '{s}' (expected table, json or csv)"
            ))),
        }
    }
}

/// Decimal places used by the text table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableDecimals {
    pub prf: usize,
    pub auc: usize,
}

impl Default for TableDecimals {
    fn default() -> Self {
        TableDecimals { prf: 2, auc: 3 }
    }
}

#[derive(Serialize, Deserialize)]
struct ReportDocument {
    schema_version: u32,
    models: Vec<EvalReport>,
}

/// Parses a JSON report produced by [`render_report`].
pub fn parse_json_report(text: &str) -> Result<Vec<EvalReport>> {
    let doc: ReportDocument = serde_json::from_str(text)?;
    if doc.schema_version != REPORT_SCHEMA_VERSION {
        return Err(Error::Data(format!(
            "report schema version {} is not supported",
            doc.schema_version
        )));
    }
    Ok(doc.models)
}

/// One row per model. The table rounds half-to-even; JSON and CSV carry
/// every value at full precision.
pub fn render_report(
    reports: &[EvalReport],
    format: ReportFormat,
    decimals: TableDecimals,
) -> Result<String> {
    if reports.is_empty() {
        return Err(Error::Data("no model reports to render".into()));
    }
    match format {
        ReportFormat::Table => Ok(render_table(reports, decimals)),
        ReportFormat::Json => {
            let doc = ReportDocument {
                schema_version: REPORT_SCHEMA_VERSION,
                models: reports.to_vec(),
            };
            let mut text = serde_json::to_string_pretty(&doc)?;
            text.push('\n');
            Ok(text)
        }
        ReportFormat::Csv => {
            let mut out = String::from("model,precision,recall,f1,auc,tp,fp,fn,tn,threshold\n");
            for r in reports {
                let c = &r.confusion;
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    r.model,
                    r.precision,
                    r.recall,
                    r.f1,
                    r.auc,
                    c.tp,
                    c.fp,
                    c.fn_,
                    c.tn,
                    r.threshold
                )
                .unwrap();
            }
            Ok(out)
        }
    }
}

fn render_table(reports: &[EvalReport], decimals: TableDecimals) -> String {
    let header = ["model", "precision", "recall", "f1", "auc"];
    let rows: Vec<[String; 5]> = reports
        .iter()
        .map(|r| {
            [
                r.model.clone(),
                round_half_even(r.precision, decimals.prf),
                round_half_even(r.recall, decimals.prf),
                round_half_even(r.f1, decimals.prf),
                round_half_even(r.auc, decimals.auc),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[&str]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        out.push_str(padded.join("  ").trim_end());
        out.push('\n');
    };
    line(&header);
    for row in &rows {
        line(&row.iter().map(String::as_str).collect::<Vec<_>>());
    }
    out
}

/// Rounds the shortest round-trip decimal form of `x` to `decimals` places,
/// ties to even. `0.125` gives `"0.12"`, `0.135` gives `"0.14"`.
pub fn round_half_even(x: f64, decimals: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:e}", x.abs());
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i64 = exp.parse().expect("integer exponent");
    let mut digits: Vec<u8> = mantissa
        .bytes()
        .filter(u8::is_ascii_digit)
        .map(|b| b - b'0')
        .collect();
    // digits[..point] is the integer part
    let mut point = exp + 1;
    if point < 1 {
        let pad = (1 - point) as usize;
        digits.splice(0..0, std::iter::repeat_n(0, pad));
        point = 1;
    }
    let point = point as usize;
    let keep = point + decimals;
    if digits.len() < keep + 1 {
        digits.resize(keep + 1, 0);
    }
    let rest = &digits[keep..];
    let round_up = match rest[0] {
        d if d > 5 => true,
        d if d < 5 => false,
        _ => rest[1..].iter().any(|&d| d != 0) || digits[keep - 1] % 2 == 1,
    };
    let mut kept = digits[..keep].to_vec();
    let mut int_len = point;
    if round_up {
        let mut i = kept.len();
        loop {
            if i == 0 {
                kept.insert(0, 1);
                int_len += 1;
                break;
            }
            i -= 1;
            if kept[i] == 9 {
                kept[i] = 0;
            } else {
                kept[i] += 1;
                break;
            }
        }
    }
    let int_part: String = kept[..int_len]
        .iter()
        .map(|d| char::from(b'0' + d))
        .collect();
    let int_part = int_part.trim_start_matches('0');
    let int_part = if int_part.is_empty() { "0" } else { int_part };
    let frac: String = kept[int_len..]
        .iter()
        .map(|d| char::from(b'0' + d))
        .collect();
    let negative = x < 0.0 && kept.iter().any(|&d| d != 0);
    let sign = if negative { "-" } else { "" };
    if decimals == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(curve: &RocCurve) -> Vec<(f64, f64)> {
        curve.points.iter().map(|p| (p.fpr, p.tpr)).collect()
    }

    #[test]
    fn confusion_examples() {
        let cm = confusion_matrix(&[1, 1, 0, 0], &[1, 0, 0, 1]).unwrap();
        assert_eq!(
            cm,
            ConfusionMatrix {
                tp: 1,
                fp: 1,
                fn_: 1,
                tn: 1
            }
        );
        let cm = confusion_matrix(&[1, 0, 1], &[1, 0, 1]).unwrap();
        assert_eq!((cm.fp, cm.fn_), (0, 0));
        let cm = confusion_matrix(&[1, 0, 1], &[0, 0, 0]).unwrap();
        assert_eq!((cm.tp, cm.fp), (0, 0));
        assert!(confusion_matrix(&[1], &[1, 0]).is_err());
        assert!(confusion_matrix(&[], &[]).is_err());
    }

    #[test]
    fn prf_arithmetic() {
        let m = precision_recall_f1(&ConfusionMatrix {
            tp: 50,
            fp: 10,
            fn_: 20,
            tn: 0,
        });
        assert!((m.precision - 50.0 / 60.0).abs() < 1e-15);
        assert!((m.recall - 50.0 / 70.0).abs() < 1e-15);
        assert!((m.f1 - 100.0 / 130.0).abs() < 1e-15);
        assert_eq!(round_half_even(m.precision, 4), "0.8333");
        assert_eq!(round_half_even(m.recall, 4), "0.7143");
        assert_eq!(round_half_even(m.f1, 4), "0.7692");
    }

    #[test]
    fn prf_degenerate() {
        let m = precision_recall_f1(&ConfusionMatrix {
            tp: 0,
            fp: 0,
            fn_: 3,
            tn: 5,
        });
        assert_eq!(m.precision, 0.0);
        assert!(m.precision_degenerate);
        assert!(!m.recall_degenerate);
        assert!(m.f1_degenerate);
    }

    #[test]
    fn f1_of_equal_p_and_r() {
        let m = precision_recall_f1(&ConfusionMatrix {
            tp: 3,
            fp: 1,
            fn_: 1,
            tn: 0,
        });
        assert_eq!(m.precision, m.recall);
        assert!((m.f1 - m.precision).abs() < 1e-15);
    }

    #[test]
    fn roc_worked_example() {
        let c = roc_curve(&[1, 0, 1, 0], &[0.9, 0.8, 0.7, 0.1]).unwrap();
        assert_eq!(
            pts(&c),
            [(0.0, 0.0), (0.0, 0.5), (0.5, 0.5), (0.5, 1.0), (1.0, 1.0)]
        );
        assert_eq!(c.auc, 0.75);
        assert_eq!(c.points[0].threshold, f64::INFINITY);
        assert_eq!(c.points[4].threshold, 0.1);
    }

    #[test]
    fn roc_perfect_and_reversed() {
        let c = roc_curve(&[0, 0, 1, 1], &[0.1, 0.2, 0.8, 0.9]).unwrap();
        assert!(pts(&c).contains(&(0.0, 1.0)));
        assert_eq!(c.auc, 1.0);
        let r = roc_curve(&[1, 1, 0, 0], &[0.1, 0.2, 0.8, 0.9]).unwrap();
        assert_eq!(r.auc, 0.0);
    }

    #[test]
    fn roc_single_tie_block() {
        let c = roc_curve(&[0, 1, 1, 0, 1], &[0.3; 5]).unwrap();
        assert_eq!(pts(&c), [(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(c.auc, 0.5);
    }

    #[test]
    fn roc_errors() {
        assert!(roc_curve(&[1, 1], &[0.1, 0.2]).is_err());
        assert!(roc_curve(&[1, 0], &[0.1]).is_err());
        assert!(roc_curve(&[1, 0], &[0.1, f64::NAN]).is_err());
    }

    #[test]
    fn roc_csv() {
        let c = roc_curve(&[1, 0], &[0.9, 0.2]).unwrap();
        let mut buf = Vec::new();
        c.to_csv_writer(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "threshold,fpr,tpr\ninf,0,0\n0.9,0,1\n0.2,1,1\n"
        );
    }

    #[test]
    fn half_even_rounding() {
        assert_eq!(round_half_even(0.8612, 2), "0.86");
        assert_eq!(round_half_even(0.8349, 2), "0.83");
        assert_eq!(round_half_even(0.98912, 3), "0.989");
        assert_eq!(round_half_even(0.125, 2), "0.12");
        assert_eq!(round_half_even(0.135, 2), "0.14");
        assert_eq!(round_half_even(0.995, 2), "1.00");
        assert_eq!(round_half_even(0.9951, 2), "1.00");
        assert_eq!(round_half_even(1.0, 3), "1.000");
        assert_eq!(round_half_even(0.0, 2), "0.00");
        assert_eq!(round_half_even(0.0004, 3), "0.000");
        assert_eq!(round_half_even(0.0005, 3), "0.000");
        assert_eq!(round_half_even(0.0015, 3), "0.002");
        assert_eq!(round_half_even(2.5, 0), "2");
        assert_eq!(round_half_even(123.456, 1), "123.5");
        assert_eq!(round_half_even(-0.004, 2), "0.00");
        assert_eq!(round_half_even(-1.25, 1), "-1.2");
        assert_eq!(round_half_even(1e-20, 2), "0.00");
    }

    fn sample_report() -> EvalReport {
        EvalReport {
            model: "logistic regression".into(),
            threshold: 0.5,
            confusion: ConfusionMatrix {
                tp: 91,
                fp: 14,
                fn_: 18,
                tn: 120,
            },
            precision: 0.8612,
            recall: 0.8349,
            f1: 0.848_030_018_761_726,
            auc: 0.98912,
            degenerate: vec![],
            roc: RocCurve::default(),
        }
    }

    #[test]
    fn table_rounds_half_even() {
        let text = render_report(
            &[sample_report()],
            ReportFormat::Table,
            TableDecimals::default(),
        )
        .unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        let cells: Vec<&str> = lines[1]
            .split("  ")
            .map(str::trim)
            .filter(|c| !c.is_empty())
            .collect();
        assert_eq!(
            cells,
            ["logistic regression", "0.86", "0.83", "0.85", "0.989"]
        );
        assert!(lines[0].starts_with("model"));
    }

    #[test]
    fn json_round_trips_without_loss() {
        let mut b = sample_report();
        b.model = "decision tree".into();
        b.auc = 0.1 + 0.2;
        b.degenerate = vec!["precision".into()];
        let reports = vec![sample_report(), b];
        let text = render_report(&reports, ReportFormat::Json, TableDecimals::default()).unwrap();
        let back = parse_json_report(&text).unwrap();
        assert_eq!(back, reports);
        assert_eq!(back[1].auc.to_bits(), (0.1f64 + 0.2).to_bits());
    }

    #[test]
    fn csv_carries_full_precision() {
        let text = render_report(
            &[sample_report()],
            ReportFormat::Csv,
            TableDecimals::default(),
        )
        .unwrap();
        assert_eq!(
            text,
            "model,precision,recall,f1,auc,tp,fp,fn,tn,threshold\n\
             logistic regression,0.8612,0.8349,0.848030018761726,0.98912,91,14,18,120,0.5\n"
        );
    }

    #[test]
    fn empty_report_list_is_an_error() {
        assert!(render_report(&[], ReportFormat::Table, TableDecimals::default()).is_err());
    }

    #[test]
    fn evaluate_combines_everything() {
        let r = evaluate("m", &[1, 0, 1, 0], &[0.9, 0.8, 0.7, 0.1], 0.75).unwrap();
        assert_eq!(
            r.confusion,
            ConfusionMatrix {
                tp: 1,
                fp: 1,
                fn_: 1,
                tn: 1
            }
        );
        assert_eq!(r.auc, 0.75);
        assert_eq!(r.roc.points.len(), 5);
        assert!(r.degenerate.is_empty());
    }
}
