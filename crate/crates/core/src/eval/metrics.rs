use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};

/// Counts with class 1 (numeric sarcasm) as the positive class.
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

    pub fn add(&self, other: &ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tp + other.tp,
            fp: self.fp + other.fp,
            fn_: self.fn_ + other.fn_,
            tn: self.tn + other.tn,
        }
    }
}

pub fn confusion(preds: &[Label], golds: &[Label]) -> Result<ConfusionMatrix> {
    if preds.len() != golds.len() {
        return Err(Error::invalid(format!("{} predictions for {} gold labels", preds.len(), golds.len())));
    }
    let mut cm = ConfusionMatrix::default();
    for (p, g) in preds.iter().zip(golds) {
        match (p.is_positive(), g.is_positive()) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fp += 1,
            (false, true) => cm.fn_ += 1,
            (false, false) => cm.tn += 1,
        }
    }
    Ok(cm)
}

/// `a / b`, or 0 when `b` is 0.
fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Harmonic mean; 0 when both are 0.
pub fn f_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

impl ClassMetrics {
    pub fn new(precision: f64, recall: f64, support: usize) -> Self {
        ClassMetrics {
            precision,
            recall,
            f1: f_score(precision, recall),
            support,
        }
    }
}

/// Metrics for class 1 and class 0, in that order.
pub fn prf_per_class(cm: &ConfusionMatrix) -> (ClassMetrics, ClassMetrics) {
    let one = ClassMetrics::new(ratio(cm.tp, cm.tp + cm.fp), ratio(cm.tp, cm.tp + cm.fn_), cm.tp + cm.fn_);
    let zero = ClassMetrics::new(ratio(cm.tn, cm.tn + cm.fn_), ratio(cm.tn, cm.tn + cm.fp), cm.tn + cm.fp);
    (one, zero)
}

/// Support-weighted mean of a class-1 and a class-0 metric.
pub fn weighted_average(metric1: f64, metric0: f64, support1: usize, support0: usize) -> Result<f64> {
    let total = support1 + support0;
    if total == 0 {
        return Err(Error::invalid("weighted average over zero support"));
    }
    Ok((metric1 * support1 as f64 + metric0 * support0 as f64) / total as f64)
}

/// Rounds half away from zero to two decimals, tolerating binary
/// representation error just below the midpoint.
pub fn round2(x: f64) -> f64 {
    let scaled = x * 100.0;
    let nudged = scaled + scaled.signum() * 1e-9;
    nudged.round() / 100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub sarcastic: ClassMetrics,
    pub non_sarcastic: ClassMetrics,
    pub precision_avg: f64,
    pub recall_avg: f64,
    pub f1_avg: f64,
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
}

impl MetricsReport {
    pub fn from_confusion(cm: ConfusionMatrix) -> Result<Self> {
        let (one, zero) = prf_per_class(&cm);
        let w = |a: f64, b: f64| weighted_average(a, b, one.support, zero.support);
        Ok(MetricsReport {
            precision_avg: w(one.precision, zero.precision)?,
            recall_avg: w(one.recall, zero.recall)?,
            f1_avg: w(one.f1, zero.f1)?,
            accuracy: ratio(cm.tp + cm.tn, cm.total()),
            sarcastic: one,
            non_sarcastic: zero,
            confusion: cm,
        })
    }

    pub fn from_predictions(preds: &[Label], golds: &[Label]) -> Result<Self> {
        Self::from_confusion(confusion(preds, golds)?)
    }

    /// Unweighted mean of every metric; supports and confusion counts are summed.
    pub fn mean(reports: &[MetricsReport]) -> Result<Self> {
        if reports.is_empty() {
            return Err(Error::invalid("no reports to average"));
        }
        let k = reports.len() as f64;
        let avg = |f: &dyn Fn(&MetricsReport) -> f64| reports.iter().map(f).sum::<f64>() / k;
        let class = |f: &dyn Fn(&MetricsReport) -> ClassMetrics| ClassMetrics {
            precision: avg(&|r| f(r).precision),
            recall: avg(&|r| f(r).recall),
            f1: avg(&|r| f(r).f1),
            support: reports.iter().map(|r| f(r).support).sum(),
        };
        Ok(MetricsReport {
            sarcastic: class(&|r| r.sarcastic),
            non_sarcastic: class(&|r| r.non_sarcastic),
            precision_avg: avg(&|r| r.precision_avg),
            recall_avg: avg(&|r| r.recall_avg),
            f1_avg: avg(&|r| r.f1_avg),
            accuracy: avg(&|r| r.accuracy),
            confusion: reports.iter().fold(ConfusionMatrix::default(), |a, r| a.add(&r.confusion)),
        })
    }

    pub const TABLE_HEADER: &'static str = "P1    P0    P(avg) R1    R0    R(avg) F1    F0    F(avg)";

    /// One table row, two decimals, half-up rounding.
    pub fn table_row(&self) -> String {
        let v = [
            self.sarcastic.precision,
            self.non_sarcastic.precision,
            self.precision_avg,
            self.sarcastic.recall,
            self.non_sarcastic.recall,
            self.recall_avg,
            self.sarcastic.f1,
            self.non_sarcastic.f1,
            self.f1_avg,
        ];
        let cells: Vec<String> = v
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let width = if i % 3 == 2 { 6 } else { 5 };
                format!("{:<width$.2}", round2(*x))
            })
            .collect();
        cells.join(" ").trim_end().to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(v: &[u8]) -> Vec<Label> {
        v.iter().map(|&b| Label::from_bool(b == 1)).collect()
    }

    #[test]
    fn confusion_cases() {
        let cm = confusion(&labels(&[1, 0, 1]), &labels(&[1, 0, 1])).unwrap();
        assert_eq!((cm.tp, cm.tn, cm.fp, cm.fn_), (2, 1, 0, 0));
        let cm = confusion(&labels(&[0; 5]), &labels(&[1; 5])).unwrap();
        assert_eq!(cm.fn_, 5);
        assert_eq!(confusion(&[], &[]).unwrap(), ConfusionMatrix::default());
        assert!(confusion(&labels(&[1]), &[]).is_err());
    }

    #[test]
    fn per_class_cases() {
        let (one, _) = prf_per_class(&ConfusionMatrix { tp: 2, ..Default::default() });
        assert_eq!((one.precision, one.recall, one.f1), (1.0, 1.0, 1.0));
        let (one, _) = prf_per_class(&ConfusionMatrix { fn_: 3, ..Default::default() });
        assert_eq!((one.precision, one.recall, one.f1), (0.0, 0.0, 0.0));
        assert!((f_score(0.88, 0.71) - 0.79).abs() < 0.01);
    }

    #[test]
    fn weighted_cases() {
        assert!((weighted_average(0.19, 0.98, 1843, 8317).unwrap() - 0.84).abs() < 0.01);
        assert!((weighted_average(0.88, 0.94, 1843, 8317).unwrap() - 0.93).abs() < 0.01);
        assert!((weighted_average(0.33, 0.23, 1843, 8317).unwrap() - 0.25).abs() < 0.01);
        assert_eq!(weighted_average(0.5, 0.5, 3, 9).unwrap(), 0.5);
        assert!(weighted_average(0.5, 0.5, 0, 0).is_err());
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(round2(0.835), 0.84);
        assert_eq!(round2(0.8367), 0.84);
        assert_eq!(round2(0.125), 0.13);
        assert_eq!(round2(0.1249), 0.12);
        assert_eq!(round2(1.0), 1.0);
    }

    #[test]
    fn report_row_layout() {
        let r = MetricsReport::from_predictions(&labels(&[1, 0, 1, 0]), &labels(&[1, 0, 0, 0])).unwrap();
        assert_eq!(r.sarcastic.support, 1);
        assert_eq!(r.non_sarcastic.support, 3);
        assert_eq!(r.accuracy, 0.75);
        assert_eq!(r.table_row().split_whitespace().count(), 9);
        assert!(MetricsReport::from_predictions(&[], &[]).is_err());
    }

    #[test]
    fn fold_mean_is_unweighted() {
        let a = MetricsReport::from_predictions(&labels(&[1, 1]), &labels(&[1, 0])).unwrap();
        let b = MetricsReport::from_predictions(&labels(&[1, 0]), &labels(&[1, 0])).unwrap();
        let m = MetricsReport::mean(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(m.accuracy, (a.accuracy + b.accuracy) / 2.0);
        assert_eq!(m.confusion.total(), 4);
    }

    proptest! {
        #[test]
        fn weighted_average_is_convex(m1 in 0.0f64..1.0, m0 in 0.0f64..1.0, s1 in 0usize..10_000, s0 in 1usize..10_000) {
            let w = weighted_average(m1, m0, s1, s0).unwrap();
            prop_assert!(w >= m1.min(m0) - 1e-15 && w <= m1.max(m0) + 1e-15);
        }

        #[test]
        fn metrics_in_unit_interval(p in prop::collection::vec(0u8..2, 1..60), g in prop::collection::vec(0u8..2, 1..60)) {
            let n = p.len().min(g.len());
            let r = MetricsReport::from_predictions(&labels(&p[..n]), &labels(&g[..n])).unwrap();
            for x in [r.sarcastic.precision, r.sarcastic.recall, r.sarcastic.f1, r.non_sarcastic.f1, r.f1_avg, r.precision_avg, r.recall_avg, r.accuracy] {
                prop_assert!((0.0..=1.0).contains(&x));
            }
            prop_assert_eq!(r.confusion.total(), n);
        }
    }
}
