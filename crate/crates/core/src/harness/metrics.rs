//! Confusion-table metrics and ROC analysis.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionCounts {
    /// Verdict positive when `score >= threshold`.
    pub fn from_scores(scores: &[f64], labels: &[bool], threshold: f64) -> ConfusionCounts {
        let mut c = ConfusionCounts::default();
        for (&s, &y) in scores.iter().zip(labels) {
            match (s >= threshold, y) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total())
    }

    /// 0 when nothing was predicted positive.
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    /// 0 when there are no positives.
    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// Harmonic mean of precision and recall, as `2TP/(2TP+FP+FN)` so the
    /// result is a single rounding; 0 when `TP = 0`.
    pub fn f1(&self) -> f64 {
        if self.tp == 0 {
            0.0
        } else {
            ratio(2 * self.tp, 2 * self.tp + self.fp + self.fn_)
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("ROC needs both classes: {positives} positive, {negatives} negative labels")]
pub struct DegenerateLabels {
    pub positives: usize,
    pub negatives: usize,
}

/// ROC points from thresholds `+∞`, each distinct score descending, and
/// `−∞`; AUC by the trapezoid rule (tied pairs count one half).
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<(Vec<(f64, f64)>, f64), DegenerateLabels> {
    assert_eq!(scores.len(), labels.len(), "scores and labels differ in length");
    let positives = labels.iter().filter(|&&y| y).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(DegenerateLabels { positives, negatives });
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / negatives as f64, tp as f64 / positives as f64));
    }
    points.push((1.0, 1.0));
    let auc = points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum();
    Ok((points, auc))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub counts: ConfusionCounts,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub threshold: f64,
    /// Absent when one class is missing.
    pub roc: Option<Vec<(f64, f64)>>,
    pub auc: Option<f64>,
}

impl MetricsReport {
    pub fn new(scores: &[f64], labels: &[bool], threshold: f64) -> MetricsReport {
        let counts = ConfusionCounts::from_scores(scores, labels, threshold);
        let (roc, auc) = match roc_auc(scores, labels) {
            Ok((r, a)) => (Some(r), Some(a)),
            Err(_) => (None, None),
        };
        MetricsReport {
            counts,
            accuracy: counts.accuracy(),
            precision: counts.precision(),
            recall: counts.recall(),
            f1: counts.f1(),
            threshold,
            roc,
            auc,
        }
    }

    pub fn roc_csv(&self) -> String {
        let mut out = String::from("fpr,tpr\n");
        for (f, t) in self.roc.iter().flatten() {
            out.push_str(&format!("{f},{t}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(tp: usize, fp: usize, fn_: usize, tn: usize) -> ConfusionCounts {
        ConfusionCounts { tp, fp, fn_, tn }
    }

    #[test]
    fn metric_examples() {
        let c = counts(3, 1, 1, 5);
        assert_eq!((c.accuracy(), c.precision(), c.recall(), c.f1()), (0.8, 0.75, 0.75, 0.75));
        let c = counts(0, 0, 4, 6);
        assert_eq!((c.precision(), c.recall(), c.f1()), (0.0, 0.0, 0.0));
        let c = counts(1, 0, 0, 0);
        assert_eq!((c.accuracy(), c.precision(), c.recall(), c.f1()), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn auc_examples() {
        let auc = |s: &[f64], y: &[bool]| roc_auc(s, y).unwrap().1;
        assert_eq!(auc(&[0.9, 0.8, 0.3, 0.1], &[true, true, false, false]), 1.0);
        assert_eq!(auc(&[0.9, 0.6, 0.4, 0.1], &[true, false, true, false]), 0.75);
        assert_eq!(auc(&[0.5; 4], &[true, false, true, false]), 0.5);
        assert!(roc_auc(&[0.1, 0.2], &[true, true]).is_err());
        let (roc, _) = roc_auc(&[0.3, 0.3, 0.7], &[false, true, true]).unwrap();
        assert_eq!(roc.first(), Some(&(0.0, 0.0)));
        assert_eq!(roc.last(), Some(&(1.0, 1.0)));
        assert!(roc.windows(2).all(|w| w[0].0 <= w[1].0));
    }
}
