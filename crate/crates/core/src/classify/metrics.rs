//! Classification metrics: confusion counts, accuracy, sensitivity,
//! specificity, and rank-based (Mann-Whitney) AUC with midrank ties.

use serde::{Deserialize, Serialize};

/// Counts with the positive class fixed by the task (e.g. IPD in IPD-vs-VaP).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub fp: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fn_ + self.fp + self.tn
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }

    /// tp / (tp + fn); absent when there are no positives.
    pub fn sensitivity(&self) -> Option<f64> {
        let denom = self.tp + self.fn_;
        (denom > 0).then(|| self.tp as f64 / denom as f64)
    }

    /// tn / (tn + fp); absent when there are no negatives.
    pub fn specificity(&self) -> Option<f64> {
        let denom = self.tn + self.fp;
        (denom > 0).then(|| self.tn as f64 / denom as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    /// Rank AUC over positive-class scores; absent when only one class is
    /// present, never reported as 0.
    pub auc: Option<f64>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
}

/// One LOOCV fold outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectResult {
    pub subject_id: String,
    pub truth: String,
    pub predicted: String,
    pub score: f64,
}

/// Decision rule on the positive-class score; ties at 0.5 go positive.
pub fn positive_at(score: f64) -> bool {
    score >= 0.5
}

/// Mann-Whitney AUC from score ranks, midranks for ties. `None` when either
/// class is empty.
pub fn rank_auc(positive_scores: &[f64], negative_scores: &[f64]) -> Option<f64> {
    let np = positive_scores.len();
    let nn = negative_scores.len();
    if np == 0 || nn == 0 {
        return None;
    }
    let mut all: Vec<(f64, bool)> = positive_scores
        .iter()
        .map(|&s| (s, true))
        .chain(negative_scores.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        // Ranks are 1-based; the tie group [i, j) shares the midrank.
        let midrank = (i + 1 + j) as f64 / 2.0;
        let pos_in_group = all[i..j].iter().filter(|(_, p)| *p).count();
        rank_sum_pos += midrank * pos_in_group as f64;
        i = j;
    }
    let np_f = np as f64;
    Some((rank_sum_pos - np_f * (np_f + 1.0) / 2.0) / (np_f * nn as f64))
}

/// Metrics and confusion counts from per-subject fold results.
pub fn compute_metrics(
    results: &[SubjectResult],
    positive_label: &str,
) -> (Metrics, ConfusionMatrix) {
    let mut cm = ConfusionMatrix {
        tp: 0,
        fn_: 0,
        fp: 0,
        tn: 0,
    };
    let mut pos_scores = Vec::new();
    let mut neg_scores = Vec::new();
    for r in results {
        let truth_pos = r.truth == positive_label;
        let pred_pos = r.predicted == positive_label;
        match (truth_pos, pred_pos) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fn_ += 1,
            (false, true) => cm.fp += 1,
            (false, false) => cm.tn += 1,
        }
        if truth_pos {
            pos_scores.push(r.score);
        } else {
            neg_scores.push(r.score);
        }
    }
    let metrics = Metrics {
        accuracy: cm.accuracy(),
        auc: rank_auc(&pos_scores, &neg_scores),
        sensitivity: cm.sensitivity(),
        specificity: cm.specificity(),
    };
    (metrics, cm)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Expand confusion counts into synthetic per-subject rows; scores are
    /// only placeholders consistent with the predicted label.
    pub(crate) fn results_from_confusion(cm: &ConfusionMatrix) -> Vec<SubjectResult> {
        let mut rows = Vec::new();
        let mut push = |n: usize, truth: &str, predicted: &str, score: f64| {
            for k in 0..n {
                rows.push(SubjectResult {
                    subject_id: format!("{truth}-{predicted}-{k}"),
                    truth: truth.into(),
                    predicted: predicted.into(),
                    score,
                });
            }
        };
        push(cm.tp, "POS", "POS", 0.9);
        push(cm.fn_, "POS", "NEG", 0.1);
        push(cm.fp, "NEG", "POS", 0.9);
        push(cm.tn, "NEG", "NEG", 0.1);
        rows
    }

    #[test]
    fn fig3_mintc_off_arithmetic() {
        let cm = ConfusionMatrix {
            tp: 10,
            fn_: 5,
            fp: 5,
            tn: 9,
        };
        let (m, back) = compute_metrics(&results_from_confusion(&cm), "POS");
        assert_eq!(back, cm);
        assert!((m.accuracy - 0.655).abs() < 0.005);
        assert!((m.sensitivity.unwrap() - 0.667).abs() < 0.005);
        assert!((m.specificity.unwrap() - 0.643).abs() < 0.005);
    }

    #[test]
    fn fig3_maxtlsw_offon_arithmetic() {
        let cm = ConfusionMatrix {
            tp: 12,
            fn_: 3,
            fp: 3,
            tn: 11,
        };
        let (m, _) = compute_metrics(&results_from_confusion(&cm), "POS");
        assert!((m.accuracy - 0.793).abs() < 0.005);
        assert!((m.sensitivity.unwrap() - 0.80).abs() < 0.005);
        assert!((m.specificity.unwrap() - 0.786).abs() < 0.005);
    }

    #[test]
    fn auc_perfect_ranking() {
        assert_eq!(rank_auc(&[0.9, 0.8], &[0.3, 0.4]), Some(1.0));
    }

    #[test]
    fn auc_all_ties_is_half() {
        assert_eq!(rank_auc(&[0.5, 0.5, 0.5], &[0.5, 0.5]), Some(0.5));
    }

    #[test]
    fn auc_one_class_absent() {
        assert_eq!(rank_auc(&[0.9], &[]), None);
        assert_eq!(rank_auc(&[], &[0.1]), None);
    }

    #[test]
    fn auc_invariant_under_monotone_transform() {
        let pos = [0.81, 0.33, 0.92, 0.55];
        let neg = [0.10, 0.40, 0.55, 0.72];
        let base = rank_auc(&pos, &neg).unwrap();
        let square = |v: &[f64]| v.iter().map(|x| x.exp() + x * 3.0).collect::<Vec<_>>();
        let transformed = rank_auc(&square(&pos), &square(&neg)).unwrap();
        assert!((base - transformed).abs() < 1e-15);
    }

    #[test]
    fn label_swap_symmetry() {
        let cm = ConfusionMatrix {
            tp: 10,
            fn_: 5,
            fp: 4,
            tn: 10,
        };
        let rows = results_from_confusion(&cm);
        let (m_pos, _) = compute_metrics(&rows, "POS");
        let (m_neg, _) = compute_metrics(&rows, "NEG");
        assert_eq!(m_pos.sensitivity, m_neg.specificity);
        assert_eq!(m_pos.specificity, m_neg.sensitivity);
        assert!((m_pos.auc.unwrap() + m_neg.auc.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(m_pos.accuracy, m_neg.accuracy);
    }

    #[test]
    fn tie_rule_is_positive() {
        assert!(positive_at(0.5));
        assert!(positive_at(0.75));
        assert!(!positive_at(0.49));
    }
}
