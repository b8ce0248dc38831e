//! Subject-wise leave-one-out cross-validation.
//!
//! Every fold re-featurizes through the supplied [`FoldFeaturizer`] so that
//! anything fitted on data (descriptor grids in particular) is fitted on the
//! training subjects only. A structural leakage check runs in each fold and
//! failing it aborts the evaluation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{compute_metrics, positive_at, ConfusionMatrix, Metrics, SubjectResult};
use super::{predict_score, train_forest, ClassifyError, ForestParams};

#[derive(Debug, Clone)]
pub struct CohortSubject {
    pub id: String,
    pub positive: bool,
}

/// The two-class cohort of one task, in evaluation order.
#[derive(Debug, Clone)]
pub struct Cohort {
    pub subjects: Vec<CohortSubject>,
    pub positive_label: String,
    pub negative_label: String,
}

impl Cohort {
    fn label_of(&self, positive: bool) -> &str {
        if positive {
            &self.positive_label
        } else {
            &self.negative_label
        }
    }
}

/// Feature rows for one fold: one row per training subject (same order as
/// the given indices) plus the held-out subject's row.
#[derive(Debug, Clone)]
pub struct FoldFeatures {
    pub train: Vec<Vec<f64>>,
    pub test: Vec<f64>,
}

/// Produces fold features. Implementations must derive anything data-fitted
/// from the `train` indices alone.
pub trait FoldFeaturizer: Sync {
    fn featurize(&self, train: &[usize], test: usize) -> Result<FoldFeatures, ClassifyError>;
}

/// Structural no-leakage assertion: the held-out subject must not appear
/// among the training ids.
pub fn leakage_check(train_ids: &[&str], held_out: &str) -> Result<(), ClassifyError> {
    if train_ids.contains(&held_out) {
        return Err(ClassifyError::Leakage(held_out.to_string()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub positive_label: String,
    pub negative_label: String,
    pub folds: usize,
    pub leakage_checks: usize,
    pub per_subject: Vec<SubjectResult>,
    pub metrics: Metrics,
    pub confusion: ConfusionMatrix,
}

/// Run one fold per subject: featurize on the rest, train, score the
/// held-out subject. Folds are independent and run in parallel; the report
/// is assembled in cohort order regardless of scheduling.
pub fn loocv(
    cohort: &Cohort,
    featurizer: &dyn FoldFeaturizer,
    params: &ForestParams,
) -> Result<EvaluationReport, ClassifyError> {
    let n = cohort.subjects.len();
    if n < 2 {
        return Err(ClassifyError::Validation(
            "LOOCV needs at least two subjects".into(),
        ));
    }

    let per_subject: Vec<SubjectResult> = (0..n)
        .into_par_iter()
        .map(|k| -> Result<SubjectResult, ClassifyError> {
            let held_out = &cohort.subjects[k];
            let train_idx: Vec<usize> = (0..n).filter(|&i| i != k).collect();
            let train_ids: Vec<&str> = train_idx
                .iter()
                .map(|&i| cohort.subjects[i].id.as_str())
                .collect();
            leakage_check(&train_ids, &held_out.id)?;

            let features = featurizer.featurize(&train_idx, k)?;
            if features.train.len() != train_idx.len() {
                return Err(ClassifyError::Validation(format!(
                    "featurizer returned {} training rows for {} subjects",
                    features.train.len(),
                    train_idx.len()
                )));
            }
            let y: Vec<bool> = train_idx
                .iter()
                .map(|&i| cohort.subjects[i].positive)
                .collect();
            let model = train_forest(&features.train, &y, params)?;
            let score = predict_score(&model, &features.test)?;
            Ok(SubjectResult {
                subject_id: held_out.id.clone(),
                truth: cohort.label_of(held_out.positive).to_string(),
                predicted: cohort.label_of(positive_at(score)).to_string(),
                score,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let (metrics, confusion) = compute_metrics(&per_subject, &cohort.positive_label);
    Ok(EvaluationReport {
        positive_label: cohort.positive_label.clone(),
        negative_label: cohort.negative_label.clone(),
        folds: n,
        leakage_checks: n,
        per_subject,
        metrics,
        confusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Precomputed rows, no data-dependent fitting.
    struct SliceFeaturizer {
        rows: Vec<Vec<f64>>,
    }

    impl FoldFeaturizer for SliceFeaturizer {
        fn featurize(&self, train: &[usize], test: usize) -> Result<FoldFeatures, ClassifyError> {
            Ok(FoldFeatures {
                train: train.iter().map(|&i| self.rows[i].clone()).collect(),
                test: self.rows[test].clone(),
            })
        }
    }

    fn toy_cohort(n_pos: usize, n_neg: usize) -> (Cohort, SliceFeaturizer) {
        let mut subjects = Vec::new();
        let mut rows = Vec::new();
        for i in 0..n_pos {
            subjects.push(CohortSubject {
                id: format!("P{i:02}"),
                positive: true,
            });
            rows.push(vec![1.0 + i as f64 * 0.01, 0.5]);
        }
        for i in 0..n_neg {
            subjects.push(CohortSubject {
                id: format!("N{i:02}"),
                positive: false,
            });
            rows.push(vec![-1.0 - i as f64 * 0.01, -0.5]);
        }
        (
            Cohort {
                subjects,
                positive_label: "IPD".into(),
                negative_label: "VaP".into(),
            },
            SliceFeaturizer { rows },
        )
    }

    #[test]
    fn four_subject_toy_runs_four_folds() {
        let (cohort, feats) = toy_cohort(2, 2);
        let params = ForestParams {
            n_trees: 25,
            ..Default::default()
        };
        let report = loocv(&cohort, &feats, &params).unwrap();
        assert_eq!(report.folds, 4);
        assert_eq!(report.leakage_checks, 4);
        assert_eq!(report.per_subject.len(), 4);
    }

    #[test]
    fn fold_count_matches_cohort_sizes() {
        let (cohort, feats) = toy_cohort(15, 14);
        let params = ForestParams {
            n_trees: 15,
            ..Default::default()
        };
        let report = loocv(&cohort, &feats, &params).unwrap();
        assert_eq!(report.folds, 29);
        // Separable toy features classify perfectly.
        assert_eq!(report.metrics.accuracy, 1.0);
        assert_eq!(report.metrics.auc, Some(1.0));
    }

    #[test]
    fn metrics_recomputable_from_rows() {
        let (cohort, feats) = toy_cohort(5, 4);
        let params = ForestParams {
            n_trees: 10,
            ..Default::default()
        };
        let report = loocv(&cohort, &feats, &params).unwrap();
        let (again, cm) = compute_metrics(&report.per_subject, &report.positive_label);
        assert_eq!(again, report.metrics);
        assert_eq!(cm, report.confusion);
    }

    #[test]
    fn leakage_check_rejects_contaminated_training_set() {
        assert!(leakage_check(&["a", "b"], "c").is_ok());
        assert!(matches!(
            leakage_check(&["a", "b", "c"], "c"),
            Err(ClassifyError::Leakage(s)) if s == "c"
        ));
    }

    #[test]
    fn loocv_is_deterministic() {
        let (cohort, feats) = toy_cohort(4, 4);
        let params = ForestParams {
            n_trees: 30,
            ..Default::default()
        };
        let a = loocv(&cohort, &feats, &params).unwrap();
        let b = loocv(&cohort, &feats, &params).unwrap();
        assert_eq!(a, b);
    }
}
