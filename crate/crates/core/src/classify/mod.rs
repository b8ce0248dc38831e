//! Deterministic seeded random forest, subject-wise LOOCV driver, and
//! classification metrics.
//!
//! Determinism contract: every tree draws its bootstrap sample and feature
//! candidates from an RNG stream derived from (seed, tree index), so results
//! are identical regardless of how trees or folds are scheduled.

mod loocv;
mod metrics;
mod tree;

pub use loocv::{
    leakage_check, loocv, Cohort, CohortSubject, EvaluationReport, FoldFeatures, FoldFeaturizer,
};
pub use metrics::{
    compute_metrics, positive_at, rank_auc, ConfusionMatrix, Metrics, SubjectResult,
};

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use tree::{DecisionTree, TreeConfig};

#[derive(Error, Debug)]
pub enum ClassifyError {
    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),
    #[error("feature matrix has no usable features")]
    EmptyFeatures,
    #[error("feature vector has length {got}, expected {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("features must be finite: {0}")]
    NonFinite(String),
    #[error("invalid forest parameters: {0}")]
    InvalidParams(String),
    #[error("leakage: held-out subject '{0}' present in training inputs")]
    Leakage(String),
    #[error("featurization failed: {0}")]
    Featurize(String),
    #[error("validation error: {0}")]
    Validation(String),
}

/// How many features each split may consider.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxFeatures {
    Sqrt,
    All,
    Fixed(usize),
}

impl Serialize for MaxFeatures {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for MaxFeatures {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for MaxFeatures {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaxFeatures::Sqrt => f.write_str("sqrt"),
            MaxFeatures::All => f.write_str("all"),
            MaxFeatures::Fixed(k) => write!(f, "{k}"),
        }
    }
}

impl FromStr for MaxFeatures {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sqrt" => Ok(MaxFeatures::Sqrt),
            "all" => Ok(MaxFeatures::All),
            other => other.parse::<usize>().map(MaxFeatures::Fixed).map_err(|_| {
                format!("max_features must be 'sqrt', 'all', or an integer, got '{other}'")
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_features: MaxFeatures,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 500,
            max_features: MaxFeatures::Sqrt,
            min_samples_leaf: 1,
            max_depth: None,
            seed: 42,
        }
    }
}

/// Trained ensemble; immutable and safe to share across threads.
#[derive(Debug, Clone)]
pub struct RandomForestModel {
    trees: Vec<DecisionTree>,
    feature_count: usize,
}

impl RandomForestModel {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }
}

/// Train a forest of `params.n_trees` trees, each on a bootstrap resample
/// of the training set. Deterministic given (x, y, params).
pub fn train_forest(
    x: &[Vec<f64>],
    y: &[bool],
    params: &ForestParams,
) -> Result<RandomForestModel, ClassifyError> {
    let n = x.len();
    if n == 0 || x[0].is_empty() {
        return Err(ClassifyError::EmptyFeatures);
    }
    if y.len() != n {
        return Err(ClassifyError::Validation(format!(
            "{} label(s) for {} row(s)",
            y.len(),
            n
        )));
    }
    let n_features = x[0].len();
    for (i, row) in x.iter().enumerate() {
        if row.len() != n_features {
            return Err(ClassifyError::DimensionMismatch {
                got: row.len(),
                expected: n_features,
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(ClassifyError::NonFinite(format!("row {i}")));
        }
    }
    let positives = y.iter().filter(|&&b| b).count();
    if positives == 0 || positives == n {
        return Err(ClassifyError::DegenerateLabels(
            "training set contains a single class".into(),
        ));
    }
    if params.n_trees == 0 {
        return Err(ClassifyError::InvalidParams("n_trees must be >= 1".into()));
    }
    if params.min_samples_leaf == 0 {
        return Err(ClassifyError::InvalidParams(
            "min_samples_leaf must be >= 1".into(),
        ));
    }
    let candidate_features = match params.max_features {
        MaxFeatures::Sqrt => ((n_features as f64).sqrt().floor() as usize).max(1),
        MaxFeatures::All => n_features,
        MaxFeatures::Fixed(k) => {
            if k == 0 || k > n_features {
                return Err(ClassifyError::InvalidParams(format!(
                    "fixed max_features {k} outside 1..={n_features}"
                )));
            }
            k
        }
    };
    let cfg = TreeConfig {
        candidate_features,
        min_samples_leaf: params.min_samples_leaf,
        max_depth: params.max_depth,
    };

    let trees: Vec<DecisionTree> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            // Counter-based stream: tree t always sees the same draws no
            // matter which thread runs it.
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(t as u64 + 1);
            let bootstrap: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            DecisionTree::grow(x, y, bootstrap, &cfg, &mut rng)
        })
        .collect();

    Ok(RandomForestModel {
        trees,
        feature_count: n_features,
    })
}

/// Positive-class probability: mean over trees of the leaf's positive
/// fraction. The label rule is `score >= 0.5 -> positive`.
pub fn predict_score(model: &RandomForestModel, row: &[f64]) -> Result<f64, ClassifyError> {
    if row.len() != model.feature_count {
        return Err(ClassifyError::DimensionMismatch {
            got: row.len(),
            expected: model.feature_count,
        });
    }
    let sum: f64 = model
        .trees
        .iter()
        .map(|t| t.leaf_positive_fraction(row))
        .sum();
    Ok(sum / model.trees.len() as f64)
}
