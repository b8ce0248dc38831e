//! Binary decision tree with axis-aligned threshold splits and Gini
//! impurity. Grown on bootstrap indices supplied by the forest.

use rand::Rng;

#[derive(Debug, Clone)]
pub(crate) enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        positives: usize,
        total: usize,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct DecisionTree {
    root: Node,
}

pub(crate) struct TreeConfig {
    pub candidate_features: usize,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
}

fn gini(positives: usize, total: usize) -> f64 {
    let p = positives as f64 / total as f64;
    let q = 1.0 - p;
    1.0 - p * p - q * q
}

fn weighted_gini(lp: usize, ln: usize, rp: usize, rn: usize) -> f64 {
    let total = (ln + rn) as f64;
    (ln as f64 * gini(lp, ln) + rn as f64 * gini(rp, rn)) / total
}

/// First `k` entries of a seeded Fisher-Yates shuffle of 0..n; the
/// per-node feature candidates in a deterministic order.
fn sample_features(rng: &mut impl Rng, n: usize, k: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k.min(n) {
        let j = rng.gen_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(k.min(n));
    pool
}

impl DecisionTree {
    pub(crate) fn grow(
        x: &[Vec<f64>],
        y: &[bool],
        sample: Vec<usize>,
        cfg: &TreeConfig,
        rng: &mut impl Rng,
    ) -> Self {
        let root = grow_node(x, y, sample, 0, cfg, rng);
        DecisionTree { root }
    }

    /// Fraction of positive training samples in the leaf this row falls in.
    pub(crate) fn leaf_positive_fraction(&self, row: &[f64]) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { positives, total } => {
                    return *positives as f64 / (*total).max(1) as f64;
                }
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }
}

fn grow_node(
    x: &[Vec<f64>],
    y: &[bool],
    idx: Vec<usize>,
    depth: usize,
    cfg: &TreeConfig,
    rng: &mut impl Rng,
) -> Node {
    let total = idx.len();
    let positives = idx.iter().filter(|&&i| y[i]).count();
    let leaf = |positives, total| Node::Leaf { positives, total };

    if positives == 0 || positives == total || total < 2 * cfg.min_samples_leaf {
        return leaf(positives, total);
    }
    if let Some(limit) = cfg.max_depth {
        if depth >= limit {
            return leaf(positives, total);
        }
    }

    let n_features = x[0].len();
    let candidates = sample_features(rng, n_features, cfg.candidate_features);

    // Best split: lowest weighted child Gini; ties keep the first candidate
    // in draw order, so the outcome is a pure function of the rng stream.
    let mut best: Option<(f64, usize, f64)> = None;
    for &feature in &candidates {
        let mut column: Vec<(f64, bool)> = idx.iter().map(|&i| (x[i][feature], y[i])).collect();
        column.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left_n = 0usize;
        let mut left_pos = 0usize;
        for w in 0..total - 1 {
            left_n += 1;
            if column[w].1 {
                left_pos += 1;
            }
            if column[w].0 == column[w + 1].0 {
                continue;
            }
            let right_n = total - left_n;
            if left_n < cfg.min_samples_leaf || right_n < cfg.min_samples_leaf {
                continue;
            }
            let score = weighted_gini(left_pos, left_n, positives - left_pos, right_n);
            if best.is_none_or(|(s, _, _)| score < s) {
                let (a, b) = (column[w].0, column[w + 1].0);
                let mut threshold = 0.5 * (a + b);
                // Midpoint can round onto an endpoint for adjacent floats;
                // fall back to the left value so `<=` still separates.
                if !(threshold > a && threshold < b) {
                    threshold = a;
                }
                best = Some((score, feature, threshold));
            }
        }
    }

    let Some((score, feature, threshold)) = best else {
        return leaf(positives, total);
    };
    if score >= gini(positives, total) {
        return leaf(positives, total);
    }

    let (mut left_idx, mut right_idx) = (Vec::new(), Vec::new());
    for &i in &idx {
        if x[i][feature] <= threshold {
            left_idx.push(i);
        } else {
            right_idx.push(i);
        }
    }
    debug_assert!(!left_idx.is_empty() && !right_idx.is_empty());

    Node::Split {
        feature,
        threshold,
        left: Box::new(grow_node(x, y, left_idx, depth + 1, cfg, rng)),
        right: Box::new(grow_node(x, y, right_idx, depth + 1, cfg, rng)),
    }
}
