//! Hoeffding tree over numeric attributes with weighted instances.
//!
//! Each leaf keeps weighted class counts and per-class Gaussian estimators
//! for every feature. Candidate splits are thresholds spread evenly across
//! the observed feature range; their class distributions are estimated from
//! the Gaussian estimators and scored by information gain. A leaf splits once
//! the gain advantage of the best attribute over the runner-up exceeds the
//! Hoeffding bound `ε = sqrt(R² ln(1/δ) / (2n))`, where `n` is the leaf's
//! weighted count, or when `ε` falls below the tie threshold.

use serde::{Deserialize, Serialize};

use super::naive_bayes::ClassStats;
use super::Classifier;
use crate::error::{ObalError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafPrediction {
    MajorityClass,
    NaiveBayes,
    /// Per leaf, whichever of majority-class and naive Bayes has been more
    /// accurate on the instances the leaf has seen.
    NaiveBayesAdaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HoeffdingTreeParams {
    /// Weighted count a leaf must accumulate between split attempts.
    pub grace_period: f64,
    /// δ in the Hoeffding bound.
    pub split_confidence: f64,
    /// τ: split anyway once ε drops below this.
    pub tie_threshold: f64,
    pub leaf_prediction: LeafPrediction,
    /// Candidate thresholds evaluated per attribute.
    pub split_points: usize,
    pub max_depth: usize,
}

impl Default for HoeffdingTreeParams {
    fn default() -> Self {
        HoeffdingTreeParams {
            grace_period: 200.0,
            split_confidence: 1e-7,
            tie_threshold: 0.05,
            leaf_prediction: LeafPrediction::NaiveBayes,
            split_points: 10,
            max_depth: 20,
        }
    }
}

impl HoeffdingTreeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.grace_period >= 1.0) {
            return Err(ObalError::InvalidConfig("grace_period must be at least 1".into()));
        }
        if !(self.split_confidence > 0.0 && self.split_confidence < 1.0) {
            return Err(ObalError::InvalidConfig("split_confidence must lie in (0, 1)".into()));
        }
        if !(self.tie_threshold >= 0.0) || self.split_points == 0 {
            return Err(ObalError::InvalidConfig(
                "tie_threshold must be nonnegative and split_points positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Leaf {
    stats: ClassStats,
    weight_at_last_attempt: f64,
    depth: usize,
    majority_correct: f64,
    bayes_correct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf(Leaf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoeffdingTree {
    params: HoeffdingTreeParams,
    dim: usize,
    n_classes: usize,
    nodes: Vec<Node>,
    weight_seen: f64,
}

/// Hoeffding bound for a statistic of range `range` after weight `n`.
pub fn hoeffding_bound(range: f64, confidence: f64, n: f64) -> f64 {
    (range * range * (1.0 / confidence).ln() / (2.0 * n)).sqrt()
}

fn entropy(dist: &[f64]) -> f64 {
    let total: f64 = dist.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    dist.iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| {
            let p = w / total;
            -p * p.log2()
        })
        .sum()
}

fn info_gain(pre: &[f64], branches: &[Vec<f64>]) -> f64 {
    let total: f64 = pre.iter().sum();
    let post: f64 = branches
        .iter()
        .map(|b| b.iter().sum::<f64>() / total * entropy(b))
        .sum();
    entropy(pre) - post
}

fn argmax(values: &[f64]) -> usize {
    super::argmax(values)
}

#[derive(Debug, Clone)]
struct SplitCandidate {
    feature: usize,
    threshold: f64,
    merit: f64,
    left: Vec<f64>,
    right: Vec<f64>,
}

impl HoeffdingTree {
    pub fn new(dim: usize, n_classes: usize, params: HoeffdingTreeParams) -> Self {
        HoeffdingTree {
            params,
            dim,
            n_classes,
            nodes: vec![Node::Leaf(Leaf {
                stats: ClassStats::new(dim, n_classes),
                weight_at_last_attempt: 0.0,
                depth: 0,
                majority_correct: 0.0,
                bayes_correct: 0.0,
            })],
            weight_seen: 0.0,
        }
    }

    pub fn params(&self) -> &HoeffdingTreeParams {
        &self.params
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }

    pub fn n_splits(&self) -> usize {
        self.nodes.len() - self.n_leaves()
    }

    fn leaf_index(&self, features: &[f64]) -> usize {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                Node::Leaf(_) => return idx,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => idx = if features[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    fn leaf_proba(&self, leaf: &Leaf, features: &[f64]) -> Vec<f64> {
        match self.params.leaf_prediction {
            LeafPrediction::MajorityClass => leaf.stats.majority_proba(),
            LeafPrediction::NaiveBayes => leaf.stats.naive_bayes_proba(features),
            LeafPrediction::NaiveBayesAdaptive => {
                if leaf.majority_correct > leaf.bayes_correct {
                    leaf.stats.majority_proba()
                } else {
                    leaf.stats.naive_bayes_proba(features)
                }
            }
        }
    }

    fn best_split_for(&self, stats: &ClassStats, feature: usize) -> Option<SplitCandidate> {
        let pre = stats.class_weights();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for c in 0..self.n_classes {
            let obs = stats.observer(c, feature);
            if obs.weight() > 0.0 {
                lo = lo.min(obs.min());
                hi = hi.max(obs.max());
            }
        }
        if !(hi > lo) {
            return None;
        }
        let k = self.params.split_points;
        let mut best: Option<SplitCandidate> = None;
        for i in 1..=k {
            let threshold = lo + (hi - lo) * i as f64 / (k + 1) as f64;
            let left: Vec<f64> = (0..self.n_classes)
                .map(|c| stats.observer(c, feature).weight_below(threshold))
                .collect();
            let right: Vec<f64> = (0..self.n_classes)
                .map(|c| (stats.observer(c, feature).weight() - left[c]).max(0.0))
                .collect();
            let merit = info_gain(pre, &[left.clone(), right.clone()]);
            if best.as_ref().is_none_or(|b| merit > b.merit) {
                best = Some(SplitCandidate {
                    feature,
                    threshold,
                    merit,
                    left,
                    right,
                });
            }
        }
        best
    }

    fn attempt_split(&mut self, idx: usize) {
        let Node::Leaf(leaf) = &self.nodes[idx] else {
            return;
        };
        if leaf.depth >= self.params.max_depth {
            return;
        }
        let stats = &leaf.stats;
        if stats.class_weights().iter().filter(|&&w| w > 0.0).count() < 2 {
            return;
        }
        let mut candidates: Vec<SplitCandidate> = (0..self.dim)
            .filter_map(|f| self.best_split_for(stats, f))
            .collect();
        if candidates.is_empty() {
            return;
        }
        candidates.sort_by(|a, b| b.merit.total_cmp(&a.merit));
        let best = &candidates[0];
        // The runner-up is the best other attribute, or not splitting at all.
        let second = candidates.get(1).map_or(0.0, |c| c.merit.max(0.0));
        let range = (self.n_classes.max(2) as f64).log2();
        let eps = hoeffding_bound(range, self.params.split_confidence, stats.total_weight());
        if best.merit <= 0.0 || !(best.merit - second > eps || eps < self.params.tie_threshold) {
            return;
        }

        let depth = leaf.depth + 1;
        let make_child = |weights: &Vec<f64>| {
            let total: f64 = weights.iter().sum();
            Node::Leaf(Leaf {
                stats: ClassStats::with_class_weights(self.dim, weights.clone()),
                weight_at_last_attempt: total,
                depth,
                majority_correct: 0.0,
                bayes_correct: 0.0,
            })
        };
        let left_node = make_child(&best.left);
        let right_node = make_child(&best.right);
        let (feature, threshold) = (best.feature, best.threshold);
        let left = self.nodes.len();
        self.nodes.push(left_node);
        let right = self.nodes.len();
        self.nodes.push(right_node);
        self.nodes[idx] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
    }
}

impl Classifier for HoeffdingTree {
    fn dim(&self) -> usize {
        self.dim
    }

    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn is_trained(&self) -> bool {
        self.weight_seen > 0.0
    }

    fn train(&mut self, features: &[f64], label: usize, weight: f64) -> Result<()> {
        super::check_training_input(self, features, label, weight)?;
        if weight == 0.0 {
            return Ok(());
        }
        self.weight_seen += weight;
        let idx = self.leaf_index(features);
        let adaptive = self.params.leaf_prediction == LeafPrediction::NaiveBayesAdaptive;
        let grace = self.params.grace_period;
        let Node::Leaf(leaf) = &mut self.nodes[idx] else {
            unreachable!("leaf_index returns a leaf");
        };
        if adaptive && leaf.stats.total_weight() > 0.0 {
            if argmax(&leaf.stats.majority_proba()) == label {
                leaf.majority_correct += weight;
            }
            if argmax(&leaf.stats.naive_bayes_proba(features)) == label {
                leaf.bayes_correct += weight;
            }
        }
        leaf.stats.add(features, label, weight);
        let total = leaf.stats.total_weight();
        if total - leaf.weight_at_last_attempt >= grace {
            leaf.weight_at_last_attempt = total;
            self.attempt_split(idx);
        }
        Ok(())
    }

    fn predict_proba(&self, features: &[f64]) -> Result<Vec<f64>> {
        if !self.is_trained() {
            return Err(ObalError::Untrained);
        }
        super::check_dim(self, features)?;
        let idx = self.leaf_index(features);
        let Node::Leaf(leaf) = &self.nodes[idx] else {
            unreachable!("leaf_index returns a leaf");
        };
        Ok(self.leaf_proba(leaf, features))
    }
}
