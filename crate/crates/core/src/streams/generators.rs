use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Instance, ScenarioConfig};
use crate::error::{ObalError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Sea,
    Tree,
    Rbf,
    Hyperplane,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 4] = [
        GeneratorKind::Sea,
        GeneratorKind::Tree,
        GeneratorKind::Rbf,
        GeneratorKind::Hyperplane,
    ];

    pub fn default_features(self) -> usize {
        match self {
            GeneratorKind::Sea => 3,
            GeneratorKind::Tree => 20,
            GeneratorKind::Rbf => 10,
            GeneratorKind::Hyperplane => 4,
        }
    }

    /// Abrupt generators switch concept at change points; the others move
    /// their parameters continuously.
    pub fn is_abrupt(self) -> bool {
        matches!(self, GeneratorKind::Sea | GeneratorKind::Tree)
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            GeneratorKind::Sea => "sea",
            GeneratorKind::Tree => "tree",
            GeneratorKind::Rbf => "rbf",
            GeneratorKind::Hyperplane => "hyperplane",
        };
        f.write_str(name)
    }
}

impl FromStr for GeneratorKind {
    type Err = ObalError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sea" => Ok(GeneratorKind::Sea),
            "tree" => Ok(GeneratorKind::Tree),
            "rbf" => Ok(GeneratorKind::Rbf),
            "hyperplane" => Ok(GeneratorKind::Hyperplane),
            other => Err(ObalError::UnknownGenerator(other.to_string())),
        }
    }
}

/// Kind-specific generator knobs. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorParams {
    /// Feature count; SEA ignores it (always 3).
    pub n_features: Option<usize>,
    /// Probability of replacing a label with a different class.
    pub label_noise: f64,
    /// SEA thresholds, cycled through at each change point.
    pub sea_thresholds: Vec<f64>,
    pub tree_depth: usize,
    pub rbf_centroids: usize,
    /// Centroid displacement per instance, as a fraction of the unit range.
    pub rbf_speed: f64,
    /// Hyperplane weight change per instance.
    pub hyperplane_magnitude: f64,
    /// Probability of reversing a hyperplane weight's direction per instance.
    pub hyperplane_reversal: f64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            n_features: None,
            label_noise: 0.0,
            sea_thresholds: vec![4.0, 7.0, 4.0, 7.0],
            tree_depth: 5,
            rbf_centroids: 50,
            rbf_speed: 1e-3,
            hyperplane_magnitude: 1e-3,
            hyperplane_reversal: 0.1,
        }
    }
}

/// SEA concept: class 1 iff `f1 + f2 ≤ θ`.
pub(crate) fn sea_label(features: &[f64], threshold: f64) -> usize {
    usize::from(features[0] + features[1] <= threshold)
}

/// Index of the concept segment that owns position `t`.
fn segment_at(change_points: &[usize], t: usize) -> usize {
    change_points.partition_point(|&cp| cp <= t)
}

/// Generates the full labeled dataset described by `config`, of length
/// `config.total_len()`. The output is a pure function of `(kind, config)`.
pub fn generate_synthetic(kind: GeneratorKind, config: &ScenarioConfig) -> Result<Vec<Instance>> {
    config.validate()?;
    let length = config.total_len();
    let params = &config.params;
    if !(0.0..=1.0).contains(&params.label_noise) {
        return Err(ObalError::InvalidConfig(format!(
            "label_noise {} outside [0, 1]",
            params.label_noise
        )));
    }
    let mut model_rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let cps = &config.change_points;

    let mut out = Vec::with_capacity(length);
    match kind {
        GeneratorKind::Sea => {
            if params.sea_thresholds.is_empty() {
                return Err(ObalError::InvalidConfig("sea_thresholds is empty".into()));
            }
            for t in 0..length {
                let x: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..10.0)).collect();
                let theta = params.sea_thresholds[segment_at(cps, t) % params.sea_thresholds.len()];
                let y = sea_label(&x, theta);
                out.push(Instance::labeled(x, y, t as u64));
            }
        }
        GeneratorKind::Tree => {
            let d = params.n_features.unwrap_or(kind.default_features());
            if d == 0 || params.tree_depth == 0 {
                return Err(ObalError::InvalidConfig(
                    "tree generator needs n_features ≥ 1 and depth ≥ 1".into(),
                ));
            }
            let mut tree = RandomTree::sample(&mut model_rng, d, params.tree_depth);
            let mut segment = 0;
            for t in 0..length {
                let s = segment_at(cps, t);
                if s != segment {
                    segment = s;
                    tree = RandomTree::sample(&mut model_rng, d, params.tree_depth);
                }
                let x: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
                let y = tree.classify(&x);
                out.push(Instance::labeled(x, y, t as u64));
            }
        }
        GeneratorKind::Rbf => {
            let d = params.n_features.unwrap_or(kind.default_features());
            if d == 0 || params.rbf_centroids == 0 {
                return Err(ObalError::InvalidConfig(
                    "rbf generator needs n_features ≥ 1 and at least one centroid".into(),
                ));
            }
            let mut model = RbfModel::sample(&mut model_rng, d, params.rbf_centroids, params.rbf_speed);
            let mut segment = 0;
            for t in 0..length {
                let s = segment_at(cps, t);
                if s != segment {
                    segment = s;
                    model.redirect(&mut model_rng);
                }
                let (x, y) = model.draw(&mut rng);
                out.push(Instance::labeled(x, y, t as u64));
                if cps.is_empty() || s > 0 {
                    model.step();
                }
            }
        }
        GeneratorKind::Hyperplane => {
            let d = params.n_features.unwrap_or(kind.default_features());
            if d == 0 {
                return Err(ObalError::InvalidConfig("hyperplane needs n_features ≥ 1".into()));
            }
            let mut plane = Hyperplane::sample(
                &mut model_rng,
                d,
                params.hyperplane_magnitude,
                params.hyperplane_reversal,
            );
            let mut segment = 0;
            for t in 0..length {
                let s = segment_at(cps, t);
                if s != segment {
                    segment = s;
                    plane.redirect(&mut model_rng);
                }
                let x: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
                let y = plane.classify(&x);
                out.push(Instance::labeled(x, y, t as u64));
                if cps.is_empty() || s > 0 {
                    plane.step(&mut model_rng);
                }
            }
        }
    }

    if params.label_noise > 0.0 {
        // Separate stream so noise does not perturb feature draws.
        let mut noise_rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x5851_f42d));
        for inst in &mut out {
            if noise_rng.random::<f64>() < params.label_noise {
                let y = inst.label.unwrap_or(0);
                inst.label = Some(1 - y.min(1));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf(usize),
}

/// Random axis-aligned decision tree over `[0, 1]^d`. Each split threshold is
/// uniform inside the cell that reaches it.
#[derive(Debug, Clone)]
struct RandomTree {
    nodes: Vec<TreeNode>,
}

impl RandomTree {
    fn sample(rng: &mut ChaCha8Rng, d: usize, depth: usize) -> Self {
        let mut tree = RandomTree { nodes: Vec::new() };
        let bounds = vec![(0.0, 1.0); d];
        tree.grow(rng, bounds, depth);
        tree
    }

    fn grow(&mut self, rng: &mut ChaCha8Rng, bounds: Vec<(f64, f64)>, depth: usize) -> usize {
        let id = self.nodes.len();
        if depth == 0 {
            self.nodes.push(TreeNode::Leaf(rng.random_range(0..2)));
            return id;
        }
        self.nodes.push(TreeNode::Leaf(0));
        let feature = rng.random_range(0..bounds.len());
        let (lo, hi) = bounds[feature];
        let threshold = lo + (hi - lo) * rng.random_range(0.2..0.8);
        let mut lb = bounds.clone();
        lb[feature].1 = threshold;
        let mut rb = bounds;
        rb[feature].0 = threshold;
        let left = self.grow(rng, lb, depth - 1);
        let right = self.grow(rng, rb, depth - 1);
        self.nodes[id] = TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }

    fn classify(&self, x: &[f64]) -> usize {
        let mut idx = 0;
        loop {
            match self.nodes[idx] {
                TreeNode::Leaf(label) => return label,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => idx = if x[feature] <= threshold { left } else { right },
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Centroid {
    centre: Vec<f64>,
    std_dev: f64,
    class: usize,
    velocity: Vec<f64>,
}

#[derive(Debug, Clone)]
struct RbfModel {
    centroids: Vec<Centroid>,
    cumulative: Vec<f64>,
    speed: f64,
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

impl RbfModel {
    fn sample(rng: &mut ChaCha8Rng, d: usize, n: usize, speed: f64) -> Self {
        let mut total = 0.0;
        let mut cumulative = Vec::with_capacity(n);
        let centroids = (0..n)
            .map(|i| {
                total += rng.random::<f64>();
                cumulative.push(total);
                Centroid {
                    centre: (0..d).map(|_| rng.random::<f64>()).collect(),
                    std_dev: rng.random_range(0.02..0.15),
                    // Alternate first so both classes are always present.
                    class: if i < 2 { i } else { rng.random_range(0..2) },
                    velocity: random_unit(rng, d).into_iter().map(|v| v * speed).collect(),
                }
            })
            .collect();
        RbfModel {
            centroids,
            cumulative,
            speed,
        }
    }

    fn redirect(&mut self, rng: &mut ChaCha8Rng) {
        for c in &mut self.centroids {
            let d = c.centre.len();
            c.velocity = random_unit(rng, d).into_iter().map(|v| v * self.speed).collect();
        }
    }

    fn step(&mut self) {
        for c in &mut self.centroids {
            for (x, v) in c.centre.iter_mut().zip(c.velocity.iter_mut()) {
                *x += *v;
                if *x < 0.0 {
                    *x = -*x;
                    *v = -*v;
                } else if *x > 1.0 {
                    *x = 2.0 - *x;
                    *v = -*v;
                }
            }
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> (Vec<f64>, usize) {
        let total = *self.cumulative.last().unwrap_or(&1.0);
        let u = rng.random::<f64>() * total;
        let idx = self.cumulative.partition_point(|&c| c < u).min(self.centroids.len() - 1);
        let c = &self.centroids[idx];
        let dir = random_unit(rng, c.centre.len());
        let mag = rng.sample::<f64, _>(StandardNormal) * c.std_dev;
        let x = c.centre.iter().zip(&dir).map(|(m, u)| m + u * mag).collect();
        (x, c.class)
    }
}

/// Rotating hyperplane: positive iff `Σ w_j x_j > w_0` with `w_0 = ½ Σ w_j`.
#[derive(Debug, Clone)]
struct Hyperplane {
    weights: Vec<f64>,
    directions: Vec<f64>,
    magnitude: f64,
    reversal: f64,
}

impl Hyperplane {
    fn sample(rng: &mut ChaCha8Rng, d: usize, magnitude: f64, reversal: f64) -> Self {
        Hyperplane {
            weights: (0..d).map(|_| rng.random::<f64>()).collect(),
            directions: (0..d).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect(),
            magnitude,
            reversal,
        }
    }

    fn classify(&self, x: &[f64]) -> usize {
        let bias = 0.5 * self.weights.iter().sum::<f64>();
        let score: f64 = self.weights.iter().zip(x).map(|(w, v)| w * v).sum();
        usize::from(score > bias)
    }

    fn redirect(&mut self, rng: &mut ChaCha8Rng) {
        for dir in &mut self.directions {
            *dir = if rng.random::<bool>() { 1.0 } else { -1.0 };
        }
    }

    fn step(&mut self, rng: &mut ChaCha8Rng) {
        for (w, dir) in self.weights.iter_mut().zip(self.directions.iter_mut()) {
            *w += *dir * self.magnitude;
            if *w < 0.0 || *w > 1.0 {
                *w = w.clamp(0.0, 1.0);
                *dir = -*dir;
            }
            if rng.random::<f64>() < self.reversal {
                *dir = -*dir;
            }
        }
    }
}
