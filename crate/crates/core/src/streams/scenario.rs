use serde::{Deserialize, Serialize};

use super::{generate_synthetic, GeneratorKind, GeneratorParams, Instance, TargetInstance};
use crate::error::{ObalError, Result};

/// Declarative description of a synthetic multistream scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub kind: GeneratorKind,
    pub n_sources: usize,
    /// Instances per output stream; the generated dataset holds
    /// `samples_per_stream × (n_sources + 1)` instances.
    pub samples_per_stream: usize,
    /// Concept change positions in dataset time, strictly increasing.
    #[serde(default)]
    pub change_points: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: GeneratorParams,
}

impl ScenarioConfig {
    /// Abrupt generators get three evenly spaced change points (four
    /// concepts); incremental generators drift from the first instance.
    pub fn new(kind: GeneratorKind, n_sources: usize, samples_per_stream: usize, seed: u64) -> Self {
        let total = samples_per_stream * (n_sources + 1);
        let change_points = if kind.is_abrupt() {
            (1..4).map(|q| q * total / 4).collect()
        } else {
            Vec::new()
        };
        ScenarioConfig {
            kind,
            n_sources,
            samples_per_stream,
            change_points,
            seed,
            params: GeneratorParams::default(),
        }
    }

    pub fn total_len(&self) -> usize {
        self.samples_per_stream * (self.n_sources + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sources == 0 {
            return Err(ObalError::InvalidConfig("n_sources must be at least 1".into()));
        }
        if self.samples_per_stream < 2 {
            return Err(ObalError::InvalidConfig(
                "samples_per_stream must be at least 2".into(),
            ));
        }
        let length = self.total_len();
        for (i, &cp) in self.change_points.iter().enumerate() {
            if cp >= length {
                return Err(ObalError::ChangePointOutOfRange { point: cp, length });
            }
            if i > 0 && cp <= self.change_points[i - 1] {
                return Err(ObalError::InvalidConfig(
                    "change points must be strictly increasing".into(),
                ));
            }
        }
        Ok(())
    }

    /// Generates the dataset and splits it into sources and target.
    pub fn build(&self) -> Result<Multistream> {
        let data = generate_synthetic(self.kind, self)?;
        let sizes = vec![self.samples_per_stream; self.n_sources + 1];
        build_multistream_scenario(data, self.n_sources, &sizes)
    }
}

/// `N` labeled source streams plus one unlabeled target stream.
///
/// The target's true labels live in `held_out`, which is for scoring only;
/// [`TargetInstance`] has no label field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Multistream {
    pub sources: Vec<Vec<Instance>>,
    pub target: Vec<TargetInstance>,
    pub held_out: Vec<usize>,
    pub dim: usize,
    pub n_classes: usize,
}

impl Multistream {
    pub fn n_sources(&self) -> usize {
        self.sources.len()
    }

    /// Keeps only the sources at `indices` (in that order).
    pub fn select_sources(&self, indices: &[usize]) -> Result<Multistream> {
        let sources = indices
            .iter()
            .map(|&i| {
                self.sources.get(i).cloned().ok_or(ObalError::UnknownSource {
                    index: i,
                    n_sources: self.sources.len(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Multistream {
            sources,
            target: self.target.clone(),
            held_out: self.held_out.clone(),
            dim: self.dim,
            n_classes: self.n_classes,
        })
    }
}

/// Per-instance log of the product of per-feature Gaussian densities, using
/// the pooled mean and variance of each feature over the whole dataset.
/// Constant features contribute nothing.
pub fn gaussian_scores(dataset: &[Instance]) -> Vec<f64> {
    let n = dataset.len();
    if n == 0 {
        return Vec::new();
    }
    let d = dataset[0].dim();
    let mut mean = vec![0.0; d];
    for inst in dataset {
        for (m, x) in mean.iter_mut().zip(&inst.features) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut var = vec![0.0; d];
    for inst in dataset {
        for ((v, x), m) in var.iter_mut().zip(&inst.features).zip(&mean) {
            *v += (x - m) * (x - m);
        }
    }
    var.iter_mut().for_each(|v| *v /= n as f64);

    dataset
        .iter()
        .map(|inst| {
            inst.features
                .iter()
                .zip(&mean)
                .zip(&var)
                .filter(|(_, v)| **v > 0.0)
                .map(|((x, m), v)| {
                    -0.5 * (2.0 * std::f64::consts::PI * v).ln() - (x - m) * (x - m) / (2.0 * v)
                })
                .sum()
        })
        .collect()
}

/// Splits a labeled dataset into `n_sources` sources and a target stream.
///
/// Instances are ranked by [`gaussian_scores`], highest first. Source `i`
/// takes the `i`-th contiguous block of `sizes[i]` instances and the target
/// takes the next `sizes[n_sources]` instances (or everything left when
/// `sizes` has only `n_sources` entries). Each stream is then put back into
/// chronological order and the target's labels are moved to `held_out`.
pub fn build_multistream_scenario(
    dataset: Vec<Instance>,
    n_sources: usize,
    sizes: &[usize],
) -> Result<Multistream> {
    if n_sources == 0 {
        return Err(ObalError::InvalidConfig("n_sources must be at least 1".into()));
    }
    if sizes.len() != n_sources && sizes.len() != n_sources + 1 {
        return Err(ObalError::InvalidConfig(format!(
            "expected {} or {} sizes, got {}",
            n_sources,
            n_sources + 1,
            sizes.len()
        )));
    }
    let requested: usize = sizes.iter().sum();
    if requested > dataset.len() {
        return Err(ObalError::SizesExceedDataset {
            requested,
            available: dataset.len(),
        });
    }
    let source_total: usize = sizes[..n_sources].iter().sum();
    let target_len = sizes
        .get(n_sources)
        .copied()
        .unwrap_or(dataset.len() - source_total);
    if target_len == 0 {
        return Err(ObalError::EmptyTarget);
    }
    let dim = dataset.first().map_or(0, Instance::dim);
    let mut n_classes = 2;
    for inst in &dataset {
        if inst.dim() != dim {
            return Err(ObalError::DimensionMismatch {
                expected: dim,
                actual: inst.dim(),
            });
        }
        let label = inst.label.ok_or(ObalError::MissingLabel)?;
        n_classes = n_classes.max(label + 1);
    }

    let scores = gaussian_scores(&dataset);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));

    let mut bounds = Vec::with_capacity(n_sources + 1);
    let mut start = 0;
    for &size in &sizes[..n_sources] {
        bounds.push((start, start + size));
        start += size;
    }
    bounds.push((start, start + target_len));

    let mut slots: Vec<Option<Instance>> = dataset.into_iter().map(Some).collect();
    let mut take_block = |(lo, hi): (usize, usize)| -> Vec<Instance> {
        let mut idx: Vec<usize> = order[lo..hi].to_vec();
        idx.sort_unstable();
        idx.into_iter()
            .map(|i| slots[i].take().expect("blocks are disjoint"))
            .collect()
    };
    let sources: Vec<Vec<Instance>> = bounds[..n_sources].iter().map(|&b| take_block(b)).collect();
    let target_rows = take_block(bounds[n_sources]);

    let mut held_out = Vec::with_capacity(target_rows.len());
    let target = target_rows
        .into_iter()
        .map(|inst| {
            held_out.push(inst.label.expect("checked above"));
            inst.into_target()
        })
        .collect();

    Ok(Multistream {
        sources,
        target,
        held_out,
        dim,
        n_classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn toy(n: usize) -> Vec<Instance> {
        (0..n)
            .map(|t| {
                let x = ((t * 37) % 101) as f64 / 10.0;
                let y = ((t * 17) % 53) as f64 / 5.0;
                Instance::labeled(vec![x, y], usize::from(x + y > 8.0), t as u64)
            })
            .collect()
    }

    #[test]
    fn single_source_taking_everything_leaves_empty_target() {
        let data = toy(50);
        assert!(matches!(
            build_multistream_scenario(data, 1, &[50]),
            Err(ObalError::EmptyTarget)
        ));
    }

    #[test]
    fn sizes_exceeding_dataset() {
        assert!(matches!(
            build_multistream_scenario(toy(50), 2, &[30, 30]),
            Err(ObalError::SizesExceedDataset { .. })
        ));
    }

    #[test]
    fn partition_of_three_hundred() {
        let data = toy(300);
        let ms = build_multistream_scenario(data, 2, &[100, 100]).unwrap();
        assert_eq!(ms.target.len(), 100);
        assert_eq!(ms.held_out.len(), 100);
        let mut seen = BTreeSet::new();
        for s in &ms.sources {
            assert_eq!(s.len(), 100);
            for inst in s {
                assert!(inst.label.is_some());
                assert!(seen.insert(inst.timestamp));
            }
        }
        for inst in &ms.target {
            assert!(seen.insert(inst.timestamp));
        }
        assert_eq!(seen.len(), 300);
    }

    #[test]
    fn streams_are_chronological() {
        let ms = build_multistream_scenario(toy(300), 2, &[100, 100]).unwrap();
        for s in &ms.sources {
            assert!(s.windows(2).all(|w| w[0].timestamp < w[1].timestamp));
        }
        assert!(ms.target.windows(2).all(|w| w[0].timestamp < w[1].timestamp));
    }

    #[test]
    fn first_block_holds_highest_scores() {
        // Brute force: score with the explicit product of densities and
        // compare against the first source's membership.
        let data = toy(20);
        let n = data.len() as f64;
        let d = 2;
        let mut mean = [0.0; 2];
        let mut var = [0.0; 2];
        for j in 0..d {
            mean[j] = data.iter().map(|i| i.features[j]).sum::<f64>() / n;
            var[j] = data.iter().map(|i| (i.features[j] - mean[j]).powi(2)).sum::<f64>() / n;
        }
        let density: Vec<f64> = data
            .iter()
            .map(|i| {
                (0..d)
                    .map(|j| {
                        (-(i.features[j] - mean[j]).powi(2) / (2.0 * var[j])).exp()
                            / (2.0 * std::f64::consts::PI * var[j]).sqrt()
                    })
                    .product()
            })
            .collect();
        let mut ranked: Vec<usize> = (0..20).collect();
        ranked.sort_by(|&a, &b| density[b].partial_cmp(&density[a]).unwrap());
        let expected: BTreeSet<u64> = ranked[..5].iter().map(|&i| i as u64).collect();

        let ms = build_multistream_scenario(data, 2, &[5, 5]).unwrap();
        let got: BTreeSet<u64> = ms.sources[0].iter().map(|i| i.timestamp).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn sea_split_realizes_covariate_shift() {
        let cfg = ScenarioConfig::new(GeneratorKind::Sea, 3, 2000, 11);
        let ms = cfg.build().unwrap();
        // Sources are concentric shells around the dataset mean, so the
        // spread grows from source 1 to the target.
        let spread = |rows: Vec<&[f64]>| -> f64 {
            let n = rows.len() as f64;
            (0..3)
                .map(|j| {
                    let m = rows.iter().map(|r| r[j]).sum::<f64>() / n;
                    rows.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / n
                })
                .sum()
        };
        let s0 = spread(ms.sources[0].iter().map(|i| i.features.as_slice()).collect());
        let s2 = spread(ms.sources[2].iter().map(|i| i.features.as_slice()).collect());
        let t = spread(ms.target.iter().map(|i| i.features.as_slice()).collect());
        assert!(s0 + 1.0 < s2 && s2 + 1.0 < t, "{s0} {s2} {t}");
    }

    #[test]
    fn explicit_target_size_selects_prefix() {
        let ms = build_multistream_scenario(toy(300), 2, &[100, 100, 50]).unwrap();
        assert_eq!(ms.target.len(), 50);
    }
}
