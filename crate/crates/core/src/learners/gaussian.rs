use serde::{Deserialize, Serialize};

/// Weighted univariate Gaussian sufficient statistics.
///
/// Power sums rather than a running mean keep the statistics exactly additive
/// in the weight: one update at weight 2 is bit-identical to two updates at
/// weight 1.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GaussianEstimator {
    weight: f64,
    sum: f64,
    sum_sq: f64,
    min: f64,
    max: f64,
}

const LN_2PI: f64 = 1.837_877_066_409_345_3;

impl GaussianEstimator {
    pub fn add(&mut self, value: f64, weight: f64) {
        if weight <= 0.0 {
            return;
        }
        if self.weight == 0.0 {
            self.min = value;
            self.max = value;
        } else {
            self.min = self.min.min(value);
            self.max = self.max.max(value);
        }
        self.weight += weight;
        self.sum += weight * value;
        self.sum_sq += weight * value * value;
    }

    pub fn merge(&mut self, other: &GaussianEstimator) {
        if other.weight == 0.0 {
            return;
        }
        if self.weight == 0.0 {
            *self = other.clone();
            return;
        }
        self.weight += other.weight;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn mean(&self) -> f64 {
        if self.weight > 0.0 {
            self.sum / self.weight
        } else {
            0.0
        }
    }

    /// Weighted maximum-likelihood variance.
    pub fn variance(&self) -> f64 {
        if self.weight > 0.0 {
            let m = self.mean();
            let second = self.sum_sq / self.weight;
            let var = second - m * m;
            // Differences at round-off level of the second moment are zero.
            if var <= 1e-12 * second {
                0.0
            } else {
                var
            }
        } else {
            0.0
        }
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn log_density(&self, value: f64, smoothing: f64) -> f64 {
        let var = self.variance() + smoothing;
        let diff = value - self.mean();
        -0.5 * (LN_2PI + var.ln()) - diff * diff / (2.0 * var)
    }

    /// Estimated weight of observations `≤ threshold`.
    pub fn weight_below(&self, threshold: f64) -> f64 {
        if self.weight == 0.0 {
            return 0.0;
        }
        if threshold < self.min {
            return 0.0;
        }
        if threshold >= self.max {
            return self.weight;
        }
        let sd = self.variance().sqrt();
        if sd <= 0.0 {
            return if threshold >= self.mean() { self.weight } else { 0.0 };
        }
        self.weight * normal_cdf((threshold - self.mean()) / sd)
    }
}

/// Standard normal CDF via the complementary error function.
pub(crate) fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

// Numerical Recipes erfc (Chebyshev fit, relative error < 1.2e-7).
fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let r = t * (-z * z - 1.265_512_23
        + t * (1.000_023_68
            + t * (0.374_091_96
                + t * (0.096_784_18
                    + t * (-0.186_288_06
                        + t * (0.278_868_07
                            + t * (-1.135_203_98
                                + t * (1.488_515_87 + t * (-0.822_152_23 + t * 0.170_872_77)))))))))
        .exp();
    if x >= 0.0 {
        r
    } else {
        2.0 - r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_two_equals_two_unit_updates() {
        let mut a = GaussianEstimator::default();
        let mut b = GaussianEstimator::default();
        for v in [0.3, 1.7, -2.2] {
            a.add(v, 1.0);
            b.add(v, 1.0);
        }
        a.add(4.1, 2.0);
        b.add(4.1, 1.0);
        b.add(4.1, 1.0);
        assert_eq!(a, b);
    }

    #[test]
    fn moments() {
        let mut g = GaussianEstimator::default();
        for v in [1.0, 2.0, 3.0, 4.0] {
            g.add(v, 1.0);
        }
        assert!((g.mean() - 2.5).abs() < 1e-12);
        assert!((g.variance() - 1.25).abs() < 1e-12);
        assert!((g.weight_below(2.5) - 2.0).abs() < 1e-6);
        assert_eq!(g.weight_below(0.0), 0.0);
        assert_eq!(g.weight_below(10.0), 4.0);
    }

    #[test]
    fn cdf_reference_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-7);
        assert!((normal_cdf(1.0) - 0.841_344_746).abs() < 1e-6);
        assert!((normal_cdf(-1.96) - 0.024_997_895).abs() < 1e-6);
    }
}
