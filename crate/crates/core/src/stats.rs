//! Sample statistics used by the Monte Carlo pipelines.

use serde::{Deserialize, Serialize};

/// Mean and unbiased variance of a sample, with standard errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    /// Normal-approximation standard error of the sample variance,
    /// from the fourth central moment.
    pub variance_se: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let count = xs.len();
        if count == 0 {
            return Summary {
                count,
                mean: f64::NAN,
                mean_se: f64::NAN,
                variance: f64::NAN,
                variance_se: f64::NAN,
            };
        }
        let r = count as f64;
        let mean = xs.iter().sum::<f64>() / r;
        if count == 1 {
            return Summary {
                count,
                mean,
                mean_se: 0.0,
                variance: 0.0,
                variance_se: 0.0,
            };
        }
        let (m2, m4) = xs.iter().fold((0.0, 0.0), |(m2, m4), &x| {
            let d = x - mean;
            let d2 = d * d;
            (m2 + d2, m4 + d2 * d2)
        });
        let variance = m2 / (r - 1.0);
        let mu4 = m4 / r;
        let var_of_var = ((mu4 - variance * variance * (r - 3.0) / (r - 1.0)) / r).max(0.0);
        Summary {
            count,
            mean,
            mean_se: (variance / r).sqrt(),
            variance,
            variance_se: var_of_var.sqrt(),
        }
    }

    pub fn variance_ci(&self, z: f64) -> (f64, f64) {
        (
            (self.variance - z * self.variance_se).max(0.0),
            self.variance + z * self.variance_se,
        )
    }
}

/// Empirical frequency of an event over `count` trials with its binomial
/// standard error.
pub fn frequency(hits: usize, count: usize) -> (f64, f64) {
    if count == 0 {
        return (f64::NAN, f64::NAN);
    }
    let p = hits as f64 / count as f64;
    (p, (p * (1.0 - p) / count as f64).sqrt())
}
