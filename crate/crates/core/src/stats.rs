//! Monte Carlo estimates with standard errors.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A Monte Carlo estimate together with its standard error, replicate count,
/// total Palm weight (1 per replicate for unweighted estimators), and the seed
/// that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithCI {
    pub mean: f64,
    pub std_error: f64,
    pub replicates: u64,
    pub effective_weight_sum: f64,
    pub seed: u64,
}

impl EstimateWithCI {
    /// Combined standard error of the difference of two independent estimates.
    pub fn combined_se(&self, other: &EstimateWithCI) -> f64 {
        (self.std_error * self.std_error + other.std_error * other.std_error).sqrt()
    }
}

/// Estimate of a proportion from `successes` out of `n` trials.
///
/// The standard error uses the Wilson-style shrunk proportion
/// `p~ = (x + 1/2) / (n + 1)` so that it stays positive at the boundaries
/// `x = 0` and `x = n`.
pub fn proportion_estimate(successes: u64, n: u64, seed: u64) -> Result<EstimateWithCI> {
    if n == 0 {
        return Err(Error::invalid("replicates", "must be >= 1"));
    }
    let mean = successes as f64 / n as f64;
    let shrunk = (successes as f64 + 0.5) / (n as f64 + 1.0);
    let std_error = (shrunk * (1.0 - shrunk) / (n as f64 + 1.0)).sqrt();
    Ok(EstimateWithCI {
        mean,
        std_error,
        replicates: n,
        effective_weight_sum: n as f64,
        seed,
    })
}

/// Self-normalized weighted estimator `sum(w_i y_i) / sum(w_i)` with a
/// linearization (delta-method) standard error:
/// `se^2 = sum_i (w_i (y_i - mean))^2 / (sum_i w_i)^2`.
///
/// Zero-weight replicates contribute nothing to either sum but still count
/// toward `replicates`. Errors when every weight is zero.
pub fn weighted_ratio_estimate(pairs: &[(f64, f64)], seed: u64) -> Result<EstimateWithCI> {
    if pairs.is_empty() {
        return Err(Error::invalid("replicates", "must be >= 1"));
    }
    let weight_sum: f64 = pairs.iter().map(|(w, _)| w).sum();
    if weight_sum <= 0.0 {
        return Err(Error::ZeroWeightSum);
    }
    let mean = pairs.iter().map(|(w, y)| w * y).sum::<f64>() / weight_sum;
    let resid2: f64 = pairs
        .iter()
        .map(|(w, y)| {
            let u = w * (y - mean);
            u * u
        })
        .sum();
    Ok(EstimateWithCI {
        mean,
        std_error: resid2.sqrt() / weight_sum,
        replicates: pairs.len() as u64,
        effective_weight_sum: weight_sum,
        seed,
    })
}

/// Plain sample mean and standard error of the mean.
pub fn mean_estimate(values: &[f64], seed: u64) -> Result<EstimateWithCI> {
    if values.is_empty() {
        return Err(Error::invalid("replicates", "must be >= 1"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(EstimateWithCI {
        mean,
        std_error: (var / n).sqrt(),
        replicates: values.len() as u64,
        effective_weight_sum: n,
        seed,
    })
}

/// Delete-one jackknife mean and standard error for a smooth transform `f` of
/// the sample mean of `values`.
pub fn jackknife_of_mean(values: &[f64], f: impl Fn(f64) -> f64, seed: u64) -> Result<EstimateWithCI> {
    let n = values.len();
    if n < 2 {
        return Err(Error::invalid("replicates", "jackknife needs >= 2 replicates"));
    }
    let total: f64 = values.iter().sum();
    let nf = n as f64;
    let full = f(total / nf);
    let leave_one: Vec<f64> = values.iter().map(|x| f((total - x) / (nf - 1.0))).collect();
    let jack_mean = leave_one.iter().sum::<f64>() / nf;
    let var = leave_one
        .iter()
        .map(|t| (t - jack_mean) * (t - jack_mean))
        .sum::<f64>()
        * (nf - 1.0)
        / nf;
    Ok(EstimateWithCI {
        mean: full,
        std_error: var.sqrt(),
        replicates: n as u64,
        effective_weight_sum: nf,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proportion_se_positive_at_boundaries() {
        let e = proportion_estimate(0, 100, 0).unwrap();
        assert_eq!(e.mean, 0.0);
        assert!(e.std_error > 0.0);
        let e = proportion_estimate(100, 100, 0).unwrap();
        assert_eq!(e.mean, 1.0);
        assert!(e.std_error > 0.0);
    }

    #[test]
    fn weighted_ratio_ignores_zero_weights() {
        let e = weighted_ratio_estimate(&[(0.0, 1.0), (2.0, 1.0), (2.0, 0.0)], 0).unwrap();
        assert!((e.mean - 0.5).abs() < 1e-15);
        assert_eq!(e.replicates, 3);
        assert!((e.effective_weight_sum - 4.0).abs() < 1e-15);
    }

    #[test]
    fn weighted_ratio_all_zero_weights_is_error() {
        assert!(matches!(
            weighted_ratio_estimate(&[(0.0, 1.0)], 0),
            Err(Error::ZeroWeightSum)
        ));
    }

    #[test]
    fn unit_weights_reduce_to_sample_mean() {
        let xs = [1.0, 0.0, 1.0, 1.0];
        let pairs: Vec<(f64, f64)> = xs.iter().map(|&y| (1.0, y)).collect();
        let w = weighted_ratio_estimate(&pairs, 0).unwrap();
        let m = mean_estimate(&xs, 0).unwrap();
        assert!((w.mean - m.mean).abs() < 1e-15);
        // delta-method uses 1/n^2 normalization vs 1/(n(n-1)): ratio sqrt(1-1/n)
        let expected_ratio = (1.0 - 1.0 / xs.len() as f64).sqrt();
        assert!((w.std_error / m.std_error - expected_ratio).abs() < 1e-12);
    }

    #[test]
    fn jackknife_identity_matches_direct_se() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let j = jackknife_of_mean(&xs, |m| m, 0).unwrap();
        let d = mean_estimate(&xs, 0).unwrap();
        assert!((j.mean - d.mean).abs() < 1e-12);
        assert!((j.std_error - d.std_error).abs() < 1e-12);
    }
}
