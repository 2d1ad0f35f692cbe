//! Pseudo-critical intensity search.
//!
//! Bisection on `λ` over estimates that share replicate randomness through
//! the thinning coupling: for fixed seeds the estimated curve is a monotone
//! step function of `λ`, so the bisection is well defined despite Monte Carlo
//! noise. The result is a finite-window pseudo-critical value at the given
//! `K`, not the true critical intensity.

use crate::error::{Error, Result};
use crate::measures::MeasureSpec;
use crate::rng::derive_seed;

use super::theta::estimate_theta_grid;

/// Find `λ` with `θ_K(λ, r) ≈ theta0` by coupled bisection inside `bracket`.
/// Errors when the bracket does not straddle the target. The bracket shrinks
/// until its relative width is below 2%.
pub fn find_lambda_threshold<const D: usize>(
    spec: &MeasureSpec,
    r: f64,
    theta0: f64,
    k: f64,
    replicates: u64,
    seed: u64,
    bracket: (f64, f64),
) -> Result<f64> {
    if !(theta0 > 0.0 && theta0 < 1.0) {
        return Err(Error::invalid("theta0", format!("must be in (0,1), got {theta0}")));
    }
    let (mut lo, mut hi) = bracket;
    if !(lo >= 0.0 && hi > lo) {
        return Err(Error::invalid("bracket", format!("invalid bracket [{lo}, {hi}]")));
    }
    // evaluations share the replicate seeds, so the mapping λ -> θ̂(λ) is a
    // fixed monotone function for the whole search
    let eval_seed = derive_seed(seed, &[0x7d]);
    let eval = |lambda: f64| -> Result<f64> {
        Ok(estimate_theta_grid::<D>(spec, &[lambda], r, k, replicates, eval_seed)?[0].mean)
    };
    let at_lo = eval(lo)?;
    let at_hi = eval(hi)?;
    if !(at_lo <= theta0 && theta0 <= at_hi) {
        return Err(Error::Unbracketed { target: theta0 });
    }
    while (hi - lo) > 0.02 * 0.5 * (hi + lo) {
        let mid = 0.5 * (lo + hi);
        if eval(mid)? < theta0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::MeasureFamily;

    #[test]
    fn unbracketed_target_errors() {
        let spec = MeasureSpec::unnormalized(MeasureFamily::ConstantLebesgue { density: 1.0 }).unwrap();
        let res = find_lambda_threshold::<2>(&spec, 1.0, 0.99, 6.0, 100, 1, (0.0, 0.2));
        assert!(matches!(res, Err(Error::Unbracketed { .. })));
    }

    #[test]
    fn invalid_theta0_rejected() {
        let spec = MeasureSpec::unnormalized(MeasureFamily::ConstantLebesgue { density: 1.0 }).unwrap();
        assert!(find_lambda_threshold::<2>(&spec, 1.0, 0.0, 6.0, 10, 1, (0.0, 2.0)).is_err());
        assert!(find_lambda_threshold::<2>(&spec, 1.0, 1.0, 6.0, 10, 1, (0.0, 2.0)).is_err());
    }

    #[test]
    fn constant_threshold_matches_poisson_reference() {
        // pseudo-critical λ of the unit-density Cox process equals the value
        // found from the direct Poisson estimator at the same K
        use super::super::theta::estimate_theta_poisson_grid;
        let spec = MeasureSpec::unnormalized(MeasureFamily::ConstantLebesgue { density: 1.0 }).unwrap();
        let k = 8.0;
        let reps = 800;
        let lam = find_lambda_threshold::<2>(&spec, 1.0, 0.5, k, reps, 5, (0.4, 3.0)).unwrap();

        // Poisson oracle: bisect the proportion estimator over the same grid
        let mut lo = 0.4f64;
        let mut hi = 3.0f64;
        for _ in 0..12 {
            let mid = 0.5 * (lo + hi);
            let est = estimate_theta_poisson_grid::<2>(&[mid], k, reps, 6).unwrap();
            if est[0].mean < 0.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        assert!(
            (lam - oracle).abs() < 0.25,
            "threshold {lam} vs poisson oracle {oracle}"
        );
    }
}
