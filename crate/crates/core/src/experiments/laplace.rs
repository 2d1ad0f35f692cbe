//! Laplace-transform estimation of the box mass and the shot-noise rate.
//!
//! The large-radius decay of the isolation probability is controlled by
//! `r^{-d} log E[exp(-λ Λ(Q_r))]`; for a shot-noise field with indicator
//! kernel the limit has the closed form `λ_S (exp(-λ K) - 1)` with `K` the
//! kernel integral.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{unit_ball_volume, BoxWindow};
use crate::measures::{sample_measure, MeasureSpec};
use crate::rng::derive_seed;
use crate::stats::{jackknife_of_mean, mean_estimate, EstimateWithCI};

const EXP_LAPLACE: u64 = 0x04;

/// Empirical Laplace transform of the box mass and its volume-normalized
/// log-rate.
#[derive(Debug, Clone)]
pub struct LaplaceResult {
    /// `E[exp(-λ Λ(Q_r))]` with plain Monte Carlo standard error.
    pub transform: EstimateWithCI,
    /// `r^{-d} log` of the transform, with delete-one jackknife standard
    /// error.
    pub rate: EstimateWithCI,
}

/// Estimate `E[exp(-λ Λ(Q_r))]` and its rate over `replicates` realizations.
pub fn laplace_transform<const D: usize>(
    spec: &MeasureSpec,
    lambda: f64,
    r: f64,
    replicates: u64,
    seed: u64,
) -> Result<LaplaceResult> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::invalid("lambda", format!("must be >= 0, got {lambda}")));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::invalid("r", format!("must be > 0, got {r}")));
    }
    let window = BoxWindow::<D>::centered(r)?;
    let values: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|rep| -> Result<f64> {
            let real = sample_measure(spec, &window, derive_seed(seed, &[EXP_LAPLACE, rep]))?;
            let mass = real.mass_in_box(&window)?;
            Ok((-lambda * mass).exp())
        })
        .collect::<Result<_>>()?;
    let transform = mean_estimate(&values, seed)?;
    let vol = r.powi(D as i32);
    let rate = jackknife_of_mean(&values, |m| m.max(f64::MIN_POSITIVE).ln() / vol, seed)?;
    Ok(LaplaceResult { transform, rate })
}

/// Closed-form large-radius rate for the shot-noise field:
/// `center_intensity * (exp(-λ K) - 1)` with `K = kernel_height * |B_kernel_radius|`.
pub fn shot_noise_rate_closed_form(
    center_intensity: f64,
    lambda: f64,
    kernel_radius: f64,
    kernel_height: f64,
    dim: usize,
) -> f64 {
    let kernel_integral = kernel_height * unit_ball_volume(dim) * kernel_radius.powi(dim as i32);
    center_intensity * ((-lambda * kernel_integral).exp() - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::MeasureFamily;

    #[test]
    fn zero_measure_transform_is_one() {
        let spec = MeasureSpec::unnormalized(MeasureFamily::ConstantLebesgue { density: 0.0 }).unwrap();
        let res = laplace_transform::<2>(&spec, 2.0, 3.0, 20, 1).unwrap();
        assert_eq!(res.transform.mean, 1.0);
        assert_eq!(res.rate.mean, 0.0);
    }

    #[test]
    fn constant_measure_has_exact_rate() {
        // deterministic mass r^d: transform e^{-λ r^d}, rate -λ
        let spec = MeasureSpec::unnormalized(MeasureFamily::ConstantLebesgue { density: 1.0 }).unwrap();
        let lambda = 0.7;
        let res = laplace_transform::<2>(&spec, lambda, 2.5, 30, 1).unwrap();
        assert!((res.transform.mean - (-lambda * 6.25f64).exp()).abs() < 1e-12);
        assert!((res.rate.mean + lambda).abs() < 1e-12);
        assert!(res.rate.std_error < 1e-12);
    }

    #[test]
    fn closed_form_limits() {
        assert_eq!(shot_noise_rate_closed_form(2.0, 0.0, 0.5, 1.0, 2), 0.0);
        // λ -> ∞: rate -> -center_intensity (every center isolated)
        let r = shot_noise_rate_closed_form(2.0, 1e9, 0.5, 1.0, 2);
        assert!((r + 2.0).abs() < 1e-9);
    }

    #[test]
    fn shot_noise_rate_approaches_closed_form() {
        // moderate window: r = 20 kernel radii
        let (ls, lam, kr, kh) = (0.6, 1.0, 0.25, 2.0);
        let family = MeasureFamily::ShotNoise {
            kernel_radius: kr,
            kernel_height: kh,
            center_intensity: ls,
        };
        let spec = MeasureSpec::unnormalized(family).unwrap();
        let res = laplace_transform::<2>(&spec, lam, 20.0 * kr, 4000, 3).unwrap();
        let expect = shot_noise_rate_closed_form(ls, lam, kr, kh, 2);
        let rel = (res.rate.mean - expect).abs() / expect.abs();
        assert!(
            rel < 0.05,
            "rate {} vs closed form {} (rel {rel}, se {})",
            res.rate.mean,
            expect,
            res.rate.std_error
        );
    }
}
