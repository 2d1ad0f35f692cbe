//! Percolation-probability estimators.
//!
//! The finite-window percolation probability `θ_K` is the probability that
//! the component of the origin in the Gilbert graph of the Palm version
//! escapes the centered box `Q_K` (equivalently, is not contained in
//! `Q_{K-2r}`). Palm estimates are self-normalized weighted means with
//! delta-method standard errors; a whole `λ` grid is estimated from shared
//! realizations by thinning from the largest intensity, which makes the
//! estimated curve pathwise monotone in `λ`.

use rayon::prelude::*;

use crate::cox::{palm_sample_from, sample_poisson, thin_palm, thin_to, PointPattern};
use crate::error::{Error, Result};
use crate::geom::{BoxWindow, Point};
use crate::measures::{sample_measure, MeasureSpec};
use crate::percolation::build_gilbert;
use crate::rng::derive_seed;
use crate::stats::{proportion_estimate, weighted_ratio_estimate, EstimateWithCI};

pub(crate) const EXP_THETA: u64 = 0x01;
pub(crate) const EXP_POISSON: u64 = 0x02;
pub(crate) const EXP_ISOLATION: u64 = 0x03;

/// Window side for a Palm theta run: the escape box, the connection radius
/// cushion, and one unit for the Palm shift.
pub(crate) fn theta_window_side(k: f64, r: f64) -> f64 {
    k + 2.0 * r + 1.0
}

/// One Palm replicate evaluated at every intensity of a grid (thinning from
/// the maximum), returning the Palm weight and the per-intensity escape
/// indicators.
fn palm_theta_replicate<const D: usize>(
    spec: &MeasureSpec,
    lambdas: &[f64],
    r: f64,
    k: f64,
    window: &BoxWindow<D>,
    rep_seed: u64,
) -> Result<(f64, Vec<bool>)> {
    let lambda_max = lambdas.iter().cloned().fold(0.0f64, f64::max);
    let real = sample_measure(spec, window, derive_seed(rep_seed, &[1]))?;
    let unit_box = BoxWindow {
        center: window.center,
        side: 1.0,
    };
    let draw = real.palm_draw(&unit_box, derive_seed(rep_seed, &[2]))?;
    if draw.weight <= 0.0 {
        return Ok((0.0, vec![false; lambdas.len()]));
    }
    let palm = palm_sample_from(&real, lambda_max, &draw, derive_seed(rep_seed, &[3]))?;
    let thin_seed = derive_seed(rep_seed, &[4]);
    let mut indicators = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let sample = if lambda == lambda_max {
            palm.clone()
        } else {
            thin_palm(&palm, lambda, thin_seed)?
        };
        let mut graph = build_gilbert(&sample.pattern, r)?;
        indicators.push(graph.origin_reaches_boundary(k)?);
    }
    Ok((draw.weight, indicators))
}

/// Estimate `θ_K(λ, r)` for every `λ` in the grid from shared replicates.
/// The returned estimates are monotone in `λ` whenever the grid is sorted.
pub fn estimate_theta_grid<const D: usize>(
    spec: &MeasureSpec,
    lambdas: &[f64],
    r: f64,
    k: f64,
    replicates: u64,
    seed: u64,
) -> Result<Vec<EstimateWithCI>> {
    if lambdas.is_empty() {
        return Err(Error::invalid("lambda_grid", "must be nonempty"));
    }
    for &l in lambdas {
        if !l.is_finite() || l < 0.0 {
            return Err(Error::invalid("lambda_grid", format!("invalid intensity {l}")));
        }
    }
    if k <= 4.0 * r {
        return Err(Error::invalid("k", format!("escape box {k} must exceed 4r = {}", 4.0 * r)));
    }
    let window = BoxWindow::<D>::centered(theta_window_side(k, r))?;
    let rows: Vec<(f64, Vec<bool>)> = (0..replicates)
        .into_par_iter()
        .map(|rep| {
            palm_theta_replicate(spec, lambdas, r, k, &window, derive_seed(seed, &[EXP_THETA, rep]))
        })
        .collect::<Result<_>>()?;

    let mut out = Vec::with_capacity(lambdas.len());
    for (j, _) in lambdas.iter().enumerate() {
        let pairs: Vec<(f64, f64)> = rows
            .iter()
            .map(|(w, ys)| (*w, if ys[j] { 1.0 } else { 0.0 }))
            .collect();
        out.push(weighted_ratio_estimate(&pairs, seed)?);
    }
    Ok(out)
}

/// Estimate `θ_K(λ, r)` at a single intensity.
pub fn estimate_theta<const D: usize>(
    spec: &MeasureSpec,
    lambda: f64,
    r: f64,
    k: f64,
    replicates: u64,
    seed: u64,
) -> Result<EstimateWithCI> {
    Ok(estimate_theta_grid::<D>(spec, &[lambda], r, k, replicates, seed)?.remove(0))
}

/// Reference estimator: homogeneous Poisson with intensity `rho`, connection
/// radius 1, origin adjoined (its Palm version), escape box `Q_k`.
pub fn estimate_theta_poisson<const D: usize>(
    rho: f64,
    k: f64,
    replicates: u64,
    seed: u64,
) -> Result<EstimateWithCI> {
    Ok(estimate_theta_poisson_grid::<D>(&[rho], k, replicates, seed)?.remove(0))
}

/// Poisson reference over a grid of intensities with the thinning coupling.
pub fn estimate_theta_poisson_grid<const D: usize>(
    rhos: &[f64],
    k: f64,
    replicates: u64,
    seed: u64,
) -> Result<Vec<EstimateWithCI>> {
    if rhos.is_empty() {
        return Err(Error::invalid("rho_grid", "must be nonempty"));
    }
    let r = 1.0;
    if k <= 4.0 * r {
        return Err(Error::invalid("k", format!("escape box {k} must exceed 4r = 4, got {k}")));
    }
    let rho_max = rhos.iter().cloned().fold(0.0f64, f64::max);
    let window = BoxWindow::<D>::centered(k + 2.0 * r)?;
    let rows: Vec<Vec<bool>> = (0..replicates)
        .into_par_iter()
        .map(|rep| -> Result<Vec<bool>> {
            let rep_seed = derive_seed(seed, &[EXP_POISSON, rep]);
            let base = sample_poisson(rho_max, &window, derive_seed(rep_seed, &[1]))?;
            let thin_seed = derive_seed(rep_seed, &[2]);
            let mut ys = Vec::with_capacity(rhos.len());
            for &rho in rhos {
                let thinned = if rho == rho_max {
                    base.clone()
                } else {
                    thin_to(&base, rho, thin_seed)?
                };
                let mut points = Vec::with_capacity(thinned.len() + 1);
                points.push(Point::<D>::origin());
                points.extend_from_slice(&thinned.points);
                let pattern = PointPattern {
                    points,
                    window,
                    intensity: rho,
                    seed: rep_seed,
                };
                let mut graph = build_gilbert(&pattern, r)?;
                ys.push(graph.origin_reaches_boundary(k)?);
            }
            Ok(ys)
        })
        .collect::<Result<_>>()?;

    rhos.iter()
        .enumerate()
        .map(|(j, _)| {
            let successes = rows.iter().filter(|ys| ys[j]).count() as u64;
            proportion_estimate(successes, replicates, seed)
        })
        .collect()
}

/// Palm-weighted estimate of `E[exp(-λ Λ*(B_r(o)))]`, the isolation lower
/// bound for `1 - θ(λ, r)`.
pub fn isolation_lower_bound<const D: usize>(
    spec: &MeasureSpec,
    lambda: f64,
    r: f64,
    replicates: u64,
    seed: u64,
) -> Result<EstimateWithCI> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::invalid("lambda", format!("must be >= 0, got {lambda}")));
    }
    let window = BoxWindow::<D>::centered(2.0 * r + 2.0)?;
    let unit_box = BoxWindow {
        center: window.center,
        side: 1.0,
    };
    let pairs: Vec<(f64, f64)> = (0..replicates)
        .into_par_iter()
        .map(|rep| -> Result<(f64, f64)> {
            let rep_seed = derive_seed(seed, &[EXP_ISOLATION, rep]);
            let real = sample_measure(spec, &window, derive_seed(rep_seed, &[1]))?;
            let draw = real.palm_draw(&unit_box, derive_seed(rep_seed, &[2]))?;
            match draw.shift {
                Some(x) if draw.weight > 0.0 => {
                    // mass of the r-ball around the shifted origin = around x
                    let mass = real.mass_in_ball(&x, r)?;
                    Ok((draw.weight, (-lambda * mass).exp()))
                }
                _ => Ok((0.0, 0.0)),
            }
        })
        .collect::<Result<_>>()?;
    weighted_ratio_estimate(&pairs, seed)
}
