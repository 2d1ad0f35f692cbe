//! Coupled limit-regime experiments.
//!
//! Three scaling couplings are implemented:
//! - large radius, low intensity (`λ r^d = ρ`): the rescaled Cox process
//!   approaches a homogeneous Poisson process, so `θ` approaches the Poisson
//!   reference `θ̄(ρ)` regardless of the measure;
//! - singular measures with constant expected gaps per edge
//!   (`μ e^{-μ r} = c`, `μ` the intensity per unit edge length): `θ`
//!   approaches the Bernoulli bond model on the segment system where an edge
//!   of length `l` is open with probability `(e^{-c})^l`, with the Poisson
//!   gap model as the bridging construction;
//! - absolutely continuous measures densified at constant expected neighbor
//!   count (`λ r^d = ρ`): `θ` approaches a local Poisson factor at the
//!   size-biased origin density times a global superlevel-set connectivity
//!   indicator.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{BoxWindow, Point};
use crate::measures::realization::{AcSources, Body};
use crate::measures::{sample_measure, MeasureFamily, MeasureSpec};
use crate::percolation::{bond_percolation_theta, gap_model_theta};
use crate::rng::derive_seed;
use crate::stats::{proportion_estimate, weighted_ratio_estimate, EstimateWithCI};

use super::plan::{run_plan, Unit, UnitTask};
use super::theta::estimate_theta_poisson;
use super::ExperimentResult;

/// Solve `μ e^{-μ r} = c` for the radius on the dense branch: `r = ln(μ/c)/μ`.
/// Requires `μ > c`.
pub fn gap_radius(per_length_rate: f64, c: f64) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid("c", format!("must be > 0, got {c}")));
    }
    if per_length_rate <= c {
        return Err(Error::invalid(
            "lambda",
            format!("per-length rate {per_length_rate} must exceed c = {c} for a valid radius"),
        ));
    }
    Ok((per_length_rate / c).ln() / per_length_rate)
}

/// Plan: the Poisson reference plus one theta estimate per radius with
/// `λ = ρ / r^2` and escape box `Q_{K r}`.
pub fn plan_large_radius(
    spec: &MeasureSpec,
    rho: f64,
    r_list: &[f64],
    k: f64,
) -> Result<Vec<Unit>> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::invalid("rho", format!("must be > 0, got {rho}")));
    }
    let mut units = vec![Unit {
        id: "poisson-ref".into(),
        task: UnitTask::PoissonRef { rho, k },
    }];
    for &r in r_list {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::invalid("r_grid", format!("invalid radius {r}")));
        }
        units.push(Unit {
            id: format!("r={r}"),
            task: UnitTask::Theta {
                spec: spec.clone(),
                lambda: rho / (r * r),
                r,
                k: k * r,
            },
        });
    }
    Ok(units)
}

/// Large-radius coupling `λ = ρ / r^d` with escape box `Q_{K r}`: one row per
/// radius plus the Poisson reference row (label `"poisson-ref"`, `r = 1`).
pub fn coupled_limit_large_radius(
    spec: &MeasureSpec,
    rho: f64,
    r_list: &[f64],
    k: f64,
    replicates: u64,
    seed: u64,
) -> Result<ExperimentResult> {
    run_plan(&plan_large_radius(spec, rho, r_list, k)?, replicates, seed)
}

fn require_singular(spec: &MeasureSpec) -> Result<()> {
    if spec.family.is_singular() {
        Ok(())
    } else {
        Err(Error::invalid(
            "measure",
            format!("{} is not a segment-system measure", spec.family.name()),
        ))
    }
}

/// Sample a segment system of the spec on a window spanning `Q_k`, split at
/// crossings when edges can intersect away from endpoints (line
/// tessellations).
fn sample_system(spec: &MeasureSpec, k: f64, seed: u64) -> Result<crate::tessellations::SegmentSystem> {
    let window = BoxWindow::<2>::centered(k + 2.0)?;
    let real = sample_measure(spec, &window, seed)?;
    let body = real
        .segments_body()
        .expect("singular spec yields a segment body");
    let sys = if matches!(spec.family, MeasureFamily::PoissonLines { .. }) {
        body.system.split_at_intersections()
    } else {
        body.system.clone()
    };
    Ok(sys)
}

/// Annealed Bernoulli bond estimate: fresh tessellation per replicate, one
/// bond configuration each, rooted at the vertex nearest the origin.
pub fn bond_theta_annealed(
    spec: &MeasureSpec,
    b: f64,
    k: f64,
    replicates: u64,
    seed: u64,
) -> Result<EstimateWithCI> {
    require_singular(spec)?;
    let indicators: Vec<bool> = (0..replicates)
        .into_par_iter()
        .map(|rep| -> Result<bool> {
            let rep_seed = derive_seed(seed, &[0xb0, rep]);
            let sys = sample_system(spec, k, derive_seed(rep_seed, &[0]))?;
            if sys.is_empty() {
                return Ok(false);
            }
            let est = bond_percolation_theta(&sys, b, k, 1, derive_seed(rep_seed, &[1]))?;
            Ok(est.mean > 0.5)
        })
        .collect::<Result<_>>()?;
    let successes = indicators.iter().filter(|&&x| x).count() as u64;
    proportion_estimate(successes, replicates, seed)
}

/// Annealed gap-model estimate at linear intensity `mu` and gap radius `r`.
pub fn gap_theta_annealed(
    spec: &MeasureSpec,
    mu: f64,
    r: f64,
    k: f64,
    replicates: u64,
    seed: u64,
) -> Result<EstimateWithCI> {
    require_singular(spec)?;
    let indicators: Vec<bool> = (0..replicates)
        .into_par_iter()
        .map(|rep| -> Result<bool> {
            let rep_seed = derive_seed(seed, &[0x6a, rep]);
            let sys = sample_system(spec, k, derive_seed(rep_seed, &[0]))?;
            if sys.is_empty() {
                return Ok(false);
            }
            let res = gap_model_theta(&sys, mu, r, k, 1, derive_seed(rep_seed, &[1]))?;
            Ok(res.theta.mean > 0.5)
        })
        .collect::<Result<_>>()?;
    let successes = indicators.iter().filter(|&&x| x).count() as u64;
    proportion_estimate(successes, replicates, seed)
}

/// Plan: per intensity the Cox estimate at the solved radius and the annealed
/// gap bridge, plus one Bernoulli bond unit at `b = e^{-c}`.
pub fn plan_singular(
    spec: &MeasureSpec,
    c: f64,
    lambda_list: &[f64],
    k: f64,
) -> Result<Vec<Unit>> {
    require_singular(spec)?;
    let mut units = Vec::new();
    for &lambda in lambda_list {
        let mu = lambda * spec.normalization;
        let r = gap_radius(mu, c)?;
        units.push(Unit {
            id: format!("lambda={lambda}"),
            task: UnitTask::Theta {
                spec: spec.clone(),
                lambda,
                r,
                k,
            },
        });
        units.push(Unit {
            id: format!("lambda={lambda}-gap"),
            task: UnitTask::GapAnnealed {
                spec: spec.clone(),
                lambda,
                mu,
                r,
                k,
            },
        });
    }
    units.push(Unit {
        id: "bond".into(),
        task: UnitTask::BondAnnealed {
            spec: spec.clone(),
            b: (-c).exp(),
            k,
        },
    });
    Ok(units)
}

/// Singular coupling `μ e^{-μ r} = c` with `μ = λ * normalization` the Cox
/// intensity per unit edge length. Rows per `λ`: the Cox estimate and the
/// annealed gap-model bridge; final row: the Bernoulli bond model at
/// `b = e^{-c}`.
pub fn coupled_limit_singular(
    spec: &MeasureSpec,
    c: f64,
    lambda_list: &[f64],
    k: f64,
    replicates: u64,
    seed: u64,
) -> Result<ExperimentResult> {
    run_plan(&plan_singular(spec, c, lambda_list, k)?, replicates, seed)
}

/// Discrete superlevel connectivity for a Boolean realization: can the origin
/// reach `∂Q_k` through cells (pitch `grain_radius/8`) whose density clears
/// the threshold?
fn boolean_superlevel_reaches(
    real: &crate::measures::MeasureRealization<2>,
    threshold: f64,
    k: f64,
) -> Result<bool> {
    let (grains, grain_radius, inside, outside) = match &real.body {
        Body::Density {
            sources:
                AcSources::Boolean {
                    grains,
                    grain_radius,
                    inside,
                    outside,
                },
            ..
        } => (grains, *grain_radius, *inside, *outside),
        _ => {
            return Err(Error::invalid(
                "measure",
                "superlevel reach needs a modulated Boolean realization",
            ))
        }
    };
    if outside >= threshold {
        return Ok(true); // the whole plane clears the level
    }
    if inside < threshold {
        return Ok(false); // nothing does
    }
    // superlevel set = grain union; rasterize over Q_k
    let cells = ((8.0 * k / grain_radius).ceil() as usize).max(2);
    let pitch = k / cells as f64;
    let lo = [-k / 2.0, -k / 2.0];
    let mut level = vec![false; cells * cells];
    let r2 = grain_radius * grain_radius;
    for g in grains.iter() {
        let first_x = ((g.0[0] - grain_radius - lo[0]) / pitch).floor() as i64;
        let last_x = ((g.0[0] + grain_radius - lo[0]) / pitch).ceil() as i64;
        let first_y = ((g.0[1] - grain_radius - lo[1]) / pitch).floor() as i64;
        let last_y = ((g.0[1] + grain_radius - lo[1]) / pitch).ceil() as i64;
        if last_x < 0 || last_y < 0 || first_x >= cells as i64 || first_y >= cells as i64 {
            continue;
        }
        let (a, b) = (first_x.max(0) as usize, (last_x as usize).min(cells - 1));
        let (c0, d) = (first_y.max(0) as usize, (last_y as usize).min(cells - 1));
        for i in a..=b {
            for j in c0..=d {
                if !level[j * cells + i] {
                    let cx = lo[0] + (i as f64 + 0.5) * pitch;
                    let cy = lo[1] + (j as f64 + 0.5) * pitch;
                    let dx = cx - g.0[0];
                    let dy = cy - g.0[1];
                    if dx * dx + dy * dy <= r2 {
                        level[j * cells + i] = true;
                    }
                }
            }
        }
    }
    let origin_cell = {
        let i = ((0.0 - lo[0]) / pitch).floor() as usize;
        let j = ((0.0 - lo[1]) / pitch).floor() as usize;
        (i.min(cells - 1), j.min(cells - 1))
    };
    if !level[origin_cell.1 * cells + origin_cell.0] {
        return Ok(false);
    }
    // BFS with Moore neighborhood; success on hitting the raster boundary
    let mut visited = vec![false; cells * cells];
    let mut stack = vec![origin_cell];
    visited[origin_cell.1 * cells + origin_cell.0] = true;
    while let Some((i, j)) = stack.pop() {
        if i == 0 || j == 0 || i == cells - 1 || j == cells - 1 {
            return Ok(true);
        }
        for di in -1i64..=1 {
            for dj in -1i64..=1 {
                if di == 0 && dj == 0 {
                    continue;
                }
                let (ni, nj) = ((i as i64 + di) as usize, (j as i64 + dj) as usize);
                let flat = nj * cells + ni;
                if level[flat] && !visited[flat] {
                    visited[flat] = true;
                    stack.push((ni, nj));
                }
            }
        }
    }
    Ok(false)
}

/// Weighted Monte Carlo of `θ̄(ρ ℓ_o*) 1{superlevel reach}` for modulated
/// Boolean measures: the weight is the origin density of a stationary sample
/// (size-biasing), the local factor is the Poisson reference at the scaled
/// origin density, and the superlevel threshold is `lambda_crit / ρ`.
pub fn ac_reference(
    spec: &MeasureSpec,
    rho: f64,
    k: f64,
    replicates: u64,
    seed: u64,
    lambda_crit: f64,
) -> Result<EstimateWithCI> {
    let (lambda_in, lambda_out) = ac_scaled_densities(spec, rho, lambda_crit)?;
    let theta_bar_in =
        estimate_theta_poisson::<2>(rho * lambda_in, k, replicates, derive_seed(seed, &[0xaced, 0]))?;
    let theta_bar_out = if lambda_out > 0.0 {
        estimate_theta_poisson::<2>(rho * lambda_out, k, replicates, derive_seed(seed, &[0xaced, 1]))?
    } else {
        EstimateWithCI {
            mean: 0.0,
            std_error: 0.0,
            replicates,
            effective_weight_sum: 0.0,
            seed,
        }
    };
    let threshold = lambda_crit / rho;
    let window = BoxWindow::<2>::centered(k + 2.0)?;
    let pairs: Vec<(f64, f64)> = (0..replicates)
        .into_par_iter()
        .map(|rep| -> Result<(f64, f64)> {
            let rep_seed = derive_seed(seed, &[0xacef, rep]);
            let real = sample_measure(spec, &window, rep_seed)?;
            let ell_o = real.density_at(&Point::<2>::origin())?;
            if ell_o <= 0.0 {
                return Ok((0.0, 0.0));
            }
            let local = if (ell_o - lambda_in).abs() <= (ell_o - lambda_out).abs() {
                theta_bar_in.mean
            } else {
                theta_bar_out.mean
            };
            let reach = boolean_superlevel_reaches(&real, threshold, k)?;
            Ok((ell_o, if reach { local } else { 0.0 }))
        })
        .collect::<Result<_>>()?;
    weighted_ratio_estimate(&pairs, seed)
}

/// Validate the absolutely continuous coupling preconditions and return the
/// scaled phase densities.
fn ac_scaled_densities(spec: &MeasureSpec, rho: f64, lambda_crit: f64) -> Result<(f64, f64)> {
    let (lambda_in, lambda_out) = match spec.family {
        MeasureFamily::ModulatedBoolean {
            lambda_in,
            lambda_out,
            ..
        } => (lambda_in * spec.normalization, lambda_out * spec.normalization),
        _ => {
            return Err(Error::invalid(
                "measure",
                "the absolutely continuous coupling is implemented for modulated Boolean measures",
            ))
        }
    };
    if lambda_in < lambda_out {
        return Err(Error::invalid(
            "lambda_in",
            "upper semicontinuity needs lambda_in >= lambda_out",
        ));
    }
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::invalid("rho", format!("must be > 0, got {rho}")));
    }
    let threshold = lambda_crit / rho;
    let rel = |v: f64| (v - threshold).abs() / threshold.max(1e-12);
    if rel(lambda_in) < 1e-6 || rel(lambda_out) < 1e-6 {
        return Err(Error::invalid(
            "rho",
            "the phase threshold lambda_crit/rho must not coincide with either density",
        ));
    }
    Ok((lambda_in, lambda_out))
}

/// Plan: per intensity the Cox estimate at `r = (ρ/λ)^{1/2}`, plus the
/// reference unit.
pub fn plan_ac(
    spec: &MeasureSpec,
    rho: f64,
    lambda_list: &[f64],
    k: f64,
    lambda_crit: f64,
) -> Result<Vec<Unit>> {
    ac_scaled_densities(spec, rho, lambda_crit)?;
    let mut units = Vec::new();
    for &lambda in lambda_list {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::invalid("lambda_grid", format!("invalid intensity {lambda}")));
        }
        units.push(Unit {
            id: format!("lambda={lambda}"),
            task: UnitTask::Theta {
                spec: spec.clone(),
                lambda,
                r: (rho / lambda).sqrt(),
                k,
            },
        });
    }
    units.push(Unit {
        id: "ac-ref".into(),
        task: UnitTask::AcReference {
            spec: spec.clone(),
            rho,
            k,
            lambda_crit,
        },
    });
    Ok(units)
}

/// Absolutely continuous coupling `λ r^d = ρ` for modulated Boolean measures:
/// rows per `λ` plus the reference row (label `"<name>-ac-ref"`).
pub fn coupled_limit_ac(
    spec: &MeasureSpec,
    rho: f64,
    lambda_list: &[f64],
    k: f64,
    replicates: u64,
    seed: u64,
    lambda_crit: f64,
) -> Result<ExperimentResult> {
    run_plan(&plan_ac(spec, rho, lambda_list, k, lambda_crit)?, replicates, seed)
}
