//! Intensity sweeps and stabilization diagnostics.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::BoxWindow;
use crate::measures::diagnostics::{aec_check, stab_radius_sup_of};
use crate::measures::{nearest_seed_sup_bound, sample_measure, MeasureFamily, MeasureSpec, StabDiagnostics};
use crate::rng::derive_seed;

use super::plan::{run_plan, Unit, UnitTask};
use super::ExperimentResult;

/// Plan: the coupled theta curve at `K`, plus the same curve at `2K` when the
/// convergence check is on.
pub fn plan_sweep(
    spec: &MeasureSpec,
    r: f64,
    lambda_grid: &[f64],
    k: f64,
    k_check: bool,
) -> Result<Vec<Unit>> {
    if lambda_grid.is_empty() {
        return Err(Error::invalid("lambda_grid", "must be nonempty"));
    }
    let mut units = vec![Unit {
        id: "theta".into(),
        task: UnitTask::ThetaCurve {
            spec: spec.clone(),
            lambdas: lambda_grid.to_vec(),
            r,
            k,
        },
    }];
    if k_check {
        units.push(Unit {
            id: "theta-2k".into(),
            task: UnitTask::ThetaCurve {
                spec: spec.clone(),
                lambdas: lambda_grid.to_vec(),
                r,
                k: 2.0 * k,
            },
        });
    }
    Ok(units)
}

/// Percolation-probability curve over an intensity grid at fixed radius,
/// estimated with the thinning coupling (monotone in `λ` by construction).
///
/// With `k_check`, the curve is re-estimated with escape box `2K` and both
/// series are reported; a gap beyond 3 combined standard errors at any grid
/// point signals that `K` is too small.
pub fn sweep_lambda(
    spec: &MeasureSpec,
    r: f64,
    lambda_grid: &[f64],
    k: f64,
    replicates: u64,
    seed: u64,
    k_check: bool,
) -> Result<ExperimentResult> {
    run_plan(&plan_sweep(spec, r, lambda_grid, k, k_check)?, replicates, seed)
}

/// One row of the stabilization diagnostic experiment.
#[derive(Debug, Clone)]
pub struct StabRow {
    pub diag: StabDiagnostics,
    /// Among replicates satisfying `sup_{Q_2n} R < n/2`: how many were checked
    /// for essential connectedness and how many failed it.
    pub aec_eligible: u64,
    pub aec_failures: u64,
}

/// Estimate `P(sup_{Q_n} R < n)` for each box size, against the union-bound
/// failure rate, and (optionally) check essential connectedness of the same
/// realizations conditional on small stabilization radii.
pub fn diagnose_stabilization(
    spec: &MeasureSpec,
    n_list: &[f64],
    replicates: u64,
    seed: u64,
    with_aec: bool,
) -> Result<Vec<StabRow>> {
    if matches!(spec.family, MeasureFamily::PoissonLines { .. }) {
        return Err(Error::UnsupportedDiagnostic("Poisson line tessellations"));
    }
    let mut out = Vec::with_capacity(n_list.len());
    for (ni, &n) in n_list.iter().enumerate() {
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::invalid("n_grid", format!("invalid box size {n}")));
        }
        let window = BoxWindow::<2>::centered(2.0 * n)?;
        let inner = BoxWindow::<2>::centered(n)?;
        let per_rep: Vec<(bool, Option<(bool, bool)>)> = (0..replicates)
            .into_par_iter()
            .map(|rep| -> Result<(bool, Option<(bool, bool)>)> {
                let rep_seed = derive_seed(seed, &[0xd1a6, ni as u64, rep]);
                let real = sample_measure(spec, &window, rep_seed)?;
                let sup_inner = stab_radius_sup_of(&real, &inner)?;
                let ok = sup_inner < n;
                if !with_aec {
                    return Ok((ok, None));
                }
                let sup_double = stab_radius_sup_of(&real, &window)?;
                if sup_double < n / 2.0 {
                    let rep = aec_check(&real, n)?;
                    Ok((ok, Some((true, !(rep.support_nonempty && rep.connected_in_double_box)))))
                } else {
                    Ok((ok, Some((false, false))))
                }
            })
            .collect::<Result<_>>()?;

        let successes = per_rep.iter().filter(|(ok, _)| *ok).count() as u64;
        let aec_eligible = per_rep
            .iter()
            .filter(|(_, a)| matches!(a, Some((true, _))))
            .count() as u64;
        let aec_failures = per_rep
            .iter()
            .filter(|(_, a)| matches!(a, Some((true, true))))
            .count() as u64;

        let theory_bound = match spec.family {
            MeasureFamily::VoronoiEdges { seed_intensity }
            | MeasureFamily::DelaunayEdges { seed_intensity } => {
                nearest_seed_sup_bound(seed_intensity, n, 2)
            }
            MeasureFamily::ShotNoise { kernel_radius, .. } => {
                if 2.0 * kernel_radius < n { 0.0 } else { 1.0 }
            }
            MeasureFamily::ModulatedBoolean { grain_radius, .. } => {
                if 2.0 * grain_radius < n { 0.0 } else { 1.0 }
            }
            MeasureFamily::ConstantLebesgue { .. } => 0.0,
            MeasureFamily::PoissonLines { .. } => unreachable!("rejected above"),
        };

        out.push(StabRow {
            diag: StabDiagnostics {
                n,
                empirical_prob: successes as f64 / replicates as f64,
                theory_bound,
                replicates,
            },
            aec_eligible,
            aec_failures,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_rows_align_with_grid() {
        let spec = MeasureSpec::unnormalized(MeasureFamily::ConstantLebesgue { density: 1.0 }).unwrap();
        let grid = [0.5, 1.0, 1.5];
        let res = sweep_lambda(&spec, 1.0, &grid, 6.0, 100, 1, false).unwrap();
        assert_eq!(res.rows.len(), 3);
        for (row, l) in res.rows.iter().zip(grid) {
            assert_eq!(row.lambda, l);
            assert_eq!(row.k, 6.0);
        }
    }

    #[test]
    fn stab_diagnostics_constant_always_passes() {
        let spec = MeasureSpec::unnormalized(MeasureFamily::ConstantLebesgue { density: 1.0 }).unwrap();
        let rows = diagnose_stabilization(&spec, &[1.0], 20, 1, true).unwrap();
        assert_eq!(rows[0].diag.empirical_prob, 1.0);
        assert_eq!(rows[0].aec_eligible, 20);
        assert_eq!(rows[0].aec_failures, 0);
    }

    #[test]
    fn stab_diagnostics_reject_lines() {
        let spec = MeasureSpec::unnormalized(MeasureFamily::PoissonLines { line_intensity: 1.0 }).unwrap();
        assert!(diagnose_stabilization(&spec, &[1.0], 5, 1, false).is_err());
    }

    #[test]
    fn voronoi_stab_probability_beats_union_bound() {
        let spec = MeasureSpec::unnormalized(MeasureFamily::VoronoiEdges { seed_intensity: 100.0 }).unwrap();
        let rows = diagnose_stabilization(&spec, &[0.5, 1.0], 300, 3, false).unwrap();
        for row in rows {
            let failures = 1.0 - row.diag.empirical_prob;
            let se = (row.diag.empirical_prob * (1.0 - row.diag.empirical_prob)
                / row.diag.replicates as f64)
                .sqrt();
            assert!(
                failures <= row.diag.theory_bound + 3.0 * se,
                "n {}: failures {failures} vs bound {}",
                row.diag.n,
                row.diag.theory_bound
            );
        }
    }
}
