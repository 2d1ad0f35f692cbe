//! Experiment plans: a run is a sequence of named units, each producing grid
//! rows from `(replicates, unit seed)` alone.
//!
//! Unit seeds derive from the master seed and the unit's position in the
//! plan, so results are independent of scheduling, and a driver that resumes
//! a partially completed plan reproduces exactly the rows a fresh run would
//! have produced.

use crate::error::Result;
use crate::measures::MeasureSpec;
use crate::rng::derive_seed;

use super::limits::{ac_reference, bond_theta_annealed, gap_theta_annealed};
use super::theta::{estimate_theta_grid, estimate_theta_poisson};
use super::{ExperimentResult, GridPointResult};

#[derive(Debug, Clone)]
pub struct Unit {
    /// Stable identifier used for checkpointing, unique within a plan.
    pub id: String,
    pub task: UnitTask,
}

#[derive(Debug, Clone)]
pub enum UnitTask {
    /// Homogeneous Poisson reference at connection radius 1.
    PoissonRef { rho: f64, k: f64 },
    /// Coupled theta curve over an intensity grid (one row per intensity).
    ThetaCurve {
        spec: MeasureSpec,
        lambdas: Vec<f64>,
        r: f64,
        k: f64,
    },
    /// Single theta estimate.
    Theta {
        spec: MeasureSpec,
        lambda: f64,
        r: f64,
        k: f64,
    },
    /// Annealed gap model at linear intensity `mu` (reported under `lambda`).
    GapAnnealed {
        spec: MeasureSpec,
        lambda: f64,
        mu: f64,
        r: f64,
        k: f64,
    },
    /// Annealed Bernoulli bond model with edge survival `b^length`.
    BondAnnealed { spec: MeasureSpec, b: f64, k: f64 },
    /// Size-biased local limit times superlevel connectivity (absolutely
    /// continuous coupling reference).
    AcReference {
        spec: MeasureSpec,
        rho: f64,
        k: f64,
        lambda_crit: f64,
    },
}

impl Unit {
    /// Execute the unit at the given spatial dimension (2 or 3; the models
    /// that only exist in the plane reject 3).
    pub fn run(&self, replicates: u64, seed: u64, dim: usize) -> Result<Vec<GridPointResult>> {
        match &self.task {
            UnitTask::PoissonRef { rho, k } => {
                let est = match dim {
                    2 => estimate_theta_poisson::<2>(*rho, *k, replicates, seed)?,
                    3 => estimate_theta_poisson::<3>(*rho, *k, replicates, seed)?,
                    _ => return Err(crate::error::Error::UnsupportedDimension { dim, what: "experiments" }),
                };
                Ok(vec![GridPointResult {
                    label: "poisson-ref".into(),
                    lambda: *rho,
                    r: 1.0,
                    k: *k,
                    estimate: est,
                }])
            }
            UnitTask::ThetaCurve { spec, lambdas, r, k } => {
                let ests = match dim {
                    2 => estimate_theta_grid::<2>(spec, lambdas, *r, *k, replicates, seed)?,
                    3 => estimate_theta_grid::<3>(spec, lambdas, *r, *k, replicates, seed)?,
                    _ => return Err(crate::error::Error::UnsupportedDimension { dim, what: "experiments" }),
                };
                Ok(lambdas
                    .iter()
                    .zip(ests)
                    .map(|(lambda, estimate)| GridPointResult {
                        label: spec.family.name().into(),
                        lambda: *lambda,
                        r: *r,
                        k: *k,
                        estimate,
                    })
                    .collect())
            }
            UnitTask::Theta { spec, lambda, r, k } => {
                let ests = match dim {
                    2 => estimate_theta_grid::<2>(spec, &[*lambda], *r, *k, replicates, seed)?,
                    3 => estimate_theta_grid::<3>(spec, &[*lambda], *r, *k, replicates, seed)?,
                    _ => return Err(crate::error::Error::UnsupportedDimension { dim, what: "experiments" }),
                };
                Ok(vec![GridPointResult {
                    label: spec.family.name().into(),
                    lambda: *lambda,
                    r: *r,
                    k: *k,
                    estimate: ests.into_iter().next().expect("one row"),
                }])
            }
            UnitTask::GapAnnealed { spec, lambda, mu, r, k } => {
                require_planar(dim)?;
                let est = gap_theta_annealed(spec, *mu, *r, *k, replicates, seed)?;
                Ok(vec![GridPointResult {
                    label: format!("{}-gap", spec.family.name()),
                    lambda: *lambda,
                    r: *r,
                    k: *k,
                    estimate: est,
                }])
            }
            UnitTask::BondAnnealed { spec, b, k } => {
                require_planar(dim)?;
                let est = bond_theta_annealed(spec, *b, *k, replicates, seed)?;
                Ok(vec![GridPointResult {
                    label: format!("{}-bond", spec.family.name()),
                    lambda: *b,
                    r: 0.0,
                    k: *k,
                    estimate: est,
                }])
            }
            UnitTask::AcReference {
                spec,
                rho,
                k,
                lambda_crit,
            } => {
                require_planar(dim)?;
                let est = ac_reference(spec, *rho, *k, replicates, seed, *lambda_crit)?;
                Ok(vec![GridPointResult {
                    label: format!("{}-ac-ref", spec.family.name()),
                    lambda: *rho,
                    r: 0.0,
                    k: *k,
                    estimate: est,
                }])
            }
        }
    }
}

fn require_planar(dim: usize) -> Result<()> {
    if dim == 2 {
        Ok(())
    } else {
        Err(crate::error::Error::UnsupportedDimension {
            dim,
            what: "segment-system and Boolean-reference units",
        })
    }
}

/// Seed for the unit at `index` in a plan.
pub fn unit_seed(master_seed: u64, index: usize) -> u64 {
    derive_seed(master_seed, &[0x017, index as u64])
}

/// Run every unit in order; `on_unit_done(index, rows)` fires after each unit
/// (checkpoint hook). Units whose index is in `completed` are replaced by the
/// supplied rows instead of being re-run.
pub fn run_units(
    units: &[Unit],
    replicates: u64,
    master_seed: u64,
    dim: usize,
    completed: &std::collections::HashMap<usize, Vec<GridPointResult>>,
    mut on_unit_done: impl FnMut(usize, &Unit, &[GridPointResult]),
) -> Result<ExperimentResult> {
    let start = std::time::Instant::now();
    let mut rows = Vec::new();
    for (index, unit) in units.iter().enumerate() {
        let unit_rows = match completed.get(&index) {
            Some(cached) => cached.clone(),
            None => {
                let computed = unit.run(replicates, unit_seed(master_seed, index), dim)?;
                on_unit_done(index, unit, &computed);
                computed
            }
        };
        rows.extend(unit_rows);
    }
    Ok(ExperimentResult {
        rows,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    })
}

/// Run a plan start to finish with no checkpointing (planar).
pub fn run_plan(units: &[Unit], replicates: u64, master_seed: u64) -> Result<ExperimentResult> {
    run_units(
        units,
        replicates,
        master_seed,
        2,
        &std::collections::HashMap::new(),
        |_, _, _| {},
    )
}
