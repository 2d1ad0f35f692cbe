//! Monte Carlo estimators and limit-regime experiment drivers.

pub mod laplace;
pub mod limits;
pub mod plan;
pub mod sweep;
pub mod theta;
pub mod threshold;

use serde::{Deserialize, Serialize};

use crate::stats::EstimateWithCI;

/// One estimated grid point of an experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridPointResult {
    /// Series label, e.g. the measure family name, `"poisson-ref"`, or a
    /// derived series like `"voronoi-gap"`.
    pub label: String,
    pub lambda: f64,
    pub r: f64,
    pub k: f64,
    pub estimate: EstimateWithCI,
}

/// All grid points of one experiment run.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub rows: Vec<GridPointResult>,
    pub wall_clock_secs: f64,
}

pub use laplace::{laplace_transform, shot_noise_rate_closed_form, LaplaceResult};
pub use limits::{
    ac_reference, bond_theta_annealed, coupled_limit_ac, coupled_limit_large_radius,
    coupled_limit_singular, gap_radius, gap_theta_annealed, plan_ac, plan_large_radius,
    plan_singular,
};
pub use plan::{run_plan, run_units, unit_seed, Unit, UnitTask};
pub use sweep::{diagnose_stabilization, plan_sweep, sweep_lambda, StabRow};
pub use theta::{
    estimate_theta, estimate_theta_grid, estimate_theta_poisson, estimate_theta_poisson_grid,
    isolation_lower_bound,
};
pub use threshold::find_lambda_threshold;
