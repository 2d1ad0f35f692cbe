//! Simulation library for continuum percolation of Cox point processes.
//!
//! A Cox process is a Poisson point process whose intensity measure `λΛ` is
//! itself random. This crate samples several families of stationary random
//! intensity measures (shot-noise fields, modulated Boolean models, edge-length
//! measures of planar tessellations), draws Cox point patterns conditional on
//! them, builds Gilbert graphs at a connection radius `r`, and estimates
//! percolation probabilities and related limit-regime quantities by Monte
//! Carlo, with deterministic seeding throughout.
//!
//! Module map:
//! - [`geom`]: points, box windows, segments, and a fixed-radius neighbor grid.
//! - [`measures`]: random intensity measure families, realizations, Palm
//!   reweighting, and stabilization/connectedness diagnostics.
//! - [`tessellations`]: planar Voronoi/Delaunay/line tessellations as segment
//!   systems carrying 1-dimensional Hausdorff measure.
//! - [`cox`]: Poisson and Cox pattern sampling, Palm versions, thinning.
//! - [`percolation`]: Gilbert graphs, connectivity events, Bernoulli bond and
//!   gap models on segment systems.
//! - [`experiments`]: Monte Carlo estimators and limit-regime drivers.

pub mod cox;
pub mod error;
pub mod experiments;
pub mod geom;
pub mod measures;
pub mod percolation;
pub mod rng;
pub mod stats;
pub mod tessellations;

pub use error::{Error, Result};
