//! Random intensity measures: parametric families, sampled realizations,
//! Palm reweighting, and stabilization/connectedness diagnostics.

pub mod calibrate;
pub mod diagnostics;
pub mod realization;
pub mod spec;

pub use calibrate::{calibrate_raw_intensity, resolve_spec, CalibrationRecord, CalibrationTable};
pub use diagnostics::{
    aec_check, nearest_seed_sup_bound, stab_radius_sup_of, stabilization_radius_sup, AecReport,
    StabDiagnostics,
};
pub use realization::{sample_measure, AcSources, Body, MeasureRealization, PalmDraw, SegmentsBody};
pub use spec::{MeasureFamily, MeasureSpec};
