//! Experiment dispatch, checkpointing, and artifact emission.
//!
//! A run is a plan of units executed in order; each completed unit is
//! appended to `checkpoint.jsonl` in the output directory, keyed by the
//! config hash, so an interrupted run resumes with only the missing units.
//! Results are written as `results.csv` (one row per grid point), a
//! `manifest.json` with the config echo, its hash, calibration constants,
//! and tool version, and optional SVG artifacts. All randomness derives from
//! the config seed; worker count never affects output bytes.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use coxperc::cox::sample_cox;
use coxperc::error::Error as CoreError;
use coxperc::experiments::{
    diagnose_stabilization, plan_ac, plan_large_radius, plan_singular, plan_sweep, run_units,
    GridPointResult, StabRow, Unit,
};
use coxperc::geom::BoxWindow;
use coxperc::measures::{
    calibrate_raw_intensity, sample_measure, CalibrationTable, MeasureSpec,
};
use coxperc::rng::derive_seed;

use crate::config::{config_hash, serialize_config, ExperimentKind, RunConfig};
use crate::svg;

#[derive(Debug)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub rows_written: usize,
    pub k_flags: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointLine {
    unit: usize,
    id: String,
    rows: Vec<GridPointResult>,
}

fn load_checkpoint(path: &Path, hash: &str) -> HashMap<usize, Vec<GridPointResult>> {
    let mut done = HashMap::new();
    let Ok(text) = fs::read_to_string(path) else {
        return done;
    };
    let mut lines = text.lines();
    match lines.next() {
        Some(first) if first.trim() == hash => {}
        _ => return done, // stale or foreign checkpoint
    }
    for line in lines {
        if let Ok(entry) = serde_json::from_str::<CheckpointLine>(line) {
            done.insert(entry.unit, entry.rows);
        }
    }
    done
}

/// Resolve the measure spec, calibrating tessellation intensities through the
/// JSON sidecar when a target intensity is requested.
fn resolve_measure(cfg: &RunConfig) -> Result<(MeasureSpec, CalibrationTable), CoreError> {
    let cal_path = PathBuf::from(&cfg.calibration_file);
    let mut table = CalibrationTable::load(&cal_path)?;
    let spec = match cfg.target_intensity {
        None => MeasureSpec::unnormalized(cfg.family.clone())?,
        Some(target) => {
            let before = table.entries.len();
            let spec = coxperc::measures::resolve_spec(
                &cfg.family,
                target,
                &mut table,
                cfg.calibration_replicates,
                derive_seed(cfg.seed, &[0xca1]),
            )?;
            if table.entries.len() != before {
                table.save(&cal_path)?;
            }
            spec
        }
    };
    Ok((spec, table))
}

fn build_plan(cfg: &RunConfig, spec: &MeasureSpec) -> Result<Vec<Unit>, CoreError> {
    match cfg.experiment {
        ExperimentKind::Sweep => plan_sweep(spec, cfg.r, &cfg.lambda_grid, cfg.k, cfg.k_check),
        ExperimentKind::LimitLargeR => plan_large_radius(spec, cfg.rho, &cfg.r_grid, cfg.k),
        ExperimentKind::LimitSingular => plan_singular(spec, cfg.c, &cfg.lambda_grid, cfg.k),
        ExperimentKind::LimitAc => plan_ac(spec, cfg.rho, &cfg.lambda_grid, cfg.k, cfg.lambda_crit),
        ExperimentKind::DiagnoseStab | ExperimentKind::Calibrate => Ok(Vec::new()),
    }
}

fn write_results_csv(path: &Path, rows: &[GridPointResult]) -> std::io::Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "spec,lambda,r,k,mean,se,n,seed")?;
    for row in rows {
        writeln!(
            f,
            "{},{},{},{},{},{},{},{}",
            row.label,
            row.lambda,
            row.r,
            row.k,
            row.estimate.mean,
            row.estimate.std_error,
            row.estimate.replicates,
            row.estimate.seed
        )?;
    }
    Ok(())
}

fn write_stab_csv(path: &Path, label: &str, rows: &[StabRow], seed: u64) -> std::io::Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(
        f,
        "spec,n,empirical_prob,theory_bound,replicates,aec_eligible,aec_failures,seed"
    )?;
    for row in rows {
        writeln!(
            f,
            "{},{},{},{},{},{},{},{}",
            label,
            row.diag.n,
            row.diag.empirical_prob,
            row.diag.theory_bound,
            row.diag.replicates,
            row.aec_eligible,
            row.aec_failures,
            seed
        )?;
    }
    Ok(())
}

/// `θ_K` vs `θ_2K` disagreements beyond 3 combined standard errors.
fn k_convergence_flags(rows: &[GridPointResult]) -> Vec<String> {
    let mut flags = Vec::new();
    for a in rows {
        for b in rows {
            if a.label == b.label
                && a.lambda == b.lambda
                && a.r == b.r
                && (b.k - 2.0 * a.k).abs() < 1e-9
            {
                let gap = (a.estimate.mean - b.estimate.mean).abs();
                let tol = 3.0 * a.estimate.combined_se(&b.estimate);
                if gap > tol {
                    flags.push(format!(
                        "{} lambda={} r={}: |theta_K - theta_2K| = {gap:.4} > {tol:.4}",
                        a.label, a.lambda, a.r
                    ));
                }
            }
        }
    }
    flags
}

fn emit_snapshot(cfg: &RunConfig, spec: &MeasureSpec, out: &Path) -> Result<(), CoreError> {
    let side = cfg.k.max(4.0) + 1.0;
    let window = BoxWindow::<2>::centered(side)?;
    let real = sample_measure(spec, &window, derive_seed(cfg.seed, &[0x57a9]))?;
    let lambda = cfg
        .lambda_grid
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
        .max(if cfg.rho > 0.0 { cfg.rho } else { 1.0 });
    let pattern = sample_cox(&real, lambda, derive_seed(cfg.seed, &[0x57a9, 1]))?;
    fs::write(out.join("snapshot.svg"), svg::snapshot_svg(&real, &pattern))?;
    Ok(())
}

fn emit_point_dumps(cfg: &RunConfig, spec: &MeasureSpec, out: &Path) -> Result<usize, CoreError> {
    let side = cfg.k.max(4.0) + 1.0;
    let window = BoxWindow::<2>::centered(side)?;
    let lambda = cfg
        .lambda_grid
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
        .max(if cfg.rho > 0.0 { cfg.rho } else { 1.0 });
    let dir = out.join("points");
    fs::create_dir_all(&dir)?;
    let count = cfg.replicates.min(64);
    for rep in 0..count {
        let real = sample_measure(spec, &window, derive_seed(cfg.seed, &[0xd0, rep]))?;
        let pattern = sample_cox(&real, lambda, derive_seed(cfg.seed, &[0xd1, rep]))?;
        let mut buf = Vec::new();
        pattern.write_csv(&mut buf)?;
        fs::write(dir.join(format!("rep-{rep:05}.csv")), buf)?;
    }
    Ok(count as usize)
}

pub fn run(cfg: &RunConfig) -> Result<RunSummary, String> {
    if cfg.workers > 0 {
        // ignore failure: the global pool may already exist (tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build_global();
    }
    let out = PathBuf::from(&cfg.out_dir);
    fs::create_dir_all(&out).map_err(|e| format!("cannot create output dir: {e}"))?;
    let hash = config_hash(cfg);

    let (spec, table) = resolve_measure(cfg).map_err(|e| e.to_string())?;

    let mut manifest = serde_json::json!({
        "tool": "coxperc",
        "version": env!("CARGO_PKG_VERSION"),
        "config_hash": hash,
        "config": serialize_config(cfg),
        "normalization": spec.normalization,
        "calibration": table,
    });

    let mut rows_written = 0;
    let mut k_flags = 0;

    match cfg.experiment {
        ExperimentKind::Calibrate => {
            let rec = calibrate_raw_intensity(
                &cfg.family,
                cfg.calibration_replicates.max(cfg.replicates),
                derive_seed(cfg.seed, &[0xca1]),
            )
            .map_err(|e| e.to_string())?;
            let cal_path = PathBuf::from(&cfg.calibration_file);
            let mut table = CalibrationTable::load(&cal_path).map_err(|e| e.to_string())?;
            table.insert(&cfg.family, rec.clone());
            table.save(&cal_path).map_err(|e| e.to_string())?;
            manifest["calibration_record"] = serde_json::to_value(&rec).unwrap();
            manifest["calibration"] = serde_json::to_value(&table).unwrap();
        }
        ExperimentKind::DiagnoseStab => {
            let rows = diagnose_stabilization(&spec, &cfg.n_grid, cfg.replicates, cfg.seed, cfg.aec)
                .map_err(|e| e.to_string())?;
            write_stab_csv(&out.join("stab.csv"), cfg.family.name(), &rows, cfg.seed)
                .map_err(|e| e.to_string())?;
            rows_written = rows.len();
        }
        _ => {
            let units = build_plan(cfg, &spec).map_err(|e| e.to_string())?;
            let ckpt_path = out.join("checkpoint.jsonl");
            let completed = load_checkpoint(&ckpt_path, &hash);
            if completed.is_empty() {
                // start a fresh checkpoint keyed by this config
                fs::write(&ckpt_path, format!("{hash}\n")).map_err(|e| e.to_string())?;
            }
            let mut ckpt = fs::OpenOptions::new()
                .append(true)
                .open(&ckpt_path)
                .map_err(|e| e.to_string())?;
            let result = run_units(
                &units,
                cfg.replicates,
                cfg.seed,
                cfg.dim,
                &completed,
                |index, unit, rows| {
                    let line = CheckpointLine {
                        unit: index,
                        id: unit.id.clone(),
                        rows: rows.to_vec(),
                    };
                    if let Ok(json) = serde_json::to_string(&line) {
                        let _ = writeln!(ckpt, "{json}");
                    }
                },
            )
            .map_err(|e| e.to_string())?;

            write_results_csv(&out.join("results.csv"), &result.rows).map_err(|e| e.to_string())?;
            rows_written = result.rows.len();

            let flags = k_convergence_flags(&result.rows);
            k_flags = flags.len();
            manifest["wall_clock_secs"] = serde_json::json!(result.wall_clock_secs);
            manifest["k_convergence_flags"] = serde_json::json!(flags);

            fs::write(out.join("curves.svg"), svg::curves_svg(&result.rows))
                .map_err(|e| e.to_string())?;
        }
    }

    if cfg.snapshot && cfg.dim == 2 {
        emit_snapshot(cfg, &spec, &out).map_err(|e| e.to_string())?;
    }
    if cfg.dump_points && cfg.dim == 2 {
        let n = emit_point_dumps(cfg, &spec, &out).map_err(|e| e.to_string())?;
        manifest["point_dumps"] = serde_json::json!(n);
    }

    manifest["rows"] = serde_json::json!(rows_written);
    fs::write(
        out.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;

    Ok(RunSummary {
        out_dir: out,
        rows_written,
        k_flags,
    })
}
