//! Flat key-value run configuration.
//!
//! The format is UTF-8 text, one `key = value` pair per line, `#` comments,
//! no sections. Lists are comma separated. Parsing validates everything and
//! reports *all* problems, not just the first; unknown keys are errors. The
//! seed must be explicit — runs never pull entropy from the environment.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use coxperc::measures::MeasureFamily;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Sweep,
    LimitLargeR,
    LimitSingular,
    LimitAc,
    DiagnoseStab,
    Calibrate,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::LimitLargeR => "limit-large-r",
            ExperimentKind::LimitSingular => "limit-singular",
            ExperimentKind::LimitAc => "limit-ac",
            ExperimentKind::DiagnoseStab => "diagnose-stab",
            ExperimentKind::Calibrate => "calibrate",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "sweep" => ExperimentKind::Sweep,
            "limit-large-r" => ExperimentKind::LimitLargeR,
            "limit-singular" => ExperimentKind::LimitSingular,
            "limit-ac" => ExperimentKind::LimitAc,
            "diagnose-stab" => ExperimentKind::DiagnoseStab,
            "calibrate" => ExperimentKind::Calibrate,
            _ => return None,
        })
    }
}

/// Fully validated run configuration with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    pub dim: usize,
    pub family: MeasureFamily,
    /// Target `E[Λ(Q_1)]`; `None` runs the measure unnormalized.
    pub target_intensity: Option<f64>,
    pub lambda_grid: Vec<f64>,
    pub r: f64,
    pub r_grid: Vec<f64>,
    pub n_grid: Vec<f64>,
    pub k: f64,
    pub rho: f64,
    pub c: f64,
    pub lambda_crit: f64,
    pub replicates: u64,
    pub seed: u64,
    pub workers: usize,
    pub out_dir: String,
    pub calibration_file: String,
    pub calibration_replicates: u64,
    pub snapshot: bool,
    pub dump_points: bool,
    pub k_check: bool,
    pub aec: bool,
}

const KNOWN_KEYS: &[&str] = &[
    "experiment",
    "dim",
    "measure",
    "density",
    "kernel_radius",
    "kernel_height",
    "center_intensity",
    "grain_radius",
    "grain_intensity",
    "lambda_in",
    "lambda_out",
    "seed_intensity",
    "line_intensity",
    "target_intensity",
    "lambda_grid",
    "r",
    "r_grid",
    "n_grid",
    "k",
    "rho",
    "c",
    "lambda_crit",
    "replicates",
    "seed",
    "workers",
    "out_dir",
    "calibration_file",
    "calibration_replicates",
    "snapshot",
    "dump_points",
    "k_check",
    "aec",
];

fn parse_pairs(text: &str, errors: &mut Vec<String>) -> BTreeMap<String, String> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => {
                let key = k.trim().to_string();
                let value = v.trim().to_string();
                if !KNOWN_KEYS.contains(&key.as_str()) {
                    errors.push(format!("line {}: unknown key `{key}`", lineno + 1));
                    continue;
                }
                if map.insert(key.clone(), value).is_some() {
                    errors.push(format!("line {}: duplicate key `{key}`", lineno + 1));
                }
            }
            None => errors.push(format!("line {}: expected `key = value`, got `{line}`", lineno + 1)),
        }
    }
    map
}

struct Reader<'a> {
    map: &'a BTreeMap<String, String>,
    errors: &'a mut Vec<String>,
}

impl Reader<'_> {
    fn f64_opt(&mut self, key: &str) -> Option<f64> {
        let raw = self.map.get(key)?;
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Some(v),
            _ => {
                self.errors.push(format!("key `{key}`: expected a finite number, got `{raw}`"));
                None
            }
        }
    }

    fn f64_def(&mut self, key: &str, default: f64) -> f64 {
        self.f64_opt(key).unwrap_or(default)
    }

    fn nonneg(&mut self, key: &str) -> Option<f64> {
        let v = self.f64_opt(key)?;
        if v < 0.0 {
            self.errors.push(format!("key `{key}`: must be >= 0, got {v}"));
            None
        } else {
            Some(v)
        }
    }

    fn u64_def(&mut self, key: &str, default: u64) -> u64 {
        match self.map.get(key) {
            None => default,
            Some(raw) => match raw.parse::<u64>() {
                Ok(v) => v,
                Err(_) => {
                    self.errors
                        .push(format!("key `{key}`: expected a nonnegative integer, got `{raw}`"));
                    default
                }
            },
        }
    }

    fn bool_def(&mut self, key: &str, default: bool) -> bool {
        match self.map.get(key).map(|s| s.as_str()) {
            None => default,
            Some("true") => true,
            Some("false") => false,
            Some(raw) => {
                self.errors
                    .push(format!("key `{key}`: expected true or false, got `{raw}`"));
                default
            }
        }
    }

    fn grid(&mut self, key: &str) -> Vec<f64> {
        let Some(raw) = self.map.get(key) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for part in raw.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            match part.parse::<f64>() {
                Ok(v) if v.is_finite() => out.push(v),
                _ => self
                    .errors
                    .push(format!("key `{key}`: bad grid entry `{part}`")),
            }
        }
        out
    }

    fn string_def(&mut self, key: &str, default: &str) -> String {
        self.map.get(key).cloned().unwrap_or_else(|| default.to_string())
    }
}

fn build_family(
    map: &BTreeMap<String, String>,
    errors: &mut Vec<String>,
) -> Option<MeasureFamily> {
    let measure = match map.get("measure") {
        Some(m) => m.clone(),
        None => {
            errors.push("missing required key `measure`".into());
            return None;
        }
    };
    let mut rd = Reader { map, errors };
    let fam = match measure.as_str() {
        "constant" => MeasureFamily::ConstantLebesgue {
            density: rd.nonneg("density").unwrap_or(1.0),
        },
        "shot-noise" => MeasureFamily::ShotNoise {
            kernel_radius: rd.nonneg("kernel_radius").unwrap_or(0.25),
            kernel_height: rd.nonneg("kernel_height").unwrap_or(1.0),
            center_intensity: rd.nonneg("center_intensity").unwrap_or(1.0),
        },
        "boolean" => MeasureFamily::ModulatedBoolean {
            grain_radius: rd.nonneg("grain_radius").unwrap_or(0.5),
            grain_intensity: rd.nonneg("grain_intensity").unwrap_or(1.0),
            lambda_in: rd.nonneg("lambda_in").unwrap_or(1.0),
            lambda_out: rd.nonneg("lambda_out").unwrap_or(0.0),
        },
        "voronoi" => MeasureFamily::VoronoiEdges {
            seed_intensity: rd.nonneg("seed_intensity").unwrap_or(100.0),
        },
        "delaunay" => MeasureFamily::DelaunayEdges {
            seed_intensity: rd.nonneg("seed_intensity").unwrap_or(100.0),
        },
        "lines" => MeasureFamily::PoissonLines {
            line_intensity: rd.nonneg("line_intensity").unwrap_or(20.0),
        },
        other => {
            errors.push(format!(
                "key `measure`: unknown family `{other}` (constant, shot-noise, boolean, voronoi, delaunay, lines)"
            ));
            return None;
        }
    };
    if let Err(e) = fam.validate() {
        errors.push(e.to_string());
    }
    Some(fam)
}

/// Parse and validate a config. On failure returns every problem found.
pub fn parse_config(text: &str) -> Result<RunConfig, Vec<String>> {
    let mut errors = Vec::new();
    let map = parse_pairs(text, &mut errors);

    let experiment = match map.get("experiment") {
        None => {
            errors.push("missing required key `experiment`".into());
            None
        }
        Some(raw) => match ExperimentKind::from_name(raw) {
            Some(k) => Some(k),
            None => {
                errors.push(format!(
                    "key `experiment`: unknown kind `{raw}` (sweep, limit-large-r, limit-singular, limit-ac, diagnose-stab, calibrate)"
                ));
                None
            }
        },
    };

    let seed = match map.get("seed") {
        None => {
            errors.push("missing required key `seed` (runs must be explicitly seeded)".into());
            0
        }
        Some(raw) => match raw.parse::<u64>() {
            Ok(v) => v,
            Err(_) => {
                errors.push(format!("key `seed`: expected a nonnegative integer, got `{raw}`"));
                0
            }
        },
    };

    let family = build_family(&map, &mut errors);

    let mut rd = Reader { map: &map, errors: &mut errors };
    let dim = rd.u64_def("dim", 2) as usize;
    let target_intensity = rd.f64_opt("target_intensity");
    let lambda_grid = rd.grid("lambda_grid");
    let r = rd.f64_def("r", 0.0);
    let r_grid = rd.grid("r_grid");
    let n_grid = rd.grid("n_grid");
    let k = rd.f64_def("k", 6.0);
    let rho = rd.f64_def("rho", 0.0);
    let c = rd.f64_def("c", 0.0);
    let lambda_crit = rd.f64_def("lambda_crit", 1.4);
    let replicates = rd.u64_def("replicates", 1000);
    let workers = rd.u64_def("workers", 0) as usize;
    let out_dir = rd.string_def("out_dir", "");
    let calibration_file = rd.string_def("calibration_file", "calibration.json");
    let calibration_replicates = rd.u64_def("calibration_replicates", 2000);
    let snapshot = rd.bool_def("snapshot", false);
    let dump_points = rd.bool_def("dump_points", false);
    let k_check = rd.bool_def("k_check", false);
    let aec = rd.bool_def("aec", true);

    if !(dim == 2 || dim == 3) {
        errors.push(format!("key `dim`: must be 2 or 3, got {dim}"));
    }
    if replicates == 0 {
        errors.push("key `replicates`: must be >= 1".into());
    }
    if let Some(t) = target_intensity {
        if t <= 0.0 {
            errors.push(format!("key `target_intensity`: must be > 0, got {t}"));
        }
    }

    // per-experiment requirements
    if let (Some(exp), Some(fam)) = (experiment, family.as_ref()) {
        if !fam.supports_dim(dim) && (dim == 2 || dim == 3) {
            errors.push(format!(
                "measure `{}` does not support dim = {dim}",
                fam.name()
            ));
        }
        match exp {
            ExperimentKind::Sweep => {
                if lambda_grid.is_empty() {
                    errors.push("sweep requires a nonempty `lambda_grid`".into());
                }
                if r <= 0.0 {
                    errors.push("sweep requires `r` > 0".into());
                }
                if k <= 4.0 * r {
                    errors.push(format!("sweep requires `k` > 4r, got k = {k}, r = {r}"));
                }
            }
            ExperimentKind::LimitLargeR => {
                if r_grid.is_empty() {
                    errors.push("limit-large-r requires a nonempty `r_grid`".into());
                }
                if rho <= 0.0 {
                    errors.push("limit-large-r requires `rho` > 0".into());
                }
            }
            ExperimentKind::LimitSingular => {
                if lambda_grid.is_empty() {
                    errors.push("limit-singular requires a nonempty `lambda_grid`".into());
                }
                if c <= 0.0 {
                    errors.push("limit-singular requires `c` > 0".into());
                }
                if !fam.is_singular() {
                    errors.push(format!(
                        "limit-singular requires a segment-system measure, got `{}`",
                        fam.name()
                    ));
                }
            }
            ExperimentKind::LimitAc => {
                if lambda_grid.is_empty() {
                    errors.push("limit-ac requires a nonempty `lambda_grid`".into());
                }
                if rho <= 0.0 {
                    errors.push("limit-ac requires `rho` > 0".into());
                }
                if !matches!(fam, MeasureFamily::ModulatedBoolean { .. }) {
                    errors.push(format!(
                        "limit-ac requires `measure = boolean`, got `{}`",
                        fam.name()
                    ));
                }
            }
            ExperimentKind::DiagnoseStab => {
                if n_grid.is_empty() {
                    errors.push("diagnose-stab requires a nonempty `n_grid`".into());
                }
                if matches!(fam, MeasureFamily::PoissonLines { .. }) {
                    errors.push("diagnose-stab is not defined for `measure = lines`".into());
                }
            }
            ExperimentKind::Calibrate => {}
        }
    }

    if !errors.is_empty() {
        return Err(errors);
    }
    let experiment = experiment.expect("validated");
    let family = family.expect("validated");
    let out_dir = if out_dir.is_empty() {
        format!("runs/{}-{}", experiment.name(), family.name())
    } else {
        out_dir
    };
    Ok(RunConfig {
        experiment,
        dim,
        family,
        target_intensity,
        lambda_grid,
        r,
        r_grid,
        n_grid,
        k,
        rho,
        c,
        lambda_crit,
        replicates,
        seed,
        workers,
        out_dir,
        calibration_file,
        calibration_replicates,
        snapshot,
        dump_points,
        k_check,
        aec,
    })
}

fn push_grid(out: &mut String, key: &str, grid: &[f64]) {
    if !grid.is_empty() {
        let items: Vec<String> = grid.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{key} = {}", items.join(", "));
    }
}

/// Canonical serialization: every effective setting, defaults included, in a
/// fixed key order. `parse(serialize(cfg)) == cfg`.
pub fn serialize_config(cfg: &RunConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "experiment = {}", cfg.experiment.name());
    let _ = writeln!(out, "dim = {}", cfg.dim);
    match &cfg.family {
        MeasureFamily::ConstantLebesgue { density } => {
            let _ = writeln!(out, "measure = constant");
            let _ = writeln!(out, "density = {density}");
        }
        MeasureFamily::ShotNoise {
            kernel_radius,
            kernel_height,
            center_intensity,
        } => {
            let _ = writeln!(out, "measure = shot-noise");
            let _ = writeln!(out, "kernel_radius = {kernel_radius}");
            let _ = writeln!(out, "kernel_height = {kernel_height}");
            let _ = writeln!(out, "center_intensity = {center_intensity}");
        }
        MeasureFamily::ModulatedBoolean {
            grain_radius,
            grain_intensity,
            lambda_in,
            lambda_out,
        } => {
            let _ = writeln!(out, "measure = boolean");
            let _ = writeln!(out, "grain_radius = {grain_radius}");
            let _ = writeln!(out, "grain_intensity = {grain_intensity}");
            let _ = writeln!(out, "lambda_in = {lambda_in}");
            let _ = writeln!(out, "lambda_out = {lambda_out}");
        }
        MeasureFamily::VoronoiEdges { seed_intensity } => {
            let _ = writeln!(out, "measure = voronoi");
            let _ = writeln!(out, "seed_intensity = {seed_intensity}");
        }
        MeasureFamily::DelaunayEdges { seed_intensity } => {
            let _ = writeln!(out, "measure = delaunay");
            let _ = writeln!(out, "seed_intensity = {seed_intensity}");
        }
        MeasureFamily::PoissonLines { line_intensity } => {
            let _ = writeln!(out, "measure = lines");
            let _ = writeln!(out, "line_intensity = {line_intensity}");
        }
    }
    if let Some(t) = cfg.target_intensity {
        let _ = writeln!(out, "target_intensity = {t}");
    }
    push_grid(&mut out, "lambda_grid", &cfg.lambda_grid);
    if cfg.r > 0.0 {
        let _ = writeln!(out, "r = {}", cfg.r);
    }
    push_grid(&mut out, "r_grid", &cfg.r_grid);
    push_grid(&mut out, "n_grid", &cfg.n_grid);
    let _ = writeln!(out, "k = {}", cfg.k);
    if cfg.rho > 0.0 {
        let _ = writeln!(out, "rho = {}", cfg.rho);
    }
    if cfg.c > 0.0 {
        let _ = writeln!(out, "c = {}", cfg.c);
    }
    let _ = writeln!(out, "lambda_crit = {}", cfg.lambda_crit);
    let _ = writeln!(out, "replicates = {}", cfg.replicates);
    let _ = writeln!(out, "seed = {}", cfg.seed);
    let _ = writeln!(out, "workers = {}", cfg.workers);
    let _ = writeln!(out, "out_dir = {}", cfg.out_dir);
    let _ = writeln!(out, "calibration_file = {}", cfg.calibration_file);
    let _ = writeln!(out, "calibration_replicates = {}", cfg.calibration_replicates);
    let _ = writeln!(out, "snapshot = {}", cfg.snapshot);
    let _ = writeln!(out, "dump_points = {}", cfg.dump_points);
    let _ = writeln!(out, "k_check = {}", cfg.k_check);
    let _ = writeln!(out, "aec = {}", cfg.aec);
    out
}

/// Hash of the canonical serialization (the manifest's `config_hash`).
pub fn config_hash(cfg: &RunConfig) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(serialize_config(cfg).as_bytes());
    let digest = hasher.finalize();
    digest.iter().take(16).map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
experiment = sweep
measure = voronoi
seed_intensity = 100
target_intensity = 20
r = 0.475
lambda_grid = 0.1, 0.2, 0.4
k = 5
seed = 42
";

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.dim, 2);
        assert_eq!(cfg.replicates, 1000);
        assert_eq!(cfg.workers, 0);
        assert_eq!(cfg.out_dir, "runs/sweep-voronoi");
        assert!(!cfg.snapshot);
    }

    #[test]
    fn unknown_key_and_negative_intensity_both_reported() {
        let text = "experiment = sweep\nmeasure = voronoi\nseed_intensity = -5\nbogus = 1\nr = 0.4\nlambda_grid = 1\nk = 5\nseed = 1\n";
        let errs = parse_config(text).unwrap_err();
        assert!(errs.iter().any(|e| e.contains("unknown key `bogus`")), "{errs:?}");
        assert!(errs.iter().any(|e| e.contains("seed_intensity")), "{errs:?}");
    }

    #[test]
    fn missing_seed_is_an_error() {
        let text = "experiment = sweep\nmeasure = constant\nr = 1\nlambda_grid = 1\nk = 5\n";
        let errs = parse_config(text).unwrap_err();
        assert!(errs.iter().any(|e| e.contains("`seed`")), "{errs:?}");
    }

    #[test]
    fn roundtrip_is_identity() {
        let cfg = parse_config(MINIMAL).unwrap();
        let text = serialize_config(&cfg);
        let cfg2 = parse_config(&text).unwrap();
        assert_eq!(cfg, cfg2);
        assert_eq!(text, serialize_config(&cfg2));
        assert_eq!(config_hash(&cfg), config_hash(&cfg2));
    }

    #[test]
    fn singular_experiment_rejects_ac_measure() {
        let text = "experiment = limit-singular\nmeasure = constant\nc = 0.2\nlambda_grid = 50\nk = 5\nseed = 1\n";
        let errs = parse_config(text).unwrap_err();
        assert!(errs.iter().any(|e| e.contains("segment-system")), "{errs:?}");
    }

    #[test]
    fn tessellation_in_3d_rejected() {
        let text = "experiment = sweep\ndim = 3\nmeasure = voronoi\nr = 0.4\nlambda_grid = 1\nk = 5\nseed = 1\n";
        let errs = parse_config(text).unwrap_err();
        assert!(errs.iter().any(|e| e.contains("does not support dim")), "{errs:?}");
    }
}
