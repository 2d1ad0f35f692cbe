//! Parametric descriptions of the random intensity measure families.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geom::unit_ball_volume;

/// The supported families of stationary random intensity measures.
///
/// Absolutely continuous families (`ConstantLebesgue`, `ShotNoise`,
/// `ModulatedBoolean`) have a density field and support dimensions 2 and 3;
/// the singular families are edge-length measures of planar tessellations
/// and exist in dimension 2 only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum MeasureFamily {
    ConstantLebesgue {
        density: f64,
    },
    ShotNoise {
        kernel_radius: f64,
        kernel_height: f64,
        center_intensity: f64,
    },
    ModulatedBoolean {
        grain_radius: f64,
        grain_intensity: f64,
        lambda_in: f64,
        lambda_out: f64,
    },
    VoronoiEdges {
        seed_intensity: f64,
    },
    DelaunayEdges {
        seed_intensity: f64,
    },
    PoissonLines {
        line_intensity: f64,
    },
}

impl MeasureFamily {
    pub fn name(&self) -> &'static str {
        match self {
            MeasureFamily::ConstantLebesgue { .. } => "constant",
            MeasureFamily::ShotNoise { .. } => "shot-noise",
            MeasureFamily::ModulatedBoolean { .. } => "boolean",
            MeasureFamily::VoronoiEdges { .. } => "voronoi",
            MeasureFamily::DelaunayEdges { .. } => "delaunay",
            MeasureFamily::PoissonLines { .. } => "lines",
        }
    }

    pub fn is_singular(&self) -> bool {
        matches!(
            self,
            MeasureFamily::VoronoiEdges { .. }
                | MeasureFamily::DelaunayEdges { .. }
                | MeasureFamily::PoissonLines { .. }
        )
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &'static str, v: f64, strict: bool| -> Result<()> {
            if !v.is_finite() || v < 0.0 || (strict && v == 0.0) {
                Err(Error::invalid(name, format!("must be {} got {v}", if strict { "> 0," } else { ">= 0," })))
            } else {
                Ok(())
            }
        };
        match *self {
            MeasureFamily::ConstantLebesgue { density } => check("density", density, false),
            MeasureFamily::ShotNoise {
                kernel_radius,
                kernel_height,
                center_intensity,
            } => {
                check("kernel_radius", kernel_radius, true)?;
                check("kernel_height", kernel_height, false)?;
                check("center_intensity", center_intensity, false)
            }
            MeasureFamily::ModulatedBoolean {
                grain_radius,
                grain_intensity,
                lambda_in,
                lambda_out,
            } => {
                check("grain_radius", grain_radius, true)?;
                check("grain_intensity", grain_intensity, false)?;
                check("lambda_in", lambda_in, false)?;
                check("lambda_out", lambda_out, false)
            }
            MeasureFamily::VoronoiEdges { seed_intensity } => {
                check("seed_intensity", seed_intensity, false)
            }
            MeasureFamily::DelaunayEdges { seed_intensity } => {
                check("seed_intensity", seed_intensity, false)
            }
            MeasureFamily::PoissonLines { line_intensity } => {
                check("line_intensity", line_intensity, false)
            }
        }
    }

    pub fn supports_dim(&self, dim: usize) -> bool {
        if self.is_singular() {
            dim == 2
        } else {
            dim == 2 || dim == 3
        }
    }

    /// Closed-form mean mass per unit volume of the unnormalized measure, for
    /// families where it is exact. Tessellation families are calibrated by
    /// Monte Carlo instead and return `None`.
    pub fn exact_raw_intensity(&self, dim: usize) -> Option<f64> {
        match *self {
            MeasureFamily::ConstantLebesgue { density } => Some(density),
            MeasureFamily::ShotNoise {
                kernel_radius,
                kernel_height,
                center_intensity,
            } => Some(center_intensity * kernel_height * unit_ball_volume(dim) * kernel_radius.powi(dim as i32)),
            MeasureFamily::ModulatedBoolean {
                grain_radius,
                grain_intensity,
                lambda_in,
                lambda_out,
            } => {
                let p_covered =
                    1.0 - (-grain_intensity * unit_ball_volume(dim) * grain_radius.powi(dim as i32)).exp();
                Some(p_covered * lambda_in + (1.0 - p_covered) * lambda_out)
            }
            _ => None,
        }
    }

    /// Margin by which source processes (kernel centers, grains, tessellation
    /// seeds) are sampled beyond the requested window to avoid edge effects.
    pub fn sampling_margin(&self) -> f64 {
        match *self {
            MeasureFamily::ConstantLebesgue { .. } => 0.0,
            MeasureFamily::ShotNoise { kernel_radius, .. } => kernel_radius,
            MeasureFamily::ModulatedBoolean { grain_radius, .. } => grain_radius,
            MeasureFamily::VoronoiEdges { seed_intensity }
            | MeasureFamily::DelaunayEdges { seed_intensity } => {
                if seed_intensity > 0.0 {
                    6.0 / seed_intensity.sqrt()
                } else {
                    0.0
                }
            }
            MeasureFamily::PoissonLines { .. } => 0.0,
        }
    }

    /// Stable identifier for calibration caching.
    pub fn spec_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("family serializes");
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        let digest = hasher.finalize();
        digest.iter().take(12).map(|b| format!("{b:02x}")).collect()
    }
}

/// A measure family together with the scalar multiplier that calibrates the
/// mean mass per unit volume to a target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    pub family: MeasureFamily,
    /// Multiplier applied to the raw measure; `E[Λ(Q_1)] = normalization *
    /// raw_intensity`.
    pub normalization: f64,
}

impl MeasureSpec {
    /// Use the family as-is (`normalization = 1`).
    pub fn unnormalized(family: MeasureFamily) -> Result<Self> {
        family.validate()?;
        Ok(MeasureSpec {
            family,
            normalization: 1.0,
        })
    }

    /// Scale so that the mean mass per unit volume equals `target`, given the
    /// raw intensity (exact or calibrated).
    pub fn normalized_to(family: MeasureFamily, target: f64, raw_intensity: f64) -> Result<Self> {
        family.validate()?;
        if !(target.is_finite() && target >= 0.0) {
            return Err(Error::invalid("target_intensity", format!("must be >= 0, got {target}")));
        }
        if !(raw_intensity.is_finite() && raw_intensity > 0.0) {
            return Err(Error::invalid(
                "raw_intensity",
                format!("must be > 0 to normalize, got {raw_intensity}"),
            ));
        }
        Ok(MeasureSpec {
            family,
            normalization: target / raw_intensity,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_intensities() {
        let f = MeasureFamily::ConstantLebesgue { density: 2.5 };
        assert_eq!(f.exact_raw_intensity(2), Some(2.5));

        let f = MeasureFamily::ShotNoise {
            kernel_radius: 0.5,
            kernel_height: 2.0,
            center_intensity: 3.0,
        };
        let expected = 3.0 * 2.0 * std::f64::consts::PI * 0.25;
        assert!((f.exact_raw_intensity(2).unwrap() - expected).abs() < 1e-12);

        let f = MeasureFamily::VoronoiEdges { seed_intensity: 100.0 };
        assert!(f.exact_raw_intensity(2).is_none());
    }

    #[test]
    fn boolean_intensity_interpolates() {
        let f = MeasureFamily::ModulatedBoolean {
            grain_radius: 1.0,
            grain_intensity: 0.0,
            lambda_in: 7.0,
            lambda_out: 3.0,
        };
        // no grains: everything is outside
        assert!((f.exact_raw_intensity(2).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn validation_rejects_negative() {
        let f = MeasureFamily::ConstantLebesgue { density: -1.0 };
        assert!(f.validate().is_err());
    }

    #[test]
    fn singular_families_are_planar_only() {
        let f = MeasureFamily::VoronoiEdges { seed_intensity: 1.0 };
        assert!(f.supports_dim(2));
        assert!(!f.supports_dim(3));
        let g = MeasureFamily::ShotNoise {
            kernel_radius: 1.0,
            kernel_height: 1.0,
            center_intensity: 1.0,
        };
        assert!(g.supports_dim(3));
    }

    #[test]
    fn hash_is_stable_and_family_sensitive() {
        let a = MeasureFamily::VoronoiEdges { seed_intensity: 100.0 };
        let b = MeasureFamily::DelaunayEdges { seed_intensity: 100.0 };
        assert_eq!(a.spec_hash(), a.spec_hash());
        assert_ne!(a.spec_hash(), b.spec_hash());
    }
}
