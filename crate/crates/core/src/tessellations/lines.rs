//! Isotropic Poisson line tessellation.
//!
//! Lines are parametrized by `(theta, rho)` under the standard kinematic
//! measure: a line with unit normal at angle `theta` and signed distance
//! `rho` from the window center. The number of lines hitting the disk
//! circumscribing the window is Poisson with mean `line_intensity * 2R`,
//! which makes `line_intensity` equal to the mean total edge length per unit
//! area.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::geom::{BoxWindow, Point2, Segment};
use crate::rng::substream;
use crate::tessellations::system::{SegmentSystem, SystemBuilder};

/// Sample a line tessellation: each line hitting the window is clipped to a
/// single chord edge.
pub fn line_tessellation(
    line_intensity: f64,
    window: &BoxWindow<2>,
    seed: u64,
) -> Result<SegmentSystem> {
    if !line_intensity.is_finite() || line_intensity < 0.0 {
        return Err(Error::invalid(
            "line_intensity",
            format!("must be >= 0, got {line_intensity}"),
        ));
    }
    let mut rng = substream(seed, &[0x11fe]);
    let radius = window.side * std::f64::consts::FRAC_1_SQRT_2; // circumscribed disk
    let mean = line_intensity * 2.0 * radius;
    let count = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|e| Error::invalid("line_intensity", e.to_string()))?
            .sample(&mut rng) as u64
    } else {
        0
    };

    let mut builder = SystemBuilder::new(*window);
    let half_chord = 1.5 * radius + 1.0;
    for _ in 0..count {
        let theta = rng.random_range(0.0..std::f64::consts::PI);
        let rho = rng.random_range(-radius..radius);
        let normal = Point2::xy(theta.cos(), theta.sin());
        let along = Point2::xy(-normal.0[1], normal.0[0]);
        let foot = window.center.add(&normal.scale(rho));
        let a = foot.add(&along.scale(half_chord));
        let b = foot.add(&along.scale(-half_chord));
        if let Ok(s) = Segment::new(a, b) {
            builder.add_clipped(&s);
        }
    }
    Ok(builder.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_intensity_is_empty() {
        let w = BoxWindow::centered(4.0).unwrap();
        let sys = line_tessellation(0.0, &w, 1).unwrap();
        assert!(sys.is_empty());
    }

    #[test]
    fn clipped_chords_stay_inside() {
        let w = BoxWindow::new(Point2::xy(3.0, -2.0), 6.0).unwrap();
        let sys = line_tessellation(2.0, &w, 7).unwrap();
        assert!(!sys.is_empty());
        for e in &sys.edges {
            assert!(w.contains(&e.seg.a) && w.contains(&e.seg.b));
        }
    }

    #[test]
    fn length_intensity_matches_parameter() {
        // mean total length per unit area ~= line_intensity
        let w = BoxWindow::centered(10.0).unwrap();
        let gamma = 1.5;
        let reps = 800;
        let mut lengths = Vec::with_capacity(reps);
        for k in 0..reps {
            let sys = line_tessellation(gamma, &w, 1000 + k as u64).unwrap();
            lengths.push(sys.total_length / w.volume());
        }
        let est = crate::stats::mean_estimate(&lengths, 0).unwrap();
        assert!(
            (est.mean - gamma).abs() < 3.0 * est.std_error,
            "length intensity {} vs {} (se {})",
            est.mean,
            gamma,
            est.std_error
        );
    }

    #[test]
    fn deterministic_given_seed() {
        let w = BoxWindow::centered(5.0).unwrap();
        let a = line_tessellation(1.0, &w, 42).unwrap();
        let b = line_tessellation(1.0, &w, 42).unwrap();
        assert_eq!(a.edges.len(), b.edges.len());
        assert_eq!(a.total_length, b.total_length);
    }
}
