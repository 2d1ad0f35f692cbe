//! Voronoi and Delaunay edge systems for planar seed sets.
//!
//! The Voronoi diagram is derived from the Delaunay dual: interior Delaunay
//! edges map to segments between adjacent circumcenters, hull edges to
//! outward bisector rays. Callers are responsible for passing seeds sampled
//! on a window dilated enough that boundary cells have their true exterior
//! generators (the measures module applies a `6/sqrt(seed_intensity)`
//! margin).

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::geom::{BoxWindow, Point2, Segment};
use crate::tessellations::delaunay::Delaunay;
use crate::tessellations::predicates::orient2d;
use crate::tessellations::system::{SegmentSystem, SystemBuilder};

fn dedup_exact(seeds: &[Point2]) -> Vec<Point2> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(seeds.len());
    for p in seeds {
        if seen.insert((p.0[0].to_bits(), p.0[1].to_bits())) {
            out.push(*p);
        }
    }
    out
}

fn all_collinear(seeds: &[Point2]) -> bool {
    if seeds.len() < 3 {
        return true;
    }
    let a = seeds[0];
    let b = match seeds[1..].iter().find(|p| **p != a) {
        Some(p) => *p,
        None => return true,
    };
    seeds.iter().all(|p| orient2d(&a, &b, p) == Ordering::Equal)
}

/// 1-facets (cell boundary edges) of the Voronoi diagram of the seeds,
/// clipped to the window.
pub fn voronoi_segments(seeds: &[Point2], window: &BoxWindow<2>) -> Result<SegmentSystem> {
    let seeds = dedup_exact(seeds);
    if seeds.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "Voronoi needs >= 2 distinct seeds, got {}",
            seeds.len()
        )));
    }
    let mut builder = SystemBuilder::new(*window);
    // long enough that any ray or bisector line leaves the window
    let reach = 2.0 * (window.side + window.center.norm() + seeds.iter().fold(0.0f64, |m, p| m.max(p.norm())));

    if all_collinear(&seeds) {
        // cells are slabs; edges are the perpendicular bisector lines between
        // consecutive seeds along their common line
        let a = seeds[0];
        let b = *seeds[1..].iter().find(|p| **p != a).expect("distinct seeds exist");
        let dir = b.sub(&a);
        let len = dir.norm();
        let u = dir.scale(1.0 / len);
        let mut order: Vec<(f64, Point2)> = seeds
            .iter()
            .map(|p| ((p.0[0] - a.0[0]) * u.0[0] + (p.0[1] - a.0[1]) * u.0[1], *p))
            .collect();
        order.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite projection"));
        let perp = Point2::xy(-u.0[1], u.0[0]);
        for pair in order.windows(2) {
            if pair[1].0 - pair[0].0 <= 0.0 {
                continue;
            }
            let mid = Point2::xy(
                0.5 * (pair[0].1 .0[0] + pair[1].1 .0[0]),
                0.5 * (pair[0].1 .0[1] + pair[1].1 .0[1]),
            );
            let s = Segment::new(mid.add(&perp.scale(reach)), mid.add(&perp.scale(-reach)))?;
            builder.add_clipped(&s);
        }
        return Ok(builder.finish());
    }

    let dt = Delaunay::build(&seeds)?;
    let (centers, records) = dt.dual();
    for (a, b, tri, other) in records {
        let start = centers[&tri];
        match other {
            Some(o) => {
                let end = centers[&o];
                if let Ok(s) = Segment::new(start, end) {
                    builder.add_clipped(&s);
                }
            }
            None => {
                // hull edge (a, b), counterclockwise in `tri`: the Voronoi
                // edge is the bisector ray from the circumcenter, outward
                // (to the right of a -> b)
                let pa = dt.points()[a];
                let pb = dt.points()[b];
                let dx = pb.0[0] - pa.0[0];
                let dy = pb.0[1] - pa.0[1];
                let norm = (dx * dx + dy * dy).sqrt();
                let out_dir = Point2::xy(dy / norm, -dx / norm);
                let end = start.add(&out_dir.scale(reach));
                if let Ok(s) = Segment::new(start, end) {
                    builder.add_clipped(&s);
                }
            }
        }
    }
    Ok(builder.finish())
}

/// Delaunay edges between seeds, clipped to the window.
pub fn delaunay_segments(seeds: &[Point2], window: &BoxWindow<2>) -> Result<SegmentSystem> {
    let seeds = dedup_exact(seeds);
    if seeds.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "Delaunay needs >= 3 distinct seeds, got {}",
            seeds.len()
        )));
    }
    let dt = Delaunay::build(&seeds)?; // errors if all collinear
    let mut builder = SystemBuilder::new(*window);
    for (a, b) in dt.edges() {
        if let Ok(s) = Segment::new(seeds[a], seeds[b]) {
            builder.add_clipped(&s);
        }
    }
    Ok(builder.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use rand::Rng;

    #[test]
    fn two_seeds_give_single_bisector() {
        let seeds = vec![Point2::xy(-1.0, 0.0), Point2::xy(1.0, 0.0)];
        let w = BoxWindow::centered(4.0).unwrap();
        let sys = voronoi_segments(&seeds, &w).unwrap();
        assert_eq!(sys.edges.len(), 1);
        let e = sys.edges[0].seg;
        assert_eq!(e.a.0[0], 0.0);
        assert_eq!(e.b.0[0], 0.0);
        assert!((e.length - 4.0).abs() < 1e-12);
    }

    #[test]
    fn fewer_than_two_seeds_rejected() {
        let w = BoxWindow::centered(4.0).unwrap();
        assert!(voronoi_segments(&[Point2::xy(0.0, 0.0)], &w).is_err());
    }

    #[test]
    fn three_seeds_edges_meet_at_circumcenter() {
        let seeds = vec![
            Point2::xy(0.0, 1.0),
            Point2::xy(-1.0, -0.5),
            Point2::xy(1.0, -0.5),
        ];
        let w = BoxWindow::centered(10.0).unwrap();
        let sys = voronoi_segments(&seeds, &w).unwrap();
        assert_eq!(sys.edges.len(), 3);
        // all three rays start at the shared circumcenter
        let cc = crate::tessellations::predicates::circumcenter(&seeds[0], &seeds[1], &seeds[2]);
        for e in &sys.edges {
            let d = e.seg.a.dist(&cc).min(e.seg.b.dist(&cc));
            assert!(d < 1e-9, "edge does not touch circumcenter, dist {d}");
        }
    }

    #[test]
    fn voronoi_midpoints_have_exactly_two_nearest_seeds() {
        let mut rng = substream(5, &[0]);
        let seeds: Vec<Point2> = (0..500)
            .map(|_| Point2::xy(rng.random_range(-6.0..6.0), rng.random_range(-6.0..6.0)))
            .collect();
        let w = BoxWindow::centered(8.0).unwrap(); // interior window, margin 2
        let sys = voronoi_segments(&seeds, &w).unwrap();
        assert!(!sys.is_empty());
        for e in &sys.edges {
            let m = e.seg.midpoint();
            let mut dists: Vec<f64> = seeds.iter().map(|s| s.dist(&m)).collect();
            dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let (d0, d1, d2) = (dists[0], dists[1], dists[2]);
            assert!((d1 - d0).abs() < 1e-6, "midpoint not equidistant: {d0} vs {d1}");
            assert!(d2 - d1 > 1e-9, "midpoint has a third seed at the same distance");
        }
    }

    #[test]
    fn delaunay_three_seeds_three_edges() {
        let seeds = vec![
            Point2::xy(0.0, 0.0),
            Point2::xy(1.0, 0.0),
            Point2::xy(0.0, 1.0),
        ];
        let w = BoxWindow::centered(4.0).unwrap();
        let sys = delaunay_segments(&seeds, &w).unwrap();
        assert_eq!(sys.edges.len(), 3);
        assert!((sys.total_length - (2.0 + 2.0f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn delaunay_collinear_rejected() {
        let seeds: Vec<Point2> = (0..4).map(|i| Point2::xy(i as f64, 0.0)).collect();
        let w = BoxWindow::centered(4.0).unwrap();
        assert!(delaunay_segments(&seeds, &w).is_err());
    }

    #[test]
    fn clipping_keeps_everything_inside_window() {
        let mut rng = substream(6, &[1]);
        let seeds: Vec<Point2> = (0..200)
            .map(|_| Point2::xy(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)))
            .collect();
        let w = BoxWindow::centered(5.0).unwrap();
        for sys in [
            voronoi_segments(&seeds, &w).unwrap(),
            delaunay_segments(&seeds, &w).unwrap(),
        ] {
            for v in &sys.vertices {
                assert!(w.contains(v));
            }
            for e in &sys.edges {
                assert!(w.contains(&e.seg.a) && w.contains(&e.seg.b));
            }
        }
    }
}
