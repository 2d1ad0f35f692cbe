//! Gilbert graphs: points connected when their distance is strictly below the
//! connection radius, with union-find component labels built through the
//! neighbor grid.

use crate::cox::PointPattern;
use crate::error::{Error, Result};
use crate::geom::GridIndex;
use crate::percolation::union_find::UnionFind;

#[derive(Debug)]
pub struct GilbertGraph<'a, const D: usize> {
    pub pattern: &'a PointPattern<D>,
    pub radius: f64,
    uf: UnionFind,
}

/// Build the Gilbert graph at connection radius `r` (strict inequality).
pub fn build_gilbert<const D: usize>(
    pattern: &PointPattern<D>,
    r: f64,
) -> Result<GilbertGraph<'_, D>> {
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::invalid("r", format!("must be positive, got {r}")));
    }
    let mut uf = UnionFind::new(pattern.len());
    if !pattern.is_empty() {
        let grid = GridIndex::build(&pattern.points, r)?;
        let mut buf = Vec::new();
        for (i, p) in pattern.points.iter().enumerate() {
            grid.neighbors_within_into(p, r, &mut buf)?;
            for &j in &buf {
                if j < i {
                    uf.union(i, j);
                }
            }
        }
    }
    Ok(GilbertGraph {
        pattern,
        radius: r,
        uf,
    })
}

impl<const D: usize> GilbertGraph<'_, D> {
    pub fn same_component(&mut self, i: usize, j: usize) -> bool {
        self.uf.same(i, j)
    }

    pub fn component_count(&mut self) -> usize {
        self.uf.component_count()
    }

    /// Component label (union-find root) per point.
    pub fn labels(&mut self) -> Vec<usize> {
        (0..self.pattern.len()).map(|i| self.uf.find(i)).collect()
    }

    /// Does the component of the origin escape the centered box `Q_a`?
    ///
    /// True iff some point of the origin's component has sup-norm at least
    /// `(a - 2r)/2`, i.e. the component is not contained in `Q_{a-2r}`.
    /// Requires the pattern to contain the origin as point 0 and `a > 4r`.
    pub fn origin_reaches_boundary(&mut self, a: f64) -> Result<bool> {
        if self.pattern.is_empty() || self.pattern.points[0].sup_norm() != 0.0 {
            return Err(Error::MissingOrigin);
        }
        if a <= 4.0 * self.radius {
            return Err(Error::invalid(
                "a",
                format!("escape box side {a} must exceed 4r = {}", 4.0 * self.radius),
            ));
        }
        let threshold = (a - 2.0 * self.radius) / 2.0;
        let root = self.uf.find(0);
        for i in 0..self.pattern.len() {
            if self.pattern.points[i].sup_norm() >= threshold && self.uf.find(i) == root {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cox::sample_poisson;
    use crate::geom::{BoxWindow, Point, Point2};
    use crate::rng::derive_seed;

    fn pattern_from(points: Vec<Point2>, side: f64) -> PointPattern<2> {
        PointPattern {
            points,
            window: BoxWindow::centered(side).unwrap(),
            intensity: 1.0,
            seed: 0,
        }
    }

    /// BFS component labels over the brute-force adjacency.
    fn bfs_labels<const D: usize>(points: &[Point<D>], r: f64) -> Vec<usize> {
        let n = points.len();
        let mut labels = vec![usize::MAX; n];
        for start in 0..n {
            if labels[start] != usize::MAX {
                continue;
            }
            labels[start] = start;
            let mut queue = vec![start];
            while let Some(i) = queue.pop() {
                for j in 0..n {
                    if labels[j] == usize::MAX && points[i].dist(&points[j]) < r {
                        labels[j] = start;
                        queue.push(j);
                    }
                }
            }
        }
        labels
    }

    fn assert_same_partition(mut a: Vec<usize>, mut b: Vec<usize>) {
        // normalize both labelings to first-occurrence form
        for labels in [&mut a, &mut b] {
            let mut map = std::collections::HashMap::new();
            for l in labels.iter_mut() {
                let next = map.len();
                *l = *map.entry(*l).or_insert(next);
            }
        }
        assert_eq!(a, b);
    }

    #[test]
    fn distance_exactly_r_is_not_an_edge() {
        let pts = vec![Point2::xy(0.0, 0.0), Point2::xy(1.0, 0.0)];
        let pat = pattern_from(pts, 10.0);
        let mut g = build_gilbert(&pat, 1.0).unwrap();
        assert!(!g.same_component(0, 1));
        assert_eq!(g.component_count(), 2);
    }

    #[test]
    fn chain_connects() {
        let pts: Vec<Point2> = (0..10).map(|i| Point2::xy(0.9 * i as f64, 0.0)).collect();
        let pat = pattern_from(pts, 30.0);
        let mut g = build_gilbert(&pat, 1.0).unwrap();
        assert_eq!(g.component_count(), 1);
    }

    #[test]
    fn labels_match_bfs_oracle() {
        let w = BoxWindow::<2>::centered(6.0).unwrap();
        for k in 0..20 {
            let pat = sample_poisson(8.0, &w, derive_seed(55, &[k])).unwrap();
            let mut g = build_gilbert(&pat, 0.3).unwrap();
            assert_same_partition(g.labels(), bfs_labels(&pat.points, 0.3));
        }
    }

    #[test]
    fn labels_match_bfs_oracle_3d() {
        let w = BoxWindow::<3>::centered(4.0).unwrap();
        for k in 0..10 {
            let pat = sample_poisson(3.0, &w, derive_seed(56, &[k])).unwrap();
            let mut g = build_gilbert(&pat, 0.5).unwrap();
            assert_same_partition(g.labels(), bfs_labels(&pat.points, 0.5));
        }
    }

    #[test]
    fn reach_event_basics() {
        // only the origin: no reach
        let pat = pattern_from(vec![Point2::origin()], 20.0);
        let mut g = build_gilbert(&pat, 1.0).unwrap();
        assert!(!g.origin_reaches_boundary(8.0).unwrap());

        // straight chain to (a/2, 0)
        let mut pts = vec![Point2::origin()];
        let mut x = 0.0;
        while x < 4.0 {
            x += 0.9;
            pts.push(Point2::xy(x, 0.0));
        }
        let pat = pattern_from(pts, 20.0);
        let mut g = build_gilbert(&pat, 1.0).unwrap();
        assert!(g.origin_reaches_boundary(8.0).unwrap());

        // origin missing
        let pat = pattern_from(vec![Point2::xy(0.5, 0.0)], 20.0);
        let mut g = build_gilbert(&pat, 1.0).unwrap();
        assert!(matches!(
            g.origin_reaches_boundary(8.0),
            Err(Error::MissingOrigin)
        ));

        // box too small relative to the radius
        let pat = pattern_from(vec![Point2::origin()], 20.0);
        let mut g = build_gilbert(&pat, 1.0).unwrap();
        assert!(g.origin_reaches_boundary(3.9).is_err());
    }

    #[test]
    fn reach_agrees_with_bfs_component_oracle() {
        let w = BoxWindow::<2>::centered(10.0).unwrap();
        let a = 9.0;
        let r = 0.6;
        for k in 0..40 {
            let mut pat = sample_poisson(2.0, &w, derive_seed(57, &[k])).unwrap();
            pat.points.insert(0, Point2::origin());
            let mut g = build_gilbert(&pat, r).unwrap();
            let fast = g.origin_reaches_boundary(a).unwrap();
            let labels = bfs_labels(&pat.points, r);
            let slow = pat
                .points
                .iter()
                .enumerate()
                .any(|(i, p)| labels[i] == labels[0] && p.sup_norm() >= (a - 2.0 * r) / 2.0);
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn component_monotonicity_in_radius() {
        let w = BoxWindow::<2>::centered(6.0).unwrap();
        for k in 0..10 {
            let pat = sample_poisson(5.0, &w, derive_seed(58, &[k])).unwrap();
            let mut g1 = build_gilbert(&pat, 0.3).unwrap();
            let mut g2 = build_gilbert(&pat, 0.6).unwrap();
            for i in 0..pat.len() {
                for j in (i + 1)..pat.len() {
                    if g1.same_component(i, j) {
                        assert!(g2.same_component(i, j));
                    }
                }
            }
        }
    }
}
