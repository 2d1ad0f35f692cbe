//! Geometric primitives shared by all modules: points, box windows, segments,
//! and a fixed-radius neighbor grid.
//!
//! The spatial dimension is a compile-time constant `D ∈ {2, 3}`; tessellation
//! code paths only exist for `D = 2`.

use crate::error::{Error, Result};

/// Point in `R^D`. Coordinates must stay finite; constructors check this.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point<const D: usize>(pub [f64; D]);

pub type Point2 = Point<2>;
pub type Point3 = Point<3>;

impl<const D: usize> Point<D> {
    pub fn origin() -> Self {
        Point([0.0; D])
    }

    pub fn new(coords: [f64; D]) -> Result<Self> {
        if coords.iter().all(|c| c.is_finite()) {
            Ok(Point(coords))
        } else {
            Err(Error::NonFiniteCoordinate)
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn add(&self, other: &Point<D>) -> Point<D> {
        let mut c = self.0;
        for i in 0..D {
            c[i] += other.0[i];
        }
        Point(c)
    }

    pub fn sub(&self, other: &Point<D>) -> Point<D> {
        let mut c = self.0;
        for i in 0..D {
            c[i] -= other.0[i];
        }
        Point(c)
    }

    pub fn scale(&self, s: f64) -> Point<D> {
        let mut c = self.0;
        for v in c.iter_mut() {
            *v *= s;
        }
        Point(c)
    }

    pub fn dist2(&self, other: &Point<D>) -> f64 {
        let mut s = 0.0;
        for i in 0..D {
            let d = self.0[i] - other.0[i];
            s += d * d;
        }
        s
    }

    pub fn dist(&self, other: &Point<D>) -> f64 {
        self.dist2(other).sqrt()
    }

    pub fn norm(&self) -> f64 {
        self.dist(&Point::origin())
    }

    /// Sup-norm (Chebyshev) distance from the origin; box events use this.
    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }
}

impl Point<2> {
    pub fn xy(x: f64, y: f64) -> Self {
        Point([x, y])
    }
}

impl Point<3> {
    pub fn xyz(x: f64, y: f64, z: f64) -> Self {
        Point([x, y, z])
    }
}

/// Volume of the unit ball in dimension `D`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI / 3.0,
        _ => unreachable!("dimensions are restricted to 1..=3"),
    }
}

/// Axis-aligned cube `Q_side(center) = center + [-side/2, side/2]^D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxWindow<const D: usize> {
    pub center: Point<D>,
    pub side: f64,
}

impl<const D: usize> BoxWindow<D> {
    pub fn new(center: Point<D>, side: f64) -> Result<Self> {
        if !side.is_finite() || side <= 0.0 {
            return Err(Error::invalid("side", format!("must be positive, got {side}")));
        }
        if !center.is_finite() {
            return Err(Error::NonFiniteCoordinate);
        }
        Ok(BoxWindow { center, side })
    }

    /// Cube of the given side centered at the origin.
    pub fn centered(side: f64) -> Result<Self> {
        BoxWindow::new(Point::origin(), side)
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(D as i32)
    }

    pub fn lo(&self) -> [f64; D] {
        let mut c = self.center.0;
        for v in c.iter_mut() {
            *v -= self.side / 2.0;
        }
        c
    }

    pub fn hi(&self) -> [f64; D] {
        let mut c = self.center.0;
        for v in c.iter_mut() {
            *v += self.side / 2.0;
        }
        c
    }

    pub fn contains(&self, p: &Point<D>) -> bool {
        let lo = self.lo();
        let hi = self.hi();
        (0..D).all(|i| p.0[i] >= lo[i] && p.0[i] <= hi[i])
    }

    pub fn contains_box(&self, other: &BoxWindow<D>) -> bool {
        let lo = self.lo();
        let hi = self.hi();
        let olo = other.lo();
        let ohi = other.hi();
        (0..D).all(|i| olo[i] >= lo[i] - 1e-12 && ohi[i] <= hi[i] + 1e-12)
    }

    /// Window grown by `margin` on every side.
    pub fn dilate(&self, margin: f64) -> BoxWindow<D> {
        BoxWindow {
            center: self.center,
            side: self.side + 2.0 * margin,
        }
    }

    pub fn translate(&self, shift: &Point<D>) -> BoxWindow<D> {
        BoxWindow {
            center: self.center.add(shift),
            side: self.side,
        }
    }

    /// Volume of the intersection with another box.
    pub fn overlap_volume(&self, other: &BoxWindow<D>) -> f64 {
        let lo = self.lo();
        let hi = self.hi();
        let olo = other.lo();
        let ohi = other.hi();
        let mut v = 1.0;
        for i in 0..D {
            let w = hi[i].min(ohi[i]) - lo[i].max(olo[i]);
            if w <= 0.0 {
                return 0.0;
            }
            v *= w;
        }
        v
    }

    /// Euclidean distance from `p` to the box (0 when inside).
    pub fn dist_to_point(&self, p: &Point<D>) -> f64 {
        let lo = self.lo();
        let hi = self.hi();
        let mut s = 0.0;
        for i in 0..D {
            let d = if p.0[i] < lo[i] {
                lo[i] - p.0[i]
            } else if p.0[i] > hi[i] {
                p.0[i] - hi[i]
            } else {
                0.0
            };
            s += d * d;
        }
        s.sqrt()
    }
}

/// Line segment in the plane with cached length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point2,
    pub b: Point2,
    pub length: f64,
}

impl Segment {
    pub fn new(a: Point2, b: Point2) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::NonFiniteCoordinate);
        }
        let length = a.dist(&b);
        if length <= 0.0 {
            return Err(Error::DegenerateInput("zero-length segment".into()));
        }
        Ok(Segment { a, b, length })
    }

    pub fn point_at(&self, t: f64) -> Point2 {
        Point2::xy(
            self.a.0[0] + t * (self.b.0[0] - self.a.0[0]),
            self.a.0[1] + t * (self.b.0[1] - self.a.0[1]),
        )
    }

    pub fn midpoint(&self) -> Point2 {
        self.point_at(0.5)
    }

    /// Clip to a box window (Liang–Barsky). Returns the clipped segment, or
    /// `None` when the intersection is empty or a single point.
    pub fn clip_to_box(&self, window: &BoxWindow<2>) -> Option<Segment> {
        let lo = window.lo();
        let hi = window.hi();
        let (mut t0, mut t1) = (0.0f64, 1.0f64);
        let d = [self.b.0[0] - self.a.0[0], self.b.0[1] - self.a.0[1]];
        for i in 0..2 {
            let (p, q0, q1) = (d[i], lo[i] - self.a.0[i], hi[i] - self.a.0[i]);
            if p == 0.0 {
                if q0 > 0.0 || q1 < 0.0 {
                    return None;
                }
            } else {
                let (ta, tb) = (q0 / p, q1 / p);
                let (tin, tout) = if p > 0.0 { (ta, tb) } else { (tb, ta) };
                t0 = t0.max(tin);
                t1 = t1.min(tout);
                if t0 >= t1 {
                    return None;
                }
            }
        }
        // snap rounding overshoot back onto the box
        let clamp = |p: Point2| {
            Point2::xy(p.0[0].clamp(lo[0], hi[0]), p.0[1].clamp(lo[1], hi[1]))
        };
        let a = clamp(self.point_at(t0));
        let b = clamp(self.point_at(t1));
        Segment::new(a, b).ok()
    }

    /// Length of the part of the segment strictly inside the disk
    /// `B_radius(center)`; exact via the quadratic for the chord.
    pub fn length_in_disk(&self, center: &Point2, radius: f64) -> f64 {
        // Parametrize p(t) = a + t (b - a), t in [0,1]; solve |p(t) - c| = radius.
        let dx = self.b.0[0] - self.a.0[0];
        let dy = self.b.0[1] - self.a.0[1];
        let fx = self.a.0[0] - center.0[0];
        let fy = self.a.0[1] - center.0[1];
        let aa = dx * dx + dy * dy;
        let bb = 2.0 * (fx * dx + fy * dy);
        let cc = fx * fx + fy * fy - radius * radius;
        if aa == 0.0 {
            return 0.0;
        }
        let disc = bb * bb - 4.0 * aa * cc;
        if disc <= 0.0 {
            return 0.0;
        }
        let sq = disc.sqrt();
        let t0 = ((-bb - sq) / (2.0 * aa)).max(0.0);
        let t1 = ((-bb + sq) / (2.0 * aa)).min(1.0);
        if t1 <= t0 {
            return 0.0;
        }
        (t1 - t0) * self.length
    }

    /// Euclidean distance from the segment to a point.
    pub fn dist_to_point(&self, p: &Point2) -> f64 {
        let dx = self.b.0[0] - self.a.0[0];
        let dy = self.b.0[1] - self.a.0[1];
        let len2 = dx * dx + dy * dy;
        let t = if len2 == 0.0 {
            0.0
        } else {
            (((p.0[0] - self.a.0[0]) * dx + (p.0[1] - self.a.0[1]) * dy) / len2).clamp(0.0, 1.0)
        };
        self.point_at(t).dist(p)
    }

    /// True when the segment intersects the closed box.
    pub fn intersects_box(&self, window: &BoxWindow<2>) -> bool {
        if window.contains(&self.a) || window.contains(&self.b) {
            return true;
        }
        self.clip_to_box(window).is_some()
    }
}

/// Uniform-bucket spatial hash supporting fixed-radius neighbor queries.
///
/// Buckets keep insertion order so queries are deterministic; queries at
/// radius `r <= cell_size` touch at most the 3^D surrounding cells.
#[derive(Debug, Clone)]
pub struct GridIndex<const D: usize> {
    cell_size: f64,
    buckets: std::collections::HashMap<[i64; D], Vec<usize>>,
    points: Vec<Point<D>>,
}

impl<const D: usize> GridIndex<D> {
    fn key(cell_size: f64, p: &Point<D>) -> [i64; D] {
        let mut k = [0i64; D];
        for i in 0..D {
            k[i] = (p.0[i] / cell_size).floor() as i64;
        }
        k
    }

    pub fn build(points: &[Point<D>], cell_size: f64) -> Result<Self> {
        if !cell_size.is_finite() || cell_size <= 0.0 {
            return Err(Error::invalid("cell_size", format!("must be positive, got {cell_size}")));
        }
        let mut buckets: std::collections::HashMap<[i64; D], Vec<usize>> =
            std::collections::HashMap::new();
        for (i, p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::NonFiniteCoordinate);
            }
            buckets.entry(Self::key(cell_size, p)).or_default().push(i);
        }
        Ok(GridIndex {
            cell_size,
            buckets,
            points: points.to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn points(&self) -> &[Point<D>] {
        &self.points
    }

    /// Nearest stored point to `p` (index and distance), or `None` when the
    /// index is empty. Expanding-ring search over the bucket grid.
    pub fn nearest(&self, p: &Point<D>) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let center = Self::key(self.cell_size, p);
        // bucket bounding box caps the ring search
        let mut max_ring = 0i64;
        for key in self.buckets.keys() {
            let mut cheb = 0i64;
            for i in 0..D {
                cheb = cheb.max((key[i] - center[i]).abs());
            }
            max_ring = max_ring.max(cheb);
        }
        let mut best: Option<(usize, f64)> = None;
        for ring in 0..=max_ring {
            let mut offset = [-ring; D];
            'cells: loop {
                if offset.iter().any(|o| o.abs() == ring) {
                    let mut key = center;
                    for i in 0..D {
                        key[i] += offset[i];
                    }
                    if let Some(bucket) = self.buckets.get(&key) {
                        for &idx in bucket {
                            let d = self.points[idx].dist(p);
                            if best.map_or(true, |(bi, bd)| d < bd || (d == bd && idx < bi)) {
                                best = Some((idx, d));
                            }
                        }
                    }
                }
                let mut i = 0;
                loop {
                    if i == D {
                        break 'cells;
                    }
                    offset[i] += 1;
                    if offset[i] <= ring {
                        break;
                    }
                    offset[i] = -ring;
                    i += 1;
                }
            }
            // points in rings > k are at distance >= k * cell_size
            if let Some((_, d)) = best {
                if d <= ring as f64 * self.cell_size {
                    break;
                }
            }
        }
        best
    }

    /// Indices of stored points at Euclidean distance strictly less than `r`
    /// from `p`, in ascending index order. Includes `p` itself if stored.
    pub fn neighbors_within(&self, p: &Point<D>, r: f64) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        self.neighbors_within_into(p, r, &mut out)?;
        Ok(out)
    }

    /// Same as [`neighbors_within`](Self::neighbors_within) but reusing an
    /// output buffer.
    pub fn neighbors_within_into(&self, p: &Point<D>, r: f64, out: &mut Vec<usize>) -> Result<()> {
        if !r.is_finite() || r <= 0.0 {
            return Err(Error::invalid("r", format!("must be positive, got {r}")));
        }
        if r > self.cell_size * (1.0 + 1e-12) {
            return Err(Error::invalid(
                "r",
                format!("query radius {r} exceeds grid cell size {}", self.cell_size),
            ));
        }
        out.clear();
        let center = Self::key(self.cell_size, p);
        let r2 = r * r;
        let mut offset = [-1i64; D];
        loop {
            let mut key = center;
            for i in 0..D {
                key[i] += offset[i];
            }
            if let Some(bucket) = self.buckets.get(&key) {
                for &idx in bucket {
                    if self.points[idx].dist2(p) < r2 {
                        out.push(idx);
                    }
                }
            }
            // advance the (-1..=1)^D counter
            let mut i = 0;
            loop {
                if i == D {
                    out.sort_unstable();
                    return Ok(());
                }
                offset[i] += 1;
                if offset[i] <= 1 {
                    break;
                }
                offset[i] = -1;
                i += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use rand::Rng;

    fn brute_force_neighbors<const D: usize>(pts: &[Point<D>], p: &Point<D>, r: f64) -> Vec<usize> {
        let mut v: Vec<usize> = (0..pts.len()).filter(|&i| pts[i].dist(p) < r).collect();
        v.sort_unstable();
        v
    }

    #[test]
    fn empty_input_builds_empty_index() {
        let idx = GridIndex::<2>::build(&[], 1.0).unwrap();
        assert_eq!(idx.len(), 0);
        assert_eq!(idx.bucket_count(), 0);
    }

    #[test]
    fn quantization_places_both_points_in_one_bucket() {
        let pts = vec![Point2::xy(0.1, 0.1), Point2::xy(0.9, 0.9)];
        let idx = GridIndex::build(&pts, 1.0).unwrap();
        assert_eq!(idx.bucket_count(), 1);
    }

    #[test]
    fn rejects_non_finite_points() {
        let pts = vec![Point2::xy(f64::NAN, 0.0)];
        assert!(matches!(
            GridIndex::build(&pts, 1.0),
            Err(Error::NonFiniteCoordinate)
        ));
    }

    #[test]
    fn rejects_nonpositive_radius() {
        let idx = GridIndex::build(&[Point2::xy(0.0, 0.0)], 1.0).unwrap();
        assert!(idx.neighbors_within(&Point2::xy(0.0, 0.0), 0.0).is_err());
        assert!(idx.neighbors_within(&Point2::xy(0.0, 0.0), -1.0).is_err());
    }

    #[test]
    fn strict_inequality_excludes_distance_exactly_r() {
        let pts = vec![Point2::xy(0.0, 0.0), Point2::xy(1.0, 0.0)];
        let idx = GridIndex::build(&pts, 1.0).unwrap();
        let n = idx.neighbors_within(&pts[0], 1.0).unwrap();
        assert_eq!(n, vec![0]); // itself only; the point at distance exactly r excluded
    }

    #[test]
    fn single_point_query_contains_itself() {
        let pts = vec![Point2::xy(0.3, -0.2)];
        let idx = GridIndex::build(&pts, 1.0).unwrap();
        assert_eq!(idx.neighbors_within(&pts[0], 1.0).unwrap(), vec![0]);
    }

    #[test]
    fn nearest_matches_brute_force() {
        let mut rng = substream(44, &[3]);
        let pts: Vec<Point2> = (0..150)
            .map(|_| Point2::xy(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)))
            .collect();
        let idx = GridIndex::build(&pts, 0.8).unwrap();
        for _ in 0..60 {
            let q = Point2::xy(rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0));
            let (bi, bd) = idx.nearest(&q).unwrap();
            let brute = pts
                .iter()
                .map(|p| p.dist(&q))
                .fold(f64::INFINITY, f64::min);
            assert!((bd - brute).abs() < 1e-12, "nearest {bd} vs brute {brute}");
            assert!((pts[bi].dist(&q) - brute).abs() < 1e-12);
        }
        assert!(GridIndex::<2>::build(&[], 1.0).unwrap().nearest(&Point2::origin()).is_none());
    }

    #[test]
    fn matches_brute_force_2d() {
        let mut rng = substream(42, &[1]);
        let pts: Vec<Point2> = (0..200)
            .map(|_| Point2::xy(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)))
            .collect();
        let idx = GridIndex::build(&pts, 0.3).unwrap();
        for p in &pts {
            assert_eq!(
                idx.neighbors_within(p, 0.3).unwrap(),
                brute_force_neighbors(&pts, p, 0.3)
            );
        }
    }

    #[test]
    fn matches_brute_force_3d() {
        let mut rng = substream(43, &[2]);
        let pts: Vec<Point3> = (0..150)
            .map(|_| {
                Point3::xyz(
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-3.0..3.0),
                )
            })
            .collect();
        for r in [0.1, 0.5, 1.0] {
            let idx = GridIndex::build(&pts, r).unwrap();
            for p in pts.iter().step_by(7) {
                assert_eq!(
                    idx.neighbors_within(p, r).unwrap(),
                    brute_force_neighbors(&pts, p, r)
                );
            }
        }
    }

    #[test]
    fn segment_clipping_basics() {
        let seg = Segment::new(Point2::xy(0.0, 0.0), Point2::xy(2.0, 0.0)).unwrap();
        let w = BoxWindow::centered(2.0).unwrap(); // Q_2 at origin
        let clipped = seg.clip_to_box(&w).unwrap();
        assert!((clipped.length - 1.0).abs() < 1e-12);
    }

    #[test]
    fn segment_disk_clipping_through_center() {
        let seg = Segment::new(Point2::xy(-3.0, 0.0), Point2::xy(3.0, 0.0)).unwrap();
        let len = seg.length_in_disk(&Point2::origin(), 0.7);
        assert!((len - 1.4).abs() < 1e-12);
    }

    #[test]
    fn box_overlap_volume() {
        let a = BoxWindow::<2>::centered(2.0).unwrap();
        let b = BoxWindow::new(Point2::xy(1.0, 1.0), 2.0).unwrap();
        assert!((a.overlap_volume(&b) - 1.0).abs() < 1e-12);
    }
}
