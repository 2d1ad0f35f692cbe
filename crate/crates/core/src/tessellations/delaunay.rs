//! Incremental Delaunay triangulation (Bowyer–Watson) in the plane.
//!
//! The triangulation is maintained as a closed surface: ghost triangles with a
//! symbolic vertex at infinity cover the outside of the convex hull, so every
//! edge always has exactly two adjacent triangles and insertions inside and
//! outside the hull follow one code path. All sign decisions go through the
//! robust predicates, so degenerate inputs (collinear chains, cocircular
//! quadruples) are handled exactly; cocircular ties resolve by insertion
//! order.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::tessellations::predicates::{circumcenter, incircle, orient2d};

pub const GHOST: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
struct Tri {
    /// Vertex ids, cyclic; real triangles are counterclockwise. At most one
    /// entry is `GHOST`.
    v: [usize; 3],
    /// `n[i]` is the triangle across the edge opposite `v[i]`.
    n: [usize; 3],
    alive: bool,
}

impl Tri {
    fn ghost_slot(&self) -> Option<usize> {
        self.v.iter().position(|&v| v == GHOST)
    }

    fn slot_of_neighbor(&self, t: usize) -> usize {
        self.n
            .iter()
            .position(|&u| u == t)
            .expect("adjacency must be symmetric")
    }
}

#[derive(Debug)]
pub struct Delaunay {
    points: Vec<Point2>,
    tris: Vec<Tri>,
    hint: usize,
    /// Input indices skipped because they duplicated an existing vertex.
    pub duplicates: usize,
}

impl Delaunay {
    /// Triangulate the given seeds. Requires at least 3 seeds not all
    /// collinear.
    pub fn build(seeds: &[Point2]) -> Result<Delaunay> {
        if seeds.len() < 3 {
            return Err(Error::DegenerateInput(format!(
                "triangulation needs >= 3 seeds, got {}",
                seeds.len()
            )));
        }
        for p in seeds {
            if !p.is_finite() {
                return Err(Error::NonFiniteCoordinate);
            }
        }

        // Insertion order: bucket snake for walk locality.
        let order = spatial_order(seeds);

        // Bootstrap: first two distinct points, then the first non-collinear
        // third.
        let i0 = order[0];
        let mut i1 = None;
        for &i in &order[1..] {
            if seeds[i] != seeds[i0] {
                i1 = Some(i);
                break;
            }
        }
        let i1 = i1.ok_or_else(|| Error::DegenerateInput("all seeds coincide".into()))?;
        let mut i2 = None;
        for &i in &order[1..] {
            if i == i1 {
                continue;
            }
            if orient2d(&seeds[i0], &seeds[i1], &seeds[i]) != Ordering::Equal {
                i2 = Some(i);
                break;
            }
        }
        let i2 = i2.ok_or_else(|| Error::DegenerateInput("all seeds are collinear".into()))?;

        let (a, b, c) = if orient2d(&seeds[i0], &seeds[i1], &seeds[i2]) == Ordering::Greater {
            (i0, i1, i2)
        } else {
            (i0, i2, i1)
        };

        let mut dt = Delaunay {
            points: seeds.to_vec(),
            tris: Vec::with_capacity(2 * seeds.len()),
            hint: 0,
            duplicates: 0,
        };
        // Real triangle 0 plus three ghosts; adjacency per the cyclic edge
        // pairing worked out in the module tests.
        dt.tris.push(Tri { v: [a, b, c], n: [2, 3, 1], alive: true });
        dt.tris.push(Tri { v: [b, a, GHOST], n: [3, 2, 0], alive: true });
        dt.tris.push(Tri { v: [c, b, GHOST], n: [1, 3, 0], alive: true });
        dt.tris.push(Tri { v: [a, c, GHOST], n: [2, 1, 0], alive: true });

        for &i in &order {
            if i == i0 || i == i1 || i == i2 {
                continue;
            }
            dt.insert(i)?;
        }
        Ok(dt)
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    fn point(&self, v: usize) -> &Point2 {
        &self.points[v]
    }

    /// Does the (possibly ghost) triangle's circumdisk contain `p` strictly?
    /// For a ghost triangle the "circumdisk" is the open half plane beyond the
    /// hull edge, plus the open hull edge itself.
    fn in_region(&self, t: usize, p: &Point2) -> bool {
        let tri = &self.tris[t];
        if let Some(g) = tri.ghost_slot() {
            let a = tri.v[(g + 1) % 3];
            let b = tri.v[(g + 2) % 3];
            let (pa, pb) = (self.point(a), self.point(b));
            match orient2d(pa, pb, p) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => {
                    // collinear: inside iff strictly between a and b
                    let dot = (p.0[0] - pa.0[0]) * (pb.0[0] - pa.0[0])
                        + (p.0[1] - pa.0[1]) * (pb.0[1] - pa.0[1]);
                    let len2 = pa.dist2(pb);
                    dot > 0.0 && dot < len2
                }
            }
        } else {
            incircle(
                self.point(tri.v[0]),
                self.point(tri.v[1]),
                self.point(tri.v[2]),
                p,
            ) == Ordering::Greater
        }
    }

    /// Walk from the hint to a triangle whose region contains `p`.
    fn locate(&self, p: &Point2) -> Result<usize> {
        let mut cur = self.hint;
        debug_assert!(self.tris[cur].alive && self.tris[cur].ghost_slot().is_none());
        let mut steps = 0usize;
        let cap = 4 * self.tris.len() + 64;
        'walk: loop {
            steps += 1;
            if steps > cap {
                return Err(Error::DegenerateInput("point location did not terminate".into()));
            }
            let tri = &self.tris[cur];
            for i in 0..3 {
                let a = tri.v[(i + 1) % 3];
                let b = tri.v[(i + 2) % 3];
                if orient2d(self.point(a), self.point(b), p) == Ordering::Less {
                    let next = tri.n[i];
                    if self.tris[next].ghost_slot().is_some() {
                        // exited the hull: p lies beyond this hull edge
                        return Ok(next);
                    }
                    cur = next;
                    continue 'walk;
                }
            }
            return Ok(cur); // inside or on the boundary of cur
        }
    }

    fn insert(&mut self, vid: usize) -> Result<()> {
        let p = self.points[vid];
        let seed = self.locate(&p)?;

        // exact duplicate check against the located triangle's real vertices
        for &v in &self.tris[seed].v {
            if v != GHOST && self.points[v] == p {
                self.duplicates += 1;
                return Ok(());
            }
        }

        if !self.in_region(seed, &p) {
            return Err(Error::DegenerateInput("empty insertion cavity".into()));
        }

        // grow the cavity: all connected triangles whose region contains p
        let mut cavity = vec![seed];
        let mut in_cavity: HashMap<usize, bool> = HashMap::new();
        in_cavity.insert(seed, true);
        let mut stack = vec![seed];
        while let Some(t) = stack.pop() {
            for i in 0..3 {
                let nb = self.tris[t].n[i];
                if in_cavity.contains_key(&nb) {
                    continue;
                }
                let inside = self.in_region(nb, &p);
                in_cavity.insert(nb, inside);
                if inside {
                    cavity.push(nb);
                    stack.push(nb);
                }
            }
        }

        // boundary edges: (outside tri, its slot facing the cavity, directed
        // edge a->b as seen from the cavity side)
        let mut boundary: Vec<(usize, usize, usize, usize)> = Vec::new();
        for &t in &cavity {
            let tri = self.tris[t];
            for i in 0..3 {
                let nb = tri.n[i];
                if !in_cavity[&nb] {
                    let a = tri.v[(i + 1) % 3];
                    let b = tri.v[(i + 2) % 3];
                    let back = self.tris[nb].slot_of_neighbor(t);
                    boundary.push((nb, back, a, b));
                }
            }
        }

        for &t in &cavity {
            self.tris[t].alive = false;
        }

        // fan: one new triangle per boundary edge; link neighbors via the
        // endpoint maps (the boundary is a single cycle around p)
        let mut by_first: HashMap<usize, usize> = HashMap::with_capacity(boundary.len());
        let mut by_second: HashMap<usize, usize> = HashMap::with_capacity(boundary.len());
        let base = self.tris.len();
        for (k, &(outside, back, a, b)) in boundary.iter().enumerate() {
            let idx = base + k;
            self.tris.push(Tri { v: [a, b, vid], n: [0, 0, outside], alive: true });
            self.tris[outside].n[back] = idx;
            by_first.insert(a, idx);
            by_second.insert(b, idx);
        }
        for (k, &(_, _, a, b)) in boundary.iter().enumerate() {
            let idx = base + k;
            // across edge (b, vid) lies the new triangle starting at b
            self.tris[idx].n[0] = by_first[&b];
            // across edge (vid, a) lies the new triangle ending at a
            self.tris[idx].n[1] = by_second[&a];
        }

        // new hint: any new real triangle
        for (k, &(_, _, a, b)) in boundary.iter().enumerate() {
            if a != GHOST && b != GHOST {
                self.hint = base + k;
                break;
            }
        }
        debug_assert!(self.tris[self.hint].alive);
        Ok(())
    }

    /// Indices of alive real triangles.
    fn real_tris(&self) -> impl Iterator<Item = usize> + '_ {
        self.tris
            .iter()
            .enumerate()
            .filter(|(_, t)| t.alive && t.ghost_slot().is_none())
            .map(|(i, _)| i)
    }

    /// Real triangles as counterclockwise vertex triples.
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        self.real_tris().map(|i| self.tris[i].v).collect()
    }

    /// Undirected Delaunay edges between seed indices, each reported once.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in self.real_tris() {
            let tri = &self.tris[i];
            for s in 0..3 {
                let a = tri.v[(s + 1) % 3];
                let b = tri.v[(s + 2) % 3];
                let nb = tri.n[s];
                // interior edges are shared by two real triangles: emit from
                // the lower-indexed one; hull edges only border a ghost
                if self.tris[nb].ghost_slot().is_some() || i < nb {
                    out.push((a.min(b), a.max(b)));
                }
            }
        }
        out
    }

    /// Dual structure for Voronoi construction: for every Delaunay edge, the
    /// circumcenters of its one or two adjacent real triangles.
    ///
    /// Returns `(circumcenters per real triangle, edge records)`, where an
    /// edge record is `(seed_a, seed_b, tri, other)` with `other == None` for
    /// hull edges.
    #[allow(clippy::type_complexity)]
    pub fn dual(&self) -> (HashMap<usize, Point2>, Vec<(usize, usize, usize, Option<usize>)>) {
        let mut centers = HashMap::new();
        for i in self.real_tris() {
            let t = &self.tris[i];
            centers.insert(
                i,
                circumcenter(self.point(t.v[0]), self.point(t.v[1]), self.point(t.v[2])),
            );
        }
        let mut records = Vec::new();
        for i in self.real_tris() {
            let tri = &self.tris[i];
            for s in 0..3 {
                let a = tri.v[(s + 1) % 3];
                let b = tri.v[(s + 2) % 3];
                let nb = tri.n[s];
                if self.tris[nb].ghost_slot().is_some() {
                    records.push((a, b, i, None));
                } else if i < nb {
                    records.push((a, b, i, Some(nb)));
                }
            }
        }
        (centers, records)
    }

    /// Brute-force verification that no seed lies strictly inside any
    /// triangle's circumcircle (used by tests and diagnostics).
    pub fn empty_circumcircle_violations(&self, tolerance: f64) -> usize {
        use crate::tessellations::predicates::incircle_det;
        let mut violations = 0;
        for tri in self.triangles() {
            let (a, b, c) = (self.point(tri[0]), self.point(tri[1]), self.point(tri[2]));
            for (i, p) in self.points.iter().enumerate() {
                if tri.contains(&i) {
                    continue;
                }
                if incircle_det(a, b, c, p) > tolerance {
                    violations += 1;
                }
            }
        }
        violations
    }
}

/// Bucket-snake insertion order: sort points into a coarse grid, traverse
/// rows boustrophedon so consecutive insertions are spatially close.
fn spatial_order(points: &[Point2]) -> Vec<usize> {
    let n = points.len();
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in points {
        for k in 0..2 {
            lo[k] = lo[k].min(p.0[k]);
            hi[k] = hi[k].max(p.0[k]);
        }
    }
    let cells = (n as f64).sqrt().ceil().max(1.0);
    let ext = [(hi[0] - lo[0]).max(1e-9), (hi[1] - lo[1]).max(1e-9)];
    let mut order: Vec<usize> = (0..n).collect();
    let key = |i: usize| -> (i64, i64, usize) {
        let p = &points[i];
        let row = (((p.0[1] - lo[1]) / ext[1]) * cells).floor().min(cells - 1.0) as i64;
        let col = (((p.0[0] - lo[0]) / ext[0]) * cells).floor().min(cells - 1.0) as i64;
        let snake_col = if row % 2 == 0 { col } else { cells as i64 - 1 - col };
        (row, snake_col, i)
    };
    order.sort_by_key(|&i| key(i));
    order
}
