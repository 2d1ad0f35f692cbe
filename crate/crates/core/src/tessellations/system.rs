//! Planar segment systems: vertex/edge graphs of line segments clipped to a
//! window, carrying one-dimensional Hausdorff (length) measure.

use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::geom::{BoxWindow, Point2, Segment};

/// Edge of a segment system: endpoint vertex indices plus the geometric
/// segment connecting them.
#[derive(Debug, Clone, Copy)]
pub struct SysEdge {
    pub a: usize,
    pub b: usize,
    pub seg: Segment,
}

/// A planar graph of line segments inside a window.
#[derive(Debug, Clone)]
pub struct SegmentSystem {
    pub vertices: Vec<Point2>,
    pub edges: Vec<SysEdge>,
    pub window: BoxWindow<2>,
    pub total_length: f64,
}

/// Interns vertices by exact coordinate bit pattern so shared endpoints
/// (seeds, circumcenters, crossing points) merge into one vertex.
pub struct SystemBuilder {
    window: BoxWindow<2>,
    vertices: Vec<Point2>,
    index: HashMap<(u64, u64), usize>,
    edges: Vec<SysEdge>,
}

impl SystemBuilder {
    pub fn new(window: BoxWindow<2>) -> Self {
        SystemBuilder {
            window,
            vertices: Vec::new(),
            index: HashMap::new(),
            edges: Vec::new(),
        }
    }

    fn vertex(&mut self, p: Point2) -> usize {
        let key = (p.0[0].to_bits(), p.0[1].to_bits());
        if let Some(&i) = self.index.get(&key) {
            return i;
        }
        let i = self.vertices.len();
        self.vertices.push(p);
        self.index.insert(key, i);
        i
    }

    /// Clip the segment to the window and add it; degenerate or outside
    /// segments are dropped.
    pub fn add_clipped(&mut self, seg: &Segment) {
        if let Some(c) = seg.clip_to_box(&self.window) {
            let a = self.vertex(c.a);
            let b = self.vertex(c.b);
            if a != b {
                self.edges.push(SysEdge { a, b, seg: c });
            }
        }
    }

    pub fn finish(self) -> SegmentSystem {
        let total_length = self.edges.iter().map(|e| e.seg.length).sum();
        SegmentSystem {
            vertices: self.vertices,
            edges: self.edges,
            window: self.window,
            total_length,
        }
    }
}

impl SegmentSystem {
    pub fn empty(window: BoxWindow<2>) -> Self {
        SegmentSystem {
            vertices: Vec::new(),
            edges: Vec::new(),
            window,
            total_length: 0.0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Translate the whole system (vertices, edges, window).
    pub fn translate(&self, shift: &Point2) -> SegmentSystem {
        let vertices: Vec<Point2> = self.vertices.iter().map(|v| v.add(shift)).collect();
        let edges: Vec<SysEdge> = self
            .edges
            .iter()
            .map(|e| SysEdge {
                a: e.a,
                b: e.b,
                seg: Segment {
                    a: e.seg.a.add(shift),
                    b: e.seg.b.add(shift),
                    length: e.seg.length,
                },
            })
            .collect();
        SegmentSystem {
            vertices,
            edges,
            window: self.window.translate(shift),
            total_length: self.total_length,
        }
    }

    /// Index of the vertex nearest to `p`.
    pub fn nearest_vertex(&self, p: &Point2) -> Result<usize> {
        if self.vertices.is_empty() {
            return Err(Error::EmptySystem);
        }
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, v) in self.vertices.iter().enumerate() {
            let d = v.dist2(p);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        Ok(best)
    }

    /// Subdivide edges at pairwise interior crossings, so that systems whose
    /// segments cross without sharing endpoints (line tessellations) become
    /// proper planar graphs with vertices at the crossings.
    pub fn split_at_intersections(&self) -> SegmentSystem {
        let n = self.edges.len();
        let mut cuts: Vec<Vec<(f64, Point2)>> = vec![Vec::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                if let Some((ti, tj, p)) = segment_intersection(&self.edges[i].seg, &self.edges[j].seg)
                {
                    if ti > 0.0 && ti < 1.0 {
                        cuts[i].push((ti, p));
                    }
                    if tj > 0.0 && tj < 1.0 {
                        cuts[j].push((tj, p));
                    }
                }
            }
        }
        let mut builder = SystemBuilder::new(self.window);
        for (e, cut) in self.edges.iter().zip(cuts.iter_mut()) {
            cut.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite cut parameter"));
            let mut prev = e.seg.a;
            for &(_, p) in cut.iter() {
                if let Ok(seg) = Segment::new(prev, p) {
                    builder.add_clipped(&seg);
                }
                prev = p;
            }
            if let Ok(seg) = Segment::new(prev, e.seg.b) {
                builder.add_clipped(&seg);
            }
        }
        builder.finish()
    }

    /// Write one edge per row: `x1,y1,x2,y2,length`.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "x1,y1,x2,y2,length")?;
        for e in &self.edges {
            writeln!(
                w,
                "{},{},{},{},{}",
                e.seg.a.0[0], e.seg.a.0[1], e.seg.b.0[0], e.seg.b.0[1], e.seg.length
            )?;
        }
        Ok(())
    }
}

/// Proper or touching intersection of two segments; returns parameters along
/// each segment and the intersection point, or `None` for parallel/disjoint
/// pairs.
fn segment_intersection(s1: &Segment, s2: &Segment) -> Option<(f64, f64, Point2)> {
    let d1 = [s1.b.0[0] - s1.a.0[0], s1.b.0[1] - s1.a.0[1]];
    let d2 = [s2.b.0[0] - s2.a.0[0], s2.b.0[1] - s2.a.0[1]];
    let denom = d1[0] * d2[1] - d1[1] * d2[0];
    if denom == 0.0 {
        return None;
    }
    let dx = s2.a.0[0] - s1.a.0[0];
    let dy = s2.a.0[1] - s1.a.0[1];
    let t1 = (dx * d2[1] - dy * d2[0]) / denom;
    let t2 = (dx * d1[1] - dy * d1[0]) / denom;
    if !(0.0..=1.0).contains(&t1) || !(0.0..=1.0).contains(&t2) {
        return None;
    }
    Some((t1, t2, s1.point_at(t1)))
}
