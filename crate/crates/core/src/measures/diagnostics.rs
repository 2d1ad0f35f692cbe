//! Stabilization-radius and essential-connectedness diagnostics.
//!
//! Stabilization radii: for Voronoi/Delaunay measures the radius at `x` is
//! the nearest-seed distance in the generating Poisson process; shot-noise
//! and Boolean measures have a constant dependence radius (twice the kernel
//! or grain radius); the constant measure stabilizes at 0; no radii are
//! defined for Poisson line tessellations.
//!
//! The supremum over a box is approximated from below on a 65x65 lattice
//! (pitch `n/64` including the corners), a documented surrogate for the
//! supremum over rational test points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{BoxWindow, GridIndex, Point};
use crate::measures::realization::{AcSources, Body, MeasureRealization, sample_measure};
use crate::measures::spec::MeasureSpec;

/// Aggregated stabilization diagnostic for one box size.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabDiagnostics {
    pub n: f64,
    /// Empirical `P(sup_{Q_n} R < n)`.
    pub empirical_prob: f64,
    /// Union bound on the failure probability `d^d exp(-seed_intensity (n/d)^d)`
    /// for Voronoi/Delaunay; 0 or 1 for deterministic radii.
    pub theory_bound: f64,
    pub replicates: u64,
}

/// Union bound on `1 - P(sup_{Q_n} R < n)` for nearest-seed stabilization
/// radii over a Poisson seed process.
pub fn nearest_seed_sup_bound(seed_intensity: f64, n: f64, dim: usize) -> f64 {
    let d = dim as f64;
    (d.powf(d) * (-seed_intensity * (n / d).powf(d)).exp()).min(1.0)
}

/// Supremum of the stabilization radius over a lattice in `eval`, computed
/// from an existing realization (so it can be paired with connectivity checks
/// of the same sample).
pub fn stab_radius_sup_of<const D: usize>(
    real: &MeasureRealization<D>,
    eval: &BoxWindow<D>,
) -> Result<f64> {
    match &real.body {
        Body::Density { sources, .. } => Ok(match sources {
            AcSources::Constant { .. } => 0.0,
            AcSources::ShotNoise { kernel_radius, .. } => 2.0 * kernel_radius,
            AcSources::Boolean { grain_radius, .. } => 2.0 * grain_radius,
        }),
        Body::Segments(s) => {
            let seeds = s
                .seeds
                .as_ref()
                .ok_or(Error::UnsupportedDiagnostic("Poisson line tessellations"))?;
            if seeds.is_empty() {
                return Ok(f64::INFINITY);
            }
            let spacing_guess = (eval.side / 8.0).max(1e-9);
            let index = GridIndex::build(seeds, spacing_guess)?;
            let cells = 64usize;
            let lo = eval.lo();
            let pitch = eval.side / cells as f64;
            let mut sup: f64 = 0.0;
            let mut idx = [0usize; D];
            loop {
                let mut coords = [0.0; D];
                for i in 0..D {
                    coords[i] = lo[i] + idx[i] as f64 * pitch;
                }
                let p2 = crate::measures::realization::as_point2(&Point::<D>(coords));
                let (_, dist) = index.nearest(&p2).expect("seeds nonempty");
                sup = sup.max(dist);
                let mut i = 0;
                loop {
                    if i == D {
                        return Ok(sup);
                    }
                    idx[i] += 1;
                    if idx[i] <= cells {
                        break;
                    }
                    idx[i] = 0;
                    i += 1;
                }
            }
        }
    }
}

/// Sample a realization and report the lattice supremum of its stabilization
/// radius over the window.
pub fn stabilization_radius_sup<const D: usize>(
    spec: &MeasureSpec,
    window: &BoxWindow<D>,
    seed: u64,
) -> Result<f64> {
    if matches!(spec.family, crate::measures::spec::MeasureFamily::PoissonLines { .. }) {
        return Err(Error::UnsupportedDiagnostic("Poisson line tessellations"));
    }
    let sample_window = window.dilate(spec.family.sampling_margin().max(window.side));
    let real = sample_measure(spec, &sample_window, seed)?;
    stab_radius_sup_of(&real, window)
}

/// Result of the essential-connectedness check at scale `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AecReport {
    pub support_nonempty: bool,
    pub connected_in_double_box: bool,
}

/// Discretized essential-connectedness check: the support of the measure is
/// rasterized over `Q_2n` at pitch `n/128`; the check passes when the support
/// cells inside `Q_n` are nonempty and all lie in one Moore-connected
/// component of the support cells of `Q_2n`. A zero measure reports
/// `(false, false)`.
pub fn aec_check<const D: usize>(real: &MeasureRealization<D>, n: f64) -> Result<AecReport> {
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::invalid("n", format!("must be positive, got {n}")));
    }
    let center = real.window.center;
    let double_box = BoxWindow { center, side: 2.0 * n };
    if !real.window.contains_box(&double_box) {
        return Err(Error::OutOfWindow);
    }

    let cells = 256usize; // pitch n/128 over side 2n
    let pitch = 2.0 * n / cells as f64;
    let lo = double_box.lo();
    let mut strides = [1usize; D];
    for i in 1..D {
        strides[i] = strides[i - 1] * cells;
    }
    let total = strides[D - 1] * cells;
    let mut support = vec![false; total];

    let cell_box = |idx: &[usize; D]| -> BoxWindow<D> {
        let mut c = [0.0; D];
        for i in 0..D {
            c[i] = lo[i] + (idx[i] as f64 + 0.5) * pitch;
        }
        BoxWindow { center: Point(c), side: pitch }
    };

    // rasterize the support
    match &real.body {
        Body::Density { sources, .. } => match sources {
            AcSources::Constant { density } => {
                if *density > 0.0 {
                    support.fill(true);
                }
            }
            AcSources::ShotNoise {
                centers,
                kernel_radius,
                kernel_height,
            } => {
                if *kernel_height > 0.0 {
                    for c in centers {
                        mark_near_point(&mut support, &lo, pitch, cells, c, *kernel_radius);
                    }
                }
            }
            AcSources::Boolean {
                grains,
                grain_radius,
                inside,
                outside,
            } => {
                if *outside > 0.0 {
                    support.fill(true);
                } else if *inside > 0.0 {
                    for g in grains {
                        mark_near_point(&mut support, &lo, pitch, cells, g, *grain_radius);
                    }
                }
            }
        },
        Body::Segments(s) => {
            if s.length_density > 0.0 {
                let b2 = crate::measures::realization::as_box2(&double_box);
                for e in &s.system.edges {
                    if let Some(clip) = e.seg.clip_to_box(&b2) {
                        // walk the cells under the clipped segment's bbox
                        let (mut qlo, mut qhi) = ([0.0f64; D], [0.0f64; D]);
                        for i in 0..2 {
                            qlo[i] = clip.a.0[i].min(clip.b.0[i]) - pitch;
                            qhi[i] = clip.a.0[i].max(clip.b.0[i]) + pitch;
                        }
                        for_range::<D>(&lo, pitch, cells, &qlo, &qhi, |idx, flat| {
                            if !support[flat] {
                                let cb = cell_box(idx);
                                let cb2 = crate::measures::realization::as_box2(&cb);
                                if clip.intersects_box(&cb2) {
                                    support[flat] = true;
                                }
                            }
                        });
                    }
                }
            }
        }
    }

    // connected components over support cells (Moore neighborhood),
    // restricted to labels reachable from inner-box cells
    let inner = BoxWindow { center, side: n };
    let mut inner_cells = Vec::new();
    {
        let (qlo, qhi) = (inner.lo(), inner.hi());
        for_range::<D>(&lo, pitch, cells, &qlo, &qhi, |idx, flat| {
            if support[flat] && inner.contains(&cell_box(idx).center) {
                inner_cells.push(flat);
            }
        });
    }
    if inner_cells.is_empty() {
        return Ok(AecReport { support_nonempty: false, connected_in_double_box: false });
    }

    // BFS from the first inner cell; connected iff every inner cell is reached
    let mut visited = vec![false; total];
    let mut stack = vec![inner_cells[0]];
    visited[inner_cells[0]] = true;
    while let Some(flat) = stack.pop() {
        let mut idx = [0usize; D];
        let mut rem = flat;
        for i in (0..D).rev() {
            idx[i] = rem / strides[i];
            rem %= strides[i];
        }
        // Moore neighborhood: all offsets in {-1,0,1}^D except the origin
        let mut off = [-1i64; D];
        'offsets: loop {
            let all_zero = off.iter().all(|&o| o == 0);
            if !all_zero {
                let mut ok = true;
                let mut nflat = 0usize;
                for i in 0..D {
                    let v = idx[i] as i64 + off[i];
                    if v < 0 || v >= cells as i64 {
                        ok = false;
                        break;
                    }
                    nflat += v as usize * strides[i];
                }
                if ok && support[nflat] && !visited[nflat] {
                    visited[nflat] = true;
                    stack.push(nflat);
                }
            }
            let mut i = 0;
            loop {
                if i == D {
                    break 'offsets;
                }
                off[i] += 1;
                if off[i] <= 1 {
                    break;
                }
                off[i] = -1;
                i += 1;
            }
        }
    }
    let connected = inner_cells.iter().all(|&f| visited[f]);
    Ok(AecReport { support_nonempty: true, connected_in_double_box: connected })
}

fn mark_near_point<const D: usize>(
    support: &mut [bool],
    lo: &[f64; D],
    pitch: f64,
    cells: usize,
    p: &Point<D>,
    radius: f64,
) {
    let (mut qlo, mut qhi) = ([0.0f64; D], [0.0f64; D]);
    for i in 0..D {
        qlo[i] = p.0[i] - radius - pitch;
        qhi[i] = p.0[i] + radius + pitch;
    }
    for_range::<D>(lo, pitch, cells, &qlo, &qhi, |idx, flat| {
        if !support[flat] {
            let mut c = [0.0; D];
            for i in 0..D {
                c[i] = lo[i] + (idx[i] as f64 + 0.5) * pitch;
            }
            let cell = BoxWindow::<D> { center: Point(c), side: pitch };
            if cell.dist_to_point(p) <= radius {
                support[flat] = true;
            }
        }
    });
}

/// Visit cells of a `cells^D` grid over `[lo, lo + cells*pitch]` intersecting
/// the query box `[qlo, qhi]`, with flat row-major indices.
fn for_range<const D: usize>(
    lo: &[f64; D],
    pitch: f64,
    cells: usize,
    qlo: &[f64; D],
    qhi: &[f64; D],
    mut f: impl FnMut(&[usize; D], usize),
) {
    let mut a = [0usize; D];
    let mut b = [0usize; D];
    for i in 0..D {
        let first = ((qlo[i] - lo[i]) / pitch).floor() as i64;
        let last = ((qhi[i] - lo[i]) / pitch).ceil() as i64;
        if last < 0 || first >= cells as i64 {
            return;
        }
        a[i] = first.max(0) as usize;
        b[i] = (last as usize).min(cells - 1);
    }
    let mut strides = [1usize; D];
    for i in 1..D {
        strides[i] = strides[i - 1] * cells;
    }
    let mut idx = a;
    loop {
        let mut flat = 0;
        for i in 0..D {
            flat += idx[i] * strides[i];
        }
        f(&idx, flat);
        let mut i = 0;
        loop {
            if i == D {
                return;
            }
            idx[i] += 1;
            if idx[i] <= b[i] {
                break;
            }
            idx[i] = a[i];
            i += 1;
        }
    }
}
