//! Sampled realizations of random intensity measures and their evaluation.
//!
//! Absolutely continuous measures carry both their generative sources (kernel
//! centers, grains) for exact Cox sampling and a regular density grid used
//! only for mass evaluation `Λ(A)`; the grid pitch defaults to an eighth of
//! the kernel/grain radius, so quadrature error is bounded and reported in
//! the tests. Singular measures carry a clipped segment system and evaluate
//! mass exactly.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::geom::{BoxWindow, Point, Point2, Segment};
use crate::measures::spec::{MeasureFamily, MeasureSpec};
use crate::rng::substream;
use crate::tessellations::{delaunay_segments, line_tessellation, voronoi_segments, SegmentSystem};

/// Generative sources of an absolutely continuous realization, with all
/// densities already scaled by the spec normalization.
#[derive(Debug, Clone)]
pub enum AcSources<const D: usize> {
    Constant {
        density: f64,
    },
    ShotNoise {
        centers: Vec<Point<D>>,
        kernel_radius: f64,
        kernel_height: f64,
    },
    Boolean {
        grains: Vec<Point<D>>,
        grain_radius: f64,
        inside: f64,
        outside: f64,
    },
}

/// Regular grid of cell densities over the window. `values[i]` is the density
/// at the cell center; masses weight partial cells by overlap volume.
#[derive(Debug, Clone)]
pub struct DensityGrid<const D: usize> {
    window: BoxWindow<D>,
    cells_per_axis: usize,
    pitch: f64,
    values: Vec<f64>,
}

impl<const D: usize> DensityGrid<D> {
    fn strides(cells: usize) -> [usize; D] {
        let mut s = [1usize; D];
        for i in 1..D {
            s[i] = s[i - 1] * cells;
        }
        s
    }

    pub(crate) fn fill(window: &BoxWindow<D>, target_pitch: f64, sources: &AcSources<D>) -> DensityGrid<D> {
        let cells = if matches!(sources, AcSources::Constant { .. }) {
            1
        } else {
            ((window.side / target_pitch).ceil() as usize).max(1)
        };
        let pitch = window.side / cells as f64;
        let strides = Self::strides(cells);
        let total = strides[D - 1] * cells;
        let lo = window.lo();

        let mut values = vec![0.0; total];
        match sources {
            AcSources::Constant { density } => {
                values.fill(*density);
            }
            AcSources::ShotNoise {
                centers,
                kernel_radius,
                kernel_height,
            } => {
                for c in centers {
                    stamp_ball(&mut values, &lo, pitch, cells, c, *kernel_radius, |v| {
                        *v += *kernel_height
                    });
                }
            }
            AcSources::Boolean {
                grains,
                grain_radius,
                inside,
                outside,
            } => {
                values.fill(*outside);
                for g in grains {
                    stamp_ball(&mut values, &lo, pitch, cells, g, *grain_radius, |v| {
                        *v = *inside
                    });
                }
            }
        }
        DensityGrid {
            window: *window,
            cells_per_axis: cells,
            pitch,
            values,
        }
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    fn cell_center(&self, idx: &[usize; D]) -> Point<D> {
        let lo = self.window.lo();
        let mut c = [0.0; D];
        for i in 0..D {
            c[i] = lo[i] + (idx[i] as f64 + 0.5) * self.pitch;
        }
        Point(c)
    }

    fn cell_box(&self, idx: &[usize; D]) -> BoxWindow<D> {
        BoxWindow {
            center: self.cell_center(idx),
            side: self.pitch,
        }
    }

    fn value_at(&self, idx: &[usize; D]) -> f64 {
        let strides = Self::strides(self.cells_per_axis);
        let mut flat = 0;
        for i in 0..D {
            flat += idx[i] * strides[i];
        }
        self.values[flat]
    }

    /// Iterate cell multi-indices whose boxes can intersect `[lo, hi]`.
    fn cell_range(&self, qlo: &[f64; D], qhi: &[f64; D]) -> Option<([usize; D], [usize; D])> {
        let lo = self.window.lo();
        let mut a = [0usize; D];
        let mut b = [0usize; D];
        for i in 0..D {
            let first = ((qlo[i] - lo[i]) / self.pitch).floor() as i64;
            let last = ((qhi[i] - lo[i]) / self.pitch).ceil() as i64;
            if last < 0 || first >= self.cells_per_axis as i64 {
                return None;
            }
            a[i] = first.max(0) as usize;
            b[i] = (last as usize).min(self.cells_per_axis - 1);
        }
        Some((a, b))
    }

    fn for_cells_in_range(
        &self,
        range: ([usize; D], [usize; D]),
        mut f: impl FnMut(&[usize; D]),
    ) {
        let (a, b) = range;
        let mut idx = a;
        loop {
            f(&idx);
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

    fn mass_in_box(&self, b: &BoxWindow<D>) -> f64 {
        let mut mass = 0.0;
        if let Some(range) = self.cell_range(&b.lo(), &b.hi()) {
            self.for_cells_in_range(range, |idx| {
                let cell = self.cell_box(idx);
                let overlap = cell.overlap_volume(b);
                if overlap > 0.0 {
                    mass += self.value_at(idx) * overlap;
                }
            });
        }
        mass
    }

    fn mass_in_ball(&self, center: &Point<D>, radius: f64) -> f64 {
        let mut qlo = center.0;
        let mut qhi = center.0;
        for i in 0..D {
            qlo[i] -= radius;
            qhi[i] += radius;
        }
        let cell_volume = self.pitch.powi(D as i32);
        let mut mass = 0.0;
        if let Some(range) = self.cell_range(&qlo, &qhi) {
            self.for_cells_in_range(range, |idx| {
                if self.cell_center(idx).dist(center) <= radius {
                    mass += self.value_at(idx) * cell_volume;
                }
            });
        }
        mass
    }
}

/// Apply `f` to every grid cell whose center lies within `radius` of `p`.
fn stamp_ball<const D: usize>(
    values: &mut [f64],
    lo: &[f64; D],
    pitch: f64,
    cells: usize,
    p: &Point<D>,
    radius: f64,
    mut f: impl FnMut(&mut f64),
) {
    let mut a = [0usize; D];
    let mut b = [0usize; D];
    for i in 0..D {
        let first = ((p.0[i] - radius - lo[i]) / pitch).floor() as i64;
        let last = ((p.0[i] + radius - lo[i]) / pitch).ceil() as i64;
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
    let r2 = radius * radius;
    let mut idx = a;
    loop {
        let mut d2 = 0.0;
        let mut flat = 0;
        for i in 0..D {
            let c = lo[i] + (idx[i] as f64 + 0.5) * pitch;
            let d = c - p.0[i];
            d2 += d * d;
            flat += idx[i] * strides[i];
        }
        if d2 <= r2 {
            f(&mut values[flat]);
        }
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

/// Singular realization payload: the clipped segment system, the mass density
/// per unit length, and (for Voronoi/Delaunay) the generating seeds.
#[derive(Debug, Clone)]
pub struct SegmentsBody {
    pub system: SegmentSystem,
    pub length_density: f64,
    pub seeds: Option<Vec<Point2>>,
}

#[derive(Debug, Clone)]
pub enum Body<const D: usize> {
    Density {
        grid: DensityGrid<D>,
        sources: AcSources<D>,
    },
    /// Only constructed when `D == 2`.
    Segments(SegmentsBody),
}

/// A sampled realization of a random intensity measure on a window.
#[derive(Debug, Clone)]
pub struct MeasureRealization<const D: usize> {
    pub window: BoxWindow<D>,
    pub seed: u64,
    pub margin: f64,
    pub body: Body<D>,
}

pub(crate) fn as_point2<const D: usize>(p: &Point<D>) -> Point2 {
    debug_assert!(D == 2, "segment bodies exist only in the plane");
    Point2::xy(p.0[0], p.0[1])
}

pub(crate) fn as_box2<const D: usize>(b: &BoxWindow<D>) -> BoxWindow<2> {
    debug_assert!(D == 2);
    BoxWindow {
        center: as_point2(&b.center),
        side: b.side,
    }
}

/// Result of a Palm draw: the shift point sampled from the normalized
/// restriction of the measure to the unit box, and the weight `Λ(Q_1)`.
/// Zero-mass realizations return weight 0 and no shift.
#[derive(Debug, Clone, Copy)]
pub struct PalmDraw<const D: usize> {
    pub shift: Option<Point<D>>,
    pub weight: f64,
}

fn sample_poisson_count(rng: &mut impl Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
}

fn uniform_in_box<const D: usize>(rng: &mut impl Rng, window: &BoxWindow<D>) -> Point<D> {
    let lo = window.lo();
    let hi = window.hi();
    let mut c = [0.0; D];
    for i in 0..D {
        c[i] = rng.random_range(lo[i]..hi[i]);
    }
    Point(c)
}

fn poisson_points_in_box<const D: usize>(
    rng: &mut impl Rng,
    intensity: f64,
    window: &BoxWindow<D>,
) -> Vec<Point<D>> {
    let n = sample_poisson_count(rng, intensity * window.volume());
    (0..n).map(|_| uniform_in_box(rng, window)).collect()
}

/// Sample a realization of the measure on the window. Source processes are
/// sampled on the window dilated by the family margin; segment systems are
/// clipped back to the window.
pub fn sample_measure<const D: usize>(
    spec: &MeasureSpec,
    window: &BoxWindow<D>,
    seed: u64,
) -> Result<MeasureRealization<D>> {
    spec.family.validate()?;
    if !spec.family.supports_dim(D) {
        return Err(Error::UnsupportedDimension {
            dim: D,
            what: "tessellation-driven measures",
        });
    }
    let margin = spec.family.sampling_margin();
    let dilated = window.dilate(margin);
    let nu = spec.normalization;
    let mut rng = substream(seed, &[0x5e4d]);

    let body = match spec.family {
        MeasureFamily::ConstantLebesgue { density } => {
            let sources = AcSources::Constant {
                density: nu * density,
            };
            let grid = DensityGrid::fill(window, window.side, &sources);
            Body::Density { grid, sources }
        }
        MeasureFamily::ShotNoise {
            kernel_radius,
            kernel_height,
            center_intensity,
        } => {
            let centers = poisson_points_in_box(&mut rng, center_intensity, &dilated);
            let sources = AcSources::ShotNoise {
                centers,
                kernel_radius,
                kernel_height: nu * kernel_height,
            };
            let grid = DensityGrid::fill(window, kernel_radius / 8.0, &sources);
            Body::Density { grid, sources }
        }
        MeasureFamily::ModulatedBoolean {
            grain_radius,
            grain_intensity,
            lambda_in,
            lambda_out,
        } => {
            let grains = poisson_points_in_box(&mut rng, grain_intensity, &dilated);
            let sources = AcSources::Boolean {
                grains,
                grain_radius,
                inside: nu * lambda_in,
                outside: nu * lambda_out,
            };
            let grid = DensityGrid::fill(window, grain_radius / 8.0, &sources);
            Body::Density { grid, sources }
        }
        MeasureFamily::VoronoiEdges { seed_intensity }
        | MeasureFamily::DelaunayEdges { seed_intensity } => {
            let w2 = as_box2(window);
            let d2 = w2.dilate(margin);
            let seeds: Vec<Point2> = poisson_points_in_box(&mut rng, seed_intensity, &d2);
            let is_voronoi = matches!(spec.family, MeasureFamily::VoronoiEdges { .. });
            let min_seeds = if is_voronoi { 2 } else { 3 };
            let system = if seeds.len() < min_seeds {
                SegmentSystem::empty(w2)
            } else {
                let built = if is_voronoi {
                    voronoi_segments(&seeds, &w2)
                } else {
                    delaunay_segments(&seeds, &w2)
                };
                match built {
                    Ok(sys) => sys,
                    // all-collinear seeds have probability zero; treat as empty
                    Err(Error::DegenerateInput(_)) => SegmentSystem::empty(w2),
                    Err(e) => return Err(e),
                }
            };
            Body::Segments(SegmentsBody {
                system,
                length_density: nu,
                seeds: Some(seeds),
            })
        }
        MeasureFamily::PoissonLines { line_intensity } => {
            let w2 = as_box2(window);
            let system = line_tessellation(line_intensity, &w2, seed)?;
            Body::Segments(SegmentsBody {
                system,
                length_density: nu,
                seeds: None,
            })
        }
    };

    Ok(MeasureRealization {
        window: *window,
        seed,
        margin,
        body,
    })
}

impl<const D: usize> MeasureRealization<D> {
    /// Total mass `Λ(box)`. The box must lie inside the realization window;
    /// violating that would silently bias boundary estimates, so it is an
    /// error.
    pub fn mass_in_box(&self, b: &BoxWindow<D>) -> Result<f64> {
        if !self.window.contains_box(b) {
            return Err(Error::OutOfWindow);
        }
        Ok(match &self.body {
            Body::Density { grid, .. } => grid.mass_in_box(b),
            Body::Segments(s) => {
                let b2 = as_box2(b);
                let mut len = 0.0;
                for e in &s.system.edges {
                    if let Some(c) = e.seg.clip_to_box(&b2) {
                        len += c.length;
                    }
                }
                s.length_density * len
            }
        })
    }

    /// Total mass `Λ(B_radius(center))`.
    pub fn mass_in_ball(&self, center: &Point<D>, radius: f64) -> Result<f64> {
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::invalid("radius", format!("must be positive, got {radius}")));
        }
        let ball_box = BoxWindow {
            center: *center,
            side: 2.0 * radius,
        };
        if !self.window.contains_box(&ball_box) {
            return Err(Error::OutOfWindow);
        }
        Ok(match &self.body {
            // constant fields have one grid cell; the ball mass is exact
            Body::Density {
                sources: AcSources::Constant { density },
                ..
            } => density * crate::geom::unit_ball_volume(D) * radius.powi(D as i32),
            Body::Density { grid, .. } => grid.mass_in_ball(center, radius),
            Body::Segments(s) => {
                let c2 = as_point2(center);
                let total: f64 = s
                    .system
                    .edges
                    .iter()
                    .map(|e| e.seg.length_in_disk(&c2, radius))
                    .sum();
                s.length_density * total
            }
        })
    }

    /// Density field value at a point (absolutely continuous bodies only),
    /// evaluated exactly from the sources.
    pub fn density_at(&self, p: &Point<D>) -> Result<f64> {
        match &self.body {
            Body::Density { sources, .. } => Ok(match sources {
                AcSources::Constant { density } => *density,
                AcSources::ShotNoise {
                    centers,
                    kernel_radius,
                    kernel_height,
                } => {
                    let r2 = kernel_radius * kernel_radius;
                    kernel_height * centers.iter().filter(|c| c.dist2(p) <= r2).count() as f64
                }
                AcSources::Boolean {
                    grains,
                    grain_radius,
                    inside,
                    outside,
                } => {
                    let r2 = grain_radius * grain_radius;
                    if grains.iter().any(|g| g.dist2(p) <= r2) {
                        *inside
                    } else {
                        *outside
                    }
                }
            }),
            Body::Segments(_) => Err(Error::UnsupportedDiagnostic(
                "density_at on a singular measure",
            )),
        }
    }

    /// Draw a point from the normalized restriction `Λ|_unit_box / Λ(unit_box)`
    /// together with the weight `Λ(unit_box)`.
    ///
    /// Density bodies choose a grid cell proportional to its clipped mass and
    /// then a uniform point in the clipped cell; segment bodies choose an edge
    /// proportional to clipped length and then a uniform point on it.
    pub fn palm_draw(&self, unit_box: &BoxWindow<D>, seed: u64) -> Result<PalmDraw<D>> {
        if !self.window.contains_box(unit_box) {
            return Err(Error::OutOfWindow);
        }
        let mut rng = substream(seed, &[0x9a1e]);
        match &self.body {
            Body::Density { grid, .. } => {
                let mut cells: Vec<([usize; D], f64)> = Vec::new();
                let mut total = 0.0;
                if let Some(range) = grid.cell_range(&unit_box.lo(), &unit_box.hi()) {
                    grid.for_cells_in_range(range, |idx| {
                        let cell = grid.cell_box(idx);
                        let overlap = cell.overlap_volume(unit_box);
                        if overlap > 0.0 {
                            let m = grid.value_at(idx) * overlap;
                            if m > 0.0 {
                                cells.push((*idx, m));
                                total += m;
                            }
                        }
                    });
                }
                if total <= 0.0 {
                    return Ok(PalmDraw { shift: None, weight: 0.0 });
                }
                let mut u = rng.random_range(0.0..total);
                let mut chosen = cells[cells.len() - 1].0;
                for (idx, m) in &cells {
                    if u < *m {
                        chosen = *idx;
                        break;
                    }
                    u -= m;
                }
                // uniform in the intersection of the chosen cell with the box
                let cell = grid.cell_box(&chosen);
                let (clo, chi) = (cell.lo(), cell.hi());
                let (blo, bhi) = (unit_box.lo(), unit_box.hi());
                let mut c = [0.0; D];
                for i in 0..D {
                    let lo = clo[i].max(blo[i]);
                    let hi = chi[i].min(bhi[i]);
                    c[i] = rng.random_range(lo..hi);
                }
                Ok(PalmDraw { shift: Some(Point(c)), weight: total })
            }
            Body::Segments(s) => {
                let b2 = as_box2(unit_box);
                let mut clipped: Vec<Segment> = Vec::new();
                let mut total_len = 0.0;
                for e in &s.system.edges {
                    if let Some(c) = e.seg.clip_to_box(&b2) {
                        total_len += c.length;
                        clipped.push(c);
                    }
                }
                let weight = s.length_density * total_len;
                if weight <= 0.0 {
                    return Ok(PalmDraw { shift: None, weight: 0.0 });
                }
                let mut u = rng.random_range(0.0..total_len);
                let mut chosen = clipped[clipped.len() - 1];
                for c in &clipped {
                    if u < c.length {
                        chosen = *c;
                        break;
                    }
                    u -= c.length;
                }
                let p = chosen.point_at(rng.random_range(0.0..1.0));
                let mut coords = [0.0; D];
                coords[0] = p.0[0];
                coords[1] = p.0[1];
                Ok(PalmDraw { shift: Some(Point(coords)), weight })
            }
        }
    }

    pub(crate) fn segments_body(&self) -> Option<&SegmentsBody> {
        match &self.body {
            Body::Segments(s) => Some(s),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_spec(density: f64) -> MeasureSpec {
        MeasureSpec::unnormalized(MeasureFamily::ConstantLebesgue { density }).unwrap()
    }

    #[test]
    fn constant_measure_is_uniform_and_exact() {
        let w = BoxWindow::<2>::centered(10.0).unwrap();
        let real = sample_measure(&constant_spec(1.0), &w, 1).unwrap();
        let q1 = BoxWindow::<2>::centered(1.0).unwrap();
        assert!((real.mass_in_box(&q1).unwrap() - 1.0).abs() < 1e-12);
        let q3 = BoxWindow::<2>::centered(3.0).unwrap();
        let real2 = sample_measure(&constant_spec(2.0), &w, 1).unwrap();
        assert!((real2.mass_in_box(&q3).unwrap() - 2.0 * 9.0).abs() < 1e-12);
    }

    #[test]
    fn constant_measure_3d() {
        let w = BoxWindow::<3>::centered(4.0).unwrap();
        let real = sample_measure(&constant_spec(2.0), &w, 1).unwrap();
        let q3 = BoxWindow::<3>::centered(3.0).unwrap();
        assert!((real.mass_in_box(&q3).unwrap() - 2.0 * 27.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_window_box_is_error() {
        let w = BoxWindow::<2>::centered(2.0).unwrap();
        let real = sample_measure(&constant_spec(1.0), &w, 1).unwrap();
        let big = BoxWindow::<2>::centered(3.0).unwrap();
        assert!(matches!(real.mass_in_box(&big), Err(Error::OutOfWindow)));
    }

    #[test]
    fn shot_noise_zero_intensity_is_zero_measure() {
        let spec = MeasureSpec::unnormalized(MeasureFamily::ShotNoise {
            kernel_radius: 0.5,
            kernel_height: 1.0,
            center_intensity: 0.0,
        })
        .unwrap();
        let w = BoxWindow::<2>::centered(4.0).unwrap();
        let real = sample_measure(&spec, &w, 3).unwrap();
        let q1 = BoxWindow::<2>::centered(1.0).unwrap();
        assert_eq!(real.mass_in_box(&q1).unwrap(), 0.0);
        let draw = real.palm_draw(&q1, 9).unwrap();
        assert_eq!(draw.weight, 0.0);
        assert!(draw.shift.is_none());
    }

    #[test]
    fn shot_noise_interior_mass_is_exact_per_center() {
        // kernel balls fully inside the window contribute height * |B| each
        let spec = MeasureSpec::unnormalized(MeasureFamily::ShotNoise {
            kernel_radius: 0.25,
            kernel_height: 2.0,
            center_intensity: 0.7,
        })
        .unwrap();
        let w = BoxWindow::<2>::centered(8.0).unwrap();
        let real = sample_measure(&spec, &w, 11).unwrap();
        let (interior, kr, height) = match &real.body {
            Body::Density { sources: AcSources::ShotNoise { centers, kernel_radius, kernel_height }, .. } => {
                let inner = w.dilate(-2.0 * *kernel_radius);
                (
                    centers.iter().filter(|c| inner.contains(c)).count(),
                    *kernel_radius,
                    *kernel_height,
                )
            }
            _ => unreachable!(),
        };
        // mass inside the window from interior centers, via grid quadrature on
        // a sub-box that contains all their kernels
        let sub = w.dilate(-kr);
        let full_mass = real.mass_in_box(&sub).unwrap();
        let expected_min = interior as f64 * height * std::f64::consts::PI * kr * kr;
        // boundary centers add nonnegative extra mass; quadrature error ~1%
        assert!(
            full_mass >= 0.97 * expected_min,
            "mass {full_mass} vs interior lower bound {expected_min}"
        );
    }

    #[test]
    fn ball_mass_of_unit_disk_matches_area() {
        let w = BoxWindow::<2>::centered(4.0).unwrap();
        let real = sample_measure(&constant_spec(1.0), &w, 1).unwrap();
        let mass = real.mass_in_ball(&Point2::origin(), 1.0).unwrap();
        assert!((mass - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn gridded_ball_mass_within_perimeter_bound() {
        // shot noise with one dense cluster: compare the pitch-h cell test
        // against a 10x oversampled clipping oracle
        let spec = MeasureSpec::unnormalized(MeasureFamily::ShotNoise {
            kernel_radius: 0.4,
            kernel_height: 1.0,
            center_intensity: 2.0,
        })
        .unwrap();
        let w = BoxWindow::<2>::centered(6.0).unwrap();
        let real = sample_measure(&spec, &w, 23).unwrap();
        let center = Point2::xy(0.3, -0.2);
        let radius = 1.1;
        let mass = real.mass_in_ball(&center, radius).unwrap();

        // oracle: 10x finer midpoint quadrature against the exact field
        let h = 0.4 / 80.0;
        let steps = (2.0 * radius / h).ceil() as i64;
        let mut oracle = 0.0;
        for i in 0..steps {
            for j in 0..steps {
                let p = Point2::xy(
                    center.0[0] - radius + (i as f64 + 0.5) * h,
                    center.0[1] - radius + (j as f64 + 0.5) * h,
                );
                if p.dist(&center) <= radius {
                    oracle += real.density_at(&p).unwrap() * h * h;
                }
            }
        }
        if oracle > 0.0 {
            assert!(
                (mass - oracle).abs() / oracle < 0.05,
                "grid ball mass {mass} vs oracle {oracle}"
            );
        }
    }

    #[test]
    fn boolean_measure_two_phase_density() {
        let spec = MeasureSpec::unnormalized(MeasureFamily::ModulatedBoolean {
            grain_radius: 0.5,
            grain_intensity: 0.8,
            lambda_in: 3.0,
            lambda_out: 1.0,
        })
        .unwrap();
        let w = BoxWindow::<2>::centered(6.0).unwrap();
        let real = sample_measure(&spec, &w, 5).unwrap();
        match &real.body {
            Body::Density { sources: AcSources::Boolean { grains, grain_radius, .. }, .. } => {
                let on_grain = grains.first().copied();
                if let Some(g) = on_grain {
                    if w.contains(&g) {
                        assert_eq!(real.density_at(&g).unwrap(), 3.0);
                        let far = Point2::xy(
                            g.0[0] + 20.0 * grain_radius,
                            g.0[1],
                        );
                        if w.contains(&far)
                            && grains.iter().all(|q| q.dist(&far) > *grain_radius)
                        {
                            assert_eq!(real.density_at(&far).unwrap(), 1.0);
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn segment_mass_single_edge_clipped() {
        // single segment from (0,0) to (2,0) clipped to Q_2: length 1
        let w = BoxWindow::<2>::centered(6.0).unwrap();
        let mut builder = crate::tessellations::system::SystemBuilder::new(w);
        builder.add_clipped(&Segment::new(Point2::xy(0.0, 0.0), Point2::xy(2.0, 0.0)).unwrap());
        let body = SegmentsBody {
            system: builder.finish(),
            length_density: 1.0,
            seeds: None,
        };
        let real = MeasureRealization::<2> {
            window: w,
            seed: 0,
            margin: 0.0,
            body: Body::Segments(body),
        };
        let q2 = BoxWindow::<2>::centered(2.0).unwrap();
        assert!((real.mass_in_box(&q2).unwrap() - 1.0).abs() < 1e-12);
        // segment through a disk of radius r centered on it: mass 2r
        let mass = real.mass_in_ball(&Point2::xy(1.0, 0.0), 0.4).unwrap();
        assert!((mass - 0.8).abs() < 1e-12);
    }

    #[test]
    fn palm_draw_constant_weight_one_uniform_shift() {
        let w = BoxWindow::<2>::centered(6.0).unwrap();
        let real = sample_measure(&constant_spec(1.0), &w, 1).unwrap();
        let q1 = BoxWindow::<2>::centered(1.0).unwrap();
        let mut mean = [0.0, 0.0];
        let n = 4000;
        for k in 0..n {
            let d = real.palm_draw(&q1, k as u64).unwrap();
            assert!((d.weight - 1.0).abs() < 1e-12);
            let p = d.shift.unwrap();
            assert!(q1.contains(&p));
            mean[0] += p.0[0];
            mean[1] += p.0[1];
        }
        // mean of uniform on Q_1 is the origin; se = 1/sqrt(12 n)
        let se = 1.0 / (12.0f64 * n as f64).sqrt();
        assert!(mean[0].abs() / n as f64 <= 4.0 * se);
        assert!(mean[1].abs() / n as f64 <= 4.0 * se);
    }

    #[test]
    fn mass_additivity_over_partition() {
        let spec = MeasureSpec::unnormalized(MeasureFamily::VoronoiEdges { seed_intensity: 30.0 }).unwrap();
        let w = BoxWindow::<2>::centered(4.0).unwrap();
        let real = sample_measure(&spec, &w, 17).unwrap();
        let q2 = BoxWindow::<2>::centered(2.0).unwrap();
        let total = real.mass_in_box(&q2).unwrap();
        let mut parts = 0.0;
        for dx in [-0.5, 0.5] {
            for dy in [-0.5, 0.5] {
                let sub = BoxWindow::new(Point2::xy(dx, dy), 1.0).unwrap();
                parts += real.mass_in_box(&sub).unwrap();
            }
        }
        assert!(
            (total - parts).abs() <= 1e-9 * total.max(1.0),
            "additivity violated: {total} vs {parts}"
        );
    }
}
