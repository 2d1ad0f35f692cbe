//! Poisson and Cox point pattern sampling, Palm versions, and thinning.
//!
//! Cox samples are drawn per source (per segment, per kernel ball, per grain)
//! with RNG substreams keyed by `(seed, source index)`, so a pattern is
//! reproducible no matter how sources are iterated or how replicates are
//! scheduled across threads. Thinning marks are keyed by point index, which
//! makes thinned patterns nested across retention levels for a fixed seed.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::geom::{BoxWindow, Point, Point2};
use crate::measures::realization::{AcSources, Body, MeasureRealization};
use crate::measures::spec::MeasureSpec;
use crate::measures::{sample_measure, PalmDraw};
use crate::rng::{derive_seed, substream};

/// A finite point configuration in a window.
#[derive(Debug, Clone)]
pub struct PointPattern<const D: usize> {
    pub points: Vec<Point<D>>,
    pub window: BoxWindow<D>,
    /// The Cox/Poisson multiplier the pattern was sampled at.
    pub intensity: f64,
    pub seed: u64,
}

impl<const D: usize> PointPattern<D> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Write one point per row (`x,y` or `x,y,z`).
    pub fn write_csv(&self, mut w: impl std::io::Write) -> Result<()> {
        writeln!(w, "{}", if D == 2 { "x,y" } else { "x,y,z" })?;
        for p in &self.points {
            let row: Vec<String> = p.0.iter().map(|c| c.to_string()).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// A Palm-version sample: the pattern contains the origin as point 0, and the
/// weight is the measure mass of the unit box the shift was drawn from.
#[derive(Debug, Clone)]
pub struct PalmSample<const D: usize> {
    pub pattern: PointPattern<D>,
    pub weight: f64,
}

fn poisson_count(rng: &mut impl Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        0
    } else {
        Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
    }
}

fn uniform_in<const D: usize>(rng: &mut impl Rng, window: &BoxWindow<D>) -> Point<D> {
    let lo = window.lo();
    let hi = window.hi();
    let mut c = [0.0; D];
    for i in 0..D {
        c[i] = rng.random_range(lo[i]..hi[i]);
    }
    Point(c)
}

fn uniform_in_ball<const D: usize>(rng: &mut impl Rng, center: &Point<D>, radius: f64) -> Point<D> {
    loop {
        let mut c = [0.0; D];
        for v in c.iter_mut() {
            *v = rng.random_range(-radius..radius);
        }
        let d2: f64 = c.iter().map(|v| v * v).sum();
        if d2 < radius * radius {
            for i in 0..D {
                c[i] += center.0[i];
            }
            return Point(c);
        }
    }
}

/// Homogeneous Poisson pattern with intensity `rho` on the window.
pub fn sample_poisson<const D: usize>(
    rho: f64,
    window: &BoxWindow<D>,
    seed: u64,
) -> Result<PointPattern<D>> {
    if !rho.is_finite() || rho < 0.0 {
        return Err(Error::invalid("rho", format!("must be >= 0, got {rho}")));
    }
    let mut rng = substream(seed, &[0x9013]);
    let n = poisson_count(&mut rng, rho * window.volume());
    let points = (0..n).map(|_| uniform_in(&mut rng, window)).collect();
    Ok(PointPattern {
        points,
        window: *window,
        intensity: rho,
        seed,
    })
}

/// Cox pattern conditional on a measure realization: a Poisson process with
/// intensity `lambda * Λ` on the realization window.
///
/// Sampling is exact per source: per segment for singular measures, per
/// kernel ball for shot-noise fields (indicator kernels), and a superposition
/// of a homogeneous part and a grain-union part for modulated Boolean fields.
pub fn sample_cox<const D: usize>(
    real: &MeasureRealization<D>,
    lambda: f64,
    seed: u64,
) -> Result<PointPattern<D>> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::invalid("lambda", format!("must be >= 0, got {lambda}")));
    }
    let window = real.window;
    let mut points: Vec<Point<D>> = Vec::new();

    match &real.body {
        Body::Density { sources, .. } => match sources {
            AcSources::Constant { density } => {
                let mut rng = substream(seed, &[0xc0c5, 0]);
                let n = poisson_count(&mut rng, lambda * density * window.volume());
                points.extend((0..n).map(|_| uniform_in(&mut rng, &window)));
            }
            AcSources::ShotNoise {
                centers,
                kernel_radius,
                kernel_height,
            } => {
                let ball_mass =
                    kernel_height * crate::geom::unit_ball_volume(D) * kernel_radius.powi(D as i32);
                for (i, c) in centers.iter().enumerate() {
                    let mut rng = substream(seed, &[0xc0c5, i as u64]);
                    let n = poisson_count(&mut rng, lambda * ball_mass);
                    for _ in 0..n {
                        let p = uniform_in_ball(&mut rng, c, *kernel_radius);
                        if window.contains(&p) {
                            points.push(p);
                        }
                    }
                }
            }
            AcSources::Boolean {
                grains,
                grain_radius,
                inside,
                outside,
            } => {
                let base = inside.min(*outside);
                let excess = (inside - outside).abs();
                let mut rng = substream(seed, &[0xc0c5, u64::MAX]);
                let n = poisson_count(&mut rng, lambda * base * window.volume());
                points.extend((0..n).map(|_| uniform_in(&mut rng, &window)));

                if excess > 0.0 {
                    let r2 = grain_radius * grain_radius;
                    if inside >= outside {
                        // extra intensity on the union of grains: sample per
                        // grain, keep a point only where its grain is the
                        // first one covering it
                        let ball = crate::geom::unit_ball_volume(D) * grain_radius.powi(D as i32);
                        for (i, g) in grains.iter().enumerate() {
                            let mut rng = substream(seed, &[0xc0c5, i as u64]);
                            let n = poisson_count(&mut rng, lambda * excess * ball);
                            for _ in 0..n {
                                let p = uniform_in_ball(&mut rng, g, *grain_radius);
                                if !window.contains(&p) {
                                    continue;
                                }
                                let first_cover = grains
                                    .iter()
                                    .position(|q| q.dist2(&p) < r2)
                                    .expect("own grain covers the point");
                                if first_cover == i {
                                    points.push(p);
                                }
                            }
                        }
                    } else {
                        // extra intensity off the union: homogeneous candidates
                        // rejected inside any grain
                        let mut rng = substream(seed, &[0xc0c5, u64::MAX - 1]);
                        let n = poisson_count(&mut rng, lambda * excess * window.volume());
                        for _ in 0..n {
                            let p = uniform_in(&mut rng, &window);
                            if !grains.iter().any(|q| q.dist2(&p) < r2) {
                                points.push(p);
                            }
                        }
                    }
                }
            }
        },
        Body::Segments(s) => {
            for (i, e) in s.system.edges.iter().enumerate() {
                let mut rng = substream(seed, &[0xc0c5, i as u64]);
                let n = poisson_count(&mut rng, lambda * s.length_density * e.seg.length);
                let mut ts: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
                ts.sort_by(|a, b| a.partial_cmp(b).expect("finite positions"));
                for t in ts {
                    let p2: Point2 = e.seg.point_at(t);
                    let mut c = [0.0; D];
                    c[0] = p2.0[0];
                    c[1] = p2.0[1];
                    points.push(Point(c));
                }
            }
        }
    }

    Ok(PointPattern {
        points,
        window,
        intensity: lambda,
        seed,
    })
}

/// Palm-version Cox sample `{o} ∪ Cox(λ ϑ_x Λ)`: draws the shift from the
/// mass on the unit box at the window center, translates the sampled pattern
/// so the drawn point becomes the origin, and prepends the origin.
///
/// Zero-mass realizations return the origin alone with weight 0; weighted
/// averages must skip them.
pub fn sample_cox_palm<const D: usize>(
    spec: &MeasureSpec,
    lambda: f64,
    window: &BoxWindow<D>,
    seed: u64,
) -> Result<PalmSample<D>> {
    let real = sample_measure(spec, window, derive_seed(seed, &[1]))?;
    let unit_box = BoxWindow {
        center: window.center,
        side: 1.0,
    };
    let draw = real.palm_draw(&unit_box, derive_seed(seed, &[2]))?;
    Ok(palm_sample_from(&real, lambda, &draw, derive_seed(seed, &[3]))?)
}

/// Assemble a Palm sample from an existing realization and Palm draw
/// (shared-realization workflows: sweeps, isolation bounds).
pub fn palm_sample_from<const D: usize>(
    real: &MeasureRealization<D>,
    lambda: f64,
    draw: &PalmDraw<D>,
    seed: u64,
) -> Result<PalmSample<D>> {
    let origin = Point::<D>::origin();
    let shift = match draw.shift {
        Some(x) if draw.weight > 0.0 => x,
        _ => {
            return Ok(PalmSample {
                pattern: PointPattern {
                    points: vec![origin],
                    window: real.window.translate(&real.window.center.scale(-1.0)),
                    intensity: lambda,
                    seed,
                },
                weight: 0.0,
            });
        }
    };
    let raw = sample_cox(real, lambda, seed)?;
    let neg = shift.scale(-1.0);
    let mut points = Vec::with_capacity(raw.points.len() + 1);
    points.push(origin);
    points.extend(raw.points.iter().map(|p| p.add(&neg)));
    Ok(PalmSample {
        pattern: PointPattern {
            points,
            window: raw.window.translate(&neg),
            intensity: lambda,
            seed,
        },
        weight: draw.weight,
    })
}

fn retention_mark(seed: u64, index: u64) -> f64 {
    // 53-bit uniform from the mixed key; cheap and order-independent
    (derive_seed(seed, &[0x7417, index]) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Independent thinning from the pattern's sampling intensity down to
/// `lambda_target`, with retention marks keyed by point index: for a fixed
/// seed the retained sets are nested across targets.
pub fn thin_to<const D: usize>(
    pattern: &PointPattern<D>,
    lambda_target: f64,
    seed: u64,
) -> Result<PointPattern<D>> {
    let lambda_max = pattern.intensity;
    if !(0.0..=lambda_max).contains(&lambda_target) {
        return Err(Error::invalid(
            "lambda_target",
            format!("must be in [0, {lambda_max}], got {lambda_target}"),
        ));
    }
    let keep = if lambda_max == 0.0 {
        1.0
    } else {
        lambda_target / lambda_max
    };
    let points = pattern
        .points
        .iter()
        .enumerate()
        .filter(|(i, _)| retention_mark(seed, *i as u64) < keep)
        .map(|(_, p)| *p)
        .collect();
    Ok(PointPattern {
        points,
        window: pattern.window,
        intensity: lambda_target,
        seed: pattern.seed,
    })
}

/// Thin a Palm sample: the origin (point 0) is always retained.
pub fn thin_palm<const D: usize>(
    sample: &PalmSample<D>,
    lambda_target: f64,
    seed: u64,
) -> Result<PalmSample<D>> {
    let p = &sample.pattern;
    let lambda_max = p.intensity;
    if !(0.0..=lambda_max).contains(&lambda_target) {
        return Err(Error::invalid(
            "lambda_target",
            format!("must be in [0, {lambda_max}], got {lambda_target}"),
        ));
    }
    let keep = if lambda_max == 0.0 {
        1.0
    } else {
        lambda_target / lambda_max
    };
    let mut points = vec![p.points[0]];
    points.extend(
        p.points
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(i, _)| retention_mark(seed, *i as u64) < keep)
            .map(|(_, q)| *q),
    );
    Ok(PalmSample {
        pattern: PointPattern {
            points,
            window: p.window,
            intensity: lambda_target,
            seed: p.seed,
        },
        weight: sample.weight,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::MeasureFamily;

    fn constant(density: f64) -> MeasureSpec {
        MeasureSpec::unnormalized(MeasureFamily::ConstantLebesgue { density }).unwrap()
    }

    #[test]
    fn zero_intensity_poisson_is_empty() {
        let w = BoxWindow::<2>::centered(10.0).unwrap();
        assert!(sample_poisson(0.0, &w, 1).unwrap().is_empty());
    }

    #[test]
    fn poisson_moments() {
        let w = BoxWindow::<2>::centered(10.0).unwrap();
        let rho = 5.0;
        let reps = 2000;
        let counts: Vec<f64> = (0..reps)
            .map(|k| sample_poisson(rho, &w, derive_seed(9, &[k])).unwrap().len() as f64)
            .collect();
        let mean = counts.iter().sum::<f64>() / reps as f64;
        let var = counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (reps - 1) as f64;
        // mean 500, variance 500
        let se_mean = (500.0f64 / reps as f64).sqrt();
        assert!((mean - 500.0).abs() < 3.0 * se_mean, "mean {mean}");
        // variance of the sample variance for Poisson ~ 2 var^2 / n (plus 1/n terms)
        let se_var = (2.0 * 500.0f64 * 500.0 / reps as f64 + 500.0 / reps as f64).sqrt();
        assert!((var - 500.0).abs() < 4.0 * se_var, "var {var}");
    }

    #[test]
    fn poisson_count_chi_square_goodness_of_fit() {
        // chi-square test of the count distribution against Poisson(rho |Q|)
        let w = BoxWindow::<2>::centered(2.0).unwrap();
        let rho = 2.0; // mean count 8
        let mean = rho * w.volume();
        let reps = 4000usize;
        let mut counts = vec![0u64; 64];
        for k in 0..reps {
            let n = sample_poisson(rho, &w, derive_seed(123, &[k as u64])).unwrap().len();
            counts[n.min(63)] += 1;
        }
        // pool bins so every expected count is >= 5
        let pmf = |k: usize| -> f64 {
            let mut logp = -mean + (k as f64) * mean.ln();
            for j in 1..=k {
                logp -= (j as f64).ln();
            }
            logp.exp()
        };
        let mut chi2 = 0.0;
        let mut df: i64 = -1;
        let mut obs_pool = 0.0;
        let mut exp_pool = 0.0;
        for k in 0..64 {
            let p = if k < 63 {
                pmf(k)
            } else {
                1.0 - (0..63).map(pmf).sum::<f64>()
            };
            obs_pool += counts[k] as f64;
            exp_pool += p * reps as f64;
            if exp_pool >= 5.0 {
                chi2 += (obs_pool - exp_pool) * (obs_pool - exp_pool) / exp_pool;
                df += 1;
                obs_pool = 0.0;
                exp_pool = 0.0;
            }
        }
        if exp_pool > 0.0 {
            chi2 += (obs_pool - exp_pool) * (obs_pool - exp_pool) / exp_pool;
            df += 1;
        }
        // 1% critical value for the observed df via Wilson-Hilferty
        let dff = df as f64;
        let z = 2.326; // N(0,1) 99th percentile
        let crit = dff * (1.0 - 2.0 / (9.0 * dff) + z * (2.0 / (9.0 * dff)).sqrt()).powi(3);
        assert!(chi2 < crit, "chi2 {chi2} >= {crit} at df {df}");
    }

    #[test]
    fn cox_on_zero_measure_is_empty() {
        let w = BoxWindow::<2>::centered(4.0).unwrap();
        let real = sample_measure(&constant(0.0), &w, 1).unwrap();
        assert!(sample_cox(&real, 10.0, 2).unwrap().is_empty());
    }

    #[test]
    fn cox_segment_count_mean() {
        // single segment of length 3 at lambda 2: mean count 6
        use crate::geom::Segment;
        use crate::measures::realization::{Body, SegmentsBody};
        use crate::tessellations::system::SystemBuilder;
        let w = BoxWindow::<2>::centered(8.0).unwrap();
        let mut b = SystemBuilder::new(w);
        b.add_clipped(&Segment::new(Point2::xy(-1.5, 0.0), Point2::xy(1.5, 0.0)).unwrap());
        let real = MeasureRealization::<2> {
            window: w,
            seed: 0,
            margin: 0.0,
            body: Body::Segments(SegmentsBody {
                system: b.finish(),
                length_density: 1.0,
                seeds: None,
            }),
        };
        let reps = 3000;
        let total: u64 = (0..reps)
            .map(|k| sample_cox(&real, 2.0, derive_seed(5, &[k])).unwrap().len() as u64)
            .sum();
        let mean = total as f64 / reps as f64;
        let se = (6.0f64 / reps as f64).sqrt();
        assert!((mean - 6.0).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn conditional_uniformity_on_segment() {
        // given the count, positions on a segment are iid uniform:
        // Kolmogorov-Smirnov on pooled normalized positions at 1%
        use crate::geom::Segment;
        use crate::measures::realization::{Body, SegmentsBody};
        use crate::tessellations::system::SystemBuilder;
        let w = BoxWindow::<2>::centered(8.0).unwrap();
        let mut b = SystemBuilder::new(w);
        b.add_clipped(&Segment::new(Point2::xy(-2.0, 0.0), Point2::xy(2.0, 0.0)).unwrap());
        let real = MeasureRealization::<2> {
            window: w,
            seed: 0,
            margin: 0.0,
            body: Body::Segments(SegmentsBody {
                system: b.finish(),
                length_density: 1.0,
                seeds: None,
            }),
        };
        let mut xs: Vec<f64> = Vec::new();
        for k in 0..400 {
            let pat = sample_cox(&real, 3.0, derive_seed(21, &[k])).unwrap();
            xs.extend(pat.points.iter().map(|p| (p.0[0] + 2.0) / 4.0));
        }
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = xs.len() as f64;
        let mut d: f64 = 0.0;
        for (i, x) in xs.iter().enumerate() {
            let lo = i as f64 / n;
            let hi = (i as f64 + 1.0) / n;
            d = d.max((x - lo).abs()).max((hi - x).abs());
        }
        let crit = 1.628 / n.sqrt(); // asymptotic 1% KS critical value
        assert!(d < crit, "KS statistic {d} >= {crit}");
    }

    #[test]
    fn palm_on_constant_is_poisson_plus_origin() {
        let w = BoxWindow::<2>::centered(6.0).unwrap();
        let spec = constant(1.0);
        let reps = 2000;
        let mut total = 0u64;
        for k in 0..reps {
            let s = sample_cox_palm(&spec, 2.0, &w, derive_seed(31, &[k])).unwrap();
            assert_eq!(s.pattern.points[0], Point2::origin());
            assert!((s.weight - 1.0).abs() < 1e-9);
            total += (s.pattern.len() - 1) as u64;
        }
        // mean count = lambda |W| = 72
        let mean = total as f64 / reps as f64;
        let expect = 2.0 * w.volume();
        let se = (expect / reps as f64).sqrt();
        assert!((mean - expect).abs() < 3.0 * se, "mean {mean} vs {expect}");
    }

    #[test]
    fn palm_at_lambda_zero_is_only_origin() {
        let w = BoxWindow::<2>::centered(4.0).unwrap();
        let s = sample_cox_palm(&constant(1.0), 0.0, &w, 3).unwrap();
        assert_eq!(s.pattern.len(), 1);
    }

    #[test]
    fn thinning_identity_empty_and_nested() {
        let w = BoxWindow::<2>::centered(6.0).unwrap();
        let pat = sample_poisson(4.0, &w, 77).unwrap();
        let same = thin_to(&pat, 4.0, 5).unwrap();
        assert_eq!(same.len(), pat.len());
        let none = thin_to(&pat, 0.0, 5).unwrap();
        assert!(none.is_empty());
        assert!(thin_to(&pat, 5.0, 5).is_err());

        for k in 0..50 {
            let pat = sample_poisson(4.0, &w, derive_seed(91, &[k])).unwrap();
            let a = thin_to(&pat, 1.0, k).unwrap();
            let b = thin_to(&pat, 2.5, k).unwrap();
            let bset: std::collections::HashSet<_> = b
                .points
                .iter()
                .map(|p| (p.0[0].to_bits(), p.0[1].to_bits()))
                .collect();
            for p in &a.points {
                assert!(bset.contains(&(p.0[0].to_bits(), p.0[1].to_bits())));
            }
        }
    }

    #[test]
    fn cox_is_deterministic_given_seed() {
        let w = BoxWindow::<2>::centered(5.0).unwrap();
        let spec = MeasureSpec::unnormalized(MeasureFamily::VoronoiEdges { seed_intensity: 20.0 }).unwrap();
        let real = sample_measure(&spec, &w, 13).unwrap();
        let a = sample_cox(&real, 3.0, 99).unwrap();
        let b = sample_cox(&real, 3.0, 99).unwrap();
        assert_eq!(a.points.len(), b.points.len());
        for (p, q) in a.points.iter().zip(b.points.iter()) {
            assert_eq!(p, q);
        }
    }
}
