//! Bernoulli bond percolation and the Poisson gap model on segment systems.
//!
//! The bond model keeps an edge of length `l` open with probability `b^l` and
//! clusters vertices along open edges. The gap model places Poisson points on
//! each edge and removes the edge when two successive points are more than
//! `r` apart; an edge additionally needs points within `r` of both endpoints
//! to conduct, so adjacent open edges connect through shared vertices. The
//! cluster root is the vertex nearest the origin; its component percolates
//! when it reaches a vertex outside the centered box `Q_k`.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::geom::Point2;
use crate::percolation::union_find::UnionFind;
use crate::rng::substream;
use crate::stats::{proportion_estimate, EstimateWithCI};
use crate::tessellations::SegmentSystem;

fn cluster_reaches(
    sys: &SegmentSystem,
    open: &[bool],
    root_vertex: usize,
    k: f64,
) -> bool {
    let mut uf = UnionFind::new(sys.vertices.len());
    for (e, &is_open) in sys.edges.iter().zip(open.iter()) {
        if is_open {
            uf.union(e.a, e.b);
        }
    }
    let root = uf.find(root_vertex);
    let half = k / 2.0;
    sys.vertices
        .iter()
        .enumerate()
        .any(|(i, v)| v.sup_norm() >= half && uf.find(i) == root)
}

/// Estimate the probability that the component of the vertex nearest the
/// origin escapes `Q_k` when each edge of length `l` is kept independently
/// with probability `b^l`.
///
/// An empty system yields a zero estimate with `effective_weight_sum = 0` as
/// the degenerate-input flag.
pub fn bond_percolation_theta(
    sys: &SegmentSystem,
    b: f64,
    k: f64,
    replicates: u64,
    seed: u64,
) -> Result<EstimateWithCI> {
    if !(b > 0.0 && b <= 1.0) {
        return Err(Error::invalid("b", format!("must be in (0, 1], got {b}")));
    }
    if replicates == 0 {
        return Err(Error::invalid("replicates", "must be >= 1"));
    }
    if sys.is_empty() {
        return Ok(EstimateWithCI {
            mean: 0.0,
            std_error: 0.0,
            replicates,
            effective_weight_sum: 0.0,
            seed,
        });
    }
    let root_vertex = sys.nearest_vertex(&Point2::origin())?;
    let keep_prob: Vec<f64> = sys.edges.iter().map(|e| b.powf(e.seg.length)).collect();
    let mut open = vec![false; sys.edges.len()];
    let mut successes = 0u64;
    for rep in 0..replicates {
        let mut rng = substream(seed, &[0xb02d, rep]);
        for (o, p) in open.iter_mut().zip(keep_prob.iter()) {
            *o = rng.random_range(0.0..1.0) < *p;
        }
        if cluster_reaches(sys, &open, root_vertex, k) {
            successes += 1;
        }
    }
    proportion_estimate(successes, replicates, seed)
}

/// Replicate statistics of the gap model on one segment system.
#[derive(Debug, Clone)]
pub struct GapModelResult {
    /// Reach probability of the root component.
    pub theta: EstimateWithCI,
    /// Per-edge frequency of "no two successive points more than r apart"
    /// (the pure gap statistic, endpoint coverage not required).
    pub interior_survival: Vec<f64>,
    /// Per-edge frequency of the full conduction rule (gaps and endpoint
    /// coverage).
    pub keep_frequency: Vec<f64>,
}

/// Poisson gap model: points with linear intensity `lambda_len` per unit
/// length on each edge; see the module docs for the edge rules.
pub fn gap_model_theta(
    sys: &SegmentSystem,
    lambda_len: f64,
    r: f64,
    k: f64,
    replicates: u64,
    seed: u64,
) -> Result<GapModelResult> {
    if !(lambda_len.is_finite() && lambda_len > 0.0) {
        return Err(Error::invalid("lambda", format!("must be > 0, got {lambda_len}")));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::invalid("r", format!("must be > 0, got {r}")));
    }
    if replicates == 0 {
        return Err(Error::invalid("replicates", "must be >= 1"));
    }
    if sys.is_empty() {
        return Ok(GapModelResult {
            theta: EstimateWithCI {
                mean: 0.0,
                std_error: 0.0,
                replicates,
                effective_weight_sum: 0.0,
                seed,
            },
            interior_survival: Vec::new(),
            keep_frequency: Vec::new(),
        });
    }
    let root_vertex = sys.nearest_vertex(&Point2::origin())?;
    let n_edges = sys.edges.len();
    let mut interior_counts = vec![0u64; n_edges];
    let mut keep_counts = vec![0u64; n_edges];
    let mut open = vec![false; n_edges];
    let mut successes = 0u64;
    let mut positions: Vec<f64> = Vec::new();

    for rep in 0..replicates {
        for (i, e) in sys.edges.iter().enumerate() {
            let len = e.seg.length;
            let mut rng = substream(seed, &[0x9a9, rep, i as u64]);
            let mean = lambda_len * len;
            let n = if mean > 0.0 {
                Poisson::new(mean).expect("positive mean").sample(&mut rng) as u64
            } else {
                0
            };
            positions.clear();
            positions.extend((0..n).map(|_| rng.random_range(0.0..len)));
            positions.sort_by(|a, b| a.partial_cmp(b).expect("finite positions"));

            let mut interior_ok = true;
            for w in positions.windows(2) {
                if w[1] - w[0] > r {
                    interior_ok = false;
                    break;
                }
            }
            let endpoints_ok = positions.first().is_some_and(|&first| first <= r)
                && positions.last().is_some_and(|&last| len - last <= r);
            if interior_ok {
                interior_counts[i] += 1;
            }
            let keep = interior_ok && endpoints_ok;
            if keep {
                keep_counts[i] += 1;
            }
            open[i] = keep;
        }
        if cluster_reaches(sys, &open, root_vertex, k) {
            successes += 1;
        }
    }

    let norm = replicates as f64;
    Ok(GapModelResult {
        theta: proportion_estimate(successes, replicates, seed)?,
        interior_survival: interior_counts.iter().map(|&c| c as f64 / norm).collect(),
        keep_frequency: keep_counts.iter().map(|&c| c as f64 / norm).collect(),
    })
}

/// The bracketing interval for the gap-survival probability of an edge of
/// length `len` at linear intensity `lambda`: both ends are powers of
/// `1 - exp(-lambda r)`, with exponents `lambda len ± lambda^{3/4}`.
pub fn gap_survival_bracket(lambda: f64, r: f64, len: f64) -> (f64, f64) {
    let base = 1.0 - (-lambda * r).exp();
    let lo = base.powf(lambda * len + lambda.powf(0.75));
    let hi = base.powf((lambda * len - lambda.powf(0.75)).max(0.0)).min(1.0);
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{BoxWindow, Segment};
    use crate::tessellations::system::SystemBuilder;

    /// A plus-shaped spanning system through the origin in Q_6.
    fn cross_system() -> SegmentSystem {
        let w = BoxWindow::centered(6.0).unwrap();
        let mut b = SystemBuilder::new(w);
        b.add_clipped(&Segment::new(Point2::xy(-3.0, 0.0), Point2::xy(3.0, 0.0)).unwrap());
        b.add_clipped(&Segment::new(Point2::xy(0.0, -3.0), Point2::xy(0.0, 3.0)).unwrap());
        b.finish().split_at_intersections()
    }

    #[test]
    fn all_edges_open_reaches_with_certainty() {
        let sys = cross_system();
        let est = bond_percolation_theta(&sys, 1.0, 4.0, 200, 1).unwrap();
        assert_eq!(est.mean, 1.0);
    }

    #[test]
    fn tiny_b_never_reaches() {
        let sys = cross_system();
        let est = bond_percolation_theta(&sys, 1e-9, 4.0, 200, 1).unwrap();
        assert_eq!(est.mean, 0.0);
    }

    #[test]
    fn empty_system_is_flagged_zero() {
        let sys = SegmentSystem::empty(BoxWindow::centered(4.0).unwrap());
        let est = bond_percolation_theta(&sys, 0.5, 2.0, 10, 1).unwrap();
        assert_eq!(est.mean, 0.0);
        assert_eq!(est.effective_weight_sum, 0.0);
    }

    #[test]
    fn invalid_b_rejected() {
        let sys = cross_system();
        assert!(bond_percolation_theta(&sys, 0.0, 4.0, 10, 1).is_err());
        assert!(bond_percolation_theta(&sys, 1.5, 4.0, 10, 1).is_err());
    }

    #[test]
    fn single_edge_open_frequency_matches_b_pow_len() {
        // root at the origin; escape requires the far endpoint, so the reach
        // probability equals the open probability b^len of the single edge
        let w = BoxWindow::centered(4.0).unwrap();
        let mut bld = SystemBuilder::new(w);
        bld.add_clipped(&Segment::new(Point2::origin(), Point2::xy(1.5, 0.0)).unwrap());
        let sys = bld.finish();
        let b = 0.6f64;
        let reps = 4000;
        let est = bond_percolation_theta(&sys, b, 2.0, reps, 3).unwrap();
        let expect = b.powf(1.5);
        assert!(
            (est.mean - expect).abs() < 3.0 * est.std_error,
            "open freq {} vs {}",
            est.mean,
            expect
        );
    }

    #[test]
    fn dense_gap_model_keeps_edges() {
        let sys = cross_system();
        let res = gap_model_theta(&sys, 200.0, 0.2, 4.0, 100, 5).unwrap();
        assert!(res.theta.mean > 0.99);
        for f in res.keep_frequency {
            assert!(f > 0.95);
        }
    }

    #[test]
    fn sparse_gap_model_blocks_edges() {
        let sys = cross_system();
        let res = gap_model_theta(&sys, 0.2, 0.1, 4.0, 200, 6).unwrap();
        assert!(res.theta.mean < 0.05);
    }

    #[test]
    fn gap_survival_respects_bracket_on_fixed_edge() {
        // single edge, matched coupling lambda e^{-lambda r} = c
        let w = BoxWindow::centered(4.0).unwrap();
        let mut bld = SystemBuilder::new(w);
        bld.add_clipped(&Segment::new(Point2::xy(-1.0, 0.0), Point2::xy(1.0, 0.0)).unwrap());
        let sys = bld.finish();
        let lambda = 60.0f64;
        let c = 0.25f64;
        let r = (lambda / c).ln() / lambda;
        let reps = 3000;
        let res = gap_model_theta(&sys, lambda, r, 1.8, reps, 9).unwrap();
        let (lo, hi) = gap_survival_bracket(lambda, r, 2.0);
        let f = res.interior_survival[0];
        let se = (f * (1.0 - f) / reps as f64).sqrt().max(1.0 / reps as f64);
        assert!(
            f >= lo - 3.0 * se && f <= hi + 3.0 * se,
            "survival {f} outside bracket [{lo}, {hi}] +- {se}"
        );
    }
}
