//! Scratch pilot runs for choosing experiment parameters. Not part of the
//! library surface.

use coxperc::experiments::*;
use coxperc::measures::{calibrate_raw_intensity, MeasureFamily, MeasureSpec};

fn spec_target(family: MeasureFamily, target: f64) -> MeasureSpec {
    let raw = match family.exact_raw_intensity(2) {
        Some(r) => r,
        None => calibrate_raw_intensity(&family, 600, 7).unwrap().raw_intensity,
    };
    MeasureSpec::normalized_to(family, target, raw).unwrap()
}

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "rho".into());
    match which.as_str() {
        "rho" => {
            let k: f64 = std::env::args()
                .nth(2)
                .and_then(|s| s.parse().ok())
                .unwrap_or(8.0);
            for rho in [1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.8, 2.0] {
                let est = estimate_theta_poisson::<2>(rho, k, 3000, 11).unwrap();
                println!("K={k} rho={rho}: theta={:.4} (se {:.4})", est.mean, est.std_error);
            }
        }
        "larger" => {
            let rho: f64 = std::env::args()
                .nth(2)
                .and_then(|s| s.parse().ok())
                .unwrap_or(2.2);
            let reps = 2000;
            let reference = estimate_theta_poisson::<2>(rho, 16.0, 8000, 11).unwrap();
            println!("poisson ref: {:.4} (se {:.4})", reference.mean, reference.std_error);
            for (name, family) in [
                ("voronoi", MeasureFamily::VoronoiEdges { seed_intensity: 4.0 }),
                ("delaunay", MeasureFamily::DelaunayEdges { seed_intensity: 4.0 }),
                ("lines", MeasureFamily::PoissonLines { line_intensity: 2.0 }),
            ] {
                let spec = spec_target(family, 1.0);
                for r in [1.0, 2.0, 4.0] {
                    let t = std::time::Instant::now();
                    let est =
                        estimate_theta::<2>(&spec, rho / (r * r), r, 16.0 * r, reps, 13).unwrap();
                    println!(
                        "{name} r={r}: theta={:.4} (se {:.4}) gap={:+.4} [{:.1}s]",
                        est.mean,
                        est.std_error,
                        est.mean - reference.mean,
                        t.elapsed().as_secs_f64()
                    );
                }
            }
        }
        "singular" => {
            let c: f64 = std::env::args()
                .nth(2)
                .and_then(|s| s.parse().ok())
                .unwrap_or(0.2);
            let spec = spec_target(MeasureFamily::VoronoiEdges { seed_intensity: 0.25 }, 1.0);
            println!("normalization = {}", spec.normalization);
            let k = 8.0;
            let reps = 800;
            let bond = bond_theta_annealed(&spec, (-c).exp(), k, 2000, 17).unwrap();
            println!("bond(e^-{c}): {:.4} (se {:.4})", bond.mean, bond.std_error);
            for lam in [25.0, 50.0, 100.0, 200.0] {
                let mu = lam * spec.normalization;
                let r = gap_radius(mu, c).unwrap();
                let t = std::time::Instant::now();
                let gap = gap_theta_annealed(&spec, mu, r, k, 2000, 19).unwrap();
                let cox = estimate_theta::<2>(&spec, lam, r, k, reps, 23).unwrap();
                println!(
                    "lambda={lam} mu={mu:.2} r={r:.4}: cox={:.4} (se {:.4}) gapmodel={:.4} diff-to-bond={:+.4} [{:.1}s]",
                    cox.mean,
                    cox.std_error,
                    gap.mean,
                    cox.mean - bond.mean,
                    t.elapsed().as_secs_f64()
                );
            }
        }
        "fig" => {
            let r: f64 = std::env::args()
                .nth(2)
                .and_then(|s| s.parse().ok())
                .unwrap_or(0.475);
            let grid: Vec<f64> = std::env::args()
                .nth(3)
                .map(|s| s.split(',').map(|x| x.parse().unwrap()).collect())
                .unwrap_or_else(|| vec![0.1, 0.2, 0.3, 0.4, 0.6, 0.8]);
            let k = 5.0;
            let reps = 400;
            for (name, family) in [
                ("voronoi", MeasureFamily::VoronoiEdges { seed_intensity: 100.0 }),
                ("delaunay", MeasureFamily::DelaunayEdges { seed_intensity: 34.6 }),
            ] {
                let spec = spec_target(family, 20.0);
                let t = std::time::Instant::now();
                let ests = estimate_theta_grid::<2>(&spec, &grid, r, k, reps, 31).unwrap();
                print!("{name} r={r}: ");
                for (lam, est) in grid.iter().zip(&ests) {
                    print!("{lam}:{:.3} ", est.mean);
                }
                println!("[{:.1}s]", t.elapsed().as_secs_f64());
            }
        }
        other => eprintln!("unknown pilot `{other}`"),
    }
}
