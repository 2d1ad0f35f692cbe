//! Minimal native SVG emission: estimate curves and realization snapshots.
//! Only lines, circles, polylines and text — no plotting dependency.

use std::fmt::Write;

use coxperc::cox::PointPattern;
use coxperc::experiments::GridPointResult;
use coxperc::measures::realization::{AcSources, Body, MeasureRealization};

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 56.0;

const SERIES_COLORS: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn header(out: &mut String) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    );
    let _ = writeln!(out, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
}

/// Percolation-probability curves: one polyline per label over `lambda`,
/// y in [0, 1], plus error bars of one standard error.
pub fn curves_svg(rows: &[GridPointResult]) -> String {
    let mut out = String::new();
    header(&mut out);
    let xs: Vec<f64> = rows.iter().map(|r| r.lambda).collect();
    let (xmin, xmax) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let span = (xmax - xmin).max(1e-9);
    let to_x = |l: f64| MARGIN + (l - xmin) / span * (W - 2.0 * MARGIN);
    let to_y = |t: f64| H - MARGIN - t.clamp(0.0, 1.0) * (H - 2.0 * MARGIN);

    // axes
    let _ = writeln!(
        out,
        "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>",
        MARGIN,
        H - MARGIN,
        W - MARGIN
    );
    let _ = writeln!(
        out,
        "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>",
        MARGIN,
        H - MARGIN,
        MARGIN
    );
    for tick in 0..=5 {
        let t = tick as f64 / 5.0;
        let y = to_y(t);
        let _ = writeln!(
            out,
            "<line x1=\"{0}\" y1=\"{y}\" x2=\"{1}\" y2=\"{y}\" stroke=\"#cccccc\"/>",
            MARGIN,
            W - MARGIN
        );
        let _ = writeln!(
            out,
            "<text x=\"{0}\" y=\"{1}\" font-size=\"11\" text-anchor=\"end\">{t:.1}</text>",
            MARGIN - 6.0,
            y + 4.0
        );
    }
    for tick in 0..=4 {
        let l = xmin + span * tick as f64 / 4.0;
        let x = to_x(l);
        let _ = writeln!(
            out,
            "<text x=\"{x}\" y=\"{0}\" font-size=\"11\" text-anchor=\"middle\">{l:.3}</text>",
            H - MARGIN + 16.0
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{0}\" y=\"{1}\" font-size=\"12\" text-anchor=\"middle\">intensity</text>",
        W / 2.0,
        H - 12.0
    );

    // series, in first-appearance order
    let mut labels: Vec<&str> = Vec::new();
    for row in rows {
        if !labels.contains(&row.label.as_str()) {
            labels.push(&row.label);
        }
    }
    for (si, label) in labels.iter().enumerate() {
        let color = SERIES_COLORS[si % SERIES_COLORS.len()];
        let mut series: Vec<&GridPointResult> =
            rows.iter().filter(|r| r.label == *label).collect();
        series.sort_by(|a, b| a.lambda.partial_cmp(&b.lambda).expect("finite lambda"));
        let pts: Vec<String> = series
            .iter()
            .map(|r| format!("{:.2},{:.2}", to_x(r.lambda), to_y(r.estimate.mean)))
            .collect();
        if pts.len() > 1 {
            let _ = writeln!(
                out,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                pts.join(" ")
            );
        }
        for r in &series {
            let (x, y) = (to_x(r.lambda), to_y(r.estimate.mean));
            let half = (to_y(r.estimate.mean - r.estimate.std_error) - to_y(r.estimate.mean + r.estimate.std_error)) / 2.0;
            let _ = writeln!(
                out,
                "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"{color}\"/>",
                y - half,
                y + half
            );
            let _ = writeln!(out, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"2.5\" fill=\"{color}\"/>");
        }
        let _ = writeln!(
            out,
            "<text x=\"{0}\" y=\"{1}\" font-size=\"12\" fill=\"{color}\">{label}</text>",
            W - MARGIN - 150.0,
            MARGIN + 16.0 * si as f64
        );
    }
    out.push_str("</svg>\n");
    out
}

/// One measure realization with a point pattern overlaid: segment systems as
/// lines, shot-noise kernels and Boolean grains as translucent disks.
pub fn snapshot_svg(real: &MeasureRealization<2>, pattern: &PointPattern<2>) -> String {
    let mut out = String::new();
    header(&mut out);
    let win = real.window;
    let lo = win.lo();
    let scale = (W.min(H) - 2.0 * MARGIN) / win.side;
    let to = |p: &coxperc::geom::Point2| {
        (
            MARGIN + (p.0[0] - lo[0]) * scale,
            H - MARGIN - (p.0[1] - lo[1]) * scale,
        )
    };
    let _ = writeln!(
        out,
        "<rect x=\"{MARGIN}\" y=\"{1}\" width=\"{0:.2}\" height=\"{0:.2}\" fill=\"none\" stroke=\"black\"/>",
        win.side * scale,
        H - MARGIN - win.side * scale,
    );
    match &real.body {
        Body::Segments(s) => {
            for e in &s.system.edges {
                let (x1, y1) = to(&e.seg.a);
                let (x2, y2) = to(&e.seg.b);
                let _ = writeln!(
                    out,
                    "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke=\"#888888\" stroke-width=\"0.7\"/>"
                );
            }
        }
        Body::Density { sources, .. } => match sources {
            AcSources::Constant { .. } => {}
            AcSources::ShotNoise {
                centers,
                kernel_radius,
                ..
            } => {
                for c in centers {
                    let (x, y) = to(c);
                    let _ = writeln!(
                        out,
                        "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{:.2}\" fill=\"#bbbbbb\" fill-opacity=\"0.45\"/>",
                        kernel_radius * scale
                    );
                }
            }
            AcSources::Boolean {
                grains,
                grain_radius,
                ..
            } => {
                for g in grains {
                    let (x, y) = to(g);
                    let _ = writeln!(
                        out,
                        "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{:.2}\" fill=\"#bbbbbb\" fill-opacity=\"0.45\"/>",
                        grain_radius * scale
                    );
                }
            }
        },
    }
    for p in &pattern.points {
        if win.contains(p) {
            let (x, y) = to(p);
            let _ = writeln!(out, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"1.8\" fill=\"#1f2d8a\"/>");
        }
    }
    out.push_str("</svg>\n");
    out
}
