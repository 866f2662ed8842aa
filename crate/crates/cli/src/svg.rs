//! SVG rendering of a solution: exact arcs and segments colored by kind,
//! node markers and heading arrows at both ends.

use std::fmt::Write;

use mdi_core::model::SLOT_KINDS;
use mdi_core::rollout::propagate_subarc;
use mdi_core::{sample_path, OrientedPoint, PathSolution, SubarcKind};

fn color(kind: SubarcKind) -> &'static str {
    match kind {
        SubarcKind::L => "#1f77b4",
        SubarcKind::R => "#d62728",
        SubarcKind::S => "#2ca02c",
    }
}

fn num(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

/// Renders `solution` into an SVG document `width` pixels wide. The y axis points up.
pub fn render_svg(solution: &PathSolution<f64>, width: u32) -> String {
    let spec = &solution.problem;
    let a = spec.curvature_bound;
    let total = solution.total_length();
    let dense = sample_path(spec, &solution.xi, (total / 4000.0).max(1e-9));
    let mut xs: Vec<f64> = dense.samples.iter().map(|s| s.x).collect();
    let mut ys: Vec<f64> = dense.samples.iter().map(|s| s.y).collect();
    for n in spec.nodes() {
        xs.push(n.x);
        ys.push(n.y);
    }
    let fold = |v: &[f64], f: fn(f64, f64) -> f64, init: f64| v.iter().copied().fold(init, f);
    let (min_x, max_x) = (fold(&xs, f64::min, f64::INFINITY), fold(&xs, f64::max, f64::NEG_INFINITY));
    let (min_y, max_y) = (fold(&ys, f64::min, f64::INFINITY), fold(&ys, f64::max, f64::NEG_INFINITY));
    let span = (max_x - min_x).max(max_y - min_y).max(1e-9);
    let margin = 0.05 * span;
    let (vx, vw) = (min_x - margin, (max_x - min_x) + 2.0 * margin);
    // Screen coordinates flip y.
    let (vy, vh) = (-max_y - margin, (max_y - min_y) + 2.0 * margin);
    let height = ((width as f64) * vh / vw).round().max(1.0) as u32;
    let stroke = 0.004 * span;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="{} {} {} {}">"#,
        num(vx),
        num(vy),
        num(vw),
        num(vh)
    );
    let _ = writeln!(out, "<title>{} length {:.12}</title>", solution.word, total);
    let _ = writeln!(out, r#"<g id="curve" fill="none" stroke-width="{}" stroke-linecap="round">"#, num(stroke));
    let mut pose = spec.start;
    for row in solution.xi.rows() {
        for (len, kind) in row.iter().zip(SLOT_KINDS) {
            if *len <= 0.0 {
                continue;
            }
            let next = propagate_subarc(pose, kind, *len, a);
            let (x1, y1, x2, y2) = (num(pose.x), num(-pose.y), num(next.x), num(-next.y));
            match kind {
                SubarcKind::S => {
                    let _ =
                        writeln!(out, r#"<line class="S" x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="{}"/>"#, color(kind));
                }
                _ => {
                    let r = 1.0 / a;
                    let large = u8::from(a * len > std::f64::consts::PI);
                    // Left turns are counter-clockwise, which is the negative sweep once y is flipped.
                    let sweep = u8::from(kind == SubarcKind::R);
                    let _ = writeln!(
                        out,
                        r#"<path class="{}" d="M {x1} {y1} A {} {} 0 {large} {sweep} {x2} {y2}" stroke="{}"/>"#,
                        kind.letter(),
                        num(r),
                        num(r),
                        color(kind)
                    );
                }
            }
            pose = next;
        }
    }
    out.push_str("</g>\n");

    let marker = 0.012 * span;
    out.push_str("<g id=\"nodes\" fill=\"#000\">\n");
    for n in spec.nodes() {
        let _ = writeln!(out, r#"<circle cx="{}" cy="{}" r="{}"/>"#, num(n.x), num(-n.y), num(marker));
    }
    out.push_str("</g>\n");

    let arrow = 0.08 * span;
    let _ = writeln!(out, r##"<g id="headings" fill="none" stroke="#555" stroke-width="{}">"##, num(0.6 * stroke));
    for p in [spec.start, spec.end] {
        let _ = writeln!(out, r#"<path d="{}"/>"#, arrow_path(p, arrow));
    }
    out.push_str("</g>\n</svg>\n");
    out
}

fn arrow_path(p: OrientedPoint<f64>, len: f64) -> String {
    let tip = (p.x + len * p.theta.cos(), p.y + len * p.theta.sin());
    let head = 0.3 * len;
    let wing = |da: f64| {
        let ang = p.theta + std::f64::consts::PI + da;
        (tip.0 + head * ang.cos(), tip.1 + head * ang.sin())
    };
    let (l, r) = (wing(0.45), wing(-0.45));
    format!(
        "M {} {} L {} {} M {} {} L {} {} L {} {}",
        num(p.x),
        num(-p.y),
        num(tip.0),
        num(-tip.1),
        num(l.0),
        num(-l.1),
        num(tip.0),
        num(-tip.1),
        num(r.0),
        num(-r.1)
    )
}
