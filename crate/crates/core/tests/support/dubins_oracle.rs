//! Geometric brute-force shortest Dubins length.
//!
//! Scans the first arc angle on a grid. For CSC words it solves for the tangent
//! line to the final circle, for CCC words for a middle circle touching both end
//! circles, refining every sign change by bisection.

use std::f64::consts::TAU;

use mdi_core::OrientedPoint;

const GRID: usize = 4000;

fn normal(theta: f64) -> (f64, f64) {
    (-theta.sin(), theta.cos())
}

fn center(p: &OrientedPoint<f64>, s: f64, r: f64) -> (f64, f64) {
    let n = normal(p.theta);
    (p.x + s * r * n.0, p.y + s * r * n.1)
}

fn wrap_positive(a: f64) -> f64 {
    let v = a.rem_euclid(TAU);
    if TAU - v < 1e-12 {
        0.0
    } else {
        v
    }
}

/// Pose after turning `alpha` radians on the circle with direction `s`.
fn after_arc(p: &OrientedPoint<f64>, s: f64, r: f64, alpha: f64) -> (f64, f64, f64) {
    let c = center(p, s, r);
    let theta = p.theta + s * alpha;
    let n = normal(theta);
    (c.0 - s * r * n.0, c.1 - s * r * n.1, theta)
}

fn roots(f: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut prev = f(0.0);
    for k in 1..=GRID {
        let (lo, hi) = (TAU * (k - 1) as f64 / GRID as f64, TAU * k as f64 / GRID as f64);
        let cur = f(hi);
        if prev.abs() < 1e-12 {
            out.push(lo);
        } else if prev * cur < 0.0 {
            let (mut a, mut b, mut fa) = (lo, hi, prev);
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                let fm = f(m);
                if fa * fm <= 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            out.push(0.5 * (a + b));
        }
        prev = cur;
    }
    out
}

pub fn oracle(p: OrientedPoint<f64>, q: OrientedPoint<f64>, a: f64) -> f64 {
    let r = 1.0 / a;
    let mut best = f64::INFINITY;
    for s1 in [1.0, -1.0] {
        for s3 in [1.0, -1.0] {
            let c3 = center(&q, s3, r);
            let gap = |alpha: f64| {
                let (x, y, th) = after_arc(&p, s1, r, alpha);
                let n = normal(th);
                let touch = (c3.0 - s3 * r * n.0 - x, c3.1 - s3 * r * n.1 - y);
                (touch.0 * n.0 + touch.1 * n.1, touch.0 * th.cos() + touch.1 * th.sin(), th)
            };
            for alpha in roots(|al| gap(al).0) {
                let (_, straight, th) = gap(alpha);
                if straight < -1e-9 {
                    continue;
                }
                let beta = wrap_positive(s3 * (q.theta - th));
                best = best.min(r * (alpha + beta) + straight.max(0.0));
            }
        }
        let c3 = center(&q, s1, r);
        let mid = |alpha: f64| {
            let (x, y, th) = after_arc(&p, s1, r, alpha);
            let n = normal(th);
            let c2 = (x - s1 * r * n.0, y - s1 * r * n.1);
            ((c2.0 - c3.0).hypot(c2.1 - c3.1) - 2.0 * r, c2, th)
        };
        for alpha in roots(|al| mid(al).0) {
            let (_, c2, th) = mid(alpha);
            let t = (0.5 * (c2.0 + c3.0), 0.5 * (c2.1 + c3.1));
            // The middle circle turns with -s1, so c2 = t - s1 r n(theta_t).
            let nt = ((t.0 - c2.0) / (s1 * r), (t.1 - c2.1) / (s1 * r));
            let theta_t = (-nt.0).atan2(nt.1);
            let beta = wrap_positive(-s1 * (theta_t - th));
            let gamma = wrap_positive(s1 * (q.theta - theta_t));
            best = best.min(r * (alpha + beta + gamma));
        }
    }
    best
}
