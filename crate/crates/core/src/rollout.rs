//! Forward propagation of a curve from its subarc matrix.
//!
//! Two independent evaluations live here: sequential propagation of each
//! subarc (used for rollout and sampling) and the telescoped closed-form
//! stage closure equations (used as the program constraints). Tests cross
//! check one against the other.

use crate::model::{
    OrientedPoint, PathSample, ProblemSpec, SampledPath, StageHeading, StageHeadings, SubarcKind, SubarcMatrix, SLOTS, SLOT_KINDS,
};
use crate::scalar::{lit, Scalar};

/// Moves `p` along a subarc of the given kind and length with unit speed.
///
/// Circular arcs use the chord form `2 sin(a l / 2) / a` along the mean
/// heading, which is exact and stays accurate for very short arcs.
pub fn propagate_subarc<T: Scalar>(p: OrientedPoint<T>, kind: SubarcKind, length: T, a: T) -> OrientedPoint<T> {
    match kind {
        SubarcKind::S => OrientedPoint { x: p.x + length * p.theta.cos(), y: p.y + length * p.theta.sin(), theta: p.theta },
        SubarcKind::L | SubarcKind::R => {
            let u = kind.control(a);
            let half = a * length / lit(2.0);
            let chord = lit::<T>(2.0) * half.sin() / a;
            let mid = p.theta + u * length / lit(2.0);
            OrientedPoint { x: p.x + chord * mid.cos(), y: p.y + chord * mid.sin(), theta: p.theta + u * length }
        }
    }
}

/// Heading recurrence of one stage.
pub fn stage_headings<T: Scalar>(theta0: T, row: &[T; SLOTS], a: T) -> StageHeading<T> {
    let theta1 = theta0 + a * row[0];
    let theta2 = theta1 - a * row[1];
    let theta4 = theta2 + a * row[3];
    let theta5 = theta4 - a * row[4];
    StageHeading { theta0, theta1, theta2, theta4, theta5 }
}

/// Headings of every stage, chained from the start heading.
pub fn all_headings<T: Scalar>(theta_start: T, xi: &SubarcMatrix<T>, a: T) -> StageHeadings<T> {
    let mut theta = theta_start;
    let mut stages = Vec::with_capacity(xi.stages());
    for row in xi.rows() {
        let h = stage_headings(theta, row, a);
        theta = h.theta5;
        stages.push(h);
    }
    StageHeadings { stages }
}

/// Propagates one stage through its five slots from `p`.
pub fn propagate_stage<T: Scalar>(p: OrientedPoint<T>, row: &[T; SLOTS], a: T) -> OrientedPoint<T> {
    let mut q = p;
    for (slot, kind) in SLOT_KINDS.iter().enumerate() {
        if row[slot] > T::zero() {
            q = propagate_subarc(q, *kind, row[slot], a);
        }
    }
    q
}

/// Propagates the start state through all `5N` subarcs.
///
/// Returns the state reached at the end of every stage together with the
/// stage headings from the recurrence. Each stage end heading is overwritten
/// with the recurrence value so headings agree bitwise across both outputs.
pub fn rollout_path<T: Scalar>(spec: &ProblemSpec<T>, xi: &SubarcMatrix<T>) -> (Vec<OrientedPoint<T>>, StageHeadings<T>) {
    let a = spec.curvature_bound;
    let headings = all_headings(spec.start.theta, xi, a);
    let mut ends = Vec::with_capacity(xi.stages());
    let mut p = spec.start;
    for (row, h) in xi.rows().iter().zip(&headings.stages) {
        p = propagate_stage(p, row, a);
        p.theta = h.theta5;
        ends.push(p);
    }
    (ends, headings)
}

/// Residuals of the `2N + 2` equality constraints.
#[derive(Clone, Debug, PartialEq)]
pub struct StageResidual<T> {
    /// Per stage `(rx, ry)`: the stage end, started from the prescribed
    /// previous node, minus the prescribed node.
    pub stages: Vec<(T, T)>,
    pub r_sin: T,
    pub r_cos: T,
}

impl<T: Scalar> StageResidual<T> {
    /// Flattened as `rx_1, ry_1, ..., rx_N, ry_N, r_sin, r_cos`.
    pub fn as_vec(&self) -> Vec<T> {
        let mut v = Vec::with_capacity(2 * self.stages.len() + 2);
        for (rx, ry) in &self.stages {
            v.push(*rx);
            v.push(*ry);
        }
        v.push(self.r_sin);
        v.push(self.r_cos);
        v
    }

    pub fn max_abs(&self) -> T {
        self.as_vec().into_iter().fold(T::zero(), |m, r| m.max(r.abs()))
    }

    pub fn max_position(&self) -> T {
        self.stages.iter().fold(T::zero(), |m, (rx, ry)| m.max(rx.abs()).max(ry.abs()))
    }
}

/// Closed-form closure residual of one stage starting at the prescribed node `i - 1`.
pub fn stage_closure<T: Scalar>(spec: &ProblemSpec<T>, stage: usize, h: &StageHeading<T>, straight: T) -> (T, T) {
    let a = spec.curvature_bound;
    let p0 = spec.node(stage);
    let p1 = spec.node(stage + 1);
    let two = lit::<T>(2.0);
    let sx = -h.theta0.sin() + two * h.theta1.sin() - two * h.theta2.sin() + two * h.theta4.sin() - h.theta5.sin();
    let cx = h.theta0.cos() - two * h.theta1.cos() + two * h.theta2.cos() - two * h.theta4.cos() + h.theta5.cos();
    let rx = p0.x - p1.x + sx / a + straight * h.theta2.cos();
    let ry = p0.y - p1.y + cx / a + straight * h.theta2.sin();
    (rx, ry)
}

/// Evaluates every equality constraint of the program.
pub fn residuals<T: Scalar>(spec: &ProblemSpec<T>, xi: &SubarcMatrix<T>) -> StageResidual<T> {
    let headings = all_headings(spec.start.theta, xi, spec.curvature_bound);
    residuals_with(spec, xi, &headings)
}

/// Same as [`residuals`] with headings already computed.
pub fn residuals_with<T: Scalar>(spec: &ProblemSpec<T>, xi: &SubarcMatrix<T>, headings: &StageHeadings<T>) -> StageResidual<T> {
    let stages = headings.stages.iter().enumerate().map(|(i, h)| stage_closure(spec, i, h, xi.get(i, 2))).collect();
    let theta = headings.final_heading();
    StageResidual { stages, r_sin: theta.sin() - spec.end.theta.sin(), r_cos: theta.cos() - spec.end.theta.cos() }
}

/// Samples the curve at arclength steps no larger than `ds`.
///
/// Every switching time is included. Zero-length slots are skipped so `t` is
/// strictly increasing. The `u` column at a sample is the control of the slot
/// that ends (or contains) it; the first row uses the first nonempty slot.
pub fn sample_path<T: Scalar>(spec: &ProblemSpec<T>, xi: &SubarcMatrix<T>, ds: T) -> SampledPath<T> {
    assert!(ds > T::zero(), "sampling step must be positive");
    let a = spec.curvature_bound;
    let headings = all_headings(spec.start.theta, xi, a);
    let first_u = xi
        .rows()
        .iter()
        .flat_map(|r| r.iter().zip(SLOT_KINDS))
        .find(|(v, _)| **v > T::zero())
        .map(|(_, k)| k.control(a))
        .unwrap_or_else(T::zero);
    let mut samples = vec![PathSample { t: T::zero(), x: spec.start.x, y: spec.start.y, theta: spec.start.theta, u: first_u }];
    let mut p = spec.start;
    let mut t = T::zero();
    for (row, h) in xi.rows().iter().zip(&headings.stages) {
        for (slot, kind) in SLOT_KINDS.iter().enumerate() {
            let len = row[slot];
            if len <= T::zero() {
                continue;
            }
            let u = kind.control(a);
            let steps = (len / ds).ceil().to_usize().unwrap_or(1).max(1);
            let step = len / lit(steps as f64);
            for k in 1..=steps {
                let s = if k == steps { len } else { step * lit(k as f64) };
                let q = propagate_subarc(p, *kind, s, a);
                samples.push(PathSample { t: t + s, x: q.x, y: q.y, theta: q.theta, u });
            }
            p = propagate_subarc(p, *kind, len, a);
            t = t + len;
        }
        p.theta = h.theta5;
        if let Some(last) = samples.last_mut() {
            last.theta = h.theta5;
        }
    }
    SampledPath { samples }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Waypoint;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn quarter_circles_and_line() {
        let p = propagate_subarc(OrientedPoint::new(0.0, 0.0, 0.0), SubarcKind::L, PI / 2.0, 1.0);
        assert!(close(p.x, 1.0, 1e-15) && close(p.y, 1.0, 1e-15) && close(p.theta, PI / 2.0, 1e-15));
        let p = propagate_subarc(OrientedPoint::new(0.0, 0.0, 0.0), SubarcKind::S, 2.0, 3.0);
        assert_eq!(p, OrientedPoint::new(2.0, 0.0, 0.0));
        let p = propagate_subarc(OrientedPoint::new(0.0, 0.0, PI / 2.0), SubarcKind::R, PI / 4.0, 2.0);
        assert!(close(p.x, 0.5, 1e-15) && close(p.y, 0.5, 1e-15) && close(p.theta, 0.0, 1e-15));
    }

    #[test]
    fn heading_recurrence() {
        let h = stage_headings(1.0, &[0.1, 0.2, 0.3, 0.4, 0.5], 2.0);
        assert!(close(h.theta1, 1.2, 1e-15));
        assert!(close(h.theta2, 0.8, 1e-15));
        assert!(close(h.theta4, 1.6, 1e-15));
        assert!(close(h.theta5, 0.6, 1e-15));
        let z = stage_headings(0.0, &[0.0; 5], 3.0);
        assert_eq!(z, StageHeading::default());
    }

    #[test]
    fn straight_line_residuals_exact() {
        let spec = ProblemSpec::new(OrientedPoint::new(0.0, 0.0, 0.0), OrientedPoint::new(3.0, 0.0, 0.0), vec![], 1.0);
        let xi = SubarcMatrix::new(vec![[0.0, 0.0, 3.0, 0.0, 0.0]]).unwrap();
        let r = residuals(&spec, &xi);
        assert!(r.as_vec().iter().all(|v| *v == 0.0), "{:?}", r);
        let (ends, _) = rollout_path(&spec, &xi);
        assert_eq!(ends[0], OrientedPoint::new(3.0, 0.0, 0.0));
    }

    #[test]
    fn zero_matrix_stays_at_start() {
        let spec = ProblemSpec::new(
            OrientedPoint::new(0.3, -0.2, 1.0),
            OrientedPoint::new(1.0, 1.0, 0.0),
            vec![Waypoint::new(0.5, 0.5)],
            2.0,
        );
        let (ends, _) = rollout_path(&spec, &SubarcMatrix::zeros(2));
        assert!(ends.iter().all(|e| *e == spec.start));
    }

    #[test]
    fn sampling_hits_breakpoints() {
        let spec = ProblemSpec::new(OrientedPoint::new(0.0, 0.0, 0.0), OrientedPoint::new(3.0, 0.0, 0.0), vec![], 1.0);
        let xi = SubarcMatrix::new(vec![[0.0, 0.0, 3.0, 0.0, 0.0]]).unwrap();
        let s = sample_path(&spec, &xi, 1.0);
        let ts: Vec<f64> = s.samples.iter().map(|p| p.t).collect();
        assert_eq!(ts, vec![0.0, 1.0, 2.0, 3.0]);
        assert!(s.samples.iter().all(|p| p.y == 0.0 && p.u == 0.0));

        let spec = ProblemSpec::new(OrientedPoint::new(0.0, 0.0, 0.0), OrientedPoint::new(0.0, 2.0, PI), vec![], 1.0);
        let xi = SubarcMatrix::new(vec![[PI, 0.0, 0.0, 0.0, 0.0]]).unwrap();
        let s = sample_path(&spec, &xi, PI / 2.0);
        assert_eq!(s.samples.len(), 3);
        let mid = s.samples[1];
        assert!(close(mid.x, 1.0, 1e-15) && close(mid.y, 1.0, 1e-15) && close(mid.theta, PI / 2.0, 1e-15));
        let end = s.samples[2];
        assert!(close(end.x, 0.0, 1e-15) && close(end.y, 2.0, 1e-15) && close(end.theta, PI, 1e-15));
        assert!(s.samples.iter().all(|p| p.u == 1.0));
    }

    fn kind_strategy() -> impl Strategy<Value = SubarcKind> {
        prop_oneof![Just(SubarcKind::L), Just(SubarcKind::R), Just(SubarcKind::S)]
    }

    proptest! {
        #[test]
        fn composition_law(
            x in -2.0..2.0f64, y in -2.0..2.0f64, th in -7.0..7.0f64,
            kind in kind_strategy(), s in 0.0..3.0f64, t in 0.0..3.0f64, a in 0.2..5.0f64,
        ) {
            let p = OrientedPoint::new(x, y, th);
            let once = propagate_subarc(p, kind, s + t, a);
            let twice = propagate_subarc(propagate_subarc(p, kind, s, a), kind, t, a);
            prop_assert!((once.x - twice.x).abs() < 1e-12);
            prop_assert!((once.y - twice.y).abs() < 1e-12);
            prop_assert!((once.theta - twice.theta).abs() < 1e-12);
        }

        #[test]
        fn closed_form_matches_propagation(
            th in -4.0..4.0f64, a in 0.5..4.0f64,
            row in prop::array::uniform5(0.0..1.5f64),
            px in -1.0..1.0f64, py in -1.0..1.0f64,
        ) {
            let spec = ProblemSpec::new(
                OrientedPoint::new(px, py, th),
                OrientedPoint::new(px + 1.0, py - 0.5, 0.0),
                vec![],
                a,
            );
            let xi = SubarcMatrix::new(vec![row]).unwrap();
            let (ends, _) = rollout_path(&spec, &xi);
            let r = residuals(&spec, &xi);
            prop_assert!((r.stages[0].0 - (ends[0].x - spec.end.x)).abs() < 1e-12);
            prop_assert!((r.stages[0].1 - (ends[0].y - spec.end.y)).abs() < 1e-12);
        }

        #[test]
        fn unit_speed_sampling(
            th in -4.0..4.0f64, a in 0.5..4.0f64,
            row in prop::array::uniform5(0.0..1.5f64), ds in 0.01..0.5f64,
        ) {
            let spec = ProblemSpec::new(OrientedPoint::new(0.0, 0.0, th), OrientedPoint::new(1.0, 0.0, 0.0), vec![], a);
            let xi = SubarcMatrix::new(vec![row]).unwrap();
            let s = sample_path(&spec, &xi, ds);
            for w in s.samples.windows(2) {
                let dt = w[1].t - w[0].t;
                prop_assert!(dt > 0.0 && dt <= ds * (1.0 + 1e-12));
                let d = (w[1].x - w[0].x).hypot(w[1].y - w[0].y);
                let expected = if w[1].u == 0.0 { dt } else { 2.0 * (a * dt / 2.0).sin() / a };
                prop_assert!((d - expected).abs() < 1e-10);
                prop_assert!(w[1].u.abs() == 0.0 || w[1].u.abs() == a);
            }
        }
    }
}
