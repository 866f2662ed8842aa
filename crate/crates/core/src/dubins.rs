//! Closed-form shortest bounded-curvature path between two oriented points,
//! and the seeding of multi-stage problems from per-stage solutions.

use std::fmt;

use crate::error::DubinsError;
use crate::model::{OrientedPoint, ProblemSpec, SubarcKind, SubarcMatrix, SLOTS, SLOT_KINDS};
use crate::scalar::{lit, Scalar};

/// The six candidate words.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DubinsFamily {
    LSL,
    RSR,
    LSR,
    RSL,
    RLR,
    LRL,
}

impl DubinsFamily {
    pub const ALL: [DubinsFamily; 6] =
        [DubinsFamily::LSL, DubinsFamily::RSR, DubinsFamily::LSR, DubinsFamily::RSL, DubinsFamily::RLR, DubinsFamily::LRL];

    pub fn name(self) -> &'static str {
        match self {
            DubinsFamily::LSL => "LSL",
            DubinsFamily::RSR => "RSR",
            DubinsFamily::LSR => "LSR",
            DubinsFamily::RSL => "RSL",
            DubinsFamily::RLR => "RLR",
            DubinsFamily::LRL => "LRL",
        }
    }

    pub fn kinds(self) -> [SubarcKind; 3] {
        let mut out = [SubarcKind::S; 3];
        for (o, c) in out.iter_mut().zip(self.name().chars()) {
            *o = SubarcKind::from_letter(c).expect("family letters are valid");
        }
        out
    }

    pub fn is_ccc(self) -> bool {
        matches!(self, DubinsFamily::RLR | DubinsFamily::LRL)
    }
}

impl fmt::Display for DubinsFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One feasible family with its three segment lengths (arclength, not angle).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DubinsCandidate<T> {
    pub family: DubinsFamily,
    pub segment_lengths: [T; 3],
    pub total: T,
}

impl<T: Scalar> DubinsCandidate<T> {
    fn new(family: DubinsFamily, segment_lengths: [T; 3]) -> Self {
        let total = segment_lengths[0] + segment_lengths[1] + segment_lengths[2];
        Self { family, segment_lengths, total }
    }

    /// Propagates `p` along the candidate.
    pub fn endpoint(&self, p: OrientedPoint<T>, a: T) -> OrientedPoint<T> {
        self.family.kinds().iter().zip(self.segment_lengths).fold(p, |q, (k, l)| crate::rollout::propagate_subarc(q, *k, l, a))
    }

    /// Places the segments into the `L,R,S,L,R` slots.
    pub fn embed(&self) -> Result<[T; SLOTS], DubinsError> {
        embed_word(&self.family.kinds(), &self.segment_lengths)
    }
}

/// Minimizer plus every feasible family that was evaluated.
#[derive(Clone, Debug, PartialEq)]
pub struct DubinsSolution<T> {
    pub best: DubinsCandidate<T>,
    pub candidates: Vec<DubinsCandidate<T>>,
}

/// Reduces an angle into `[0, 2pi)`, snapping values within rounding of `2pi` to zero.
pub fn mod2pi<T: Scalar>(angle: T) -> T {
    let two_pi = T::TAU();
    let mut r = angle - two_pi * (angle / two_pi).floor();
    if r >= two_pi || (two_pi - r) < lit(1e-14) {
        r = T::zero();
    }
    if r < T::zero() {
        r = T::zero();
    }
    r
}

/// Normalized (unit radius) segment parameters of one family, if feasible.
fn family_params<T: Scalar>(family: DubinsFamily, alpha: T, beta: T, d: T) -> Option<[T; 3]> {
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    let cab = (alpha - beta).cos();
    let two = lit::<T>(2.0);
    let tiny = lit::<T>(1e-12);
    let clamp_sq = |p2: T| -> Option<T> {
        if p2 < -tiny {
            None
        } else {
            Some(p2.max(T::zero()).sqrt())
        }
    };
    match family {
        DubinsFamily::LSL => {
            let tmp0 = d + sa - sb;
            let p = clamp_sq(two + d * d - two * cab + two * d * (sa - sb))?;
            if p < lit(1e-10) {
                return Some([mod2pi(beta - alpha), T::zero(), T::zero()]);
            }
            let tmp1 = (cb - ca).atan2(tmp0);
            Some([mod2pi(tmp1 - alpha), p, mod2pi(beta - tmp1)])
        }
        DubinsFamily::RSR => {
            let tmp0 = d - sa + sb;
            let p = clamp_sq(two + d * d - two * cab + two * d * (sb - sa))?;
            if p < lit(1e-10) {
                return Some([mod2pi(alpha - beta), T::zero(), T::zero()]);
            }
            let tmp1 = (ca - cb).atan2(tmp0);
            Some([mod2pi(alpha - tmp1), p, mod2pi(tmp1 - beta)])
        }
        DubinsFamily::LSR => {
            let p = clamp_sq(-two + d * d + two * cab + two * d * (sa + sb))?;
            let tmp2 = (-ca - cb).atan2(d + sa + sb) - (-two).atan2(p);
            Some([mod2pi(tmp2 - alpha), p, mod2pi(tmp2 - beta)])
        }
        DubinsFamily::RSL => {
            let p = clamp_sq(d * d - two + two * cab - two * d * (sa + sb))?;
            let tmp2 = (ca + cb).atan2(d - sa - sb) - two.atan2(p);
            Some([mod2pi(alpha - tmp2), p, mod2pi(beta - tmp2)])
        }
        DubinsFamily::RLR => {
            let tmp = (lit::<T>(6.0) - d * d + two * cab + two * d * (sa - sb)) / lit(8.0);
            if tmp.abs() > T::one() {
                return None;
            }
            let p = mod2pi(T::TAU() - tmp.acos());
            let t = mod2pi(alpha - (ca - cb).atan2(d - sa + sb) + p / two);
            let q = mod2pi(alpha - beta - t + p);
            Some([t, p, q])
        }
        DubinsFamily::LRL => {
            let tmp = (lit::<T>(6.0) - d * d + two * cab + two * d * (sb - sa)) / lit(8.0);
            if tmp.abs() > T::one() {
                return None;
            }
            let p = mod2pi(T::TAU() - tmp.acos());
            let t = mod2pi(-alpha - (ca - cb).atan2(d + sa - sb) + p / two);
            let q = mod2pi(beta - alpha - t + p);
            Some([t, p, q])
        }
    }
}

/// Every feasible family between `p` and `q` for bound `a`.
pub fn dubins_candidates<T: Scalar>(
    p: OrientedPoint<T>,
    q: OrientedPoint<T>,
    a: T,
) -> Result<Vec<DubinsCandidate<T>>, DubinsError> {
    if !(p.is_finite() && q.is_finite() && a.is_finite()) {
        return Err(crate::error::ProblemError::NonFiniteInput("dubins endpoints").into());
    }
    if a <= T::zero() {
        return Err(crate::error::ProblemError::NonpositiveCurvatureBound(crate::scalar::to_f64(a)).into());
    }
    let dx = q.x - p.x;
    let dy = q.y - p.y;
    let dist = dx.hypot(dy);
    if dist <= lit(crate::model::NODE_DISTINCT_TOL) {
        return Err(DubinsError::CoincidentPoints);
    }
    let phi = dy.atan2(dx);
    let alpha = mod2pi(p.theta - phi);
    let beta = mod2pi(q.theta - phi);
    let d = dist * a;
    let mut out = Vec::with_capacity(6);
    for family in DubinsFamily::ALL {
        if let Some(params) = family_params(family, alpha, beta, d) {
            if family.is_ccc() && params[1] <= T::PI() {
                continue;
            }
            out.push(DubinsCandidate::new(family, [params[0] / a, params[1] / a, params[2] / a]));
        }
    }
    Ok(out)
}

/// Shortest path between two oriented points.
///
/// Lengths within `1e-12` of each other are treated as ties and resolved by
/// family name.
pub fn dubins_shortest<T: Scalar>(p: OrientedPoint<T>, q: OrientedPoint<T>, a: T) -> Result<DubinsSolution<T>, DubinsError> {
    let candidates = dubins_candidates(p, q, a)?;
    let min = candidates.iter().map(|c| c.total).fold(T::infinity(), T::min);
    let best = candidates
        .iter()
        .filter(|c| c.total <= min + lit(1e-12))
        .min_by(|x, y| x.family.name().cmp(y.family.name()))
        .copied()
        .ok_or(DubinsError::NoFeasibleFamily)?;
    Ok(DubinsSolution { best, candidates })
}

/// Embeds a word into the slot pattern, leftmost slot first.
pub fn embed_word<T: Scalar>(kinds: &[SubarcKind], lengths: &[T]) -> Result<[T; SLOTS], DubinsError> {
    let mut row = [T::zero(); SLOTS];
    let mut slot = 0;
    for (k, l) in kinds.iter().zip(lengths) {
        while slot < SLOTS && SLOT_KINDS[slot] != *k {
            slot += 1;
        }
        if slot == SLOTS {
            let word: String = kinds.iter().map(|k| k.letter()).collect();
            return Err(DubinsError::EmbeddingImpossible(word));
        }
        row[slot] = *l;
        slot += 1;
    }
    Ok(row)
}

/// Heading guesses at the interior nodes: direction of the sum of the unit
/// incoming and outgoing chords.
///
/// When the chords are opposite the incoming chord rotated by `pi/2` is used.
pub fn initial_headings<T: Scalar>(spec: &ProblemSpec<T>) -> Vec<T> {
    let nodes = spec.nodes();
    (1..spec.stage_count())
        .map(|i| {
            let (ax, ay) = unit(nodes[i].x - nodes[i - 1].x, nodes[i].y - nodes[i - 1].y);
            let (bx, by) = unit(nodes[i + 1].x - nodes[i].x, nodes[i + 1].y - nodes[i].y);
            let (sx, sy) = (ax + bx, ay + by);
            if sx.hypot(sy) < lit(1e-12) {
                ay.atan2(ax) + T::FRAC_PI_2()
            } else {
                sy.atan2(sx)
            }
        })
        .collect()
}

/// Interior headings minimizing the sum of per-stage shortest path lengths
/// when every interior heading is restricted to `k` equally spaced values.
///
/// Solved exactly over the grid by dynamic programming; ties keep the lowest
/// grid index. Returns an empty list for a single stage.
pub fn grid_headings<T: Scalar>(spec: &ProblemSpec<T>, k: usize) -> Vec<T> {
    let n = spec.stage_count();
    if n < 2 || k == 0 {
        return Vec::new();
    }
    let a = spec.curvature_bound;
    let grid: Vec<T> = (0..k).map(|j| T::TAU() * lit(j as f64) / lit(k as f64)).collect();
    let length = |i: usize, h0: T, h1: T| -> T {
        let p0 = spec.node(i);
        let p1 = spec.node(i + 1);
        dubins_shortest(OrientedPoint::new(p0.x, p0.y, h0), OrientedPoint::new(p1.x, p1.y, h1), a)
            .map(|s| s.best.total)
            .unwrap_or_else(|_| T::infinity())
    };
    let mut cost: Vec<T> = grid.iter().map(|h| length(0, spec.start.theta, *h)).collect();
    let mut back: Vec<Vec<usize>> = Vec::with_capacity(n - 2);
    for i in 1..n - 1 {
        let mut next = vec![T::infinity(); k];
        let mut arg = vec![0; k];
        for (j1, h1) in grid.iter().enumerate() {
            for (j0, h0) in grid.iter().enumerate() {
                let c = cost[j0] + length(i, *h0, *h1);
                if c < next[j1] {
                    next[j1] = c;
                    arg[j1] = j0;
                }
            }
        }
        cost = next;
        back.push(arg);
    }
    let mut best = 0;
    let mut best_cost = T::infinity();
    for (j, h) in grid.iter().enumerate() {
        let c = cost[j] + length(n - 1, *h, spec.end.theta);
        if c < best_cost {
            best_cost = c;
            best = j;
        }
    }
    let mut idx = vec![best; n - 1];
    for i in (0..n - 2).rev() {
        idx[i] = back[i][idx[i + 1]];
    }
    idx.into_iter().map(|j| grid[j]).collect()
}

fn unit<T: Scalar>(x: T, y: T) -> (T, T) {
    let n = x.hypot(y);
    (x / n, y / n)
}

/// Concatenates the per-stage shortest paths between the given interior headings.
pub fn seed_from_dubins<T: Scalar>(spec: &ProblemSpec<T>, interior_headings: &[T]) -> Result<SubarcMatrix<T>, DubinsError> {
    let n = spec.stage_count();
    if interior_headings.len() + 1 != n {
        return Err(DubinsError::HeadingCount { expected: n - 1, found: interior_headings.len() });
    }
    let heading = |i: usize| {
        if i == 0 {
            spec.start.theta
        } else if i == n {
            spec.end.theta
        } else {
            interior_headings[i - 1]
        }
    };
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let p0 = spec.node(i);
        let p1 = spec.node(i + 1);
        let from = OrientedPoint::new(p0.x, p0.y, heading(i));
        let to = OrientedPoint::new(p1.x, p1.y, heading(i + 1));
        rows.push(dubins_shortest(from, to, spec.curvature_bound)?.best.embed()?);
    }
    SubarcMatrix::new(rows).map_err(|_| DubinsError::NoFeasibleFamily)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Waypoint;
    use crate::scalar::angle_distance;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn straight_line() {
        let s = dubins_shortest(OrientedPoint::new(0.0, 0.0, 0.0), OrientedPoint::new(4.0, 0.0, 0.0), 1.0_f64).unwrap();
        assert!((s.best.total - 4.0).abs() < 1e-12);
        assert!(s.best.segment_lengths[0].abs() < 1e-12 && s.best.segment_lengths[2].abs() < 1e-12);
    }

    #[test]
    fn half_circle() {
        let s = dubins_shortest(OrientedPoint::new(0.0, 0.0, 0.0), OrientedPoint::new(0.0, 2.0, PI), 1.0).unwrap();
        assert!((s.best.total - PI).abs() < 1e-12, "{:?}", s.best);
        let row = s.best.embed().unwrap();
        assert_eq!(row.iter().filter(|v| **v > 1e-9).count(), 1);
    }

    #[test]
    fn embeddings() {
        let r = embed_word(&[SubarcKind::R, SubarcKind::S, SubarcKind::L], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r, [0.0, 1.0, 2.0, 3.0, 0.0]);
        let r = embed_word(&[SubarcKind::L, SubarcKind::R, SubarcKind::L], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r, [1.0, 2.0, 0.0, 3.0, 0.0]);
        let r = embed_word(&[SubarcKind::R, SubarcKind::L, SubarcKind::R], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r, [0.0, 1.0, 0.0, 2.0, 3.0]);
        assert!(embed_word(&[SubarcKind::S, SubarcKind::S], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn bisector_headings() {
        let spec = ProblemSpec::new(
            OrientedPoint::new(0.0, 0.0, 0.0),
            OrientedPoint::new(2.0, 0.0, 0.0),
            vec![Waypoint::new(1.0, 0.0)],
            1.0_f64,
        );
        assert!(initial_headings(&spec)[0].abs() < 1e-15);
        let spec = ProblemSpec::new(
            OrientedPoint::new(0.0, 0.0, 0.0),
            OrientedPoint::new(1.0, 1.0, 0.0),
            vec![Waypoint::new(1.0, 0.0)],
            1.0_f64,
        );
        assert!((initial_headings(&spec)[0] - PI / 4.0).abs() < 1e-15);
        let spec = ProblemSpec::new(
            OrientedPoint::new(0.0, 0.0, 0.0),
            OrientedPoint::new(0.0, 0.0, 0.0),
            vec![Waypoint::new(1.0, 0.0)],
            1.0_f64,
        );
        assert!((initial_headings(&spec)[0] - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn mod2pi_snaps() {
        assert_eq!(mod2pi(2.0 * PI), 0.0);
        assert_eq!(mod2pi(-1e-17), 0.0);
        assert!((mod2pi(-PI / 2.0) - 1.5 * PI).abs() < 1e-15);
    }

    fn pose() -> impl Strategy<Value = OrientedPoint<f64>> {
        (-2.0..2.0f64, -2.0..2.0f64, -PI..PI).prop_map(|(x, y, t)| OrientedPoint::new(x, y, t))
    }

    proptest! {
        #[test]
        fn candidates_reach_target(p in pose(), q in pose(), a in prop_oneof![Just(1.0), Just(3.0), 0.3..5.0f64]) {
            prop_assume!((p.x - q.x).hypot(p.y - q.y) > 1e-3);
            for c in dubins_candidates(p, q, a).unwrap() {
                let e = c.endpoint(p, a);
                prop_assert!((e.x - q.x).abs() < 1e-9 && (e.y - q.y).abs() < 1e-9, "{:?} {:?}", c, e);
                prop_assert!(angle_distance(e.theta, q.theta) < 1e-9);
                if c.family.is_ccc() {
                    prop_assert!(a * c.segment_lengths[1] > PI);
                }
            }
        }

        #[test]
        fn rigid_motion_invariance(p in pose(), q in pose(), rot in -PI..PI, tx in -3.0..3.0f64, ty in -3.0..3.0f64) {
            prop_assume!((p.x - q.x).hypot(p.y - q.y) > 1e-3);
            let (s, c) = rot.sin_cos();
            let mv = |o: OrientedPoint<f64>| OrientedPoint::new(c * o.x - s * o.y + tx, s * o.x + c * o.y + ty, o.theta + rot);
            let base = dubins_shortest(p, q, 2.0).unwrap().best.total;
            let moved = dubins_shortest(mv(p), mv(q), 2.0).unwrap().best.total;
            prop_assert!((base - moved).abs() < 1e-10);
        }

        #[test]
        fn scaling_law(p in pose(), q in pose(), a in 0.3..5.0f64) {
            prop_assume!((p.x - q.x).hypot(p.y - q.y) > 1e-3);
            let sc = |o: OrientedPoint<f64>| OrientedPoint::new(a * o.x, a * o.y, o.theta);
            let scaled = dubins_shortest(p, q, a).unwrap().best.total;
            let unit = dubins_shortest(sc(p), sc(q), 1.0).unwrap().best.total;
            prop_assert!((scaled - unit / a).abs() < 1e-10);
        }
    }
}
