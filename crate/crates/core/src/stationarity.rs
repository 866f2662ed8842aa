//! Necessary-condition audit of a candidate curve.
//!
//! Per stage the adjoint satisfies `a|lambda3| = w(theta)` on turning arcs with
//! `w(theta) = lambda0 + A cos(theta) + B sin(theta) = lambda0 + rho cos(theta - phi)`
//! and `lambda3 = 0` on straight arcs. Every condition (straight arcs, internal
//! switches, continuity of `lambda3` at the nodes) is linear in the stage constants
//! `(A, B)`, while `w >= 0` along each turning arc is a convex constraint. The audit
//! solves the linear system, then maximizes the smallest slack of `w` over the
//! remaining free directions with a small LP refined by cutting planes.

use std::fmt;

use crate::error::StationarityError;
use crate::linalg::{Matrix, SymmetricEigen};
use crate::lp::{simplex_max, LpResult};
use crate::model::{PathSolution, SubarcKind, SLOTS, SLOT_KINDS};
use crate::rollout::residuals;
use crate::scalar::{lit, wrap_angle, Scalar};

/// Tolerance applied to every audited condition.
pub const CONDITION_TOL: f64 = 1e-8;
/// Violations between `CONDITION_TOL` and this value are reported as inconclusive.
pub const BOUNDARY_TOL: f64 = 1e-6;
/// Tolerance of the midpoint length equality.
pub const MIDPOINT_TOL: f64 = 1e-9;
/// Box on the stage constants `(A, B)` used by the LP.
const MULTIPLIER_BOX: f64 = 1e3;
/// Heading spacing of the initial LP samples.
const SAMPLE_STEP: f64 = std::f64::consts::PI / 360.0;
const MAX_CUTS: usize = 40;

/// Arc-type taxonomy of a single stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StageType {
    Csc,
    Cs,
    Sc,
    S,
    Ccc,
    Cc,
    C,
    Empty,
    Nonconforming,
}

impl StageType {
    pub fn name(self) -> &'static str {
        match self {
            StageType::Csc => "CSC",
            StageType::Cs => "CS",
            StageType::Sc => "SC",
            StageType::S => "S",
            StageType::Ccc => "CCC",
            StageType::Cc => "CC",
            StageType::C => "C",
            StageType::Empty => "empty",
            StageType::Nonconforming => "nonconforming",
        }
    }

    pub fn has_straight(self) -> bool {
        matches!(self, StageType::Csc | StageType::Cs | StageType::Sc | StageType::S)
    }
}

impl fmt::Display for StageType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Classifies a stage word. Repeated letters are merged first, so `LL` is `C`.
pub fn classify_stage(word: &str) -> StageType {
    let mut merged: Vec<char> = Vec::new();
    for c in word.chars().filter(|c| !c.is_whitespace() && *c != '|') {
        if merged.last() != Some(&c) {
            merged.push(c);
        }
    }
    if merged.iter().any(|c| !matches!(c, 'L' | 'R' | 'S')) {
        return StageType::Nonconforming;
    }
    let pattern: String = merged.iter().map(|c| if *c == 'S' { 'S' } else { 'C' }).collect();
    match pattern.as_str() {
        "" => StageType::Empty,
        "C" => StageType::C,
        "S" => StageType::S,
        "CS" => StageType::Cs,
        "SC" => StageType::Sc,
        "CSC" => StageType::Csc,
        // Adjacent turning letters differ after merging, so these alternate.
        "CC" => StageType::Cc,
        "CCC" => StageType::Ccc,
        _ => StageType::Nonconforming,
    }
}

/// A maximal subarc inside one stage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MergedArc<T> {
    pub kind: SubarcKind,
    /// Arc length from the stage start to the beginning of the arc.
    pub offset: T,
    pub length: T,
    pub theta_start: T,
    pub theta_end: T,
}

impl<T: Scalar> MergedArc<T> {
    /// Heading `s` units of length into the arc.
    pub fn heading_at(&self, s: T, a: T) -> T {
        self.theta_start + self.kind.turn_sign::<T>() * a * s
    }

    fn heading_range(&self) -> (T, T) {
        if self.theta_start <= self.theta_end {
            (self.theta_start, self.theta_end)
        } else {
            (self.theta_end, self.theta_start)
        }
    }
}

/// Maximal subarcs of stage `stage` (0-based): slots above `prune_eps`, with
/// same-kind neighbours merged.
pub fn stage_arcs<T: Scalar>(solution: &PathSolution<T>, stage: usize) -> Vec<MergedArc<T>> {
    let row = solution.xi.row(stage);
    let h = &solution.headings.stages[stage];
    let mut arcs: Vec<MergedArc<T>> = Vec::new();
    let mut offset = T::zero();
    for slot in 0..SLOTS {
        let len = row[slot];
        if len > solution.prune_eps {
            let kind = SLOT_KINDS[slot];
            match arcs.last_mut() {
                Some(last) if last.kind == kind => {
                    last.length = last.length + len;
                    last.theta_end = h.after_slot(slot);
                }
                _ => arcs.push(MergedArc {
                    kind,
                    offset,
                    length: len,
                    theta_start: h.before_slot(slot),
                    theta_end: h.after_slot(slot),
                }),
            }
        }
        offset = offset + len;
    }
    arcs
}

fn arcs_word<T>(arcs: &[MergedArc<T>]) -> String {
    arcs.iter().map(|a| a.kind.letter()).collect()
}

/// Stage classification together with the headings at its internal switches.
#[derive(Clone, Debug, PartialEq)]
pub struct StageClass<T> {
    pub kind: StageType,
    /// Merged stage word, e.g. `RSL`.
    pub word: String,
    /// Heading at each internal switching time, in order.
    pub switch_headings: Vec<T>,
}

/// Classifies stage `stage` (0-based) of a solution.
pub fn stage_class<T: Scalar>(solution: &PathSolution<T>, stage: usize) -> StageClass<T> {
    let arcs = stage_arcs(solution, stage);
    let word = arcs_word(&arcs);
    let switch_headings = arcs.windows(2).map(|w| w[0].theta_end).collect();
    StageClass { kind: classify_stage(&word), word, switch_headings }
}

/// Per-stage adjoint constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StageMultiplier<T> {
    pub rho: T,
    /// Phase in `(-pi, pi]`.
    pub phi: T,
}

impl<T: Scalar> StageMultiplier<T> {
    fn from_components(a: T, b: T) -> Self {
        let rho = a.hypot(b);
        let phi = if rho > T::zero() { wrap_angle(b.atan2(a)) } else { T::zero() };
        Self { rho, phi }
    }
}

/// Reconstructed multipliers of a whole curve.
#[derive(Clone, Debug, PartialEq)]
pub struct Multipliers<T> {
    /// 1 for the normal case, 0 for the abnormal case.
    pub lambda0: T,
    pub stages: Vec<StageMultiplier<T>>,
    /// Largest violation of the linear conditions.
    pub equality_residual: T,
    /// Smallest value of `w` over all turning arcs (positive infinity if none).
    pub min_slack: T,
}

impl<T: Scalar> Multipliers<T> {
    /// `w(theta) = lambda0 + rho cos(theta - phi)` of stage `stage`.
    pub fn w(&self, stage: usize, theta: T) -> T {
        let m = &self.stages[stage];
        self.lambda0 + m.rho * (theta - m.phi).cos()
    }

    /// `lambda3` on an arc of kind `kind` at heading `theta`.
    pub fn lambda3(&self, stage: usize, kind: SubarcKind, theta: T, a: T) -> T {
        if kind.is_turn() {
            -self.w(stage, theta) / kind.control(a)
        } else {
            T::zero()
        }
    }

    /// `d lambda3 / dt = rho sin(theta - phi)`.
    pub fn lambda3_dot(&self, stage: usize, theta: T) -> T {
        let m = &self.stages[stage];
        m.rho * (theta - m.phi).sin()
    }
}

/// Diagnostics of one failed normalization attempt.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Attempt<T> {
    pub lambda0: T,
    pub equality_residual: T,
    pub min_slack: T,
}

/// Outcome of multiplier reconstruction.
#[derive(Clone, Debug, PartialEq)]
pub enum Reconstruction<T> {
    Found(Multipliers<T>),
    /// Best candidate violates a condition by less than `BOUNDARY_TOL`.
    Boundary(Multipliers<T>),
    Unsatisfiable(Vec<Attempt<T>>),
}

impl<T> Reconstruction<T> {
    pub fn multipliers(&self) -> Option<&Multipliers<T>> {
        match self {
            Reconstruction::Found(m) | Reconstruction::Boundary(m) => Some(m),
            Reconstruction::Unsatisfiable(_) => None,
        }
    }
}

struct LinearSystem<T> {
    rows: Vec<Vec<T>>,
    rhs: Vec<T>,
}

impl<T: Scalar> LinearSystem<T> {
    fn push(&mut self, n: usize, entries: &[(usize, T, T)], rhs: T) {
        let mut row = vec![T::zero(); n];
        for &(stage, ca, cb) in entries {
            row[2 * stage] = row[2 * stage] + ca;
            row[2 * stage + 1] = row[2 * stage + 1] + cb;
        }
        self.rows.push(row);
        self.rhs.push(rhs);
    }
}

/// Sinusoid minimum of `c + A cos + B sin` on `[lo, hi]` and its location.
fn sinusoid_min<T: Scalar>(c: T, a: T, b: T, lo: T, hi: T) -> (T, T) {
    let f = |t: T| c + a * t.cos() + b * t.sin();
    let mut best = (f(lo), lo);
    let fh = f(hi);
    if fh < best.0 {
        best = (fh, hi);
    }
    if a != T::zero() || b != T::zero() {
        let trough = b.atan2(a) + T::PI();
        let k = ((lo - trough) / T::TAU()).ceil();
        let t = trough + k * T::TAU();
        if t <= hi {
            let ft = f(t);
            if ft < best.0 {
                best = (ft, t);
            }
        }
    }
    best
}

struct Problem<T> {
    arcs: Vec<Vec<MergedArc<T>>>,
}

impl<T: Scalar> Problem<T> {
    fn stages(&self) -> usize {
        self.arcs.len()
    }

    fn has_straight(&self) -> bool {
        self.arcs.iter().flatten().any(|a| !a.kind.is_turn())
    }

    fn equalities(&self, lambda0: T) -> LinearSystem<T> {
        let n = 2 * self.stages();
        let mut sys = LinearSystem { rows: Vec::new(), rhs: Vec::new() };
        for (i, arcs) in self.arcs.iter().enumerate() {
            for arc in arcs {
                if !arc.kind.is_turn() {
                    let t = arc.theta_start;
                    sys.push(n, &[(i, t.cos(), t.sin())], -lambda0);
                    sys.push(n, &[(i, -t.sin(), t.cos())], T::zero());
                }
            }
            for pair in arcs.windows(2) {
                if pair[0].kind.is_turn() && pair[1].kind.is_turn() {
                    let t = pair[0].theta_end;
                    sys.push(n, &[(i, t.cos(), t.sin())], -lambda0);
                }
            }
        }
        for i in 0..self.stages().saturating_sub(1) {
            let (Some(left), Some(right)) = (self.arcs[i].last(), self.arcs[i + 1].first()) else {
                continue;
            };
            let t = left.theta_end;
            let (c, s) = (t.cos(), t.sin());
            match (left.kind.is_turn(), right.kind.is_turn()) {
                (true, true) if left.kind == right.kind => {
                    sys.push(n, &[(i, c, s), (i + 1, -c, -s)], T::zero());
                }
                (true, true) => {
                    sys.push(n, &[(i, c, s), (i + 1, c, s)], -(lambda0 + lambda0));
                }
                (true, false) => sys.push(n, &[(i, c, s)], -lambda0),
                (false, true) => sys.push(n, &[(i + 1, c, s)], -lambda0),
                (false, false) => {}
            }
        }
        sys
    }

    /// Exact minimum of `w` over every turning arc for stacked constants `z`.
    fn min_slack(&self, z: &[T], lambda0: T) -> (T, Option<(usize, T)>) {
        let mut best = (T::infinity(), None);
        for (i, arcs) in self.arcs.iter().enumerate() {
            for arc in arcs.iter().filter(|a| a.kind.is_turn()) {
                let (lo, hi) = arc.heading_range();
                let (v, t) = sinusoid_min(lambda0, z[2 * i], z[2 * i + 1], lo, hi);
                if v < best.0 {
                    best = (v, Some((i, t)));
                }
            }
        }
        best
    }

    fn samples(&self) -> Vec<(usize, T)> {
        let step: T = lit(SAMPLE_STEP);
        let mut out = Vec::new();
        for (i, arcs) in self.arcs.iter().enumerate() {
            for arc in arcs.iter().filter(|a| a.kind.is_turn()) {
                let (lo, hi) = arc.heading_range();
                let count = ((hi - lo) / step).ceil().to_usize().unwrap_or(1).max(1);
                for k in 0..=count {
                    let f = lit::<T>(k as f64) / lit::<T>(count as f64);
                    out.push((i, lo + (hi - lo) * f));
                }
            }
        }
        out
    }

    /// Heading in the middle of the longest turning arc of each stage.
    fn normalization_headings(&self) -> Option<Vec<T>> {
        self.arcs
            .iter()
            .map(|arcs| {
                arcs.iter()
                    .filter(|a| a.kind.is_turn())
                    .max_by(|x, y| x.length.partial_cmp(&y.length).unwrap_or(std::cmp::Ordering::Equal))
                    .map(|a| (a.theta_start + a.theta_end) / lit(2.0))
            })
            .collect()
    }

    fn attempt(&self, lambda0: T) -> (Vec<T>, T, T) {
        let n = 2 * self.stages();
        let sys = self.equalities(lambda0);
        let (z0, null): (Vec<T>, Matrix<T>) = if sys.rows.is_empty() {
            (vec![T::zero(); n], Matrix::identity(n))
        } else {
            let mut e = Matrix::zeros(sys.rows.len(), n);
            for (r, row) in sys.rows.iter().enumerate() {
                e.row_mut(r).copy_from_slice(row);
            }
            let mut ete: Matrix<T> = Matrix::zeros(n, n);
            for row in &sys.rows {
                for p in 0..n {
                    if row[p] == T::zero() {
                        continue;
                    }
                    for q in 0..n {
                        ete[(p, q)] = ete[(p, q)] + row[p] * row[q];
                    }
                }
            }
            let eig = SymmetricEigen::new(&ete);
            let scale = eig.values.iter().fold(T::one(), |m, v| m.max(v.abs()));
            let cut = lit::<T>(1e-10) * scale;
            let z0 = eig.pinv_solve(&e.tr_mul_vec(&sys.rhs), lit(1e-10));
            let free: Vec<usize> = (0..n).filter(|k| eig.values[*k].abs() <= cut).collect();
            let mut null = Matrix::zeros(n, free.len());
            for (c, &k) in free.iter().enumerate() {
                for r in 0..n {
                    null[(r, c)] = eig.vectors[(r, k)];
                }
            }
            (z0, null)
        };
        let eq_res = |z: &[T]| {
            sys.rows
                .iter()
                .zip(&sys.rhs)
                .map(|(row, b)| (row.iter().zip(z).fold(T::zero(), |s, (r, v)| s + *r * *v) - *b).abs())
                .fold(T::zero(), T::max)
        };
        let normalize = if lambda0 == T::zero() { self.normalization_headings() } else { None };
        let z = if null.cols() == 0 { z0 } else { self.maximize_slack(&z0, &null, lambda0, normalize.as_deref()) };
        let (slack, _) = self.min_slack(&z, lambda0);
        let mut res = eq_res(&z);
        if let Some(heads) = &normalize {
            // Abnormal multipliers must not vanish in any stage.
            for (i, t) in heads.iter().enumerate() {
                let w = z[2 * i] * t.cos() + z[2 * i + 1] * t.sin();
                res = res.max(T::one() - w);
            }
        }
        (z, res, slack)
    }

    /// Chooses `y` maximizing the smallest `w` over sampled turning headings,
    /// with `z = z0 + null * y`, then tightens the samples by cutting planes.
    fn maximize_slack(&self, z0: &[T], null: &Matrix<T>, lambda0: T, normalize: Option<&[T]>) -> Vec<T> {
        let n = z0.len();
        let d = null.cols();
        let big: T = lit(MULTIPLIER_BOX);
        let mut samples = self.samples();
        let combine =
            |y: &[T]| -> Vec<T> { (0..n).map(|r| z0[r] + (0..d).fold(T::zero(), |s, c| s + null[(r, c)] * y[c])).collect() };
        let mut z = z0.to_vec();
        for _ in 0..MAX_CUTS {
            // Variables: y+ (d), y- (d), t+, t-.
            let cols = 2 * d + 2;
            let mut rows: Vec<Vec<T>> = Vec::new();
            let mut rhs: Vec<T> = Vec::new();
            let coef = |stage: usize, theta: T| -> (Vec<T>, T) {
                let (c, s) = (theta.cos(), theta.sin());
                let g = (0..d).map(|k| c * null[(2 * stage, k)] + s * null[(2 * stage + 1, k)]).collect();
                (g, lambda0 + c * z0[2 * stage] + s * z0[2 * stage + 1])
            };
            for &(stage, theta) in &samples {
                let (g, h) = coef(stage, theta);
                let mut row = vec![T::zero(); cols];
                for k in 0..d {
                    row[k] = -g[k];
                    row[d + k] = g[k];
                }
                row[2 * d] = T::one();
                row[2 * d + 1] = -T::one();
                rows.push(row);
                rhs.push(h);
            }
            if let Some(heads) = normalize {
                for (stage, theta) in heads.iter().enumerate() {
                    let (g, h) = coef(stage, *theta);
                    let mut row = vec![T::zero(); cols];
                    for k in 0..d {
                        row[k] = -g[k];
                        row[d + k] = g[k];
                    }
                    rows.push(row);
                    rhs.push(h - T::one());
                }
            }
            let mut cap = vec![T::zero(); cols];
            cap[2 * d] = T::one();
            cap[2 * d + 1] = -T::one();
            rows.push(cap);
            rhs.push(T::one());
            for r in 0..n {
                let mut up = vec![T::zero(); cols];
                let mut down = vec![T::zero(); cols];
                for k in 0..d {
                    up[k] = null[(r, k)];
                    up[d + k] = -null[(r, k)];
                    down[k] = -null[(r, k)];
                    down[d + k] = null[(r, k)];
                }
                rows.push(up);
                rhs.push(big - z0[r]);
                rows.push(down);
                rhs.push(big + z0[r]);
            }
            // The primal has many rows and few columns, so solve its dual
            // `max -rhs.p  s.t. -rows^T p <= -c, p >= 0` and read the primal off the prices.
            let mut dual_a = Matrix::zeros(cols, rows.len());
            for (r, row) in rows.iter().enumerate() {
                for (k, v) in row.iter().enumerate() {
                    dual_a[(k, r)] = -*v;
                }
            }
            let mut c = vec![T::zero(); cols];
            c[2 * d] = -T::one();
            c[2 * d + 1] = T::one();
            let neg_rhs: Vec<T> = rhs.iter().map(|v| -*v).collect();
            let (x, t_lp) = match simplex_max(&dual_a, &c, &neg_rhs) {
                LpResult::Optimal { dual, value, .. } => (dual, -value),
                _ => return z,
            };
            let y: Vec<T> = (0..d).map(|k| x[k] - x[d + k]).collect();
            z = combine(&y);
            let (exact, at) = self.min_slack(&z, lambda0);
            match at {
                Some(p) if exact < t_lp - lit(1e-12) => samples.push(p),
                _ => break,
            }
        }
        z
    }
}

fn problem_of<T: Scalar>(solution: &PathSolution<T>) -> Problem<T> {
    Problem { arcs: (0..solution.xi.stages()).map(|i| stage_arcs(solution, i)).collect() }
}

fn multipliers_from<T: Scalar>(z: &[T], lambda0: T, equality_residual: T, min_slack: T) -> Multipliers<T> {
    let stages = z.chunks(2).map(|p| StageMultiplier::from_components(p[0], p[1])).collect();
    Multipliers { lambda0, stages, equality_residual, min_slack }
}

/// Reconstructs `(lambda0, rho_i, phi_i)`. The normal case is tried first; the
/// abnormal case only when no stage contains a straight arc.
pub fn reconstruct_multipliers<T: Scalar>(solution: &PathSolution<T>) -> Result<Reconstruction<T>, StationarityError> {
    for i in 0..solution.xi.stages() {
        if stage_class(solution, i).kind == StageType::Nonconforming {
            return Err(StationarityError::NonconformingStage(i + 1));
        }
    }
    let problem = problem_of(solution);
    let tol: T = lit(CONDITION_TOL);
    let boundary: T = lit(BOUNDARY_TOL);
    let mut candidates = vec![T::one()];
    if !problem.has_straight() {
        candidates.push(T::zero());
    }
    let mut attempts = Vec::new();
    let mut near: Option<Multipliers<T>> = None;
    for lambda0 in candidates {
        let (z, eq, slack) = problem.attempt(lambda0);
        if eq <= tol && slack >= -tol {
            return Ok(Reconstruction::Found(multipliers_from(&z, lambda0, eq, slack)));
        }
        if near.is_none() && eq <= boundary && slack >= -boundary {
            near = Some(multipliers_from(&z, lambda0, eq, slack));
        }
        attempts.push(Attempt { lambda0, equality_residual: eq, min_slack: slack });
    }
    Ok(match near {
        Some(m) => Reconstruction::Boundary(m),
        None => Reconstruction::Unsatisfiable(attempts),
    })
}

/// Outcome of the midpoint test at one node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MidpointStatus {
    Pass,
    Fail,
    NotApplicable,
}

/// Midpoint test at interior node `node` (1-based, between stages `node` and `node + 1`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MidpointCheck<T> {
    pub node: usize,
    pub status: MidpointStatus,
    /// `|xi(last C of stage node) - xi(first C of stage node + 1)|`.
    pub length_difference: Option<T>,
    /// Heading swept by the turning arc that ends stage `node`.
    pub swept_angle: Option<T>,
}

fn sign_switch<T>(left: &MergedArc<T>, right: &MergedArc<T>) -> bool {
    left.kind.is_turn() && right.kind.is_turn() && left.kind != right.kind
}

/// Checks that every node joining two CSC stages without a control sign switch
/// bisects the shared turning arc, and that the half ending the first stage
/// sweeps less than `pi`.
pub fn check_midpoint<T: Scalar>(solution: &PathSolution<T>) -> Vec<MidpointCheck<T>> {
    let a = solution.problem.curvature_bound;
    let stages = solution.xi.stages();
    let arcs: Vec<_> = (0..stages).map(|i| stage_arcs(solution, i)).collect();
    (0..stages.saturating_sub(1))
        .map(|i| {
            let na =
                MidpointCheck { node: i + 1, status: MidpointStatus::NotApplicable, length_difference: None, swept_angle: None };
            let (l, r) = (&arcs[i], &arcs[i + 1]);
            if classify_stage(&arcs_word(l)) != StageType::Csc || classify_stage(&arcs_word(r)) != StageType::Csc {
                return na;
            }
            let (left, right) = (l[l.len() - 1], r[0]);
            if sign_switch(&left, &right) {
                return na;
            }
            let diff = (left.length - right.length).abs();
            let swept = a * left.length;
            let ok = diff <= lit(MIDPOINT_TOL) && swept < T::PI();
            MidpointCheck {
                node: i + 1,
                status: if ok { MidpointStatus::Pass } else { MidpointStatus::Fail },
                length_difference: Some(diff),
                swept_angle: Some(swept),
            }
        })
        .collect()
}

/// Count of maximal subarcs along the whole curve against the admissible bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SubarcBound {
    pub merged_count: usize,
    /// `2N + 1`, or `3N` when the control switches sign at some node.
    pub bound: usize,
    pub sign_switch: bool,
    pub ok: bool,
}

/// Counts maximal subarcs after merging same-kind neighbours within and across stages.
pub fn check_subarc_bound<T: Scalar>(solution: &PathSolution<T>) -> SubarcBound {
    let stages = solution.xi.stages();
    let arcs: Vec<_> = (0..stages).map(|i| stage_arcs(solution, i)).collect();
    let mut merged_count = 0;
    let mut last: Option<SubarcKind> = None;
    for arc in arcs.iter().flatten() {
        if last != Some(arc.kind) {
            merged_count += 1;
        }
        last = Some(arc.kind);
    }
    let sign_switch = (0..stages.saturating_sub(1)).any(|i| match (arcs[i].last(), arcs[i + 1].first()) {
        (Some(l), Some(r)) => sign_switch(l, r),
        _ => false,
    });
    let bound = if sign_switch { 3 * stages } else { 2 * stages + 1 };
    SubarcBound { merged_count, bound, sign_switch, ok: merged_count <= bound }
}

/// One sample of the switching function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SwitchingSample<T> {
    /// Arc length from the curve start.
    pub t: T,
    pub theta: T,
    pub u: T,
    pub lambda3: T,
    pub lambda3_dot: T,
    /// `lambda3_dot^2 + (a |lambda3| - lambda0)^2 - rho^2`.
    pub ellipse_residual: T,
}

/// Samples `lambda3` and its derivative along every maximal subarc, with
/// `samples_per_arc` points per arc including both ends.
pub fn switching_function_profile<T: Scalar>(
    solution: &PathSolution<T>,
    multipliers: Option<&Multipliers<T>>,
    samples_per_arc: usize,
) -> Result<Vec<Vec<SwitchingSample<T>>>, StationarityError> {
    let m = multipliers.ok_or(StationarityError::MultiplierMissing)?;
    if m.stages.len() != solution.xi.stages() {
        return Err(StationarityError::MultiplierMissing);
    }
    let a = solution.problem.curvature_bound;
    let count = samples_per_arc.max(2);
    let mut stage_start = T::zero();
    let mut out = Vec::with_capacity(m.stages.len());
    for i in 0..solution.xi.stages() {
        let mut samples = Vec::new();
        for arc in stage_arcs(solution, i) {
            for k in 0..count {
                let s = arc.length * lit::<T>(k as f64) / lit::<T>((count - 1) as f64);
                let theta = arc.heading_at(s, a);
                let lambda3 = m.lambda3(i, arc.kind, theta, a);
                let lambda3_dot = m.lambda3_dot(i, theta);
                let rho = m.stages[i].rho;
                let e = a * lambda3.abs() - m.lambda0;
                samples.push(SwitchingSample {
                    t: stage_start + arc.offset + s,
                    theta,
                    u: arc.kind.control(a),
                    lambda3,
                    lambda3_dot,
                    ellipse_residual: lambda3_dot * lambda3_dot + e * e - rho * rho,
                });
            }
        }
        stage_start = stage_start + solution.xi.row(i).iter().fold(T::zero(), |s, v| s + *v);
        out.push(samples);
    }
    Ok(out)
}

/// Overall audit outcome: feasibility plus existence of consistent multipliers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Stationary,
    NotStationary,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Stationary => "stationary",
            Verdict::NotStationary => "not_stationary",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-stage part of the audit.
#[derive(Clone, Debug, PartialEq)]
pub struct StageReport<T> {
    /// 1-based stage index.
    pub stage: usize,
    pub class: StageClass<T>,
    pub multiplier: Option<StageMultiplier<T>>,
}

/// Continuity of `lambda3` at interior node `node` (1-based).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeReport<T> {
    pub node: usize,
    pub sign_switch: bool,
    /// `|lambda3(t+) - lambda3(t-)|` when multipliers exist.
    pub residual: Option<T>,
}

/// Full necessary-condition audit of a solution.
#[derive(Clone, Debug, PartialEq)]
pub struct StationarityReport<T> {
    pub verdict: Verdict,
    /// `Some(1)` normal, `Some(0)` abnormal, `None` when no multipliers exist.
    pub lambda0: Option<T>,
    pub stages: Vec<StageReport<T>>,
    pub nodes: Vec<NodeReport<T>>,
    pub midpoint: Vec<MidpointCheck<T>>,
    pub midpoint_ok: bool,
    pub subarc_bound: SubarcBound,
    /// Closure residual recomputed by rollout.
    pub feasibility_residual: T,
    pub equality_residual: Option<T>,
    pub min_slack: Option<T>,
    /// Largest ellipse-identity residual over the sampled profile.
    pub ellipse_residual: Option<T>,
    pub reconstruction: Option<Reconstruction<T>>,
}

const PROFILE_SAMPLES: usize = 33;

/// Runs every check and combines them into a verdict.
pub fn audit<T: Scalar>(solution: &PathSolution<T>) -> StationarityReport<T> {
    let tol: T = lit(CONDITION_TOL);
    let a = solution.problem.curvature_bound;
    let stages = solution.xi.stages();
    let feasibility_residual = residuals(&solution.problem, &solution.xi).max_abs();
    let feasible = feasibility_residual <= tol;
    let arcs: Vec<_> = (0..stages).map(|i| stage_arcs(solution, i)).collect();
    let classes: Vec<_> = (0..stages).map(|i| stage_class(solution, i)).collect();
    let conforming = classes.iter().all(|c| c.kind != StageType::Nonconforming);
    let reconstruction = if conforming { reconstruct_multipliers(solution).ok() } else { None };
    let multipliers = reconstruction.as_ref().and_then(|r| r.multipliers()).cloned();

    let nodes: Vec<NodeReport<T>> = (0..stages.saturating_sub(1))
        .map(|i| {
            let (l, r) = (arcs[i].last(), arcs[i + 1].first());
            let switch = matches!((l, r), (Some(l), Some(r)) if sign_switch(l, r));
            let residual = match (&multipliers, l, r) {
                (Some(m), Some(l), Some(r)) => {
                    let minus = m.lambda3(i, l.kind, l.theta_end, a);
                    let plus = m.lambda3(i + 1, r.kind, r.theta_start, a);
                    Some((plus - minus).abs())
                }
                _ => None,
            };
            NodeReport { node: i + 1, sign_switch: switch, residual }
        })
        .collect();

    let ellipse_residual = multipliers.as_ref().and_then(|m| {
        switching_function_profile(solution, Some(m), PROFILE_SAMPLES)
            .ok()
            .map(|p| p.iter().flatten().map(|s| s.ellipse_residual.abs()).fold(T::zero(), T::max))
    });
    let midpoint = check_midpoint(solution);
    let midpoint_ok = midpoint.iter().all(|m| m.status != MidpointStatus::Fail);
    let subarc_bound = check_subarc_bound(solution);
    let nodes_ok = nodes.iter().all(|n| n.residual.is_none_or(|r| r <= tol));
    let ellipse_ok = ellipse_residual.is_none_or(|r| r <= tol);

    // Midpoint and subarc-count checks are optimality conditions and are only reported.
    let verdict = if !feasible {
        Verdict::NotStationary
    } else if !conforming {
        Verdict::Inconclusive
    } else {
        match &reconstruction {
            Some(Reconstruction::Found(_)) if nodes_ok && ellipse_ok => Verdict::Stationary,
            Some(Reconstruction::Found(_)) | Some(Reconstruction::Boundary(_)) => Verdict::Inconclusive,
            _ => Verdict::NotStationary,
        }
    };

    let stage_reports = classes
        .into_iter()
        .enumerate()
        .map(|(i, class)| StageReport { stage: i + 1, class, multiplier: multipliers.as_ref().map(|m| m.stages[i]) })
        .collect();
    StationarityReport {
        verdict,
        lambda0: multipliers.as_ref().map(|m| m.lambda0),
        stages: stage_reports,
        nodes,
        midpoint,
        midpoint_ok,
        subarc_bound,
        feasibility_residual,
        equality_residual: multipliers.as_ref().map(|m| m.equality_residual),
        min_slack: multipliers.as_ref().map(|m| m.min_slack),
        ellipse_residual,
        reconstruction,
    }
}
