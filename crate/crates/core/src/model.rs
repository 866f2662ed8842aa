//! Domain types: oriented points, problem data, the subarc matrix and solutions.
//!
//! Headings are kept as unwrapped reals everywhere. The heading recurrences
//! accumulate winding across stages and the terminal slope is matched through
//! its sine and cosine, so wrapping only happens when angles are displayed or
//! compared.

use std::fmt;

use crate::error::{MatrixError, ProblemError};
use crate::scalar::{lit, Scalar};

/// Number of subarc slots per stage.
pub const SLOTS: usize = 5;

/// Minimum Euclidean distance between consecutive nodes.
pub const NODE_DISTINCT_TOL: f64 = 1e-12;

/// Planar position with heading.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct OrientedPoint<T> {
    pub x: T,
    pub y: T,
    pub theta: T,
}

impl<T: Scalar> OrientedPoint<T> {
    pub fn new(x: T, y: T, theta: T) -> Self {
        Self { x, y, theta }
    }

    pub fn position(&self) -> Waypoint<T> {
        Waypoint { x: self.x, y: self.y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }
}

/// Interior node (position only).
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Waypoint<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Waypoint<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Endpoints with prescribed headings, ordered interior waypoints and the curvature bound `a`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec<T> {
    pub start: OrientedPoint<T>,
    pub end: OrientedPoint<T>,
    pub waypoints: Vec<Waypoint<T>>,
    pub curvature_bound: T,
}

impl<T: Scalar> ProblemSpec<T> {
    pub fn new(start: OrientedPoint<T>, end: OrientedPoint<T>, waypoints: Vec<Waypoint<T>>, curvature_bound: T) -> Self {
        Self { start, end, waypoints, curvature_bound }
    }

    /// Number of stages `N` (one more than the number of interior waypoints).
    pub fn stage_count(&self) -> usize {
        self.waypoints.len() + 1
    }

    /// Node `i` for `i = 0..=N`: the start, the waypoints, then the end.
    pub fn node(&self, i: usize) -> Waypoint<T> {
        if i == 0 {
            self.start.position()
        } else if i <= self.waypoints.len() {
            self.waypoints[i - 1]
        } else {
            self.end.position()
        }
    }

    pub fn nodes(&self) -> Vec<Waypoint<T>> {
        (0..=self.stage_count()).map(|i| self.node(i)).collect()
    }

    /// Checks every invariant and returns the spec unchanged.
    pub fn validate(self) -> Result<Self, ProblemError> {
        validate_problem(&self)?;
        Ok(self)
    }
}

/// Validates a problem: finite data, `a > 0`, consecutive nodes distinct.
pub fn validate_problem<T: Scalar>(spec: &ProblemSpec<T>) -> Result<(), ProblemError> {
    if !spec.start.is_finite() {
        return Err(ProblemError::NonFiniteInput("start"));
    }
    if !spec.end.is_finite() {
        return Err(ProblemError::NonFiniteInput("end"));
    }
    if spec.waypoints.iter().any(|w| !(w.x.is_finite() && w.y.is_finite())) {
        return Err(ProblemError::NonFiniteInput("waypoints"));
    }
    if !spec.curvature_bound.is_finite() {
        return Err(ProblemError::NonFiniteInput("curvature_bound"));
    }
    if spec.curvature_bound <= T::zero() {
        return Err(ProblemError::NonpositiveCurvatureBound(crate::scalar::to_f64(spec.curvature_bound)));
    }
    let tol = lit::<T>(NODE_DISTINCT_TOL);
    for i in 1..=spec.stage_count() {
        if spec.node(i - 1).distance(&spec.node(i)) <= tol {
            return Err(ProblemError::DistinctNodesViolation(i - 1, i));
        }
    }
    Ok(())
}

/// Kind of a subarc: left turn (`u = a`), right turn (`u = -a`) or straight (`u = 0`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SubarcKind {
    L,
    R,
    S,
}

/// Fixed slot layout of every stage.
pub const SLOT_KINDS: [SubarcKind; SLOTS] = [SubarcKind::L, SubarcKind::R, SubarcKind::S, SubarcKind::L, SubarcKind::R];

impl SubarcKind {
    /// Turning direction: +1 for L, -1 for R, 0 for S.
    pub fn turn_sign<T: Scalar>(self) -> T {
        match self {
            SubarcKind::L => T::one(),
            SubarcKind::R => -T::one(),
            SubarcKind::S => T::zero(),
        }
    }

    /// Signed curvature command for bound `a`.
    pub fn control<T: Scalar>(self, a: T) -> T {
        self.turn_sign::<T>() * a
    }

    pub fn is_turn(self) -> bool {
        self != SubarcKind::S
    }

    pub fn letter(self) -> char {
        match self {
            SubarcKind::L => 'L',
            SubarcKind::R => 'R',
            SubarcKind::S => 'S',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'L' => Some(SubarcKind::L),
            'R' => Some(SubarcKind::R),
            'S' => Some(SubarcKind::S),
            _ => None,
        }
    }
}

impl fmt::Display for SubarcKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// The `N x 5` matrix of nonnegative subarc lengths; row `i` is stage `i + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubarcMatrix<T> {
    rows: Vec<[T; SLOTS]>,
}

impl<T: Scalar> SubarcMatrix<T> {
    pub fn new(rows: Vec<[T; SLOTS]>) -> Result<Self, MatrixError> {
        if rows.is_empty() {
            return Err(MatrixError::Empty);
        }
        for (stage, row) in rows.iter().enumerate() {
            for (slot, v) in row.iter().enumerate() {
                if !v.is_finite() || *v < T::zero() {
                    return Err(MatrixError::InvalidEntry { stage, slot });
                }
            }
        }
        Ok(Self { rows })
    }

    pub fn zeros(stages: usize) -> Self {
        assert!(stages > 0, "subarc matrix needs at least one stage");
        Self { rows: vec![[T::zero(); SLOTS]; stages] }
    }

    /// Builds from a flat vector in stage-major order.
    pub fn from_flat(values: &[T]) -> Result<Self, MatrixError> {
        if values.is_empty() || !values.len().is_multiple_of(SLOTS) {
            return Err(MatrixError::Empty);
        }
        let rows = values
            .chunks(SLOTS)
            .map(|c| {
                let mut r = [T::zero(); SLOTS];
                r.copy_from_slice(c);
                r
            })
            .collect();
        Self::new(rows)
    }

    pub fn stages(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[[T; SLOTS]] {
        &self.rows
    }

    pub fn row(&self, stage: usize) -> &[T; SLOTS] {
        &self.rows[stage]
    }

    pub fn get(&self, stage: usize, slot: usize) -> T {
        self.rows[stage][slot]
    }

    pub fn flat(&self) -> Vec<T> {
        self.rows.iter().flat_map(|r| r.iter().copied()).collect()
    }

    /// Sum of all entries, summed in stage-major order.
    pub fn total(&self) -> T {
        self.rows.iter().flat_map(|r| r.iter().copied()).fold(T::zero(), |acc, v| acc + v)
    }

    pub fn check_stages(&self, expected: usize) -> Result<(), MatrixError> {
        if self.stages() != expected {
            return Err(MatrixError::StageCountMismatch { expected, found: self.stages() });
        }
        Ok(())
    }
}

/// Builds the stage-separated word from the slots longer than `prune_eps`.
pub fn word_of<T: Scalar>(xi: &SubarcMatrix<T>, prune_eps: T) -> String {
    let stages: Vec<String> = xi.rows().iter().map(|row| stage_word(row, prune_eps)).collect();
    let joined = stages.join("|");
    if joined.chars().all(|c| c == '|') {
        String::new()
    } else {
        joined
    }
}

/// Word of a single stage row.
pub fn stage_word<T: Scalar>(row: &[T; SLOTS], prune_eps: T) -> String {
    row.iter().zip(SLOT_KINDS).filter(|(v, _)| **v > prune_eps).map(|(_, k)| k.letter()).collect()
}

/// Headings of one stage at the slot boundaries (the heading at the end of
/// slot 3 equals `theta2` because slot 3 is straight).
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct StageHeading<T> {
    pub theta0: T,
    pub theta1: T,
    pub theta2: T,
    pub theta4: T,
    pub theta5: T,
}

impl<T: Scalar> StageHeading<T> {
    /// Heading before slot `slot` (0-based).
    pub fn before_slot(&self, slot: usize) -> T {
        match slot {
            0 => self.theta0,
            1 => self.theta1,
            2 | 3 => self.theta2,
            4 => self.theta4,
            _ => panic!("slot index out of range"),
        }
    }

    /// Heading after slot `slot` (0-based).
    pub fn after_slot(&self, slot: usize) -> T {
        match slot {
            0 => self.theta1,
            1 | 2 => self.theta2,
            3 => self.theta4,
            4 => self.theta5,
            _ => panic!("slot index out of range"),
        }
    }
}

/// Per-stage headings derived from a subarc matrix.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct StageHeadings<T> {
    pub stages: Vec<StageHeading<T>>,
}

impl<T: Scalar> StageHeadings<T> {
    pub fn final_heading(&self) -> T {
        self.stages.last().map(|s| s.theta5).unwrap_or_else(T::zero)
    }
}

/// A candidate curve: problem, subarc matrix, derived headings and word.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSolution<T> {
    pub problem: ProblemSpec<T>,
    pub xi: SubarcMatrix<T>,
    pub headings: StageHeadings<T>,
    pub word: String,
    /// Threshold below which a slot is treated as absent.
    pub prune_eps: T,
}

impl<T: Scalar> PathSolution<T> {
    /// Builds a solution, deriving headings and the word from `xi`.
    pub fn new(problem: ProblemSpec<T>, xi: SubarcMatrix<T>, prune_eps: T) -> Result<Self, MatrixError> {
        xi.check_stages(problem.stage_count())?;
        let (_, headings) = crate::rollout::rollout_path(&problem, &xi);
        let word = word_of(&xi, prune_eps);
        Ok(Self { problem, xi, headings, word, prune_eps })
    }

    /// Curve length `t_N`: always the sum of the subarc matrix.
    pub fn total_length(&self) -> T {
        self.xi.total()
    }

    /// Word with stage separators removed, e.g. `RSLLSRRSR`.
    pub fn flat_word(&self) -> String {
        self.word.chars().filter(|c| *c != '|').collect()
    }
}

/// One row of a densely sampled curve.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct PathSample<T> {
    pub t: T,
    pub x: T,
    pub y: T,
    pub theta: T,
    pub u: T,
}

/// Dense samples along a curve, ordered by arclength.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SampledPath<T> {
    pub samples: Vec<PathSample<T>>,
}
