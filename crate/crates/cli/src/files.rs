//! JSON documents read and written by the command-line tool.

use std::fs;
use std::path::Path;

use mdi_core::nlp::ConvergenceRecord;
use mdi_core::stationarity::{MidpointStatus, StationarityReport};
use mdi_core::{OrientedPoint, PathSolution, ProblemSpec, SubarcMatrix, Waypoint};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseJson {
    pub x: f64,
    pub y: f64,
    /// Radians.
    pub theta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointJson {
    pub x: f64,
    pub y: f64,
}

/// Problem input: oriented endpoints, ordered waypoints and the curvature bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub curvature_bound: f64,
    pub start: PoseJson,
    pub end: PoseJson,
    #[serde(default)]
    pub waypoints: Vec<PointJson>,
}

impl ProblemFile {
    /// Converts to a validated problem.
    pub fn to_spec(&self) -> Result<ProblemSpec<f64>, CliError> {
        let pose = |p: &PoseJson| OrientedPoint::new(p.x, p.y, p.theta);
        let waypoints = self.waypoints.iter().map(|w| Waypoint::new(w.x, w.y)).collect();
        Ok(ProblemSpec::new(pose(&self.start), pose(&self.end), waypoints, self.curvature_bound).validate()?)
    }

    pub fn from_spec(spec: &ProblemSpec<f64>) -> Self {
        let pose = |p: &OrientedPoint<f64>| PoseJson { x: p.x, y: p.y, theta: p.theta };
        Self {
            curvature_bound: spec.curvature_bound,
            start: pose(&spec.start),
            end: pose(&spec.end),
            waypoints: spec.waypoints.iter().map(|w| PointJson { x: w.x, y: w.y }).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageHeadingJson {
    pub theta0: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub theta4: f64,
    pub theta5: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageJson {
    pub stage: usize,
    pub word: String,
    pub class: String,
    pub rho: Option<f64>,
    pub phi: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeJson {
    pub node: usize,
    pub sign_switch: bool,
    pub residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MidpointJson {
    pub node: usize,
    /// `pass`, `fail` or `not_applicable`.
    pub status: String,
    pub length_difference: Option<f64>,
    pub swept_angle: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubarcBoundJson {
    pub merged_count: usize,
    pub bound: usize,
    pub sign_switch: bool,
    pub ok: bool,
}

/// Serialized audit. Non-finite values are written as `null`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub verdict: String,
    pub lambda0: Option<f64>,
    pub stages: Vec<StageJson>,
    pub nodes: Vec<NodeJson>,
    pub midpoint: Vec<MidpointJson>,
    pub midpoint_ok: bool,
    pub subarc_bound: SubarcBoundJson,
    pub feasibility_residual: Option<f64>,
    pub equality_residual: Option<f64>,
    pub min_slack: Option<f64>,
    pub ellipse_residual: Option<f64>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn status_name(s: MidpointStatus) -> &'static str {
    match s {
        MidpointStatus::Pass => "pass",
        MidpointStatus::Fail => "fail",
        MidpointStatus::NotApplicable => "not_applicable",
    }
}

impl ReportJson {
    pub fn from_report(r: &StationarityReport<f64>) -> Self {
        Self {
            verdict: r.verdict.name().to_string(),
            lambda0: r.lambda0,
            stages: r
                .stages
                .iter()
                .map(|s| StageJson {
                    stage: s.stage,
                    word: s.class.word.clone(),
                    class: s.class.kind.name().to_string(),
                    rho: s.multiplier.and_then(|m| finite(m.rho)),
                    phi: s.multiplier.and_then(|m| finite(m.phi)),
                })
                .collect(),
            nodes: r
                .nodes
                .iter()
                .map(|n| NodeJson { node: n.node, sign_switch: n.sign_switch, residual: n.residual.and_then(finite) })
                .collect(),
            midpoint: r
                .midpoint
                .iter()
                .map(|m| MidpointJson {
                    node: m.node,
                    status: status_name(m.status).to_string(),
                    length_difference: m.length_difference.and_then(finite),
                    swept_angle: m.swept_angle.and_then(finite),
                })
                .collect(),
            midpoint_ok: r.midpoint_ok,
            subarc_bound: SubarcBoundJson {
                merged_count: r.subarc_bound.merged_count,
                bound: r.subarc_bound.bound,
                sign_switch: r.subarc_bound.sign_switch,
                ok: r.subarc_bound.ok,
            },
            feasibility_residual: finite(r.feasibility_residual),
            equality_residual: r.equality_residual.and_then(finite),
            min_slack: r.min_slack.and_then(finite),
            ellipse_residual: r.ellipse_residual.and_then(finite),
        }
    }
}

/// Solver provenance of a stored solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub starts_attempted: usize,
    pub converged: usize,
    pub seed: u64,
    /// 1 for the best solution found.
    pub rank: usize,
    pub start_index: usize,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub polish_iterations: usize,
    pub residual: Option<f64>,
    pub kkt: Option<f64>,
}

impl Diagnostics {
    pub fn new(starts_attempted: usize, converged: usize, seed: u64, rank: usize, record: &ConvergenceRecord<f64>) -> Self {
        Self {
            starts_attempted,
            converged,
            seed,
            rank,
            start_index: record.start_index,
            outer_iterations: record.outer_iterations,
            inner_iterations: record.inner_iterations,
            polish_iterations: record.polish_iterations,
            residual: finite(record.residual),
            kkt: finite(record.kkt),
        }
    }
}

/// A solution together with its problem, audit and solver diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub problem: ProblemFile,
    pub word: String,
    pub total_length: f64,
    /// One row per stage in slot order `L R S L R`.
    pub xi: Vec<[f64; 5]>,
    pub prune_eps: f64,
    pub stage_headings: Vec<StageHeadingJson>,
    pub stationarity: ReportJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Diagnostics>,
}

impl ResultFile {
    pub fn new(solution: &PathSolution<f64>, report: &StationarityReport<f64>, diagnostics: Option<Diagnostics>) -> Self {
        Self {
            problem: ProblemFile::from_spec(&solution.problem),
            word: solution.word.clone(),
            total_length: solution.total_length(),
            xi: solution.xi.rows().to_vec(),
            prune_eps: solution.prune_eps,
            stage_headings: solution
                .headings
                .stages
                .iter()
                .map(|h| StageHeadingJson {
                    theta0: h.theta0,
                    theta1: h.theta1,
                    theta2: h.theta2,
                    theta4: h.theta4,
                    theta5: h.theta5,
                })
                .collect(),
            stationarity: ReportJson::from_report(report),
            diagnostics,
        }
    }

    /// Rebuilds the solution from the problem and `xi` alone; stored derived
    /// fields are ignored.
    pub fn solution(&self) -> Result<PathSolution<f64>, CliError> {
        let spec = self.problem.to_spec()?;
        if !(self.prune_eps >= 0.0 && self.prune_eps.is_finite()) {
            return Err(CliError::Invalid(format!("prune_eps must be a nonnegative number, got {}", self.prune_eps)));
        }
        let xi = SubarcMatrix::new(self.xi.clone())?;
        Ok(PathSolution::new(spec, xi, self.prune_eps)?)
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })
}

pub fn read_problem(path: &Path) -> Result<ProblemFile, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Parse { path: path.display().to_string(), source: e })
}

pub fn read_result(path: &Path) -> Result<ResultFile, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Parse { path: path.display().to_string(), source: e })
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents contain only finite numbers");
    s.push('\n');
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })
}

#[cfg(test)]
mod tests {
    use super::*;
    use mdi_core::{audit, fixtures};

    fn fixture_result(name: &str) -> ResultFile {
        let f = fixtures::by_name(name).unwrap();
        let sol = PathSolution::new(f.spec(), f.matrix(), 1e-6).unwrap();
        ResultFile::new(&sol, &audit(&sol), None)
    }

    #[test]
    fn result_round_trip_is_exact() {
        for name in ["example1a", "example1c", "example4"] {
            let r = fixture_result(name);
            let back: ResultFile = serde_json::from_str(&to_json(&r)).unwrap();
            assert_eq!(back, r);
            for (a, b) in back.xi.iter().flatten().zip(r.xi.iter().flatten()) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn problem_round_trip_and_validation() {
        let p = ProblemFile::from_spec(&fixtures::example2());
        let back: ProblemFile = serde_json::from_str(&to_json(&p)).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.to_spec().unwrap(), fixtures::example2());
        let bad = ProblemFile { curvature_bound: -1.0, ..p };
        assert!(bad.to_spec().is_err());
    }

    #[test]
    fn unknown_problem_fields_rejected() {
        let text = r#"{"curvature_bound": 1, "start": {"x":0,"y":0,"theta":0}, "end": {"x":1,"y":0,"theta":0}, "extra": 1}"#;
        assert!(serde_json::from_str::<ProblemFile>(text).is_err());
    }

    #[test]
    fn solution_is_rebuilt_from_xi() {
        let mut r = fixture_result("example1a");
        r.word = "tampered".into();
        r.total_length = 0.0;
        let sol = r.solution().unwrap();
        assert_eq!(sol.word, "RSL|LSR|RSR");
        r.xi.pop();
        assert!(r.solution().is_err());
    }
}
