//! Two-phase multi-start driver: coarse solves from Dubins-seeded starts,
//! structure pruning, refinement and collection of distinct solutions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dubins::{embed_word, grid_headings, initial_headings, seed_from_dubins};
use crate::error::SolveError;
use crate::model::{validate_problem, PathSolution, ProblemSpec, SubarcKind, SubarcMatrix, SLOT_KINDS};
use crate::nlp::instance::NlpInstance;
use crate::nlp::local::{polish, solve_local_with, LocalLimits, LocalOutcome};
use crate::rollout::residuals;
use crate::scalar::{lit, to_f64, Scalar};

/// Two solutions with the same word are considered equal when their lengths differ by at most this.
pub const DUPLICATE_LENGTH_TOL: f64 = 1e-9;

/// Solver settings.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig<T> {
    /// Tolerance of the structure-detection solve.
    pub coarse_tol: T,
    /// Tolerance of the refinement on the pruned structure.
    pub refine_tol: T,
    /// Subarcs not longer than this are removed before refinement.
    pub prune_eps: T,
    pub multistart_count: usize,
    /// Heading grid size for the dynamic-programming start; 0 disables it.
    pub heading_grid: usize,
    pub max_outer_iterations: usize,
    pub max_inner_iterations: usize,
    pub random_seed: u64,
    /// Worker threads for the multi-start loop; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            coarse_tol: lit(1e-8),
            refine_tol: lit(1e-12),
            prune_eps: lit(1e-6),
            multistart_count: 32,
            heading_grid: 72,
            max_outer_iterations: 40,
            max_inner_iterations: 400,
            random_seed: 0,
            threads: None,
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    pub fn validate(&self) -> Result<(), SolveError> {
        let bad = |m: &str| Err(SolveError::InvalidConfig(m.to_string()));
        if !(self.refine_tol > T::zero() && self.refine_tol.is_finite()) {
            return bad("refine_tol must be positive");
        }
        if !(self.coarse_tol >= self.refine_tol && self.coarse_tol.is_finite()) {
            return bad("coarse_tol must be at least refine_tol");
        }
        if !(self.prune_eps > self.refine_tol && self.prune_eps.is_finite()) {
            return bad("prune_eps must exceed refine_tol");
        }
        if self.multistart_count == 0 {
            return bad("multistart_count must be at least 1");
        }
        if self.max_outer_iterations == 0 || self.max_inner_iterations == 0 {
            return bad("iteration limits must be positive");
        }
        if self.threads == Some(0) {
            return bad("thread count must be positive");
        }
        Ok(())
    }

    fn limits(&self) -> LocalLimits {
        LocalLimits { max_outer: self.max_outer_iterations, max_inner: self.max_inner_iterations, ..LocalLimits::default() }
    }
}

/// Convergence diagnostics of one reported solution.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRecord<T> {
    /// Index of the start that produced the solution (0 is the unperturbed seed).
    pub start_index: usize,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub polish_iterations: usize,
    pub residual: T,
    pub kkt: T,
    /// Multipliers of the `2N + 2` equality constraints at the refined point.
    pub multipliers: Vec<T>,
    /// False when some stage keeps four or more subarcs.
    pub classifiable: bool,
}

/// Distinct refined solutions sorted by `(length, word)`; index 0 is the best.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutcome<T> {
    pub solutions: Vec<PathSolution<T>>,
    pub records: Vec<ConvergenceRecord<T>>,
    pub starts_attempted: usize,
    /// Starts whose coarse solve and refinement both succeeded.
    pub converged: usize,
    pub seed: u64,
}

impl<T: Scalar> SolveOutcome<T> {
    pub fn best(&self) -> &PathSolution<T> {
        &self.solutions[0]
    }
}

/// Removes entries not longer than `prune_eps`, merges same-kind subarcs that
/// became adjacent within a stage and re-embeds each stage word leftmost.
pub fn canonical_structure<T: Scalar>(xi: &SubarcMatrix<T>, prune_eps: T) -> SubarcMatrix<T> {
    let rows = xi
        .rows()
        .iter()
        .map(|row| {
            let mut kinds: Vec<SubarcKind> = Vec::new();
            let mut lens: Vec<T> = Vec::new();
            for (v, k) in row.iter().zip(SLOT_KINDS) {
                if *v <= prune_eps {
                    continue;
                }
                if kinds.last() == Some(&k) {
                    let last = lens.len() - 1;
                    lens[last] = lens[last] + *v;
                } else {
                    kinds.push(k);
                    lens.push(*v);
                }
            }
            embed_word(&kinds, &lens).unwrap_or(*row)
        })
        .collect();
    SubarcMatrix::new(rows).expect("pruning keeps entries nonnegative")
}

fn has_full_circle<T: Scalar>(xi: &SubarcMatrix<T>, a: T) -> bool {
    xi.rows().iter().any(|row| row.iter().zip(SLOT_KINDS).any(|(v, k)| k.is_turn() && a * *v >= T::TAU()))
}

fn stages_classifiable<T: Scalar>(xi: &SubarcMatrix<T>, prune_eps: T) -> bool {
    xi.rows().iter().all(|row| row.iter().filter(|v| **v > prune_eps).count() <= 3)
}

/// Prunes a coarse solution and refines it to `refine_tol` on the reduced structure.
pub fn prune_and_refine<T: Scalar>(
    spec: &ProblemSpec<T>,
    xi_coarse: &SubarcMatrix<T>,
    config: &SolverConfig<T>,
) -> Result<(PathSolution<T>, LocalOutcome<T>), SolveError> {
    let inst = NlpInstance::new(spec.clone());
    refine_with(&inst, xi_coarse, config)
}

fn refine_with<T: Scalar>(
    inst: &NlpInstance<T>,
    xi_coarse: &SubarcMatrix<T>,
    config: &SolverConfig<T>,
) -> Result<(PathSolution<T>, LocalOutcome<T>), SolveError> {
    xi_coarse.check_stages(inst.stages())?;
    let pruned = canonical_structure(xi_coarse, config.prune_eps);
    let x = pruned.flat();
    let zero: Vec<bool> = x.iter().map(|v| *v == T::zero()).collect();
    let limits = config.limits();
    let refined = match polish(inst, &x, &zero, config.refine_tol, limits.max_polish) {
        Ok(out) => out,
        Err(_) => solve_local_with(inst, &pruned, config.refine_tol, &limits, &zero).map_err(|e| match e {
            SolveError::MaxIterationsExceeded { residual, kkt } | SolveError::StructureInfeasible { residual, kkt } => {
                SolveError::StructureInfeasible { residual, kkt }
            }
            SolveError::DivergedPenalty { residual } => SolveError::StructureInfeasible { residual, kkt: f64::NAN },
            other => other,
        })?,
    };
    let check = residuals(&inst.spec, &refined.xi).max_abs();
    if check.is_nan() || check >= config.refine_tol {
        return Err(SolveError::StructureInfeasible { residual: to_f64(check), kkt: to_f64(refined.kkt) });
    }
    let solution = PathSolution::new(inst.spec.clone(), refined.xi.clone(), config.prune_eps)?;
    Ok((solution, refined))
}

/// Interior heading sets used as starts.
///
/// The first is the chord bisectors. When `grid > 0` and `count > 1` the
/// second is the grid minimizer of the summed stage lengths. The rest are the
/// bisectors perturbed uniformly in `[-pi/2, pi/2]`, drawn sequentially from a
/// ChaCha stream seeded with `seed`, so the list depends only on the problem,
/// the count, the grid and the seed. Identical heading sets (always the case
/// for a single stage) are kept once.
pub fn start_headings<T: Scalar>(spec: &ProblemSpec<T>, count: usize, grid: usize, seed: u64) -> Vec<Vec<T>> {
    let base = initial_headings(spec);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = vec![base.clone()];
    let mut remaining = count.saturating_sub(1);
    if grid > 0 && remaining > 0 {
        let g = grid_headings(spec, grid);
        if !starts.contains(&g) {
            starts.push(g);
        }
        remaining -= 1;
    }
    for _ in 0..remaining {
        let h: Vec<T> = base
            .iter()
            .map(|b| *b + lit::<T>(rng.gen_range(-std::f64::consts::FRAC_PI_2..=std::f64::consts::FRAC_PI_2)))
            .collect();
        if !starts.contains(&h) {
            starts.push(h);
        }
    }
    starts
}

struct StartResult<T> {
    solution: PathSolution<T>,
    record: ConvergenceRecord<T>,
}

fn run_start<T: Scalar>(inst: &NlpInstance<T>, index: usize, headings: &[T], config: &SolverConfig<T>) -> Option<StartResult<T>> {
    let seed = seed_from_dubins(&inst.spec, headings).ok()?;
    let pinned = vec![false; inst.n_vars()];
    let coarse = solve_local_with(inst, &seed, config.coarse_tol, &config.limits(), &pinned).ok()?;
    let (solution, refined) = refine_with(inst, &coarse.xi, config).ok()?;
    let classifiable = stages_classifiable(&solution.xi, config.prune_eps);
    Some(StartResult {
        record: ConvergenceRecord {
            start_index: index,
            outer_iterations: coarse.outer_iterations + refined.outer_iterations,
            inner_iterations: coarse.inner_iterations + refined.inner_iterations,
            polish_iterations: coarse.polish_iterations + refined.polish_iterations,
            residual: refined.residual,
            kkt: refined.kkt,
            multipliers: refined.multipliers,
            classifiable,
        },
        solution,
    })
}

/// Multi-start two-phase solve.
pub fn solve<T: Scalar>(spec: &ProblemSpec<T>, config: &SolverConfig<T>) -> Result<SolveOutcome<T>, SolveError> {
    config.validate()?;
    validate_problem(spec)?;
    let inst = NlpInstance::new(spec.clone());
    let starts = start_headings(spec, config.multistart_count, config.heading_grid, config.random_seed);
    let work = || -> Vec<Option<StartResult<T>>> {
        starts.par_iter().enumerate().map(|(i, h)| run_start(&inst, i, h, config)).collect()
    };
    let results = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| SolveError::InvalidConfig(e.to_string()))?
            .install(work),
        None => work(),
    };
    let converged = results.iter().filter(|r| r.is_some()).count();
    let a = spec.curvature_bound;
    let mut found: Vec<StartResult<T>> = results.into_iter().flatten().filter(|r| !has_full_circle(&r.solution.xi, a)).collect();
    found.sort_by(|x, y| {
        let lx = x.solution.total_length();
        let ly = y.solution.total_length();
        lx.partial_cmp(&ly)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| x.solution.word.cmp(&y.solution.word))
            .then_with(|| x.record.start_index.cmp(&y.record.start_index))
    });
    let mut kept: Vec<StartResult<T>> = Vec::new();
    for r in found {
        let dup = kept.iter().any(|k| {
            k.solution.word == r.solution.word
                && (k.solution.total_length() - r.solution.total_length()).abs() <= lit(DUPLICATE_LENGTH_TOL)
        });
        if !dup {
            kept.push(r);
        }
    }
    if kept.is_empty() {
        return Err(SolveError::NoSolutionFound);
    }
    let (solutions, records) = kept.into_iter().map(|r| (r.solution, r.record)).unzip();
    Ok(SolveOutcome { solutions, records, starts_attempted: starts.len(), converged, seed: config.random_seed })
}
