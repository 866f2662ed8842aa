//! Local solver: augmented Lagrangian on the equality constraints with a
//! projected Newton inner minimizer on the nonnegativity box, followed by a
//! Newton iteration on the optimality system of a fixed support.

use crate::error::SolveError;
use crate::linalg::{dot, norm_inf, Matrix, SymmetricEigen};
use crate::model::SubarcMatrix;
use crate::nlp::instance::NlpInstance;
use crate::scalar::{lit, to_f64, Scalar};

/// A direct Newton pass from the start is kept only if it moves no entry by
/// more than this fraction of the largest entry (at least 1).
const POLISH_REACH: f64 = 0.05;

/// Residual below which an augmented-Lagrangian subproblem may not increase
/// the constraint violation more than twofold.
const NEAR_FEASIBLE: f64 = 0.5;

/// Iteration limits of the local solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalLimits {
    pub max_outer: usize,
    pub max_inner: usize,
    pub max_polish: usize,
}

impl Default for LocalLimits {
    fn default() -> Self {
        Self { max_outer: 40, max_inner: 400, max_polish: 60 }
    }
}

/// A converged local solution with diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalOutcome<T> {
    pub xi: SubarcMatrix<T>,
    /// Multipliers of the `2N + 2` equality constraints.
    pub multipliers: Vec<T>,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub polish_iterations: usize,
    /// Infinity norm of the constraint values.
    pub residual: T,
    /// Infinity norm of the projected gradient of the Lagrangian.
    pub kkt: T,
}

/// Solves from `x0` to tolerance `tol` with default limits and no pinned variables.
pub fn solve_local<T: Scalar>(inst: &NlpInstance<T>, x0: &SubarcMatrix<T>, tol: T) -> Result<LocalOutcome<T>, SolveError> {
    let pinned = vec![false; inst.n_vars()];
    solve_local_with(inst, x0, tol, &LocalLimits::default(), &pinned)
}

/// Solves from `x0` with variables flagged in `pinned` held at zero.
///
/// A starting point that already satisfies the optimality conditions is
/// returned unchanged. Otherwise Newton's method is first applied to the
/// optimality system on the support of `x0`, and its result is kept only if it
/// is a KKT point of the full bound-constrained program close to `x0`. Failing that, the
/// augmented Lagrangian method runs to `tol`; when it stalls close to
/// feasibility, a final Newton pass on its support is attempted.
pub fn solve_local_with<T: Scalar>(
    inst: &NlpInstance<T>,
    x0: &SubarcMatrix<T>,
    tol: T,
    limits: &LocalLimits,
    pinned: &[bool],
) -> Result<LocalOutcome<T>, SolveError> {
    x0.check_stages(inst.stages())?;
    if tol.is_nan() || tol <= T::zero() {
        return Err(SolveError::InvalidConfig("tolerance must be positive".into()));
    }
    let mut x = x0.flat();
    for (v, p) in x.iter_mut().zip(pinned) {
        if *p {
            *v = T::zero();
        }
    }
    let mu = multiplier_estimate(inst, &x, pinned);
    let (res, kkt) = kkt_measure(inst, &x, &mu, pinned);
    if res <= tol && kkt <= tol {
        return Ok(LocalOutcome {
            xi: SubarcMatrix::from_flat(&x)?,
            multipliers: mu,
            outer_iterations: 0,
            inner_iterations: 0,
            polish_iterations: 0,
            residual: res,
            kkt,
        });
    }
    let support: Vec<bool> = x.iter().zip(pinned).map(|(v, p)| *p || *v == T::zero()).collect();
    if let Ok(out) = polish(inst, &x, &support, tol, limits.max_polish) {
        let (_, full_kkt) = kkt_measure(inst, &out.xi.flat(), &out.multipliers, pinned);
        let moved = out.xi.flat().iter().zip(&x).fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()));
        if full_kkt <= tol && moved <= lit::<T>(POLISH_REACH) * norm_inf(&x).max(T::one()) {
            return Ok(LocalOutcome { kkt: full_kkt, ..out });
        }
    }
    match augmented_lagrangian(inst, &x, tol, limits, pinned) {
        Ok(out) => Ok(out),
        Err((state, err)) => {
            if state.residual < lit(1e-5) {
                let support: Vec<bool> = state.x.iter().zip(pinned).map(|(v, p)| *p || *v <= tol).collect();
                if let Ok(mut out) = polish(inst, &state.x, &support, tol, limits.max_polish) {
                    out.outer_iterations = state.outer;
                    out.inner_iterations = state.inner;
                    return Ok(out);
                }
            }
            Err(err)
        }
    }
}

struct AlState<T> {
    x: Vec<T>,
    residual: T,
    outer: usize,
    inner: usize,
}

fn free_entries<T: Scalar>(v: &mut [T], pinned: &[bool]) {
    for (e, p) in v.iter_mut().zip(pinned) {
        if *p {
            *e = T::zero();
        }
    }
}

/// Gradient of the Lagrangian `1 + J^T mu`, zeroed on pinned variables.
fn lagrangian_gradient<T: Scalar>(jac: &Matrix<T>, mu: &[T], pinned: &[bool]) -> Vec<T> {
    let mut g = jac.tr_mul_vec(mu);
    for v in g.iter_mut() {
        *v = *v + T::one();
    }
    free_entries(&mut g, pinned);
    g
}

fn projected_gradient_norm<T: Scalar>(x: &[T], g: &[T]) -> T {
    x.iter().zip(g).fold(T::zero(), |m, (xv, gv)| m.max((*xv - (*xv - *gv).max(T::zero())).abs()))
}

/// Constraint residual and projected-gradient norm at `(x, mu)`.
pub fn kkt_measure<T: Scalar>(inst: &NlpInstance<T>, x: &[T], mu: &[T], pinned: &[bool]) -> (T, T) {
    let c = inst.constraints(x);
    let g = lagrangian_gradient(&inst.jacobian(x), mu, pinned);
    (norm_inf(&c), projected_gradient_norm(x, &g))
}

/// Least-squares multipliers: minimizes `|1 + J^T mu|` over the positive entries of `x`.
pub fn multiplier_estimate<T: Scalar>(inst: &NlpInstance<T>, x: &[T], pinned: &[bool]) -> Vec<T> {
    let jac = inst.jacobian(x);
    let support: Vec<usize> = (0..x.len()).filter(|v| !pinned[*v] && x[*v] > T::zero()).collect();
    let m = jac.rows();
    if support.is_empty() {
        return vec![T::zero(); m];
    }
    let mut normal = Matrix::zeros(m, m);
    let mut rhs = vec![T::zero(); m];
    for r in 0..m {
        for s in 0..=r {
            let v = support.iter().fold(T::zero(), |acc, j| acc + jac[(r, *j)] * jac[(s, *j)]);
            normal[(r, s)] = v;
            normal[(s, r)] = v;
        }
        rhs[r] = -support.iter().fold(T::zero(), |acc, j| acc + jac[(r, *j)]);
    }
    SymmetricEigen::new(&normal).pinv_solve(&rhs, lit(1e-12))
}

fn merit<T: Scalar>(inst: &NlpInstance<T>, x: &[T], mu: &[T], rho: T) -> T {
    let c = inst.constraints(x);
    inst.objective(x) + dot(mu, &c) + rho / lit(2.0) * dot(&c, &c)
}

fn augmented_lagrangian<T: Scalar>(
    inst: &NlpInstance<T>,
    x0: &[T],
    tol: T,
    limits: &LocalLimits,
    pinned: &[bool],
) -> Result<LocalOutcome<T>, (AlState<T>, SolveError)> {
    let mut x = x0.to_vec();
    let mut mu = multiplier_estimate(inst, &x, pinned);
    let mut rho = lit::<T>(10.0);
    let mut omega = lit::<T>(1e-2);
    let mut eta = lit::<T>(1e-1);
    let floor = tol * lit(0.1);
    let mut inner_total = 0;
    // Consecutive penalty increases that failed to reduce the residual by 10%.
    let mut stalled = 0;
    let mut last_increase_residual = T::infinity();
    for outer in 0..=limits.max_outer {
        let (res, kkt) = kkt_measure(inst, &x, &mu, pinned);
        if res <= tol && kkt <= tol {
            return Ok(LocalOutcome {
                xi: SubarcMatrix::from_flat(&x)
                    .map_err(|e| (AlState { x: x.clone(), residual: res, outer, inner: inner_total }, e.into()))?,
                multipliers: mu,
                outer_iterations: outer,
                inner_iterations: inner_total,
                polish_iterations: 0,
                residual: res,
                kkt,
            });
        }
        if outer == limits.max_outer {
            return Err((
                AlState { x, residual: res, outer, inner: inner_total },
                SolveError::MaxIterationsExceeded { residual: to_f64(res), kkt: to_f64(kkt) },
            ));
        }
        let before = x.clone();
        let it = inner_minimize(inst, &mut x, &mu, rho, omega.max(floor), limits.max_inner, pinned);
        inner_total += it;
        let c = inst.constraints(&x);
        let cn = norm_inf(&c);
        if res < lit(NEAR_FEASIBLE) && cn > eta.max(floor) && cn > lit::<T>(2.0) * res {
            // The subproblem left a nearly feasible point; retry from it with a stiffer penalty.
            x = before;
            rho = rho * lit(10.0);
            if rho > lit(1e12) {
                return Err((
                    AlState { x, residual: res, outer, inner: inner_total },
                    SolveError::DivergedPenalty { residual: to_f64(res) },
                ));
            }
            eta = (lit::<T>(0.1) / rho.powf(lit(0.1))).max(floor);
            omega = (T::one() / rho).max(floor);
            continue;
        }
        if cn <= eta.max(floor) {
            for (m, cv) in mu.iter_mut().zip(&c) {
                *m = *m + rho * *cv;
            }
            eta = (eta / rho.powf(lit(0.9))).max(floor);
            omega = (omega / rho).max(floor);
        } else {
            if cn > last_increase_residual * lit(0.9) {
                stalled += 1;
            } else {
                stalled = 0;
            }
            last_increase_residual = cn;
            rho = rho * lit(10.0);
            if rho > lit(1e12) || stalled >= 3 {
                return Err((
                    AlState { x, residual: cn, outer, inner: inner_total },
                    SolveError::DivergedPenalty { residual: to_f64(cn) },
                ));
            }
            eta = (lit::<T>(0.1) / rho.powf(lit(0.1))).max(floor);
            omega = (T::one() / rho).max(floor);
        }
    }
    unreachable!("loop returns on its last iteration")
}

/// Projected Newton minimization of the augmented Lagrangian over `x >= 0`.
/// Returns the number of iterations taken.
fn inner_minimize<T: Scalar>(
    inst: &NlpInstance<T>,
    x: &mut Vec<T>,
    mu: &[T],
    rho: T,
    omega: T,
    max_iter: usize,
    pinned: &[bool],
) -> usize {
    let n = x.len();
    let sigma_armijo = lit::<T>(1e-4);
    for iter in 0..max_iter {
        let c = inst.constraints(x);
        let jac = inst.jacobian(x);
        let y: Vec<T> = mu.iter().zip(&c).map(|(m, cv)| *m + rho * *cv).collect();
        let g = lagrangian_gradient(&jac, &y, pinned);
        let pg = projected_gradient_norm(x, &g);
        if pg <= omega {
            return iter;
        }
        let eps_active = pg.min(lit(1e-3));
        let active: Vec<bool> = (0..n).map(|v| pinned[v] || (x[v] <= eps_active && g[v] > T::zero())).collect();
        let free: Vec<usize> = (0..n).filter(|v| !active[*v]).collect();
        let mut hess = inst.constraint_hessian(x, &y);
        for r in 0..jac.rows() {
            let row = jac.row(r);
            for v in free.iter() {
                if row[*v] == T::zero() {
                    continue;
                }
                for w in free.iter() {
                    hess[(*v, *w)] = hess[(*v, *w)] + rho * row[*v] * row[*w];
                }
            }
        }
        let mut d = vec![T::zero(); n];
        if !free.is_empty() {
            let hf = hess.select(&free, &free);
            let eig = SymmetricEigen::new(&hf);
            let scale = eig.values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
            let delta = (scale * lit(1e-10)).max(lit(1e-10));
            let gf: Vec<T> = free.iter().map(|v| g[*v]).collect();
            let step = eig.apply(&gf, |l| -T::one() / l.abs().max(delta));
            for (k, v) in free.iter().enumerate() {
                d[*v] = step[k];
            }
        }
        for v in 0..n {
            if active[v] && !pinned[v] {
                d[v] = -g[v] / hess[(v, v)].abs().max(T::one());
            }
        }
        let phi0 = merit(inst, x, mu, rho);
        let mut alpha = T::one();
        let mut accepted = false;
        for _ in 0..50 {
            let trial: Vec<T> = (0..n).map(|v| (x[v] + alpha * d[v]).max(T::zero())).collect();
            let predicted =
                (0..n).fold(T::zero(), |s, v| if active[v] { s + g[v] * (trial[v] - x[v]) } else { s + alpha * g[v] * d[v] });
            let phi = merit(inst, &trial, mu, rho);
            if phi <= phi0 + sigma_armijo * predicted.min(T::zero()) {
                *x = trial;
                accepted = true;
                break;
            }
            alpha = alpha * lit(0.5);
        }
        if !accepted {
            return iter + 1;
        }
    }
    max_iter
}

/// Newton iteration on the optimality system restricted to the variables not
/// flagged in `zero`, which are held at exactly zero.
///
/// The terminal sine/cosine pair is replaced by the single equation
/// `theta_final - theta_f - 2 pi k = 0` with `k` fixed from the starting point,
/// which keeps the linear systems nonsingular. Multipliers are mapped back to
/// the sine/cosine pair on return.
pub fn polish<T: Scalar>(
    inst: &NlpInstance<T>,
    x0: &[T],
    zero: &[bool],
    tol: T,
    max_iter: usize,
) -> Result<LocalOutcome<T>, SolveError> {
    let n = inst.n_vars();
    let nc = 2 * inst.stages();
    let m = nc + 1;
    let free: Vec<usize> = (0..n).filter(|v| !zero[*v]).collect();
    let nf = free.len();
    let mut x: Vec<T> = (0..n).map(|v| if zero[v] { T::zero() } else { x0[v].max(T::zero()) }).collect();
    let theta_f = inst.spec.end.theta;
    let winding = ((inst.final_heading(&x) - theta_f) / T::TAU()).round();
    let target = theta_f + winding * T::TAU();
    let hgrad = inst.final_heading_gradient();

    let system = |x: &[T]| -> (Vec<T>, Matrix<T>) {
        let mut c = inst.closure_constraints(x);
        c.push(inst.final_heading(x) - target);
        let full = inst.jacobian(x);
        let mut jac = Matrix::zeros(m, nf);
        for r in 0..nc {
            for (k, v) in free.iter().enumerate() {
                jac[(r, k)] = full[(r, *v)];
            }
        }
        for (k, v) in free.iter().enumerate() {
            jac[(nc, k)] = hgrad[*v];
        }
        (c, jac)
    };
    let stationarity = |jac: &Matrix<T>, mu: &[T]| -> Vec<T> {
        let mut s = jac.tr_mul_vec(mu);
        for v in s.iter_mut() {
            *v = *v + T::one();
        }
        s
    };
    let ls_mu = |jac: &Matrix<T>| -> Vec<T> {
        let mut normal = Matrix::zeros(m, m);
        let mut rhs = vec![T::zero(); m];
        for r in 0..m {
            for s in 0..=r {
                let v = dot(jac.row(r), jac.row(s));
                normal[(r, s)] = v;
                normal[(s, r)] = v;
            }
            rhs[r] = -jac.row(r).iter().fold(T::zero(), |a, b| a + *b);
        }
        SymmetricEigen::new(&normal).pinv_solve(&rhs, lit(1e-13))
    };

    let (mut c, mut jac) = system(&x);
    let mut mu = ls_mu(&jac);
    let mut iterations = 0;
    loop {
        let st = stationarity(&jac, &mu);
        let res = norm_inf(&c);
        let kkt = norm_inf(&st);
        let mu_scale = norm_inf(&mu).max(T::one());
        if res <= tol && kkt <= tol * mu_scale {
            let full = finish(inst, &x, &mu, zero, iterations)?;
            let full_res = full.residual;
            if full_res <= tol {
                return Ok(full);
            }
        }
        if iterations >= max_iter {
            return Err(SolveError::StructureInfeasible { residual: to_f64(res), kkt: to_f64(kkt) });
        }
        iterations += 1;

        // Hessian of the Lagrangian on the free variables; the heading equation is linear.
        let mut y = vec![T::zero(); inst.n_constraints()];
        y[..nc].copy_from_slice(&mu[..nc]);
        let hess = inst.constraint_hessian(&x, &y).select(&free, &free);
        let dim = nf + m;
        let mut kkt_mat = Matrix::zeros(dim, dim);
        for i in 0..nf {
            for j in 0..nf {
                kkt_mat[(i, j)] = hess[(i, j)];
            }
        }
        for r in 0..m {
            for k in 0..nf {
                kkt_mat[(nf + r, k)] = jac[(r, k)];
                kkt_mat[(k, nf + r)] = jac[(r, k)];
            }
        }
        let mut rhs = vec![-T::one(); nf];
        rhs.extend(c.iter().map(|v| -*v));
        let sol = SymmetricEigen::new(&kkt_mat).pinv_solve(&rhs, lit(1e-14));
        let dx = &sol[..nf];
        let mu_new = sol[nf..].to_vec();

        let norm0 = {
            let st = stationarity(&jac, &mu);
            dot(&st, &st) + dot(&c, &c)
        };
        let mut alpha = T::one();
        for (k, v) in free.iter().enumerate() {
            if dx[k] < T::zero() {
                let limit = lit::<T>(0.99) * x[*v] / -dx[k];
                alpha = alpha.min(limit);
            }
        }
        let mut accepted = None;
        let mut a = alpha;
        for _ in 0..30 {
            let mut trial = x.clone();
            for (k, v) in free.iter().enumerate() {
                trial[*v] = (x[*v] + a * dx[k]).max(T::zero());
            }
            let trial_mu: Vec<T> = mu.iter().zip(&mu_new).map(|(o, nw)| *o + a * (*nw - *o)).collect();
            let (tc, tj) = system(&trial);
            let ts = stationarity(&tj, &trial_mu);
            let norm = dot(&ts, &ts) + dot(&tc, &tc);
            if norm < norm0 || norm <= (tol * tol) {
                accepted = Some((trial, trial_mu, tc, tj));
                break;
            }
            a = a * lit(0.5);
        }
        match accepted {
            Some((tx, tmu, tc, tj)) => {
                x = tx;
                mu = tmu;
                c = tc;
                jac = tj;
            }
            None => {
                return Err(SolveError::StructureInfeasible { residual: to_f64(res), kkt: to_f64(kkt) });
            }
        }
    }
}

fn finish<T: Scalar>(
    inst: &NlpInstance<T>,
    x: &[T],
    mu: &[T],
    zero: &[bool],
    iterations: usize,
) -> Result<LocalOutcome<T>, SolveError> {
    let nc = 2 * inst.stages();
    let theta = inst.final_heading(x);
    let mut multipliers = mu[..nc].to_vec();
    multipliers.push(mu[nc] * theta.cos());
    multipliers.push(-mu[nc] * theta.sin());
    let c = inst.constraints(x);
    let g = lagrangian_gradient(&inst.jacobian(x), &multipliers, zero);
    let kkt = (0..x.len()).filter(|v| !zero[*v]).fold(T::zero(), |acc, v| acc.max(g[v].abs()));
    Ok(LocalOutcome {
        xi: SubarcMatrix::from_flat(x)?,
        multipliers,
        outer_iterations: 0,
        inner_iterations: 0,
        polish_iterations: iterations,
        residual: norm_inf(&c),
        kkt,
    })
}
