//! The finite-dimensional program in the `5N` subarc lengths: objective,
//! equality constraints and their analytic first and second derivatives.

use crate::linalg::Matrix;
use crate::model::{ProblemSpec, StageHeading, SLOTS, SLOT_KINDS};
use crate::rollout::{stage_closure, stage_headings};
use crate::scalar::Scalar;

/// Weights of the five headings in the closed-form stage closure.
const W: [f64; 5] = [-1.0, 2.0, -2.0, 2.0, -1.0];

/// Program data for one problem. Variables are flattened stage-major.
#[derive(Clone, Debug, PartialEq)]
pub struct NlpInstance<T> {
    pub spec: ProblemSpec<T>,
    sigma: Vec<T>,
}

impl<T: Scalar> NlpInstance<T> {
    pub fn new(spec: ProblemSpec<T>) -> Self {
        let n = 5 * spec.stage_count();
        let sigma = (0..n).map(|v| SLOT_KINDS[v % SLOTS].turn_sign()).collect();
        Self { spec, sigma }
    }

    pub fn stages(&self) -> usize {
        self.spec.stage_count()
    }

    pub fn n_vars(&self) -> usize {
        5 * self.stages()
    }

    /// `2N` closure equations plus the terminal sine and cosine.
    pub fn n_constraints(&self) -> usize {
        2 * self.stages() + 2
    }

    pub fn objective(&self, x: &[T]) -> T {
        x.iter().fold(T::zero(), |s, v| s + *v)
    }

    /// Turning sign of each variable: +1 for L slots, -1 for R, 0 for S.
    pub fn turn_signs(&self) -> &[T] {
        &self.sigma
    }

    /// Stage headings from the recurrence; entries are read without validation.
    pub fn headings(&self, x: &[T]) -> Vec<StageHeading<T>> {
        let a = self.spec.curvature_bound;
        let mut theta = self.spec.start.theta;
        (0..self.stages())
            .map(|i| {
                let h = stage_headings(theta, &row(x, i), a);
                theta = h.theta5;
                h
            })
            .collect()
    }

    pub fn final_heading(&self, x: &[T]) -> T {
        self.headings(x).last().map(|h| h.theta5).unwrap_or(self.spec.start.theta)
    }

    /// Constraint values `rx_1, ry_1, ..., rx_N, ry_N, r_sin, r_cos`.
    pub fn constraints(&self, x: &[T]) -> Vec<T> {
        let hs = self.headings(x);
        let mut c = Vec::with_capacity(self.n_constraints());
        for (i, h) in hs.iter().enumerate() {
            let (rx, ry) = stage_closure(&self.spec, i, h, x[5 * i + 2]);
            c.push(rx);
            c.push(ry);
        }
        let th = hs.last().expect("at least one stage").theta5;
        c.push(th.sin() - self.spec.end.theta.sin());
        c.push(th.cos() - self.spec.end.theta.cos());
        c
    }

    /// Closure rows only (`2N` entries).
    pub fn closure_constraints(&self, x: &[T]) -> Vec<T> {
        let mut c = self.constraints(x);
        c.truncate(2 * self.stages());
        c
    }

    /// Analytic constraint Jacobian, `(2N + 2) x 5N`.
    pub fn jacobian(&self, x: &[T]) -> Matrix<T> {
        let n = self.n_vars();
        let a = self.spec.curvature_bound;
        let hs = self.headings(x);
        let mut jac = Matrix::zeros(self.n_constraints(), n);
        for (i, h) in hs.iter().enumerate() {
            let th = [h.theta0, h.theta1, h.theta2, h.theta4, h.theta5];
            let bounds = prefix_bounds(i);
            let s = 5 * i + 2;
            let xs = x[s];
            let (s2, c2) = h.theta2.sin_cos();
            for v in 0..=(5 * i + 4) {
                let sig = self.sigma[v];
                let mut dx = T::zero();
                let mut dy = T::zero();
                if sig != T::zero() {
                    for m in 0..5 {
                        if (v as isize) <= bounds[m] {
                            let w = crate::scalar::lit::<T>(W[m]);
                            dx = dx + w * th[m].cos() * sig;
                            dy = dy + w * th[m].sin() * sig;
                        }
                    }
                    if (v as isize) <= bounds[2] {
                        dx = dx - xs * s2 * a * sig;
                        dy = dy + xs * c2 * a * sig;
                    }
                }
                if v == s {
                    dx = dx + c2;
                    dy = dy + s2;
                }
                jac[(2 * i, v)] = dx;
                jac[(2 * i + 1, v)] = dy;
            }
        }
        let (st, ct) = hs.last().expect("at least one stage").theta5.sin_cos();
        let m = 2 * self.stages();
        for v in 0..n {
            let g = a * self.sigma[v];
            jac[(m, v)] = ct * g;
            jac[(m + 1, v)] = -st * g;
        }
        jac
    }

    /// Gradient of the final heading, constant in `x`.
    pub fn final_heading_gradient(&self) -> Vec<T> {
        let a = self.spec.curvature_bound;
        self.sigma.iter().map(|s| a * *s).collect()
    }

    /// `sum_k y_k * Hess c_k(x)` over all `2N + 2` constraints.
    pub fn constraint_hessian(&self, x: &[T], y: &[T]) -> Matrix<T> {
        let n = self.n_vars();
        let a = self.spec.curvature_bound;
        let hs = self.headings(x);
        let mut coef = vec![T::zero(); n];
        let mut hess = Matrix::zeros(n, n);
        for (i, h) in hs.iter().enumerate() {
            let (yx, yy) = (y[2 * i], y[2 * i + 1]);
            let th = [h.theta0, h.theta1, h.theta2, h.theta4, h.theta5];
            let bounds = prefix_bounds(i);
            for m in 0..5 {
                if bounds[m] >= 0 {
                    let w = crate::scalar::lit::<T>(W[m]);
                    let (sm, cm) = th[m].sin_cos();
                    let g = bounds[m] as usize;
                    coef[g] = coef[g] + a * w * (yy * cm - yx * sm);
                }
            }
            let s = 5 * i + 2;
            let (s2, c2) = h.theta2.sin_cos();
            let g2 = bounds[2] as usize;
            coef[g2] = coef[g2] - a * a * x[s] * (yx * c2 + yy * s2);
            let cross = a * (yy * c2 - yx * s2);
            for v in 0..=g2 {
                let val = cross * self.sigma[v];
                hess[(v, s)] = hess[(v, s)] + val;
                hess[(s, v)] = hess[(s, v)] + val;
            }
        }
        let m = 2 * self.stages();
        let (st, ct) = hs.last().expect("at least one stage").theta5.sin_cos();
        coef[n - 1] = coef[n - 1] - a * a * (y[m] * st + y[m + 1] * ct);
        let mut suffix = vec![T::zero(); n];
        let mut acc = T::zero();
        for g in (0..n).rev() {
            acc = acc + coef[g];
            suffix[g] = acc;
        }
        for v in 0..n {
            if self.sigma[v] == T::zero() {
                continue;
            }
            for w in 0..n {
                if self.sigma[w] == T::zero() {
                    continue;
                }
                let k = v.max(w);
                hess[(v, w)] = hess[(v, w)] + self.sigma[v] * self.sigma[w] * suffix[k];
            }
        }
        hess
    }
}

/// Builds the program for a validated problem.
pub fn assemble<T: Scalar>(spec: &ProblemSpec<T>) -> NlpInstance<T> {
    NlpInstance::new(spec.clone())
}

fn row<T: Scalar>(x: &[T], i: usize) -> [T; SLOTS] {
    let mut r = [T::zero(); SLOTS];
    r.copy_from_slice(&x[5 * i..5 * i + 5]);
    r
}

/// Last flat variable index feeding each of the headings `theta0, theta1, theta2, theta4, theta5` of stage `i`.
fn prefix_bounds(i: usize) -> [isize; 5] {
    let b = 5 * i as isize;
    [b - 1, b, b + 1, b + 3, b + 4]
}
