//! Dense two-phase simplex for small linear programs
//! `maximize c.x subject to A x <= b, x >= 0`, with Bland's rule.

use crate::linalg::Matrix;
use crate::scalar::{lit, Scalar};

/// Result of a linear program.
#[derive(Clone, Debug, PartialEq)]
pub enum LpResult<T> {
    /// `dual` holds one nonnegative price per constraint row.
    Optimal {
        x: Vec<T>,
        value: T,
        dual: Vec<T>,
    },
    Infeasible,
    Unbounded,
}

struct Tableau<T> {
    /// `rows x (cols + 1)`; the last column is the right-hand side.
    t: Vec<Vec<T>>,
    basis: Vec<usize>,
    cols: usize,
    eps: T,
}

impl<T: Scalar> Tableau<T> {
    fn pivot(&mut self, r: usize, c: usize, obj: &mut [T]) {
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v = *v / p;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != T::zero() {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v = *v - f * *pv;
                }
            }
        }
        let f = obj[c];
        if f != T::zero() {
            for (v, pv) in obj.iter_mut().zip(&pivot_row) {
                *v = *v - f * *pv;
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes with reduced-cost row `obj` (entries are `c_j - z_j`, last entry `-value`).
    /// Columns flagged in `blocked` never enter. Returns false when unbounded.
    fn run(&mut self, obj: &mut [T], blocked: &[bool]) -> bool {
        let max_iter = 50 * (self.cols + self.t.len()) + 1000;
        for _ in 0..max_iter {
            let entering = (0..self.cols).find(|j| !blocked[*j] && obj[*j] > self.eps);
            let Some(c) = entering else { return true };
            let mut best: Option<(usize, T)> = None;
            for (i, row) in self.t.iter().enumerate() {
                if row[c] > self.eps {
                    let ratio = row[self.cols] / row[c];
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - self.eps || (ratio <= br + self.eps && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, c, obj),
            }
        }
        true
    }
}

/// Solves `maximize c.x` subject to `A x <= b`, `x >= 0`.
pub fn simplex_max<T: Scalar>(a: &Matrix<T>, b: &[T], c: &[T]) -> LpResult<T> {
    let m = a.rows();
    let n = a.cols();
    let n_art = b.iter().filter(|v| **v < T::zero()).count();
    let cols = n + m + n_art;
    let scale = a.max_abs().max(T::one());
    let eps = lit::<T>(1e-11) * scale;
    let mut t = vec![vec![T::zero(); cols + 1]; m];
    let mut basis = vec![0; m];
    let mut art = 0;
    for i in 0..m {
        let sign = if b[i] < T::zero() { -T::one() } else { T::one() };
        for j in 0..n {
            t[i][j] = sign * a[(i, j)];
        }
        t[i][n + i] = sign;
        t[i][cols] = sign * b[i];
        if b[i] < T::zero() {
            t[i][n + m + art] = T::one();
            basis[i] = n + m + art;
            art += 1;
        } else {
            basis[i] = n + i;
        }
    }
    let mut tab = Tableau { t, basis, cols, eps };
    let mut blocked = vec![false; cols];

    if n_art > 0 {
        // Phase one: maximize -(sum of artificials).
        let mut obj = vec![T::zero(); cols + 1];
        for o in &mut obj[n + m..cols] {
            *o = -T::one();
        }
        for i in 0..m {
            if tab.basis[i] >= n + m {
                for (o, v) in obj.iter_mut().zip(&tab.t[i]) {
                    *o = *o + *v;
                }
            }
        }
        tab.run(&mut obj, &blocked);
        // obj[cols] holds the remaining artificial mass.
        if obj[cols] > lit::<T>(1e-9) * scale {
            return LpResult::Infeasible;
        }
        for i in 0..m {
            if tab.basis[i] >= n + m {
                if let Some(c) = (0..n + m).find(|j| tab.t[i][*j].abs() > eps) {
                    let mut dummy = vec![T::zero(); cols + 1];
                    tab.pivot(i, c, &mut dummy);
                }
            }
        }
        for flag in blocked.iter_mut().skip(n + m) {
            *flag = true;
        }
    }

    let mut obj = vec![T::zero(); cols + 1];
    obj[..n].copy_from_slice(c);
    for i in 0..m {
        let bj = tab.basis[i];
        let cb = if bj < n { c[bj] } else { T::zero() };
        if cb != T::zero() {
            for (o, v) in obj.iter_mut().zip(&tab.t[i]) {
                *o = *o - cb * *v;
            }
        }
    }
    if !tab.run(&mut obj, &blocked) {
        return LpResult::Unbounded;
    }
    let mut x = vec![T::zero(); n];
    for i in 0..m {
        if tab.basis[i] < n {
            x[tab.basis[i]] = tab.t[i][cols];
        }
    }
    let value = x.iter().zip(c).fold(T::zero(), |s, (xv, cv)| s + *xv * *cv);
    // The reduced cost of a slack column is minus the price of its row.
    let dual = (0..m).map(|i| (-obj[n + i]).max(T::zero())).collect();
    LpResult::Optimal { x, value, dual }
}
