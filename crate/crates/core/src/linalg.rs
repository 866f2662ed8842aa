//! Small dense linear algebra: row-major matrices and a symmetric eigensolver
//! (Householder tridiagonalization followed by implicit QL).

use std::ops::{Index, IndexMut};

use crate::scalar::{lit, Scalar};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `A v`.
    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.rows).map(|r| dot(self.row(r), v)).collect()
    }

    /// `A^T v`.
    pub fn tr_mul_vec(&self, v: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.cols];
        for (r, vr) in v.iter().enumerate() {
            if *vr == T::zero() {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                *o = *o + *a * *vr;
            }
        }
        out
    }

    /// Submatrix with the given rows and columns.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut m = Self::zeros(rows.len(), cols.len());
        for (i, r) in rows.iter().enumerate() {
            for (j, c) in cols.iter().enumerate() {
                m[(i, j)] = self[(*r, *c)];
            }
        }
        m
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + *x * *y)
}

pub fn norm_inf<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

pub fn norm2<T: Scalar>(v: &[T]) -> T {
    dot(v, v).sqrt()
}

/// Eigen-decomposition `A = V diag(values) V^T` of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    /// Eigenvectors stored as columns.
    pub vectors: Matrix<T>,
}

impl<T: Scalar> SymmetricEigen<T> {
    /// Decomposes a symmetric matrix; only the lower triangle is read.
    pub fn new(a: &Matrix<T>) -> Self {
        let n = a.rows();
        assert_eq!(n, a.cols(), "eigen-decomposition needs a square matrix");
        let mut v = a.clone();
        for i in 0..n {
            for j in 0..i {
                v[(j, i)] = v[(i, j)];
            }
        }
        let mut d = vec![T::zero(); n];
        let mut e = vec![T::zero(); n];
        if n > 0 {
            tred2(&mut v, &mut d, &mut e);
            tql2(&mut v, &mut d, &mut e);
        }
        Self { values: d, vectors: v }
    }

    /// Applies `sum_i v_i (v_i . b) f(lambda_i)`.
    pub fn apply<F: Fn(T) -> T>(&self, b: &[T], f: F) -> Vec<T> {
        let n = self.values.len();
        let mut out = vec![T::zero(); n];
        for k in 0..n {
            let scale = f(self.values[k]);
            if scale == T::zero() {
                continue;
            }
            let proj = b.iter().enumerate().fold(T::zero(), |s, (i, bv)| s + self.vectors[(i, k)] * *bv);
            let c = proj * scale;
            for (i, o) in out.iter_mut().enumerate() {
                *o = *o + c * self.vectors[(i, k)];
            }
        }
        out
    }

    /// Minimum-norm least-squares solution, dropping eigenvalues below `rcond * max|lambda|`.
    pub fn pinv_solve(&self, b: &[T], rcond: T) -> Vec<T> {
        let cut = rcond * self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        self.apply(b, |l| if l.abs() > cut { T::one() / l } else { T::zero() })
    }

    pub fn min_abs(&self) -> T {
        self.values.iter().fold(T::infinity(), |m, v| m.min(v.abs()))
    }
}

fn tred2<T: Scalar>(v: &mut Matrix<T>, d: &mut [T], e: &mut [T]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for dk in d.iter().take(i) {
            scale = scale + dk.abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = T::zero();
                v[(j, i)] = T::zero();
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk = *dk / scale;
                h = h + *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h = h - f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = T::zero();
            }
            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g = g + v[(k, j)] * d[k];
                    e[k] = e[k] + v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] = e[j] / h;
                f = f + e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] = e[j] - hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[(k, j)] = v[(k, j)] - (f * e[k] + g * d[k]);
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = T::zero();
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g = g + v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] = v[(k, j)] - g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = T::zero();
    }
    v[(n - 1, n - 1)] = T::one();
    e[0] = T::zero();
}

fn tql2<T: Scalar>(v: &mut Matrix<T>, d: &mut [T], e: &mut [T]) {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    let eps = T::epsilon();
    let two = lit::<T>(2.0);
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di = *di - h;
                }
                f = f + h;
                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[(k, i + 1)];
                        v[(k, i + 1)] = s * v[(k, i)] + c * h;
                        v[(k, i)] = c * v[(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 || iter > 60 {
                    break;
                }
            }
        }
        d[l] = d[l] + f;
        e[l] = T::zero();
    }
}
