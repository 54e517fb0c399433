//! Dense row-major matrices over any [`Scalar`], with the elimination
//! routines the rest of the crate leans on.

use std::ops::{Index, IndexMut};

use thiserror::Error;

use crate::scalar::{Scalar, TolerancePolicy};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is singular")]
    Singular,
    #[error("expected nullity {expected}, found rank deficiency inconsistent with it")]
    Nullity { expected: usize },
}

/// An `rows x cols` matrix. Square instances stand for linear maps; the
/// columns of a basis-change matrix are the new basis vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn scalar(n: usize, c: S) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c.clone();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<S>) -> Result<Self, MatrixError> {
        if data.len() != rows * cols {
            return Err(MatrixError::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self, MatrixError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(MatrixError::Dimension("ragged rows".into()));
        }
        Ok(Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// Matrix whose columns are `cols`, each of length `rows`.
    pub fn from_columns(rows: usize, cols: &[Vec<S>]) -> Result<Self, MatrixError> {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            if c.len() != rows {
                return Err(MatrixError::Dimension(format!(
                    "column {j} has length {}, expected {rows}",
                    c.len()
                )));
            }
            for (i, v) in c.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        Ok(m)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<S>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn to_float(&self) -> Matrix<S::Float> {
        self.map(|x| x.to_float())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a.clone() * other[(k, j)].clone();
                    let cur = std::mem::replace(&mut out[(i, j)], S::zero());
                    out[(i, j)] = cur + prod;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.clone() + b.clone()).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.clone() - b.clone()).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map(|x| x.clone() * c.clone())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::identity(self.rows);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn trace(&self) -> S {
        (0..self.rows.min(self.cols)).fold(S::zero(), |acc, i| acc + self[(i, i)].clone())
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(Scalar::magnitude).fold(0.0, f64::max)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(Scalar::magnitude).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        self.transpose().norm_inf()
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])].clone())
    }

    /// Block-diagonal `self (+) other`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)].clone();
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out[(self.rows + i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        out
    }

    pub fn block_diagonal(blocks: &[Self]) -> Self {
        blocks.iter().fold(Self::zeros(0, 0), |acc, b| acc.direct_sum(b))
    }

    pub fn approx_eq(&self, other: &Self, pol: &TolerancePolicy) -> bool {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return false;
        }
        if S::EXACT {
            return self == other;
        }
        let scale = self.max_abs().max(other.max_abs());
        self.sub(other).max_abs() <= pol.threshold(scale)
    }

    fn singular_threshold(&self) -> f64 {
        if S::EXACT {
            0.0
        } else {
            f64::EPSILON * self.max_abs() * (self.rows.max(1) as f64)
        }
    }

    pub fn inverse(&self) -> Result<Self, MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::Dimension("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let thresh = self.singular_threshold();
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for c in 0..n {
            let pivot = (c..n)
                .max_by(|&x, &y| a[(x, c)].magnitude().total_cmp(&a[(y, c)].magnitude()))
                .ok_or(MatrixError::Singular)?;
            if a[(pivot, c)].is_zero() || a[(pivot, c)].magnitude() <= thresh {
                return Err(MatrixError::Singular);
            }
            a.swap_rows(c, pivot);
            inv.swap_rows(c, pivot);
            let p = a[(c, c)].inv();
            a.scale_row(c, &p);
            inv.scale_row(c, &p);
            for r in 0..n {
                if r != c && !a[(r, c)].is_zero() {
                    let f = a[(r, c)].clone();
                    a.axpy_row(r, c, &f);
                    inv.axpy_row(r, c, &f);
                }
            }
        }
        Ok(inv)
    }

    pub fn det(&self) -> S {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut det = S::one();
        for c in 0..n {
            let Some(pivot) = (c..n)
                .filter(|&r| !a[(r, c)].is_zero())
                .max_by(|&x, &y| a[(x, c)].magnitude().total_cmp(&a[(y, c)].magnitude()))
            else {
                return S::zero();
            };
            if pivot != c {
                a.swap_rows(c, pivot);
                det = -det;
            }
            let p = a[(c, c)].clone();
            det = det * p.clone();
            let pinv = p.inv();
            for r in c + 1..n {
                if !a[(r, c)].is_zero() {
                    let f = a[(r, c)].clone() * pinv.clone();
                    for j in c..n {
                        let v = a[(r, j)].clone() - f.clone() * a[(c, j)].clone();
                        a[(r, j)] = v;
                    }
                }
            }
        }
        det
    }

    /// `||A||_1 * ||A^{-1}||_1`, infinite for singular input.
    pub fn condition_estimate(&self) -> f64 {
        match self.inverse() {
            Ok(inv) => self.norm_1() * inv.norm_1(),
            Err(_) => f64::INFINITY,
        }
    }

    /// Reduced row echelon form with partial pivoting. Pivots whose
    /// magnitude is negligible against the largest entry are treated as zero.
    pub fn rref(&self, pol: &TolerancePolicy) -> (Self, Vec<usize>) {
        let scale = self.max_abs();
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let best = (r..self.rows)
                .max_by(|&x, &y| a[(x, c)].magnitude().total_cmp(&a[(y, c)].magnitude()));
            let Some(best) = best else { break };
            if a[(best, c)].is_negligible(scale, pol) {
                for i in r..self.rows {
                    a[(i, c)] = S::zero();
                }
                continue;
            }
            a.swap_rows(r, best);
            let p = a[(r, c)].inv();
            a.scale_row(r, &p);
            for i in 0..self.rows {
                if i != r && !a[(i, c)].is_zero() {
                    let f = a[(i, c)].clone();
                    a.axpy_row(i, r, &f);
                    a[(i, c)] = S::zero();
                }
            }
            pivots.push(c);
            r += 1;
        }
        (a, pivots)
    }

    pub fn rank(&self, pol: &TolerancePolicy) -> usize {
        self.rref(pol).1.len()
    }

    /// Basis of the right null space `{x : A x = 0}`.
    pub fn kernel(&self, pol: &TolerancePolicy) -> Vec<Vec<S>> {
        let (r, pivots) = self.rref(pol);
        null_vectors(&r, &pivots, self.cols)
    }

    /// Null space of prescribed dimension: complete pivoting for
    /// `cols - nullity` steps, then back substitution. Exact kinds require
    /// the remaining block to vanish.
    pub fn kernel_with_nullity(&self, nullity: usize) -> Result<Vec<Vec<S>>, MatrixError> {
        let n = self.cols;
        if nullity > n {
            return Err(MatrixError::Nullity { expected: nullity });
        }
        let target_rank = n - nullity;
        if target_rank > self.rows {
            return Err(MatrixError::Nullity { expected: nullity });
        }
        let mut a = self.clone();
        let mut col_order: Vec<usize> = (0..n).collect();
        for step in 0..target_rank {
            let mut best = (step, step);
            let mut best_mag = -1.0;
            for i in step..a.rows {
                for j in step..n {
                    let m = a[(i, col_order[j])].magnitude();
                    if m > best_mag {
                        best_mag = m;
                        best = (i, j);
                    }
                }
            }
            if best_mag <= 0.0 {
                return Err(MatrixError::Nullity { expected: nullity });
            }
            a.swap_rows(step, best.0);
            col_order.swap(step, best.1);
            let pc = col_order[step];
            let p = a[(step, pc)].inv();
            a.scale_row(step, &p);
            for i in 0..a.rows {
                if i != step && !a[(i, pc)].is_zero() {
                    let f = a[(i, pc)].clone();
                    a.axpy_row(i, step, &f);
                    a[(i, pc)] = S::zero();
                }
            }
        }
        if S::EXACT {
            for i in target_rank..a.rows {
                for j in target_rank..n {
                    if !a[(i, col_order[j])].is_zero() {
                        return Err(MatrixError::Nullity { expected: nullity });
                    }
                }
            }
        }
        let pivots = &col_order[..target_rank];
        let mut basis = Vec::with_capacity(nullity);
        for &free in &col_order[target_rank..] {
            let mut x = vec![S::zero(); n];
            x[free] = S::one();
            for (row, &pc) in pivots.iter().enumerate() {
                x[pc] = -a[(row, free)].clone();
            }
            basis.push(x);
        }
        Ok(basis)
    }

    /// Solve `A X = B` for square invertible `A`.
    pub fn solve(&self, rhs: &Self) -> Result<Self, MatrixError> {
        Ok(self.inverse()?.mul(rhs))
    }

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn scale_row(&mut self, r: usize, c: &S) {
        for j in 0..self.cols {
            let v = std::mem::replace(&mut self[(r, j)], S::zero());
            self[(r, j)] = v * c.clone();
        }
    }

    /// `row[target] -= f * row[source]`
    fn axpy_row(&mut self, target: usize, source: usize, f: &S) {
        for j in 0..self.cols {
            if self[(source, j)].is_zero() {
                continue;
            }
            let v = self[(target, j)].clone() - f.clone() * self[(source, j)].clone();
            self[(target, j)] = v;
        }
    }
}

fn null_vectors<S: Scalar>(r: &Matrix<S>, pivots: &[usize], cols: usize) -> Vec<Vec<S>> {
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut x = vec![S::zero(); cols];
        x[free] = S::one();
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = -r[(row, free)].clone();
        }
        basis.push(x);
    }
    basis
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;

    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

/// Rank of the span of a list of coordinate vectors.
pub fn span_rank<S: Scalar>(vectors: &[Vec<S>], dim: usize, pol: &TolerancePolicy) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    Matrix::from_columns(dim, vectors)
        .map(|m| m.rank(pol))
        .unwrap_or(0)
}

/// Whether two lists of vectors span the same subspace.
pub fn same_span<S: Scalar>(a: &[Vec<S>], b: &[Vec<S>], dim: usize, pol: &TolerancePolicy) -> bool {
    let ra = span_rank(a, dim, pol);
    let rb = span_rank(b, dim, pol);
    let both: Vec<Vec<S>> = a.iter().chain(b).cloned().collect();
    ra == rb && span_rank(&both, dim, pol) == ra
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Q;

    fn qm(rows: &[&[i64]]) -> Matrix<Q> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| Q::from_i64(v)).collect()).collect())
            .unwrap()
    }

    #[test]
    fn exact_inverse_and_det() {
        let a = qm(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), Matrix::identity(3));
        assert_eq!(a.det(), Q::from_i64(18));
        assert_eq!(qm(&[&[1, 2], &[2, 4]]).inverse(), Err(MatrixError::Singular));
        assert_eq!(qm(&[&[1, 2], &[2, 4]]).det(), Q::from_i64(0));
    }

    #[test]
    fn kernel_exact() {
        let pol = TolerancePolicy::default();
        let a = qm(&[&[1, 2, 3], &[2, 4, 6]]);
        let k = a.kernel(&pol);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(a.mul_vec(v).iter().all(Scalar::is_zero));
        }
        let k2 = a.kernel_with_nullity(2).unwrap();
        assert_eq!(k2.len(), 2);
        for v in &k2 {
            assert!(a.mul_vec(v).iter().all(Scalar::is_zero));
        }
        assert!(a.kernel_with_nullity(1).is_err());
    }

    #[test]
    fn kernel_float_with_nullity() {
        let a = Matrix::from_rows(vec![vec![1.0, 1.0], vec![1.0, 1.0 + 1e-13]]).unwrap();
        let k = a.kernel_with_nullity(1).unwrap();
        let r = a.mul_vec(&k[0]);
        assert!(r.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn spans() {
        let pol = TolerancePolicy::default();
        let a = vec![vec![Q::from_i64(1), Q::from_i64(0)], vec![Q::from_i64(1), Q::from_i64(1)]];
        let b = vec![vec![Q::from_i64(0), Q::from_i64(1)], vec![Q::from_i64(2), Q::from_i64(0)]];
        assert!(same_span(&a, &b, 2, &pol));
        assert!(!same_span(&a[..1], &b[..1], 2, &pol));
    }
}
