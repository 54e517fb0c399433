//! Naive reference implementations shared by the integration tests.
//! Coefficients are addressed with explicit odometer loops and never go
//! through the library's flat indexing.

#![allow(dead_code)]

use multiform_core::{ComplexScalar, Matrix, MultiForm, RealScalar, Scalar, Q};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Every tuple in `0..dim` of length `n`, last position fastest.
pub fn tuples(n: usize, dim: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if dim == 0 {
        return out;
    }
    let mut cur = vec![0; n];
    loop {
        out.push(cur.clone());
        let mut k = n;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            cur[k] += 1;
            if cur[k] < dim {
                break;
            }
            cur[k] = 0;
        }
    }
}

pub fn naive_eval(f: &MultiForm<Q>, xs: &[Vec<Q>]) -> Q {
    let mut total = Q::zero();
    for idx in tuples(f.arity(), f.dim()) {
        let mut term = f.get(&idx).clone();
        for (k, &i) in idx.iter().enumerate() {
            term *= xs[k][i].clone();
        }
        total += term;
    }
    total
}

/// `(f . sigma)(x_1 .. x_n) = f(x_{sigma(1)} .. x_{sigma(n)})`.
pub fn naive_permute(f: &MultiForm<Q>, sigma: &[usize]) -> MultiForm<Q> {
    let mut out = MultiForm::zeros(f.arity(), f.dim());
    for idx in tuples(f.arity(), f.dim()) {
        let src: Vec<usize> = (0..idx.len()).map(|k| idx[sigma[k]]).collect();
        out.set(&idx, f.get(&src).clone());
    }
    out
}

/// `f(.., m x_slot, ..)`.
pub fn naive_contract(f: &MultiForm<Q>, slot: usize, m: &Matrix<Q>) -> MultiForm<Q> {
    let mut out = MultiForm::zeros(f.arity(), f.dim());
    for idx in tuples(f.arity(), f.dim()) {
        let mut acc = Q::zero();
        for j in 0..f.dim() {
            let mut src = idx.clone();
            src[slot] = j;
            acc += f.get(&src).clone() * m[(j, idx[slot])].clone();
        }
        out.set(&idx, acc);
    }
    out
}

/// Coefficients of `f` in the basis given by the columns of `c`.
pub fn naive_change_basis(f: &MultiForm<Q>, c: &Matrix<Q>) -> MultiForm<Q> {
    let mut out = MultiForm::zeros(f.arity(), f.dim());
    for idx in tuples(f.arity(), f.dim()) {
        let cols: Vec<Vec<Q>> = idx.iter().map(|&i| (0..f.dim()).map(|r| c[(r, i)].clone()).collect()).collect();
        out.set(&idx, naive_eval(f, &cols));
    }
    out
}

pub fn small_q(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Q {
    Q::from_i64(rng.random_range(lo..=hi))
}

pub fn random_q_form(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> MultiForm<Q> {
    MultiForm::from_fn(n, dim, |_| small_q(rng, -3, 3))
}

pub fn random_q_matrix(rng: &mut ChaCha8Rng, dim: usize) -> Matrix<Q> {
    Matrix::from_fn(dim, dim, |_, _| small_q(rng, -3, 3))
}

/// Real matrix of a complex one acting on `(re, im)` coordinate pairs.
pub fn realify<R: RealScalar>(m: &Matrix<R::Complex>) -> Matrix<R> {
    Matrix::from_fn(2 * m.rows(), 2 * m.cols(), |r, c| {
        let z = &m[(r / 2, c / 2)];
        match (r % 2, c % 2) {
            (0, 0) | (1, 1) => z.re(),
            (0, 1) => -z.im(),
            _ => z.im(),
        }
    })
}

/// Max-abs entry of `a - identity`.
pub fn distance_to_identity<S: Scalar>(a: &Matrix<S>) -> f64 {
    a.sub(&Matrix::identity(a.rows())).max_abs()
}
