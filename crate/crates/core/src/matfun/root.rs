//! Polynomials `f` with `f(T)^m = T^{-1}` for maps with a single eigenvalue
//! (or a single conjugate pair over the reals).

use super::poly::{add, mul, rem_monic, Poly};
use super::{Eigen, MatFunError};
use crate::matrix::Matrix;
use crate::scalar::{ComplexScalar, RealScalar, Scalar};

/// Taylor coefficients of `x^{-1/m}` at `lambda`, up to degree `d - 1`.
fn inverse_root_series<S: Scalar>(lambda: &S, m: u32, d: usize) -> Result<Vec<S>, MatFunError> {
    if lambda.is_zero() {
        return Err(MatFunError::SingularInput);
    }
    let r = lambda.nth_root(m)?.inv();
    let lam_inv = lambda.inv();
    let mm = m as i64;
    let mut out = Vec::with_capacity(d);
    let mut b = S::one();
    let mut lam_pow = S::one();
    for j in 0..d as i64 {
        if j > 0 {
            b = b * S::from_ratio(-1 - mm * (j - 1), mm * j);
            lam_pow = lam_pow * lam_inv.clone();
        }
        out.push(r.clone() * b.clone() * lam_pow.clone());
    }
    Ok(out)
}

/// `f` with `f(T)^m T = I` when `T - lambda I` is nilpotent.
///
/// The series is cut at the size of `t`, which bounds the nilpotency index.
pub fn inverse_root_poly_complex<S: Scalar>(t: &Matrix<S>, lambda: &S, m: u32) -> Result<Poly<S>, MatFunError> {
    check_square(t, m)?;
    let coeffs = inverse_root_series(lambda, m, t.rows().max(1))?;
    Ok(Poly { center: lambda.clone(), coeffs })
}

/// Real-coefficient `f` with `f(T)^m T = I` for a real map whose spectrum is
/// one positive number or one conjugate pair `a +- ib`.
pub fn inverse_root_poly_real<S: RealScalar>(t: &Matrix<S>, group: &Eigen<S>, m: u32) -> Result<Poly<S>, MatFunError> {
    check_square(t, m)?;
    match group {
        Eigen::Single(lambda) => {
            if lambda.is_negative() {
                return Err(MatFunError::NegativeRealEigenvalue(lambda.format()));
            }
            inverse_root_poly_complex(t, lambda, m)
        }
        Eigen::Pair { re, im } => pair_inverse_root(t.rows(), re, im, m),
    }
}

fn check_square<S: Scalar>(t: &Matrix<S>, m: u32) -> Result<(), MatFunError> {
    if !t.is_square() {
        return Err(MatFunError::Dimension(format!("{}x{} map is not square", t.rows(), t.cols())));
    }
    if m == 0 {
        return Err(MatFunError::Dimension("root order must be positive".into()));
    }
    Ok(())
}

/// `(y^2 + 1)^k`, constant term first.
fn unit_circle_power<S: Scalar>(k: usize) -> Vec<S> {
    let base = vec![S::one(), S::zero(), S::one()];
    (0..k).fold(vec![S::one()], |acc, _| mul(&acc, &base))
}

/// `p` with `p(Y)^2 = -I` modulo `(y^2 + 1)^k`, i.e. for every `Y` whose
/// eigenvalues are `+-i` with nilpotency index at most `k`.
///
/// Starts from `p = y` and sharpens with `p <- (3p + p^3) / 2`; each round at
/// least halves the nilpotency index of `p(Y) -+ iI`.
pub fn unit_root_poly<S: Scalar>(k: usize) -> Vec<S> {
    unit_root_rounds(k, rounds_needed(k))
}

pub(crate) fn rounds_needed(k: usize) -> usize {
    let mut r = 0;
    while (1usize << r) < k {
        r += 1;
    }
    r
}

pub(crate) fn unit_root_rounds<S: Scalar>(k: usize, rounds: usize) -> Vec<S> {
    let q = unit_circle_power::<S>(k);
    let mut p = vec![S::zero(), S::one()];
    let three_half = S::from_ratio(3, 2);
    let half = S::from_ratio(1, 2);
    for _ in 0..rounds {
        let cube = rem_monic(&mul(&mul(&p, &p), &p), &q);
        let lin: Vec<S> = p.iter().map(|c| c.clone() * three_half.clone()).collect();
        let cub: Vec<S> = cube.iter().map(|c| c.clone() * half.clone()).collect();
        p = rem_monic(&add(&lin, &cub), &q);
    }
    p
}

fn pair_inverse_root<S: RealScalar>(dim: usize, a: &S, b: &S, m: u32) -> Result<Poly<S>, MatFunError> {
    if !dim.is_multiple_of(2) {
        return Err(MatFunError::Dimension(format!("conjugate pair block of odd size {dim}")));
    }
    if b.is_negative() || b.is_zero() {
        return Err(MatFunError::Dimension("pair imaginary part must be positive".into()));
    }
    let k = dim / 2;
    let lambda = S::Complex::from_parts(a.clone(), b.clone());
    let c = inverse_root_series(&lambda, m, k)?;

    // g(y) = sum c_j b^j (y - i)^j, expanded in powers of y.
    let shift = vec![-S::Complex::i(), S::Complex::one()];
    let bc = S::Complex::from_real(b.clone());
    let mut g = vec![S::Complex::zero()];
    let mut power = vec![S::Complex::one()];
    let mut bpow = S::Complex::one();
    for cj in &c {
        let term: Vec<S::Complex> = power.iter().map(|p| p.clone() * cj.clone() * bpow.clone()).collect();
        g = add(&g, &term);
        power = mul(&power, &shift);
        bpow = bpow * bc.clone();
    }
    let g0: Vec<S> = g.iter().map(|z| z.re()).collect();
    let g1: Vec<S> = g.iter().map(|z| z.im()).collect();

    let q = unit_circle_power::<S>(k);
    let p = unit_root_poly::<S>(k);
    let f = rem_monic(&add(&g0, &mul(&p, &g1)), &q);

    // back from y = (x - a) / b
    let binv = b.inv();
    let mut scale = S::one();
    let coeffs = f
        .into_iter()
        .map(|fj| {
            let v = fj * scale.clone();
            scale = scale.clone() * binv.clone();
            v
        })
        .collect();
    Ok(Poly { center: a.clone(), coeffs })
}
