use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// A polynomial in Taylor form around `center`:
/// `f(x) = sum_k coeffs[k] * (x - center)^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<S> {
    pub center: S,
    pub coeffs: Vec<S>,
}

impl<S: Scalar> Poly<S> {
    pub fn monomial(coeffs: Vec<S>) -> Self {
        Self { center: S::zero(), coeffs }
    }

    pub fn constant(c: S) -> Self {
        Self::monomial(vec![c])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Expanded coefficients in powers of `x`, constant term first.
    pub fn monomial_coeffs(&self) -> Vec<S> {
        // (x - c)^k expanded by repeated multiplication.
        let mut out = vec![S::zero(); self.coeffs.len()];
        let mut power = vec![S::one()];
        for a in &self.coeffs {
            for (o, p) in out.iter_mut().zip(&power) {
                let cur = std::mem::replace(o, S::zero());
                *o = cur + a.clone() * p.clone();
            }
            power = mul(&power, &[-self.center.clone(), S::one()]);
        }
        out
    }

    pub fn eval(&self, x: &S) -> S {
        let y = x.clone() - self.center.clone();
        self.coeffs.iter().rev().fold(S::zero(), |acc, c| acc * y.clone() + c.clone())
    }
}

/// Horner evaluation of `f(T)`.
pub fn poly_apply<S: Scalar>(f: &Poly<S>, t: &Matrix<S>) -> Matrix<S> {
    assert!(t.is_square(), "polynomial of a non-square matrix");
    let n = t.rows();
    let shifted = t.sub(&Matrix::scalar(n, f.center.clone()));
    let mut acc = Matrix::zeros(n, n);
    for c in f.coeffs.iter().rev() {
        acc = acc.mul(&shifted).add(&Matrix::scalar(n, c.clone()));
    }
    acc
}

// Dense monomial-coefficient helpers (constant term first).

pub(crate) fn trim<S: Scalar>(mut p: Vec<S>) -> Vec<S> {
    while p.len() > 1 && p.last().is_some_and(Scalar::is_zero) {
        p.pop();
    }
    p
}

pub(crate) fn add<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(S::zero);
            let y = b.get(i).cloned().unwrap_or_else(S::zero);
            x + y
        })
        .collect()
}

pub(crate) fn mul<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![S::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            let cur = std::mem::replace(&mut out[i + j], S::zero());
            out[i + j] = cur + x.clone() * y.clone();
        }
    }
    out
}

/// Remainder of `a` modulo a monic `m`.
pub(crate) fn rem_monic<S: Scalar>(a: &[S], m: &[S]) -> Vec<S> {
    let dm = m.len() - 1;
    let mut r = a.to_vec();
    while r.len() > dm {
        let lead = r.pop().unwrap();
        if lead.is_zero() {
            continue;
        }
        let shift = r.len() - dm;
        for (k, mk) in m[..dm].iter().enumerate() {
            let v = r[shift + k].clone() - lead.clone() * mk.clone();
            r[shift + k] = v;
        }
    }
    r
}

/// Quotient and remainder of `a` by a monic `m`.
pub(crate) fn divmod_monic<S: Scalar>(a: &[S], m: &[S]) -> (Vec<S>, Vec<S>) {
    let dm = m.len() - 1;
    if a.len() <= dm {
        return (vec![S::zero()], a.to_vec());
    }
    let mut r = a.to_vec();
    let mut q = vec![S::zero(); a.len() - dm];
    while r.len() > dm {
        let lead = r.pop().unwrap();
        let shift = r.len() - dm;
        q[shift] = lead.clone();
        if lead.is_zero() {
            continue;
        }
        for (k, mk) in m[..dm].iter().enumerate() {
            let v = r[shift + k].clone() - lead.clone() * mk.clone();
            r[shift + k] = v;
        }
    }
    (q, r)
}

pub(crate) fn eval_monomial<S: Scalar>(p: &[S], x: &S) -> S {
    p.iter().rev().fold(S::zero(), |acc, c| acc * x.clone() + c.clone())
}
