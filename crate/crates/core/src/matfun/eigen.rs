//! Eigenvalues: a complex shifted-QR solver for float work and exact
//! root extraction from the characteristic polynomial.

use num::bigint::BigInt;
use num::Integer;

use super::poly::{divmod_monic, eval_monomial, trim};
use super::MatFunError;
use crate::matrix::Matrix;
use crate::scalar::{ComplexScalar, Scalar, C64};

/// Eigenvalues of a complex square matrix, with multiplicity.
pub fn eigenvalues_c64(a: &Matrix<C64>) -> Result<Vec<C64>, MatFunError> {
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = hessenberg(a);
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        // deflation point
        let mut l = hi;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let diag = h[(l, l)].norm() + h[(l - 1, l - 1)].norm();
            if sub <= f64::EPSILON * diag.max(scale * 1e-3) {
                h[(l, l - 1)] = C64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 200 * n {
            return Err(MatFunError::NoConvergence);
        }
        let mu = if iter.is_multiple_of(11) {
            // exceptional shift
            h[(hi, hi)] + C64::new(h[(hi, hi - 1)].norm() * 0.75, h[(hi, hi - 1)].norm() * 0.5)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        qr_step(&mut h, l, hi, mu);
    }
    Ok((0..n).map(|i| h[(i, i)]).collect())
}

fn hessenberg(a: &Matrix<C64>) -> Matrix<C64> {
    let n = a.rows();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let xnorm = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 { C64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        let mut v: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in &mut v {
            *z /= vnorm;
        }
        // H <- (I - 2 v v*) H (I - 2 v v*)
        for j in 0..n {
            let dot: C64 = v.iter().enumerate().map(|(t, vi)| vi.conj() * h[(k + 1 + t, j)]).sum();
            for (t, vi) in v.iter().enumerate() {
                h[(k + 1 + t, j)] -= *vi * dot * 2.0;
            }
        }
        for i in 0..n {
            let dot: C64 = v.iter().enumerate().map(|(t, vi)| h[(i, k + 1 + t)] * *vi).sum();
            for (t, vi) in v.iter().enumerate() {
                h[(i, k + 1 + t)] -= dot * vi.conj() * 2.0;
            }
        }
    }
    h
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let m1 = (a + d) * 0.5 + disc;
    let m2 = (a + d) * 0.5 - disc;
    if (m1 - d).norm() < (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// One shifted QR sweep on the active window `lo..=hi` via Givens rotations.
fn qr_step(h: &mut Matrix<C64>, lo: usize, hi: usize, mu: C64) {
    for i in lo..=hi {
        h[(i, i)] -= mu;
    }
    let mut rots = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let x = h[(k, k)];
        let y = h[(k + 1, k)];
        let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 { (C64::new(1.0, 0.0), C64::new(0.0, 0.0)) } else { (x / r, y / r) };
        for j in k..=hi {
            let a = h[(k, j)];
            let b = h[(k + 1, j)];
            h[(k, j)] = c.conj() * a + s.conj() * b;
            h[(k + 1, j)] = -s * a + c * b;
        }
        rots.push((c, s));
    }
    for (off, (c, s)) in rots.into_iter().enumerate() {
        let k = lo + off;
        for i in lo..=hi.min(k + 2) {
            let a = h[(i, k)];
            let b = h[(i, k + 1)];
            h[(i, k)] = a * c + b * s;
            h[(i, k + 1)] = -a * s.conj() + b * c.conj();
        }
    }
    for i in lo..=hi {
        h[(i, i)] += mu;
    }
}

/// Single-linkage clustering of eigenvalues at relative distance `rel`
/// (with an absolute floor for eigenvalues near zero).
pub fn cluster(values: &[C64], rel: f64, floor: f64) -> Vec<Vec<C64>> {
    let n = values.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (values[i], values[j]);
            if (a - b).norm() <= rel * a.norm().max(b.norm()) + floor {
                let (ri, rj) = (find(&mut label, i), find(&mut label, j));
                label[ri] = rj;
            }
        }
    }
    let mut groups: Vec<(usize, Vec<C64>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut label, i);
        match groups.iter_mut().find(|(root, _)| *root == r) {
            Some((_, g)) => g.push(values[i]),
            None => groups.push((r, vec![values[i]])),
        }
    }
    groups.into_iter().map(|(_, g)| g).collect()
}

pub fn mean(values: &[C64]) -> C64 {
    values.iter().sum::<C64>() / values.len() as f64
}

/// Characteristic polynomial `det(xI - A)` (monic, constant term first)
/// by the Faddeev-LeVerrier recurrence.
pub fn characteristic_polynomial<S: Scalar>(a: &Matrix<S>) -> Vec<S> {
    let n = a.rows();
    let mut coeffs = vec![S::zero(); n + 1];
    coeffs[n] = S::one();
    let mut m = Matrix::zeros(n, n);
    for k in 1..=n {
        m = a.mul(&m).add(&Matrix::scalar(n, coeffs[n - k + 1].clone()));
        let am = a.mul(&m);
        coeffs[n - k] = -am.trace() / S::from_i64(k as i64);
    }
    coeffs
}

/// Exact factor of the characteristic polynomial found for a value.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum ExactFactor<S: Scalar> {
    Linear { root: S, multiplicity: usize },
    /// `x^2 - 2 a x + (a^2 + b^2)` with `b > 0`.
    Quadratic { re: S::Real, im: S::Real, multiplicity: usize },
}

/// Split the characteristic polynomial of an exact matrix over its field.
///
/// After scaling by the common denominator `L` of the entries, `L*A` has a
/// monic integral characteristic polynomial, so every root in the field is
/// an integer (a Gaussian integer for `Qi`) over `L`. Candidates come from
/// rounding float eigenvalue estimates to that lattice; each is confirmed
/// by exact division. `allow_pairs` additionally extracts real quadratic
/// factors with rational `a`, `b`.
pub(crate) fn exact_factors<S: Scalar>(
    a: &Matrix<S>,
    allow_pairs: bool,
) -> Result<Vec<ExactFactor<S>>, MatFunError> {
    let n = a.rows();
    let l = a.data().iter().fold(BigInt::from(1), |acc, x| acc.lcm(&x.denominator()));
    let charpoly = characteristic_polynomial(a);
    let squarefree = squarefree_part(&charpoly);
    let slope = derivative(&squarefree);
    let mut remaining = charpoly;
    let estimates = eigenvalues_c64(&a.map(|x| x.to_c64()))?;
    let mut factors = Vec::new();
    let mut consumed = 0;
    for z in &estimates {
        if remaining.len() <= 1 {
            break;
        }
        if !S::COMPLEX && z.im.abs() > 1e-6 * z.norm().max(1.0) {
            continue;
        }
        let Some(root) = lattice_root(*z, &l, &squarefree, &slope) else {
            continue;
        };
        if factors.iter().any(|f| matches!(f, ExactFactor::Linear { root: r, .. } if *r == root)) {
            continue;
        }
        let mut mult = 0;
        while remaining.len() > 1 && eval_monomial(&remaining, &root).is_zero() {
            let (q, _) = divmod_monic(&remaining, &[-root.clone(), S::one()]);
            remaining = trim(q);
            mult += 1;
        }
        if mult > 0 {
            consumed += mult;
            factors.push(ExactFactor::Linear { root, multiplicity: mult });
        }
    }
    if allow_pairs && !S::COMPLEX {
        for z in estimates.iter().filter(|z| z.im > 1e-6 * z.norm().max(1.0)) {
            if remaining.len() <= 1 {
                break;
            }
            // a + ib is a Gaussian lattice root of the same polynomial
            let lifted: Vec<S::Complex> = squarefree.iter().map(|c| c.to_complex()).collect();
            let lifted_slope = derivative(&lifted);
            let Some(root) = lattice_root::<S::Complex>(*z, &l, &lifted, &lifted_slope) else {
                continue;
            };
            let (re, im) = (root.re(), root.im());
            if im.is_zero() {
                continue;
            }
            let two_re = S::from_real(re.clone() + re.clone());
            let norm = S::from_real(re.clone() * re.clone() + im.clone() * im.clone());
            let quad = vec![norm, -two_re, S::one()];
            let mut mult = 0;
            while remaining.len() >= 3 {
                let (q, r) = divmod_monic(&remaining, &quad);
                if !r.iter().all(Scalar::is_zero) {
                    break;
                }
                remaining = trim(q);
                mult += 1;
            }
            if mult > 0 {
                consumed += 2 * mult;
                factors.push(ExactFactor::Quadratic { re, im, multiplicity: mult });
            }
        }
    }
    if consumed != n {
        return Err(MatFunError::EigenvalueNotFound(format!(
            "characteristic polynomial does not split over {} (leftover degree {})",
            S::KIND,
            n - consumed
        )));
    }
    Ok(factors)
}

/// A root of `p` on the lattice with denominator `l` near the estimate `z`,
/// found by Newton steps rounded to the lattice.
fn lattice_root<S: Scalar>(z: C64, l: &BigInt, p: &[S], slope: &[S]) -> Option<S> {
    let mut x = S::snap(z, l);
    for _ in 0..64 {
        if eval_monomial(p, &x).is_zero() {
            return Some(x);
        }
        let d = eval_monomial(slope, &x);
        if d.is_zero() {
            break;
        }
        let next = (x.clone() - eval_monomial(p, &x) / d).round_to(l);
        if next == x {
            break;
        }
        x = next;
    }
    None
}

fn derivative<S: Scalar>(p: &[S]) -> Vec<S> {
    if p.len() <= 1 {
        return vec![S::zero()];
    }
    p.iter().enumerate().skip(1).map(|(k, c)| c.clone() * S::from_i64(k as i64)).collect()
}

fn monic<S: Scalar>(p: Vec<S>) -> Vec<S> {
    if p.is_empty() {
        return vec![S::zero()];
    }
    let p = trim(p);
    let lead = p.last().cloned().unwrap_or_else(S::one);
    if lead.is_zero() {
        return p;
    }
    let inv = lead.inv();
    p.into_iter().map(|c| c * inv.clone()).collect()
}

fn poly_gcd<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    let (mut a, mut b) = (monic(a.to_vec()), monic(b.to_vec()));
    while !(b.len() == 1 && b[0].is_zero()) {
        let (_, r) = divmod_monic(&a, &b);
        a = b;
        b = monic(r);
    }
    a
}

/// `p / gcd(p, p')`: same roots, all simple. Exact kinds only.
fn squarefree_part<S: Scalar>(p: &[S]) -> Vec<S> {
    let g = poly_gcd(p, &derivative(p));
    if g.len() <= 1 {
        return p.to_vec();
    }
    trim(divmod_monic(p, &g).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Q, Qi};

    fn cm(rows: &[&[(f64, f64)]]) -> Matrix<C64> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&(a, b)| C64::new(a, b)).collect()).collect())
            .unwrap()
    }

    fn sorted(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn qr_eigenvalues_small() {
        let a = cm(&[&[(2.0, 0.0), (1.0, 0.0), (0.0, 0.0)], &[(0.0, 0.0), (2.0, 0.0), (0.0, 0.0)], &[(0.0, 0.0), (0.0, 0.0), (3.0, 0.0)]]);
        let ev = sorted(eigenvalues_c64(&a).unwrap());
        assert!((ev[0] - C64::new(2.0, 0.0)).norm() < 1e-7);
        assert!((ev[2] - C64::new(3.0, 0.0)).norm() < 1e-12);
        let rot = cm(&[&[(0.0, 0.0), (1.0, 0.0)], &[(-1.0, 0.0), (0.0, 0.0)]]);
        let ev = sorted(eigenvalues_c64(&rot).unwrap());
        assert!((ev[0] - C64::new(0.0, -1.0)).norm() < 1e-12);
        assert!((ev[1] - C64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn qr_eigenvalues_against_charpoly() {
        let a = cm(&[
            &[(1.0, 1.0), (2.0, 0.0), (0.5, -1.0), (0.0, 0.0)],
            &[(0.3, 0.0), (-1.0, 0.0), (1.0, 1.0), (2.0, 0.0)],
            &[(0.0, 2.0), (1.0, 0.0), (0.0, 0.0), (1.0, -1.0)],
            &[(1.0, 0.0), (0.0, 0.0), (1.0, 0.0), (3.0, 0.5)],
        ]);
        let p = characteristic_polynomial(&a);
        for z in eigenvalues_c64(&a).unwrap() {
            assert!(eval_monomial(&p, &z).norm() < 1e-9, "residual at {z}");
        }
    }

    #[test]
    fn charpoly_exact() {
        let a = Matrix::from_rows(vec![
            vec![Q::from_i64(2), Q::from_i64(1)],
            vec![Q::from_i64(0), Q::from_i64(3)],
        ])
        .unwrap();
        assert_eq!(
            characteristic_polynomial(&a),
            vec![Q::from_i64(6), Q::from_i64(-5), Q::from_i64(1)]
        );
    }

    #[test]
    fn exact_factor_search() {
        let a = Matrix::from_rows(vec![
            vec![Q::from_ratio(1, 2), Q::from_i64(1), Q::from_i64(0)],
            vec![Q::from_i64(0), Q::from_ratio(1, 2), Q::from_i64(0)],
            vec![Q::from_i64(0), Q::from_i64(0), Q::from_i64(-3)],
        ])
        .unwrap();
        let f = exact_factors(&a, false).unwrap();
        assert!(f.contains(&ExactFactor::Linear { root: Q::from_ratio(1, 2), multiplicity: 2 }));
        assert!(f.contains(&ExactFactor::Linear { root: Q::from_i64(-3), multiplicity: 1 }));

        let sqrt2 = Matrix::from_rows(vec![
            vec![Q::from_i64(0), Q::from_i64(2)],
            vec![Q::from_i64(1), Q::from_i64(0)],
        ])
        .unwrap();
        assert!(matches!(exact_factors(&sqrt2, true), Err(MatFunError::EigenvalueNotFound(_))));

        let rot = Matrix::from_rows(vec![
            vec![Q::from_i64(0), Q::from_i64(1)],
            vec![Q::from_i64(-1), Q::from_i64(0)],
        ])
        .unwrap();
        assert!(exact_factors(&rot, false).is_err());
        let f = exact_factors(&rot, true).unwrap();
        assert_eq!(
            f,
            vec![ExactFactor::Quadratic { re: Q::from_i64(0), im: Q::from_i64(1), multiplicity: 1 }]
        );
        let g = exact_factors(&rot.map(|x| x.to_complex()), false).unwrap();
        assert_eq!(g.len(), 2);
        assert!(g.contains(&ExactFactor::<Qi>::Linear { root: Qi::i(), multiplicity: 1 }));
    }

    #[test]
    fn large_eigenvalues_found_exactly() {
        let big = Q::from_integer(BigInt::from(3u64).pow(40));
        let a = Matrix::from_rows(vec![
            vec![big.clone(), Q::from_i64(1), Q::from_i64(5)],
            vec![Q::from_i64(0), big.clone(), Q::from_i64(-2)],
            vec![Q::from_i64(0), Q::from_i64(0), Q::from_ratio(1, 3)],
        ])
        .unwrap();
        // conjugate to hide the triangular structure
        let c = Matrix::from_rows(vec![
            vec![Q::from_i64(1), Q::from_i64(2), Q::from_i64(0)],
            vec![Q::from_i64(0), Q::from_i64(1), Q::from_i64(1)],
            vec![Q::from_i64(1), Q::from_i64(0), Q::from_i64(1)],
        ])
        .unwrap();
        let t = c.inverse().unwrap().mul(&a).mul(&c);
        let f = exact_factors(&t, false).unwrap();
        assert!(f.contains(&ExactFactor::Linear { root: big, multiplicity: 2 }));
        assert!(f.contains(&ExactFactor::Linear { root: Q::from_ratio(1, 3), multiplicity: 1 }));
    }
}
