//! Spectral splitting of linear maps and inverse-root polynomials.

mod eigen;
mod poly;
mod root;

use thiserror::Error;

use crate::matrix::{Matrix, MatrixError};
use crate::scalar::{RealScalar, RootError, Scalar, C64};

pub use eigen::{characteristic_polynomial, eigenvalues_c64};
pub use poly::{poly_apply, Poly};
pub use root::{inverse_root_poly_complex, inverse_root_poly_real, unit_root_poly};



use eigen::{cluster, exact_factors, mean, ExactFactor};

/// Eigenvalues of float clusters closer than this (relative) are merged.
pub const CLUSTER_REL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum MatFunError {
    #[error("eigenvalue not found: {0}")]
    EigenvalueNotFound(String),
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
    #[error("map is singular")]
    SingularInput,
    #[error("negative real eigenvalue {0}")]
    NegativeRealEigenvalue(String),
    #[error(transparent)]
    NoRootInField(#[from] RootError),
    #[error("spectral subspaces are not invariant (residual {0:e})")]
    InvariantResidual(f64),
    #[error("{0}")]
    Dimension(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// A single eigenvalue, or a conjugate pair `re +- i*im` with `im > 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum Eigen<S: Scalar> {
    Single(S),
    Pair { re: S::Real, im: S::Real },
}

impl<S: Scalar> Eigen<S> {
    pub fn to_c64(&self) -> C64 {
        match self {
            Eigen::Single(x) => x.to_c64(),
            Eigen::Pair { re, im } => C64::new(re.to_c64().re, im.to_c64().re),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGroup<S: Scalar> {
    pub eigen: Eigen<S>,
    /// Dimension of the (real) generalized eigenspace.
    pub multiplicity: usize,
    pub basis: Vec<Vec<S>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSplit<S: Scalar> {
    pub groups: Vec<SpectralGroup<S>>,
}

impl<S: Scalar> SpectralSplit<S> {
    /// All group bases side by side, in group order.
    pub fn basis_matrix(&self) -> Matrix<S> {
        let cols: Vec<Vec<S>> = self.groups.iter().flat_map(|g| g.basis.iter().cloned()).collect();
        let n = cols.first().map_or(0, Vec::len);
        Matrix::from_columns(n, &cols).expect("group bases share a length")
    }

    /// Column ranges of each group inside [`Self::basis_matrix`].
    pub fn ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.groups
            .iter()
            .map(|g| {
                let r = start..start + g.multiplicity;
                start = r.end;
                r
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    /// One group per real eigenvalue or conjugate pair (real fields only).
    Real,
    /// One group per eigenvalue.
    Complex,
}

impl SplitMode {
    pub fn natural<S: Scalar>() -> Self {
        if S::COMPLEX {
            SplitMode::Complex
        } else {
            SplitMode::Real
        }
    }
}

/// Generalized eigenspace decomposition of `t`.
pub fn spectral_split<S: Scalar>(t: &Matrix<S>, mode: SplitMode) -> Result<SpectralSplit<S>, MatFunError> {
    if !t.is_square() {
        return Err(MatFunError::Dimension(format!("{}x{} map is not square", t.rows(), t.cols())));
    }
    if t.rows() == 0 {
        return Ok(SpectralSplit { groups: Vec::new() });
    }
    let pairs = mode == SplitMode::Real && !S::COMPLEX;
    let mut groups = if S::EXACT { exact_groups(t, pairs)? } else { float_groups(t, pairs)? };
    groups.sort_by(|a, b| {
        let (x, y) = (a.eigen.to_c64(), b.eigen.to_c64());
        x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im))
    });
    let split = SpectralSplit { groups };
    if !S::EXACT {
        check_invariance(t, &split)?;
    }
    Ok(split)
}

fn pair_operator<S: Scalar>(t: &Matrix<S>, re: &S::Real, im: &S::Real) -> Matrix<S> {
    let n = t.rows();
    let a = S::from_real(re.clone());
    let norm = S::from_real(re.clone() * re.clone() + im.clone() * im.clone());
    let shifted = t.sub(&Matrix::scalar(n, a.clone() + a));
    t.mul(&shifted).add(&Matrix::scalar(n, norm))
}

fn exact_groups<S: Scalar>(t: &Matrix<S>, pairs: bool) -> Result<Vec<SpectralGroup<S>>, MatFunError> {
    let n = t.rows();
    let mut out = Vec::new();
    for f in exact_factors(t, pairs)? {
        match f {
            ExactFactor::Linear { root, multiplicity } => {
                let m = t.sub(&Matrix::scalar(n, root.clone())).pow(multiplicity as u32);
                let basis = m.kernel_with_nullity(multiplicity)?;
                out.push(SpectralGroup { eigen: Eigen::Single(root), multiplicity, basis });
            }
            ExactFactor::Quadratic { re, im, multiplicity } => {
                let m = pair_operator(t, &re, &im).pow(multiplicity as u32);
                let basis = m.kernel_with_nullity(2 * multiplicity)?;
                out.push(SpectralGroup { eigen: Eigen::Pair { re, im }, multiplicity: 2 * multiplicity, basis });
            }
        }
    }
    Ok(out)
}

/// `t` restricted to the span of `basis`, via least squares.
fn restricted<S: Scalar>(t: &Matrix<S>, basis: &[Vec<S>]) -> Result<Matrix<S>, MatFunError> {
    let b = Matrix::from_columns(t.rows(), basis)?;
    let bh = b.transpose().map(|x| x.conj());
    Ok(bh.mul(&b).solve(&bh.mul(&t.mul(&b)))?)
}

fn float_groups<S: Scalar>(t: &Matrix<S>, pairs: bool) -> Result<Vec<SpectralGroup<S>>, MatFunError> {
    let n = t.rows();
    let scale = t.max_abs().max(f64::MIN_POSITIVE);
    let values = eigenvalues_c64(&t.map(|x| x.to_c64()))?;
    let clusters = cluster(&values, CLUSTER_REL, 1e-9 * scale);
    let is_real = |z: C64| z.im.abs() <= CLUSTER_REL * z.norm() + 1e-9 * scale;
    let mut out = Vec::new();
    for c in &clusters {
        let mu = mean(c);
        let d = c.len();
        if S::COMPLEX || is_real(mu) {
            let mut lambda = S::from_c64(if S::COMPLEX { mu } else { C64::new(mu.re, 0.0) });
            let mut basis = Vec::new();
            for _ in 0..2 {
                let m = t.sub(&Matrix::scalar(n, lambda.clone())).pow(d as u32);
                basis = m.kernel_with_nullity(d)?;
                let r = restricted(t, &basis)?;
                lambda = r.trace() / S::from_i64(d as i64);
            }
            let shift = lambda.clone() + S::from_c64(C64::new(SHIFT_REL * scale, 0.0));
            basis = inverse_iteration(&t.sub(&Matrix::scalar(n, shift)), basis)?;
            lambda = restricted(t, &basis)?.trace() / S::from_i64(d as i64);
            out.push(SpectralGroup { eigen: Eigen::Single(lambda), multiplicity: d, basis });
        } else if pairs {
            if mu.im < 0.0 {
                continue;
            }
            let partner = clusters.iter().any(|o| o.len() == d && (mean(o) - mu.conj()).norm() <= 1e-6 * mu.norm() + 1e-9 * scale);
            if !partner {
                return Err(MatFunError::EigenvalueNotFound(format!("no conjugate partner for {mu}")));
            }
            let mut re = S::Real::from_f64(mu.re);
            let mut im = S::Real::from_f64(mu.im);
            let mut basis = Vec::new();
            for _ in 0..2 {
                let m = pair_operator(t, &re, &im).pow(d as u32);
                basis = m.kernel_with_nullity(2 * d)?;
                let r = restricted(t, &basis)?;
                let k = S::from_i64(2 * d as i64);
                let a = r.trace() / k.clone();
                let centred = r.sub(&Matrix::scalar(2 * d, a.clone()));
                let b2 = -(centred.mul(&centred).trace()) / k;
                let b2 = b2.to_c64().re;
                re = S::Real::from_f64(a.to_c64().re);
                im = S::Real::from_f64(b2.max(0.0).sqrt());
            }
            let shifted_re = S::Real::from_f64(re.to_c64().re + SHIFT_REL * scale);
            basis = inverse_iteration(&pair_operator(t, &shifted_re, &im), basis)?;
            out.push(SpectralGroup { eigen: Eigen::Pair { re, im }, multiplicity: 2 * d, basis });
        } else {
            return Err(MatFunError::EigenvalueNotFound(format!("non-real eigenvalue {mu} over {}", S::KIND)));
        }
    }
    Ok(out)
}

/// Shift offset for inverse iteration, relative to the size of the map.
const SHIFT_REL: f64 = 1e-8;

/// A few rounds of subspace iteration with `m^{-1}`, orthonormalising each
/// round. `m` is the map shifted close to one spectral group, so the span
/// converges to that group's invariant subspace.
fn inverse_iteration<S: Scalar>(m: &Matrix<S>, basis: Vec<Vec<S>>) -> Result<Vec<Vec<S>>, MatFunError> {
    let n = m.rows();
    let mut x = basis;
    for _ in 0..3 {
        let y = m.solve(&Matrix::from_columns(n, &x)?)?;
        x = orthonormal(y.columns());
    }
    Ok(x)
}

/// Modified Gram-Schmidt, two passes.
fn orthonormal<S: Scalar>(mut cols: Vec<Vec<S>>) -> Vec<Vec<S>> {
    for _ in 0..2 {
        for j in 0..cols.len() {
            for i in 0..j {
                let dot = cols[i].iter().zip(&cols[j]).fold(S::zero(), |acc, (a, b)| acc + a.conj() * b.clone());
                let (head, tail) = cols.split_at_mut(j);
                for (v, u) in tail[0].iter_mut().zip(&head[i]) {
                    *v = v.clone() - u.clone() * dot.clone();
                }
            }
            let norm = cols[j].iter().map(|v| v.magnitude().powi(2)).sum::<f64>().sqrt();
            let inv = S::from_c64(C64::new(1.0 / norm, 0.0));
            for v in cols[j].iter_mut() {
                *v = v.clone() * inv.clone();
            }
        }
    }
    cols
}

fn check_invariance<S: Scalar>(t: &Matrix<S>, split: &SpectralSplit<S>) -> Result<(), MatFunError> {
    let b = split.basis_matrix();
    let tb = b.inverse()?.mul(t).mul(&b);
    let ranges = split.ranges();
    let mut worst = 0.0f64;
    for (i, ri) in ranges.iter().enumerate() {
        for (j, rj) in ranges.iter().enumerate() {
            if i == j {
                continue;
            }
            for r in ri.clone() {
                for c in rj.clone() {
                    worst = worst.max(tb[(r, c)].magnitude());
                }
            }
        }
    }
    if worst > 1e-7 * t.max_abs().max(1.0) {
        return Err(MatFunError::InvariantResidual(worst));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Q, R64};

    fn q(v: i64) -> Q {
        Q::from_i64(v)
    }

    #[test]
    fn diagonal_split() {
        let t = Matrix::from_rows(vec![vec![q(2), q(0), q(0)], vec![q(0), q(2), q(0)], vec![q(0), q(0), q(3)]]).unwrap();
        let s = spectral_split(&t, SplitMode::Real).unwrap();
        assert_eq!(s.groups.len(), 2);
        assert_eq!(s.groups[0].eigen, Eigen::Single(q(2)));
        assert_eq!(s.groups[0].multiplicity, 2);
        assert_eq!(s.groups[1].multiplicity, 1);
    }

    #[test]
    fn rotation_pair() {
        let t = Matrix::from_rows(vec![vec![q(0), q(1)], vec![q(-1), q(0)]]).unwrap();
        let s = spectral_split(&t, SplitMode::Real).unwrap();
        assert_eq!(s.groups, vec![SpectralGroup {
            eigen: Eigen::Pair { re: q(0), im: q(1) },
            multiplicity: 2,
            basis: s.groups[0].basis.clone(),
        }]);
        let tf: Matrix<R64> = t.to_float();
        let s = spectral_split(&tf, SplitMode::Real).unwrap();
        assert_eq!(s.groups.len(), 1);
        match &s.groups[0].eigen {
            Eigen::Pair { re, im } => assert!(re.abs() < 1e-12 && (im - 1.0).abs() < 1e-12),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn float_defective_block() {
        let t: Matrix<R64> = Matrix::from_rows(vec![
            vec![1.5, 1.0, 0.0],
            vec![0.0, 1.5, 0.0],
            vec![0.0, 0.0, -1.0],
        ])
        .unwrap();
        let s = spectral_split(&t, SplitMode::Real).unwrap();
        assert_eq!(s.groups.len(), 2);
        assert_eq!(s.groups[1].multiplicity, 2);
        match s.groups[1].eigen {
            Eigen::Single(x) => assert!((x - 1.5).abs() < 1e-9),
            _ => panic!(),
        }
    }
}
