//! Dense n-linear forms on a single m-dimensional space.
//!
//! Coefficients are stored row-major over multi-indices (last index
//! fastest); entry `(i1,..,in)` is `F(u_i1, .., u_in)` in the fixed basis.

use thiserror::Error;

use crate::matrix::{Matrix, MatrixError};
use crate::scalar::{Scalar, TolerancePolicy};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TensorError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("arity mismatch: expected {expected}, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("invalid arity {0}: forms need at least two slots")]
    InvalidArity(usize),
    #[error("not a permutation: {0:?}")]
    InvalidPermutation(Vec<usize>),
    #[error("sign map {0:?} does not extend to a character of the symmetric group")]
    InconsistentSignMap(Vec<i8>),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// A bijection of `{0, .., n-1}`; `images[k]` is the image of `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self, TensorError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(TensorError::InvalidPermutation(images));
            }
            seen[i] = true;
        }
        Ok(Self { images })
    }

    pub fn identity(n: usize) -> Self {
        Self { images: (0..n).collect() }
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(a, b);
        Self { images }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, k: usize) -> usize {
        self.images[k]
    }

    /// `self` first, then `other`: `k -> other(self(k))`.
    pub fn then(&self, other: &Self) -> Self {
        Self { images: self.images.iter().map(|&k| other.images[k]).collect() }
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0; self.images.len()];
        for (k, &v) in self.images.iter().enumerate() {
            images[v] = k;
        }
        Self { images }
    }

    /// All `n!` permutations in lexicographic order.
    pub fn all(n: usize) -> Vec<Self> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (0..n).collect();
        loop {
            out.push(Self { images: cur.clone() });
            // next lexicographic permutation
            let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
                break;
            };
            let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
            cur.swap(i - 1, j);
            cur[i..].reverse();
        }
        out
    }
}

/// Outcome of an epsilon-symmetry check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SymmetryCheck {
    Holds,
    /// `F^s != eps(s) F` for the adjacent transposition `s = (slot, slot+1)`.
    Violated { slot: usize, index: Vec<usize> },
}

impl SymmetryCheck {
    pub fn holds(&self) -> bool {
        matches!(self, SymmetryCheck::Holds)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiForm<S> {
    arity: usize,
    dim: usize,
    coeffs: Vec<S>,
}

/// Iterator over all multi-indices of `{0..dim}^arity` in storage order.
pub fn multi_indices(arity: usize, dim: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = if dim == 0 { 0 } else { dim.pow(arity as u32) };
    (0..total).map(move |mut flat| {
        let mut idx = vec![0; arity];
        for slot in (0..arity).rev() {
            idx[slot] = flat % dim;
            flat /= dim;
        }
        idx
    })
}

impl<S: Scalar> MultiForm<S> {
    pub fn new(arity: usize, dim: usize, coeffs: Vec<S>) -> Result<Self, TensorError> {
        if arity < 2 {
            return Err(TensorError::InvalidArity(arity));
        }
        let expected = dim.pow(arity as u32);
        if coeffs.len() != expected {
            return Err(TensorError::Dimension(format!(
                "{} coefficients for arity {arity} and dimension {dim}",
                coeffs.len()
            )));
        }
        Ok(Self { arity, dim, coeffs })
    }

    pub fn zeros(arity: usize, dim: usize) -> Self {
        assert!(arity >= 2, "forms need at least two slots");
        Self { arity, dim, coeffs: vec![S::zero(); dim.pow(arity as u32)] }
    }

    pub fn from_fn(arity: usize, dim: usize, mut f: impl FnMut(&[usize]) -> S) -> Self {
        assert!(arity >= 2, "forms need at least two slots");
        let coeffs = multi_indices(arity, dim).map(|idx| f(&idx)).collect();
        Self { arity, dim, coeffs }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> &S {
        &self.coeffs[self.flat_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: S) {
        let k = self.flat_index(idx);
        self.coeffs[k] = v;
    }

    pub fn indices(&self) -> impl Iterator<Item = Vec<usize>> {
        multi_indices(self.arity, self.dim)
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> MultiForm<T> {
        MultiForm { arity: self.arity, dim: self.dim, coeffs: self.coeffs.iter().map(f).collect() }
    }

    pub fn to_float(&self) -> MultiForm<S::Float> {
        self.map(|x| x.to_float())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(Scalar::magnitude).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_zero)
    }

    pub fn is_negligible(&self, pol: &TolerancePolicy) -> bool {
        self.coeffs.iter().all(|c| c.is_negligible(0.0, pol))
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map(|x| x.clone() * c.clone())
    }

    pub fn sub(&self, other: &Self) -> Result<Self, TensorError> {
        self.check_same_shape(other)?;
        let coeffs =
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.clone() - b.clone()).collect();
        Ok(Self { arity: self.arity, dim: self.dim, coeffs })
    }

    fn check_same_shape(&self, other: &Self) -> Result<(), TensorError> {
        if self.arity != other.arity {
            return Err(TensorError::Arity { expected: self.arity, got: other.arity });
        }
        if self.dim != other.dim {
            return Err(TensorError::Dimension(format!("dim {} vs {}", self.dim, other.dim)));
        }
        Ok(())
    }

    /// First multi-index where the forms differ beyond tolerance. Float
    /// kinds measure differences against the larger of the two forms.
    pub fn first_difference(&self, other: &Self, pol: &TolerancePolicy) -> Option<Vec<usize>> {
        if self.arity != other.arity || self.dim != other.dim {
            return Some(Vec::new());
        }
        let scale = self.max_abs().max(other.max_abs());
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .position(|(a, b)| !(a.clone() - b.clone()).is_negligible(scale, pol))
            .map(|flat| multi_indices(self.arity, self.dim).nth(flat).unwrap())
    }

    pub fn approx_eq(&self, other: &Self, pol: &TolerancePolicy) -> bool {
        self.first_difference(other, pol).is_none()
    }

    /// Largest coefficient-wise difference magnitude.
    pub fn max_difference(&self, other: &Self) -> Result<f64, TensorError> {
        Ok(self.sub(other)?.max_abs())
    }

    /// `F(x_1, .., x_n)` for coordinate vectors `x_k`.
    pub fn eval(&self, xs: &[Vec<S>]) -> Result<S, TensorError> {
        if xs.len() != self.arity {
            return Err(TensorError::Arity { expected: self.arity, got: xs.len() });
        }
        if let Some(bad) = xs.iter().position(|x| x.len() != self.dim) {
            return Err(TensorError::Dimension(format!(
                "argument {bad} has length {}, expected {}",
                xs[bad].len(),
                self.dim
            )));
        }
        // Contract the trailing slot repeatedly.
        let mut cur = self.coeffs.clone();
        for x in xs.iter().rev() {
            cur = cur
                .chunks(self.dim.max(1))
                .map(|chunk| {
                    chunk.iter().zip(x).fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
                })
                .collect();
        }
        Ok(cur.into_iter().next().unwrap_or_else(S::zero))
    }

    /// `F^sigma(u_1, .., u_n) = F(u_sigma(1), .., u_sigma(n))`.
    pub fn permute_slots(&self, sigma: &Permutation) -> Result<Self, TensorError> {
        if sigma.len() != self.arity {
            return Err(TensorError::Arity { expected: self.arity, got: sigma.len() });
        }
        let mut src = vec![0; self.arity];
        Ok(Self::from_fn(self.arity, self.dim, |idx| {
            for (k, s) in src.iter_mut().enumerate() {
                *s = idx[sigma.apply(k)];
            }
            self.get(&src).clone()
        }))
    }

    /// The form `(.., x_slot, ..) -> F(.., M x_slot, ..)`:
    /// `result[.., i, ..] = sum_j F[.., j, ..] * M[j, i]`.
    pub fn contract_slot(&self, slot: usize, m: &Matrix<S>) -> Result<Self, TensorError> {
        if slot >= self.arity {
            return Err(TensorError::Dimension(format!(
                "slot {slot} out of range for arity {}",
                self.arity
            )));
        }
        if m.rows() != self.dim || m.cols() != self.dim {
            return Err(TensorError::Dimension(format!(
                "{}x{} map on a {}-dimensional form",
                m.rows(),
                m.cols(),
                self.dim
            )));
        }
        let cur = MixedForm { dims: vec![self.dim; self.arity], coeffs: self.coeffs.clone() };
        Ok(cur.contract(slot, m).into_uniform(self.arity))
    }

    /// Coefficients of `F` in the basis given by the columns of `c`
    /// (an `m x k` matrix): `b[i'..k'] = sum a[i..k] c[i,i'] .. c[k,k']`.
    pub fn pullback(&self, c: &Matrix<S>) -> Result<Self, TensorError> {
        if c.rows() != self.dim {
            return Err(TensorError::Dimension(format!(
                "basis matrix has {} rows, form dimension is {}",
                c.rows(),
                self.dim
            )));
        }
        let mut cur = MixedForm { dims: vec![self.dim; self.arity], coeffs: self.coeffs.clone() };
        for slot in 0..self.arity {
            cur = cur.contract(slot, c);
        }
        Ok(cur.into_uniform(self.arity))
    }

    /// Change of basis by a square transition matrix whose columns are the
    /// new basis vectors in old coordinates.
    pub fn change_basis(&self, c: &Matrix<S>) -> Result<Self, TensorError> {
        if !c.is_square() {
            return Err(TensorError::Dimension("transition matrix must be square".into()));
        }
        self.pullback(c)
    }

    /// Restriction to the span of `basis`, in that basis.
    pub fn restrict(&self, basis: &[Vec<S>]) -> Result<Self, TensorError> {
        let c = Matrix::from_columns(self.dim, basis)?;
        self.pullback(&c)
    }

    /// External direct sum on the concatenated coordinates.
    pub fn direct_sum(&self, other: &Self) -> Result<Self, TensorError> {
        if self.arity != other.arity {
            return Err(TensorError::Arity { expected: self.arity, got: other.arity });
        }
        let m = self.dim;
        let dim = m + other.dim;
        let mut g_idx = vec![0; self.arity];
        Ok(Self::from_fn(self.arity, dim, |idx| {
            if idx.iter().all(|&i| i < m) {
                self.get(idx).clone()
            } else if idx.iter().all(|&i| i >= m) {
                for (g, &i) in g_idx.iter_mut().zip(idx) {
                    *g = i - m;
                }
                other.get(&g_idx).clone()
            } else {
                S::zero()
            }
        }))
    }

    /// The `m x m^(n-1)` matrix whose row `a` lists the coefficients with
    /// index `a` in `slot`.
    pub fn slot_flattening(&self, slot: usize) -> Matrix<S> {
        let m = self.dim;
        let others = if m == 0 { 0 } else { m.pow(self.arity as u32 - 1) };
        let mut out = Matrix::zeros(m, others);
        let mut counters = vec![0usize; m];
        for (flat, idx) in self.indices().enumerate() {
            let a = idx[slot];
            out[(a, counters[a])] = self.coeffs[flat].clone();
            counters[a] += 1;
        }
        out
    }

    /// Basis of `{u : F(.., u, ..) = 0 in every slot}`.
    pub fn radical(&self, pol: &TolerancePolicy) -> Vec<Vec<S>> {
        let m = self.dim;
        if m == 0 {
            return Vec::new();
        }
        let blocks: Vec<Matrix<S>> = (0..self.arity).map(|s| self.slot_flattening(s)).collect();
        let width: usize = blocks.iter().map(Matrix::cols).sum();
        // u lies in the radical iff u^T [flat_0 | .. | flat_{n-1}] = 0.
        let stacked = Matrix::from_fn(width, m, |r, a| {
            let b = r / blocks[0].cols();
            let c = r % blocks[0].cols();
            blocks[b][(a, c)].clone()
        });
        stacked.kernel(pol)
    }

    /// Checks `F^s = eps(s) F` on the adjacent transpositions
    /// `s_k = (k, k+1)`; `signs[k]` is `eps(s_k)`.
    pub fn is_epsilon_symmetric(
        &self,
        signs: &[i8],
        pol: &TolerancePolicy,
    ) -> Result<SymmetryCheck, TensorError> {
        if signs.len() + 1 != self.arity {
            return Err(TensorError::Arity { expected: self.arity - 1, got: signs.len() });
        }
        if signs.iter().any(|&s| s != 1 && s != -1) || signs.windows(2).any(|w| w[0] != w[1]) {
            return Err(TensorError::InconsistentSignMap(signs.to_vec()));
        }
        for (k, &s) in signs.iter().enumerate() {
            let swapped = self.permute_slots(&Permutation::transposition(self.arity, k, k + 1))?;
            let target = if s == 1 { self.clone() } else { self.scale(&-S::one()) };
            if let Some(index) = swapped.first_difference(&target, pol) {
                return Ok(SymmetryCheck::Violated { slot: k, index });
            }
        }
        Ok(SymmetryCheck::Holds)
    }
}

/// Coefficient array with per-slot dimensions, used while contracting
/// slots one at a time with rectangular matrices.
struct MixedForm<S> {
    dims: Vec<usize>,
    coeffs: Vec<S>,
}

impl<S: Scalar> MixedForm<S> {
    fn contract(self, slot: usize, m: &Matrix<S>) -> Self {
        let inner: usize = self.dims[slot + 1..].iter().product();
        let outer: usize = self.dims[..slot].iter().product();
        let old = self.dims[slot];
        let new = m.cols();
        let mut out = vec![S::zero(); outer * new * inner];
        for o in 0..outer {
            for j in 0..old {
                for i in 0..new {
                    let c = &m[(j, i)];
                    if c.is_zero() {
                        continue;
                    }
                    for r in 0..inner {
                        let a = &self.coeffs[(o * old + j) * inner + r];
                        if a.is_zero() {
                            continue;
                        }
                        let slot_ref = &mut out[(o * new + i) * inner + r];
                        let cur = std::mem::replace(slot_ref, S::zero());
                        *slot_ref = cur + a.clone() * c.clone();
                    }
                }
            }
        }
        let mut dims = self.dims;
        dims[slot] = new;
        Self { dims, coeffs: out }
    }

    fn into_uniform(self, arity: usize) -> MultiForm<S> {
        let dim = self.dims.first().copied().unwrap_or(0);
        debug_assert!(self.dims.iter().all(|&d| d == dim), "mixed slot dimensions {:?}", self.dims);
        MultiForm { arity, dim, coeffs: self.coeffs }
    }
}
