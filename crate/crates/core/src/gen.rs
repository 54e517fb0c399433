//! Seeded generators for witnesses, decomposable forms and selfadjoint
//! pairs with known hidden structure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decompose::{is_indecomposable_small, Decomposition, DecomposeError};
use crate::matfun::Eigen;
use crate::matrix::Matrix;
use crate::scalar::{ComplexScalar, FieldKind, RealScalar, Scalar, ScalarError, TolerancePolicy, C64};
use crate::symmetrize::{check_witness, pull_through, Witness};
use crate::tensor::{multi_indices, MultiForm, TensorError};

const MAX_DRAWS: usize = 200;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("no invertible draw after {MAX_DRAWS} attempts")]
    SingularDraw,
    #[error("generated data failed its own check: {0}")]
    SelfCheck(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
}

/// Eigenvalue for one block: a field element, or a conjugate pair
/// `re +- i*im` (real fields, even block dimension).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EigenSpec {
    Value(String),
    Pair { re: String, im: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub seed: u64,
    pub arity: usize,
    pub block_dims: Vec<usize>,
    /// Block `p` uses entry `p % len`; empty means every block uses 1.
    #[serde(default)]
    pub eigenvalues: Vec<EigenSpec>,
    pub field: FieldKind,
    /// Hide the block structure behind a random change of basis.
    #[serde(default)]
    pub conjugate: bool,
    /// Extra radical dimensions (decomposable forms).
    #[serde(default)]
    pub radical_dim: usize,
    /// Exponents of the hidden map are drawn from `0..=max_exponent`.
    #[serde(default = "default_max_exponent")]
    pub max_exponent: u32,
    /// Give selfadjoint pairs a nilpotent part on each block.
    #[serde(default)]
    pub nilpotent: bool,
}

fn default_max_exponent() -> u32 {
    3
}

impl GenSpec {
    pub fn new(seed: u64, arity: usize, block_dims: Vec<usize>, field: FieldKind) -> Self {
        Self {
            seed,
            arity,
            block_dims,
            eigenvalues: Vec::new(),
            field,
            conjugate: false,
            radical_dim: 0,
            max_exponent: default_max_exponent(),
            nilpotent: false,
        }
    }

    pub fn with_eigenvalues(mut self, menu: &[EigenSpec]) -> Self {
        self.eigenvalues = menu.to_vec();
        self
    }

    pub fn conjugated(mut self) -> Self {
        self.conjugate = true;
        self
    }

    fn validate(&self) -> Result<(), GenError> {
        if self.arity < 2 {
            return Err(GenError::InvalidSpec(format!("arity {} below 2", self.arity)));
        }
        if self.block_dims.contains(&0) {
            return Err(GenError::InvalidSpec("block dimensions must be positive".into()));
        }
        Ok(())
    }

    fn eigen_for<S: Scalar>(&self, block: usize) -> Result<Eigen<S>, GenError> {
        if self.eigenvalues.is_empty() {
            return Ok(Eigen::Single(S::one()));
        }
        let e = match &self.eigenvalues[block % self.eigenvalues.len()] {
            EigenSpec::Value(v) => {
                let x = S::parse(v)?;
                if x.is_zero() {
                    return Err(GenError::InvalidSpec("eigenvalues must be nonzero".into()));
                }
                Eigen::Single(x)
            }
            EigenSpec::Pair { re, im } => {
                if S::COMPLEX {
                    return Err(GenError::InvalidSpec("conjugate pairs need a real field".into()));
                }
                let (re, im) = (S::Real::parse(re)?, S::Real::parse(im)?);
                if im.is_negative() || im.is_zero() {
                    return Err(GenError::InvalidSpec("pair imaginary part must be positive".into()));
                }
                if !self.block_dims[block].is_multiple_of(2) {
                    return Err(GenError::InvalidSpec(format!("pair block {block} has odd dimension")));
                }
                Eigen::Pair { re, im }
            }
        };
        Ok(e)
    }
}

fn entry<S: Scalar>(rng: &mut ChaCha8Rng) -> S {
    if S::EXACT {
        let re = rng.random_range(-3i64..=3);
        if S::COMPLEX {
            let im = rng.random_range(-3i64..=3);
            S::from_c64(num::complex::Complex64::new(re as f64, im as f64))
        } else {
            S::from_i64(re)
        }
    } else {
        let re = rng.random_range(-1.0..1.0);
        let im = if S::COMPLEX { rng.random_range(-1.0..1.0) } else { 0.0 };
        S::from_c64(num::complex::Complex64::new(re, im))
    }
}

fn nonzero_entry<S: Scalar>(rng: &mut ChaCha8Rng) -> S {
    loop {
        let x = entry::<S>(rng);
        if x.magnitude() > 0.1 {
            return x;
        }
    }
}

/// A random invertible, reasonably conditioned `d x d` matrix.
pub fn random_invertible<S: Scalar>(rng: &mut ChaCha8Rng, d: usize) -> Result<Matrix<S>, GenError> {
    for _ in 0..MAX_DRAWS {
        let shrink = if S::EXACT { S::one() } else { S::from_ratio(1, 2) };
        let m = Matrix::from_fn(d, d, |i, j| {
            let x = entry::<S>(rng) * shrink.clone();
            if i == j { S::one() + x } else { x }
        });
        let ok = if S::EXACT { !m.det().is_zero() } else { m.condition_estimate() < 50.0 };
        if ok {
            return Ok(m);
        }
    }
    Err(GenError::SingularDraw)
}

fn random_form<S: Scalar>(rng: &mut ChaCha8Rng, n: usize, d: usize, dense: bool) -> MultiForm<S> {
    loop {
        let f = MultiForm::from_fn(n, d, |_| if dense { nonzero_entry(rng) } else { entry(rng) });
        if !f.is_zero() {
            return f;
        }
    }
}

/// The real form `x -> Re H(z(x))` on `R^{2k}`, with `z_j = x_{2j} + i x_{2j+1}`.
fn realify_form<S: Scalar>(h: &MultiForm<S::Complex>) -> MultiForm<S> {
    MultiForm::from_fn(h.arity(), 2 * h.dim(), |idx| {
        let half: Vec<usize> = idx.iter().map(|i| i / 2).collect();
        let c = h.get(&half);
        let v = match idx.iter().filter(|&&i| i % 2 == 1).count() % 4 {
            0 => c.re(),
            1 => -c.im(),
            2 => -c.re(),
            _ => c.im(),
        };
        S::from_real(v)
    })
}

/// Complex `k x k` matrix acting on realified coordinates.
fn realify_map<S: Scalar>(m: &Matrix<S::Complex>) -> Matrix<S> {
    Matrix::from_fn(2 * m.rows(), 2 * m.cols(), |r, c| {
        let z = &m[(r / 2, c / 2)];
        let v = match (r % 2, c % 2) {
            (0, 0) | (1, 1) => z.re(),
            (0, 1) => -z.im(),
            _ => z.im(),
        };
        S::from_real(v)
    })
}

fn pair_value<S: Scalar>(re: &S::Real, im: &S::Real) -> S::Complex {
    S::Complex::from_parts(re.clone(), im.clone())
}

/// Block form with a hidden map that is selfadjoint for it.
fn hidden_block<S: Scalar>(
    rng: &mut ChaCha8Rng,
    n: usize,
    d: usize,
    eigen: &Eigen<S>,
    nilpotent: bool,
) -> (MultiForm<S>, Matrix<S>) {
    match eigen {
        Eigen::Single(l) if nilpotent => algebra_block(rng, n, d, l),
        Eigen::Single(l) => (random_form(rng, n, d, false), Matrix::scalar(d, l.clone())),
        Eigen::Pair { re, im } => {
            let mu = pair_value::<S>(re, im);
            let (h, t) = if nilpotent {
                algebra_block::<S::Complex>(rng, n, d / 2, &mu)
            } else {
                (random_form::<S::Complex>(rng, n, d / 2, false), Matrix::scalar(d / 2, mu))
            };
            (realify_form::<S>(&h), realify_map::<S>(&t))
        }
    }
}

/// Multiplication by `x` on `K[x]/(x - l)^d` with the form
/// `ell(a_1 .. a_n)`, in the basis `(x - l)^j`.
fn algebra_block<S: Scalar>(rng: &mut ChaCha8Rng, n: usize, d: usize, l: &S) -> (MultiForm<S>, Matrix<S>) {
    let mut ell: Vec<S> = (0..d).map(|_| entry(rng)).collect();
    ell[d - 1] = nonzero_entry(rng);
    let g = MultiForm::from_fn(n, d, |idx| {
        let s: usize = idx.iter().sum();
        if s < d { ell[s].clone() } else { S::zero() }
    });
    let t = Matrix::from_fn(d, d, |i, j| {
        if i == j {
            l.clone()
        } else if i == j + 1 {
            S::one()
        } else {
            S::zero()
        }
    });
    (g, t)
}

fn assemble<S: Scalar>(forms: &[MultiForm<S>], n: usize) -> Result<MultiForm<S>, TensorError> {
    let mut it = forms.iter();
    let first = it.next().cloned().unwrap_or_else(|| MultiForm::zeros(n, 0));
    it.try_fold(first, |acc, f| acc.direct_sum(f))
}

/// Unit vectors `start..start+len` of `K^dim`.
fn unit_block<S: Scalar>(dim: usize, start: usize, len: usize) -> Vec<Vec<S>> {
    (start..start + len)
        .map(|i| (0..dim).map(|k| if k == i { S::one() } else { S::zero() }).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedWitness<S> {
    pub witness: Witness<S>,
    pub exponents: Vec<u32>,
    /// The hidden selfadjoint map, in target coordinates.
    pub hidden: Matrix<S>,
    /// The real algorithm will return a `-1` block (always false over
    /// complex fields).
    pub has_negative: bool,
}

/// Replays the real symmetrization on one block where every map is the
/// scalar `mu^{c_k}`, with the same root branches. Returns whether the
/// last step sees a negative real eigenvalue.
fn last_step_negative(mu: C64, exponents: &[u32]) -> bool {
    let n = exponents.len();
    let mut a: Vec<C64> = exponents.iter().map(|&c| mu.powu(c)).collect();
    for t in 1..n {
        let psi = a[0];
        let mut z = psi / a[t];
        let negative = z.im.abs() <= 1e-9 * z.norm() && z.re < 0.0;
        if negative {
            if t + 1 == n {
                return true;
            }
            a[t + 1] = -a[t + 1];
            z = -z;
        }
        let w = C64::new(1.0, 0.0) / C64::from_polar(z.norm().powf(1.0 / (t + 1) as f64), z.arg() / (t + 1) as f64);
        let next = psi * w;
        for x in a.iter_mut().take(t + 1) {
            *x = next;
        }
    }
    false
}

/// `phi_k = tau^{c_k} phi` for a block-scalar `tau` that is selfadjoint
/// for `G`, and `F = G(phi_1 .., .., phi_n ..)`.
///
/// Over real fields the exponents are redrawn until the real algorithm
/// yields a `-1` block exactly when some block has a negative real
/// eigenvalue. Root branches can otherwise produce one from a conjugate
/// pair, or cancel one.
pub fn gen_witness<S: Scalar>(spec: &GenSpec) -> Result<GeneratedWitness<S>, GenError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.arity;
    let dim: usize = spec.block_dims.iter().sum();
    let mut forms = Vec::new();
    let mut maps = Vec::new();
    let mut scalars = Vec::new();
    for (p, &d) in spec.block_dims.iter().enumerate() {
        let eigen = spec.eigen_for::<S>(p)?;
        scalars.push(eigen.to_c64());
        let (g, t) = hidden_block(&mut rng, n, d, &eigen, false);
        forms.push(g);
        maps.push(t);
    }
    let mut g = assemble(&forms, n)?;
    let mut tau = Matrix::block_diagonal(&maps);

    let want_negative = !S::COMPLEX && scalars.iter().any(|z| z.im == 0.0 && z.re < 0.0);
    let predict = |c: &[u32]| !S::COMPLEX && scalars.iter().any(|&mu| last_step_negative(mu, c));
    let mut exponents: Vec<u32> = (0..n).map(|_| rng.random_range(0..=spec.max_exponent)).collect();
    for _ in 0..MAX_DRAWS {
        if predict(&exponents) == want_negative {
            break;
        }
        exponents = (0..n).map(|_| rng.random_range(0..=spec.max_exponent)).collect();
    }
    let has_negative = predict(&exponents);

    let phi = random_invertible::<S>(&mut rng, dim)?;
    let mut phis: Vec<Matrix<S>> = exponents.iter().map(|&c| tau.pow(c).mul(&phi)).collect();
    if spec.conjugate {
        let c = random_invertible::<S>(&mut rng, dim)?;
        let c_inv = c.inverse().map_err(|_| GenError::SingularDraw)?;
        g = g.change_basis(&c)?;
        tau = c_inv.mul(&tau).mul(&c);
        phis = phis.iter().map(|p| c_inv.mul(p).mul(&c)).collect();
    }
    let refs: Vec<&Matrix<S>> = phis.iter().collect();
    let mut f = pull_through(&g, &refs)?;
    // keep the source form near unit size; a power of two is exact in every field
    let e = f.max_abs().log2().round() as i32;
    let two_pow = S::from_i64(2).pow(e.unsigned_abs());
    let s = if e > 0 { two_pow.inv() } else { two_pow };
    f = f.scale(&s);
    g = g.scale(&s);
    let witness = Witness::new(phis, f, g).map_err(|e| GenError::SelfCheck(e.to_string()))?;
    if let Some(cx) = check_witness(&witness, &TolerancePolicy::default())? {
        return Err(GenError::SelfCheck(format!("witness fails at {:?}", cx.index)));
    }
    Ok(GeneratedWitness { witness, exponents, hidden: tau, has_negative })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedDecomposition<S> {
    pub form: MultiForm<S>,
    pub first: Decomposition<S>,
    pub second: Decomposition<S>,
    /// Block `p` of `first` is block `permutation[p]` of `second`.
    pub permutation: Vec<usize>,
}

/// `F = F_1 + .. + F_s + 0_k` with dense blocks, its construction
/// decomposition, and a second decomposition obtained by permuting the
/// blocks, changing basis inside each block and shearing block vectors by
/// radical vectors.
pub fn gen_decomposable<S: Scalar>(spec: &GenSpec) -> Result<GeneratedDecomposition<S>, GenError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.arity;
    let pol = TolerancePolicy::default();
    let mut forms = Vec::new();
    for &d in &spec.block_dims {
        let f = (0..MAX_DRAWS)
            .map(|_| random_form::<S>(&mut rng, n, d, true))
            .find(|f| is_indecomposable_small(f, &pol) != Some(false))
            .ok_or(GenError::SingularDraw)?;
        forms.push(f);
    }
    forms.push(MultiForm::zeros(n, spec.radical_dim));
    let mut form = assemble(&forms, n)?;
    let dim = form.dim();

    let mut blocks = Vec::new();
    let mut start = 0;
    for &d in &spec.block_dims {
        blocks.push(unit_block::<S>(dim, start, d));
        start += d;
    }
    let mut radical = unit_block::<S>(dim, start, spec.radical_dim);
    if spec.conjugate {
        let c = random_invertible::<S>(&mut rng, dim)?;
        let c_inv = c.inverse().map_err(|_| GenError::SingularDraw)?;
        form = form.change_basis(&c)?;
        let move_all = |vs: &Vec<Vec<S>>| vs.iter().map(|v| c_inv.mul_vec(v)).collect::<Vec<_>>();
        blocks = blocks.iter().map(move_all).collect();
        radical = move_all(&radical);
    }
    let first = Decomposition::new(blocks, radical);

    let s = spec.block_dims.len();
    let mut permutation: Vec<usize> = (0..s).collect();
    for i in (1..s).rev() {
        let j = rng.random_range(0..=i);
        permutation.swap(i, j);
    }
    let mut second_blocks = vec![Vec::new(); s];
    for (p, basis) in first.blocks.iter().enumerate() {
        let d = basis.len();
        let a = random_invertible::<S>(&mut rng, d)?;
        let mixed: Vec<Vec<S>> = (0..d)
            .map(|j| {
                let mut v = vec![S::zero(); dim];
                for (i, b) in basis.iter().enumerate() {
                    for (vk, bk) in v.iter_mut().zip(b) {
                        *vk = vk.clone() + bk.clone() * a[(i, j)].clone();
                    }
                }
                for r in &first.radical {
                    let c: S = entry(&mut rng);
                    for (vk, rk) in v.iter_mut().zip(r) {
                        *vk = vk.clone() + rk.clone() * c.clone();
                    }
                }
                v
            })
            .collect();
        second_blocks[permutation[p]] = mixed;
    }
    let second = Decomposition::new(second_blocks, first.radical.clone());
    first.validate(&form, &pol)?;
    second.validate(&form, &pol)?;
    Ok(GeneratedDecomposition { form, first, second, permutation })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedPair<S> {
    pub form: MultiForm<S>,
    pub map: Matrix<S>,
    /// Real dimension of each hidden block.
    pub block_dims: Vec<usize>,
}

/// A form with a selfadjoint map. With `spec.nilpotent` each block is the
/// multiplication-by-x algebra `K[x]/(x - l)^d` (realified for pairs), so
/// the map has nontrivial Jordan structure.
pub fn gen_selfadjoint_pair<S: Scalar>(spec: &GenSpec) -> Result<GeneratedPair<S>, GenError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.arity;
    let mut forms = Vec::new();
    let mut maps = Vec::new();
    for (p, &d) in spec.block_dims.iter().enumerate() {
        let eigen = spec.eigen_for::<S>(p)?;
        let (g, t) = hidden_block(&mut rng, n, d, &eigen, spec.nilpotent);
        forms.push(g);
        maps.push(t);
    }
    let mut form = assemble(&forms, n)?;
    let mut map = Matrix::block_diagonal(&maps);
    if spec.conjugate {
        let c = random_invertible::<S>(&mut rng, form.dim())?;
        let c_inv = c.inverse().map_err(|_| GenError::SingularDraw)?;
        form = form.change_basis(&c)?;
        map = c_inv.mul(&map).mul(&c);
    }
    Ok(GeneratedPair { form, map, block_dims: spec.block_dims.clone() })
}

/// A random form of the given shape (for oracle tests and fixtures).
pub fn random_form_seeded<S: Scalar>(seed: u64, arity: usize, dim: usize) -> MultiForm<S> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    MultiForm::from_fn(arity, dim, |_| entry(&mut rng))
}

/// A random square matrix (not necessarily invertible).
pub fn random_matrix_seeded<S: Scalar>(seed: u64, dim: usize) -> Matrix<S> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(dim, dim, |_, _| entry(&mut rng))
}

/// Number of multi-indices of a form, for sizing loops in callers.
pub fn coefficient_count(arity: usize, dim: usize) -> usize {
    multi_indices(arity, dim).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Q, R64};

    fn ev(v: &str) -> EigenSpec {
        EigenSpec::Value(v.into())
    }

    #[test]
    fn deterministic() {
        let spec = GenSpec::new(7, 3, vec![2, 1], FieldKind::ExactRational).with_eigenvalues(&[ev("4"), ev("-9")]).conjugated();
        let a = gen_witness::<Q>(&spec).unwrap();
        let b = gen_witness::<Q>(&spec).unwrap();
        assert_eq!(a, b);
        assert!(a.has_negative);
    }

    #[test]
    fn zero_exponents_give_congruence() {
        let mut spec = GenSpec::new(1, 3, vec![2], FieldKind::ExactRational).with_eigenvalues(&[ev("4")]);
        spec.max_exponent = 0;
        let w = gen_witness::<Q>(&spec).unwrap();
        assert!(w.witness.maps.windows(2).all(|p| p[0] == p[1]));
    }

    #[test]
    fn pair_blocks_are_selfadjoint() {
        let spec = GenSpec::new(3, 3, vec![2, 2], FieldKind::FloatReal)
            .with_eigenvalues(&[EigenSpec::Pair { re: "0.5".into(), im: "1.25".into() }, ev("-1.5")])
            .conjugated();
        let w = gen_witness::<R64>(&spec).unwrap();
        let pol = TolerancePolicy::default();
        assert!(crate::selfadjoint::is_selfadjoint(&w.witness.target, &w.hidden, &pol).unwrap().is_none());
    }

    #[test]
    fn decomposable_is_valid() {
        let mut spec = GenSpec::new(11, 3, vec![2, 1, 2], FieldKind::ExactRational).conjugated();
        spec.radical_dim = 2;
        let g = gen_decomposable::<Q>(&spec).unwrap();
        assert_eq!(g.form.dim(), 7);
        assert_eq!(g.second.dims().iter().sum::<usize>(), 5);
    }

    #[test]
    fn nilpotent_pairs() {
        let mut spec = GenSpec::new(5, 3, vec![3, 4], FieldKind::ExactRational)
            .with_eigenvalues(&[ev("2"), EigenSpec::Pair { re: "1".into(), im: "1".into() }])
            .conjugated();
        spec.nilpotent = true;
        let p = gen_selfadjoint_pair::<Q>(&spec).unwrap();
        let pol = TolerancePolicy::default();
        assert!(crate::selfadjoint::is_selfadjoint(&p.form, &p.map, &pol).unwrap().is_none());
        let shifted = p.map.sub(&Matrix::scalar(7, Q::from_i64(2)));
        assert!(shifted.pow(2).rank(&pol) > shifted.pow(3).rank(&pol));
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = GenSpec::new(42, 3, vec![2, 2], FieldKind::FloatReal)
            .with_eigenvalues(&[ev("4"), EigenSpec::Pair { re: "1".into(), im: "2".into() }]);
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<GenSpec>(&text).unwrap(), spec);
    }
}
