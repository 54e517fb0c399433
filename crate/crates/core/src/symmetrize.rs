//! Turning `n` maps that relate two forms under every reordering into a
//! single congruence (complex fields) or a congruence up to signs on a
//! block splitting (real fields).

use thiserror::Error;

use crate::matfun::{
    inverse_root_poly_complex, inverse_root_poly_real, poly_apply, spectral_split, Eigen, MatFunError, Poly,
    SplitMode,
};
use crate::matrix::{Matrix, MatrixError};
use crate::scalar::{ComplexScalar, RealScalar, Scalar, TolerancePolicy};
use crate::selfadjoint::{is_selfadjoint, SlotViolation};
use crate::tensor::{MultiForm, Permutation, TensorError};

/// Maps `phi_1, .., phi_n` with `F(u_1, .., u_n) = G(phi_{s(1)} u_1, ..,
/// phi_{s(n)} u_n)` for every reordering `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness<S> {
    pub maps: Vec<Matrix<S>>,
    pub source: MultiForm<S>,
    pub target: MultiForm<S>,
}

/// A failing reordering and basis tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    /// `assignment[k]` is the index of the map applied in slot `k`.
    pub assignment: Vec<usize>,
    pub index: Vec<usize>,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignedBlock<S> {
    pub basis: Vec<Vec<S>>,
    pub sign: i8,
}

/// `F = G_signed(psi x_1, .., psi x_n)`, where `G_signed` negates `G` on
/// the blocks with sign `-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedCongruence<S> {
    pub psi: Matrix<S>,
    pub blocks: Vec<SignedBlock<S>>,
}

impl<S: Scalar> SignedCongruence<S> {
    pub fn signs(&self) -> Vec<i8> {
        self.blocks.iter().map(|b| b.sign).collect()
    }

    pub fn has_negative_block(&self) -> bool {
        self.blocks.iter().any(|b| b.sign < 0)
    }
}

#[derive(Debug, Error)]
pub enum SymmetrizeError {
    #[error("witness invalid: reordering {:?} fails at {:?} ({} vs {})", .0.assignment, .0.index, .0.expected, .0.found)]
    WitnessInvalid(Counterexample),
    #[error("map {0} is singular")]
    SingularMap(usize),
    #[error("step {step}: intermediate map is not selfadjoint (slots {} and {} differ at {:?})", .violation.slot_a, .violation.slot_b, .violation.index)]
    SelfadjointnessViolated { step: usize, violation: SlotViolation },
    #[error("no root in the field: {0}")]
    NoRootInField(String),
    #[error("eigenvalue not found: {0}")]
    EigenvalueNotFound(String),
    #[error("numerical instability: {0}")]
    NumericalInstability(String),
    #[error("{0}")]
    Dimension(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

impl From<MatFunError> for SymmetrizeError {
    fn from(e: MatFunError) -> Self {
        match e {
            MatFunError::NoRootInField(r) => SymmetrizeError::NoRootInField(r.to_string()),
            MatFunError::EigenvalueNotFound(m) => SymmetrizeError::EigenvalueNotFound(m),
            MatFunError::Matrix(m) => SymmetrizeError::Matrix(m),
            MatFunError::Dimension(m) => SymmetrizeError::Dimension(m),
            other => SymmetrizeError::NumericalInstability(other.to_string()),
        }
    }
}

impl SymmetrizeError {
    /// Errors after which rerunning over the float field can help.
    pub fn wants_float(&self) -> bool {
        matches!(self, SymmetrizeError::NoRootInField(_) | SymmetrizeError::EigenvalueNotFound(_))
    }
}

#[derive(Debug, Clone)]
pub struct SymmetrizeOptions {
    pub pol: TolerancePolicy,
    /// Re-run the full witness check after every step.
    pub recheck_steps: bool,
    /// Float condition estimates above this abort the run.
    pub condition_limit: f64,
    /// Accepted final residual for float kinds; defaults to the policy
    /// threshold at the scale of the forms.
    pub residual_tol: Option<f64>,
    /// For arity above 4 the witness check covers transpositions of the
    /// identity assignment unless this is set.
    pub full_check: bool,
}

impl Default for SymmetrizeOptions {
    fn default() -> Self {
        Self {
            pol: TolerancePolicy::default(),
            recheck_steps: cfg!(debug_assertions),
            condition_limit: 1e12,
            residual_tol: None,
            full_check: false,
        }
    }
}

impl<S: Scalar> Witness<S> {
    pub fn new(maps: Vec<Matrix<S>>, source: MultiForm<S>, target: MultiForm<S>) -> Result<Self, SymmetrizeError> {
        let n = source.arity();
        let m = source.dim();
        if target.arity() != n || target.dim() != m {
            return Err(SymmetrizeError::Dimension(format!(
                "forms have shapes ({n}, {m}) and ({}, {})",
                target.arity(),
                target.dim()
            )));
        }
        if maps.len() != n {
            return Err(SymmetrizeError::Dimension(format!("{} maps for a form of arity {n}", maps.len())));
        }
        for (i, a) in maps.iter().enumerate() {
            if a.rows() != m || a.cols() != m {
                return Err(SymmetrizeError::Dimension(format!("map {i} is {}x{}, expected {m}x{m}", a.rows(), a.cols())));
            }
            if a.inverse().is_err() {
                return Err(SymmetrizeError::SingularMap(i));
            }
        }
        Ok(Self { maps, source, target })
    }

    pub fn arity(&self) -> usize {
        self.source.arity()
    }

    pub fn to_float(&self) -> Witness<S::Float> {
        Witness {
            maps: self.maps.iter().map(Matrix::to_float).collect(),
            source: self.source.to_float(),
            target: self.target.to_float(),
        }
    }
}

/// `G(a_0 x_0, .., a_{n-1} x_{n-1})` as a form.
pub(crate) fn pull_through<S: Scalar>(g: &MultiForm<S>, maps: &[&Matrix<S>]) -> Result<MultiForm<S>, TensorError> {
    let mut cur = g.clone();
    for (slot, a) in maps.iter().enumerate() {
        cur = cur.contract_slot(slot, a)?;
    }
    Ok(cur)
}

/// Assignments checked for a witness of arity `n`.
fn assignments(n: usize, full: bool) -> Vec<Vec<usize>> {
    if n <= 4 || full {
        return Permutation::all(n).into_iter().map(|p| p.images().to_vec()).collect();
    }
    let mut out = vec![(0..n).collect::<Vec<_>>()];
    for a in 0..n {
        for b in a + 1..n {
            out.push(Permutation::transposition(n, a, b).images().to_vec());
        }
    }
    out
}

/// Checks every reordering (all `n!` for `n <= 4`, otherwise the identity
/// assignment and its transpositions unless `full`).
pub fn check_witness_with<S: Scalar>(w: &Witness<S>, pol: &TolerancePolicy, full: bool) -> Result<Option<Counterexample>, TensorError> {
    check_maps(&w.source, &w.target, &w.maps, pol, full)
}

pub fn check_witness<S: Scalar>(w: &Witness<S>, pol: &TolerancePolicy) -> Result<Option<Counterexample>, TensorError> {
    check_witness_with(w, pol, false)
}

fn check_maps<S: Scalar>(
    f: &MultiForm<S>,
    g: &MultiForm<S>,
    maps: &[Matrix<S>],
    pol: &TolerancePolicy,
    full: bool,
) -> Result<Option<Counterexample>, TensorError> {
    for assignment in assignments(f.arity(), full) {
        let chosen: Vec<&Matrix<S>> = assignment.iter().map(|&i| &maps[i]).collect();
        let pulled = pull_through(g, &chosen)?;
        if let Some(index) = f.first_difference(&pulled, pol) {
            let expected = f.get(&index).format();
            let found = pulled.get(&index).format();
            return Ok(Some(Counterexample { assignment, index, expected, found }));
        }
    }
    Ok(None)
}

/// `B diag(signs) B^{-1}` for a basis split into consecutive groups.
fn sign_operator<S: Scalar>(blocks: &[SignedBlock<S>], dim: usize) -> Result<Matrix<S>, MatrixError> {
    let cols: Vec<Vec<S>> = blocks.iter().flat_map(|b| b.basis.iter().cloned()).collect();
    let b = Matrix::from_columns(dim, &cols)?;
    let signs: Vec<S> = blocks
        .iter()
        .flat_map(|blk| std::iter::repeat_n(S::from_i64(blk.sign as i64), blk.basis.len()))
        .collect();
    let d = Matrix::from_fn(dim, dim, |i, j| if i == j { signs[i].clone() } else { S::zero() });
    Ok(b.mul(&d).mul(&b.inverse()?))
}

/// `G` with its sign blocks applied: `G(E x_1, x_2, ..)`.
pub fn signed_target<S: Scalar>(g: &MultiForm<S>, blocks: &[SignedBlock<S>]) -> Result<MultiForm<S>, SymmetrizeError> {
    if blocks.iter().all(|b| b.sign > 0) {
        return Ok(g.clone());
    }
    let e = sign_operator(blocks, g.dim())?;
    Ok(g.contract_slot(0, &e)?)
}

/// Largest coefficient of `F - G_signed(psi .., .., psi ..)`.
pub fn verify_congruence<S: Scalar>(
    f: &MultiForm<S>,
    g: &MultiForm<S>,
    psi: &Matrix<S>,
    blocks: Option<&[SignedBlock<S>]>,
) -> Result<f64, SymmetrizeError> {
    let g = match blocks {
        Some(b) => signed_target(g, b)?,
        None => g.clone(),
    };
    Ok(f.max_difference(&g.pullback(psi)?)?)
}

/// A single congruence `psi` with `F = G(psi .., .., psi ..)`.
pub fn symmetrize_complex<S: ComplexScalar>(w: &Witness<S>, opts: &SymmetrizeOptions) -> Result<Matrix<S>, SymmetrizeError> {
    let out = run(w, opts, SplitMode::Complex, |t, e, m| match e {
        Eigen::Single(l) => inverse_root_poly_complex(t, l, m),
        Eigen::Pair { .. } => unreachable!("complex splits have no pairs"),
    })?;
    Ok(out.psi)
}

/// `psi` and signed blocks with `F = (sign-adjusted G)(psi .., psi ..)`.
pub fn symmetrize_real<S: RealScalar>(w: &Witness<S>, opts: &SymmetrizeOptions) -> Result<SignedCongruence<S>, SymmetrizeError> {
    run(w, opts, SplitMode::Real, inverse_root_poly_real)
}

/// Outcome of an exact run that may have restarted over floats.
#[derive(Debug, Clone, PartialEq)]
pub enum Solved<S: Scalar> {
    Exact(SignedCongruence<S>),
    Float(SignedCongruence<S::Float>),
}

/// [`symmetrize_real`] over an exact field, restarting from scratch in
/// floating point when a root or eigenvalue leaves the field.
pub fn symmetrize_real_or_float<S>(w: &Witness<S>, opts: &SymmetrizeOptions) -> Result<Solved<S>, SymmetrizeError>
where
    S: RealScalar,
    S::Float: RealScalar,
{
    match symmetrize_real(w, opts) {
        Ok(c) => Ok(Solved::Exact(c)),
        Err(e) if S::EXACT && e.wants_float() => Ok(Solved::Float(symmetrize_real(&w.to_float(), opts)?)),
        Err(e) => Err(e),
    }
}

/// Complex counterpart of [`symmetrize_real_or_float`].
pub fn symmetrize_complex_or_float<S>(w: &Witness<S>, opts: &SymmetrizeOptions) -> Result<Solved<S>, SymmetrizeError>
where
    S: ComplexScalar,
    S::Float: ComplexScalar,
{
    match symmetrize_complex(w, opts) {
        Ok(psi) => Ok(Solved::Exact(SignedCongruence { blocks: vec![identity_block(w.source.dim())], psi })),
        Err(e) if S::EXACT && e.wants_float() => {
            let psi = symmetrize_complex(&w.to_float(), opts)?;
            Ok(Solved::Float(SignedCongruence { blocks: vec![identity_block(w.source.dim())], psi }))
        }
        Err(e) => Err(e),
    }
}

fn identity_block<S: Scalar>(dim: usize) -> SignedBlock<S> {
    SignedBlock { basis: Matrix::<S>::identity(dim).columns(), sign: 1 }
}

fn check_condition<S: Scalar>(a: &Matrix<S>, what: &str, opts: &SymmetrizeOptions) -> Result<(), SymmetrizeError> {
    if !S::EXACT {
        let c = a.condition_estimate();
        if c > opts.condition_limit {
            return Err(SymmetrizeError::NumericalInstability(format!("{what} has condition estimate {c:e}")));
        }
    }
    Ok(())
}

fn run<S: Scalar>(
    w: &Witness<S>,
    opts: &SymmetrizeOptions,
    mode: SplitMode,
    root: impl Fn(&Matrix<S>, &Eigen<S>, u32) -> Result<Poly<S>, MatFunError>,
) -> Result<SignedCongruence<S>, SymmetrizeError> {
    let pol = &opts.pol;
    let n = w.arity();
    let dim = w.source.dim();
    if let Some(cx) = check_witness_with(w, pol, opts.full_check)? {
        return Err(SymmetrizeError::WitnessInvalid(cx));
    }
    for (i, a) in w.maps.iter().enumerate() {
        check_condition(a, &format!("map {i}"), opts)?;
    }
    let mut maps = w.maps.clone();
    let mut g = w.target.clone();
    let mut blocks = vec![identity_block::<S>(dim)];

    for t in 1..n {
        let phi = maps[0].clone();
        let tau = phi.mul(&maps[t].inverse().map_err(|_| SymmetrizeError::SingularMap(t))?);
        check_condition(&tau, &format!("step {t} map"), opts)?;
        if let Some(violation) = is_selfadjoint(&g, &tau, pol)? {
            return Err(SymmetrizeError::SelfadjointnessViolated { step: t, violation });
        }
        let split = spectral_split(&tau, mode)?;
        let b = split.basis_matrix();
        check_condition(&b, &format!("step {t} spectral basis"), opts)?;
        let b_inv = b.inverse()?;
        let local = b_inv.mul(&tau).mul(&b);
        let ranges = split.ranges();

        let negative: Vec<bool> = split
            .groups
            .iter()
            .map(|grp| match &grp.eigen {
                Eigen::Single(l) => mode == SplitMode::Real && l.to_c64().re < 0.0,
                Eigen::Pair { .. } => false,
            })
            .collect();

        let mut pieces = Vec::with_capacity(split.groups.len());
        for ((grp, r), &neg) in split.groups.iter().zip(&ranges).zip(&negative) {
            let idx: Vec<usize> = r.clone().collect();
            let mut ti = local.submatrix(&idx, &idx);
            let mut eigen = grp.eigen.clone();
            if neg {
                ti = ti.scale(&-S::one());
                if let Eigen::Single(l) = eigen {
                    eigen = Eigen::Single(-l);
                }
            }
            let f = root(&ti, &eigen, (t + 1) as u32)?;
            pieces.push(poly_apply(&f, &ti));
        }

        if negative.iter().any(|&x| x) {
            let cols = b.columns();
            let signed: Vec<SignedBlock<S>> = ranges
                .iter()
                .zip(&negative)
                .map(|(r, &neg)| SignedBlock { basis: cols[r.clone()].to_vec(), sign: if neg { -1 } else { 1 } })
                .collect();
            let e = sign_operator(&signed, dim)?;
            maps[t] = e.mul(&maps[t]);
            if t + 1 < n {
                maps[t + 1] = e.mul(&maps[t + 1]);
            } else {
                g = g.contract_slot(0, &e)?;
                blocks = merge_signed(signed);
            }
        }

        let rho = b.mul(&Matrix::block_diagonal(&pieces)).mul(&b_inv);
        let next = rho.mul(&phi);
        for m in maps.iter_mut().take(t + 1) {
            *m = next.clone();
        }
        if opts.recheck_steps {
            if let Some(cx) = check_maps(&w.source, &g, &maps, pol, opts.full_check)? {
                return Err(SymmetrizeError::NumericalInstability(format!(
                    "witness property lost after step {t}: reordering {:?} at {:?}",
                    cx.assignment, cx.index
                )));
            }
        }
    }

    let psi = maps.swap_remove(0);
    let residual = verify_congruence(&w.source, &w.target, &psi, Some(&blocks))?;
    let scale = w.source.max_abs().max(w.target.max_abs());
    let ok = if S::EXACT { residual == 0.0 } else { residual <= opts.residual_tol.unwrap_or_else(|| pol.threshold(scale)) };
    if !ok {
        return Err(SymmetrizeError::NumericalInstability(format!("final residual {residual:e}")));
    }
    Ok(SignedCongruence { psi, blocks })
}

/// Collapses per-group signs into at most one `+1` and one `-1` block.
fn merge_signed<S: Scalar>(signed: Vec<SignedBlock<S>>) -> Vec<SignedBlock<S>> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for b in signed {
        if b.sign > 0 {
            pos.extend(b.basis);
        } else {
            neg.extend(b.basis);
        }
    }
    let mut out = Vec::new();
    if !pos.is_empty() {
        out.push(SignedBlock { basis: pos, sign: 1 });
    }
    if !neg.is_empty() {
        out.push(SignedBlock { basis: neg, sign: -1 });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Q, R64};

    fn q(v: i64) -> Q {
        Q::from_i64(v)
    }

    fn scalar_form<S: Scalar>(n: usize, c: S) -> MultiForm<S> {
        MultiForm::from_fn(n, 1, |_| c.clone())
    }

    #[test]
    fn congruence_is_a_fixed_point() {
        let g = MultiForm::from_fn(3, 2, |idx| q(idx.iter().sum::<usize>() as i64 + 1));
        let phi = Matrix::from_rows(vec![vec![q(1), q(2)], vec![q(0), q(1)]]).unwrap();
        let f = g.pullback(&phi).unwrap();
        let w = Witness::new(vec![phi.clone(); 3], f, g).unwrap();
        let out = symmetrize_real(&w, &SymmetrizeOptions::default()).unwrap();
        assert_eq!(out.psi, phi);
        assert_eq!(out.signs(), vec![1]);
    }

    #[test]
    fn scalar_cube_needs_float() {
        let g = scalar_form(3, q(1));
        let f = scalar_form(3, q(8));
        let maps = vec![Matrix::scalar(1, q(1)), Matrix::scalar(1, q(2)), Matrix::scalar(1, q(4))];
        let w = Witness::new(maps, f, g).unwrap();
        let opts = SymmetrizeOptions::default();
        assert!(symmetrize_real(&w, &opts).unwrap_err().wants_float());
        match symmetrize_real_or_float(&w, &opts).unwrap() {
            Solved::Float(c) => assert!((c.psi[(0, 0)] - 2.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bilinear_sign_flip() {
        let g = scalar_form(2, q(1));
        let f = scalar_form(2, q(-1));
        let w = Witness::new(vec![Matrix::scalar(1, q(1)), Matrix::scalar(1, q(-1))], f.clone(), g.clone()).unwrap();
        let out = symmetrize_real(&w, &SymmetrizeOptions::default()).unwrap();
        assert_eq!(out.signs(), vec![-1]);
        assert_eq!(out.psi[(0, 0)].clone() * out.psi[(0, 0)].clone(), q(1));
        assert_eq!(verify_congruence(&f, &g, &out.psi, Some(&out.blocks)).unwrap(), 0.0);
    }

    #[test]
    fn perturbed_witness_rejected() {
        let g = MultiForm::from_fn(3, 2, |idx| q(idx[0] as i64 - idx[1] as i64 + 2 * idx[2] as i64 + 1));
        let phi = Matrix::from_rows(vec![vec![q(2), q(1)], vec![q(1), q(1)]]).unwrap();
        let f = g.pullback(&phi).unwrap();
        let mut maps = vec![phi.clone(); 3];
        let w = Witness::new(maps.clone(), f.clone(), g.clone()).unwrap();
        assert!(check_witness(&w, &TolerancePolicy::default()).unwrap().is_none());
        maps[1][(0, 0)] = q(3);
        let bad = Witness::new(maps, f, g).unwrap();
        let cx = check_witness(&bad, &TolerancePolicy::default()).unwrap().unwrap();
        assert_ne!(cx.expected, cx.found);
        assert!(matches!(symmetrize_real(&bad, &SymmetrizeOptions::default()), Err(SymmetrizeError::WitnessInvalid(_))));
    }

    #[test]
    fn verify_detects_bump() {
        let g = MultiForm::from_fn(2, 2, |idx| q(idx[0] as i64 + 1));
        let mut f = g.clone();
        f.set(&[1, 0], q(3));
        let psi = Matrix::identity(2);
        assert_eq!(verify_congruence(&g, &g, &psi, None).unwrap(), 0.0);
        assert_eq!(verify_congruence(&f, &g, &psi, None).unwrap(), 1.0);
    }

    #[test]
    fn float_scalar_example() {
        let g = scalar_form(3, 1.0 as R64);
        let f = scalar_form(3, 8.0);
        let maps = vec![Matrix::scalar(1, 1.0), Matrix::scalar(1, 2.0), Matrix::scalar(1, 4.0)];
        let w = Witness::new(maps, f, g).unwrap();
        let out = symmetrize_real(&w, &SymmetrizeOptions::default()).unwrap();
        assert!((out.psi[(0, 0)] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn singular_map_named() {
        let g = scalar_form(2, q(1));
        let err = Witness::new(vec![Matrix::scalar(1, q(1)), Matrix::scalar(1, q(0))], g.clone(), g).unwrap_err();
        assert!(matches!(err, SymmetrizeError::SingularMap(1)));
    }
}
