//! Direct-sum structure of forms: radical splitting, support blocks, and
//! matching two decompositions of the same form block by block.

use thiserror::Error;

use crate::matrix::{same_span, Matrix, MatrixError};
use crate::scalar::{Scalar, TolerancePolicy};
use crate::tensor::{MultiForm, TensorError};

#[derive(Debug, Error)]
pub enum DecomposeError {
    #[error("blocks and radical span a {rank}-dimensional subspace of a {dim}-dimensional space")]
    NotABasis { rank: usize, dim: usize },
    #[error("coefficient at {index:?} mixes different blocks but is nonzero")]
    MixedNonzero { index: Vec<usize> },
    #[error("block {0} restricts to the zero form")]
    ZeroBlock(usize),
    #[error("subspace is not a complement of the radical")]
    NotAComplement,
    #[error("decompositions have {left} and {right} blocks")]
    BlockCountMismatch { left: usize, right: usize },
    #[error("block dimensions {left:?} and {right:?} differ as multisets")]
    DimensionMismatch { left: Vec<usize>, right: Vec<usize> },
    #[error("transition entry ({row}, {col}) between strip {strip} and block {block} is {value}, expected 0 (strip ranks {strip_ranks:?})")]
    OffDiagonalNonzero {
        strip: usize,
        block: usize,
        row: usize,
        col: usize,
        value: String,
        /// Rank of every strip/block piece of the transition matrix.
        strip_ranks: Vec<Vec<usize>>,
    },
    #[error("strip {strip} draws on several blocks of the second decomposition")]
    StripSplitsBlock { strip: usize },
    #[error("matched blocks {strip} and {block} are not congruent")]
    CongruenceFailed { strip: usize, block: usize },
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// `U = U_1 + .. + U_s + U_0` with `U_0` the radical, stored as bases.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition<S> {
    pub blocks: Vec<Vec<Vec<S>>>,
    pub radical: Vec<Vec<S>>,
}

impl<S: Scalar> Decomposition<S> {
    pub fn new(blocks: Vec<Vec<Vec<S>>>, radical: Vec<Vec<S>>) -> Self {
        Self { blocks, radical }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    /// Block vectors followed by radical vectors, as columns.
    pub fn basis_matrix(&self, dim: usize) -> Result<Matrix<S>, MatrixError> {
        let cols: Vec<Vec<S>> = self.blocks.iter().flatten().chain(&self.radical).cloned().collect();
        Matrix::from_columns(dim, &cols)
    }

    /// Block label of each column of [`Self::basis_matrix`]; `None` marks
    /// radical vectors.
    fn labels(&self) -> Vec<Option<usize>> {
        self.blocks
            .iter()
            .enumerate()
            .flat_map(|(b, vs)| std::iter::repeat_n(Some(b), vs.len()))
            .chain(std::iter::repeat_n(None, self.radical.len()))
            .collect()
    }

    /// Checks that the vectors form a basis, that every coefficient mixing
    /// two blocks (or touching the radical) vanishes, and that no block is
    /// zero.
    pub fn validate(&self, f: &MultiForm<S>, pol: &TolerancePolicy) -> Result<(), DecomposeError> {
        let b = self.basis_matrix(f.dim())?;
        let rank = if b.cols() == f.dim() { b.rank(pol) } else { usize::MAX };
        if rank != f.dim() {
            return Err(DecomposeError::NotABasis { rank: b.rank(pol), dim: f.dim() });
        }
        let h = f.change_basis(&b)?;
        if let Some(index) = mixed_violation(&h, &self.labels(), pol) {
            return Err(DecomposeError::MixedNonzero { index });
        }
        for (i, block) in self.blocks.iter().enumerate() {
            if f.restrict(block)?.is_negligible(pol) {
                return Err(DecomposeError::ZeroBlock(i));
            }
        }
        Ok(())
    }

    /// The restriction of `f` to each block, in the block's basis.
    pub fn block_forms(&self, f: &MultiForm<S>) -> Result<Vec<MultiForm<S>>, TensorError> {
        self.blocks.iter().map(|b| f.restrict(b)).collect()
    }
}

/// First coefficient of `h` whose indices do not all carry the same
/// (non-radical) label but which is not negligible.
pub(crate) fn mixed_violation<S: Scalar>(
    h: &MultiForm<S>,
    labels: &[Option<usize>],
    pol: &TolerancePolicy,
) -> Option<Vec<usize>> {
    let scale = h.max_abs();
    h.indices().zip(h.coeffs()).find_map(|(idx, c)| {
        let first = labels[idx[0]];
        let pure = first.is_some() && idx.iter().all(|&i| labels[i] == first);
        (!pure && !c.is_negligible(scale, pol)).then_some(idx)
    })
}

fn unit<S: Scalar>(dim: usize, i: usize) -> Vec<S> {
    (0..dim).map(|k| if k == i { S::one() } else { S::zero() }).collect()
}

/// Extends `vectors` by standard basis vectors to a basis; returns the
/// added vectors.
fn complete_basis<S: Scalar>(vectors: &[Vec<S>], dim: usize, pol: &TolerancePolicy) -> Vec<Vec<S>> {
    let mut have = vectors.to_vec();
    let mut added = Vec::new();
    for i in 0..dim {
        if have.len() == dim {
            break;
        }
        let mut trial = have.clone();
        trial.push(unit(dim, i));
        if crate::matrix::span_rank(&trial, dim, pol) == trial.len() {
            have = trial;
            added.push(unit(dim, i));
        }
    }
    added
}

/// `(complement, radical)`: a basis of the radical and standard basis
/// vectors completing it.
pub fn split_radical<S: Scalar>(f: &MultiForm<S>, pol: &TolerancePolicy) -> (Vec<Vec<S>>, Vec<Vec<S>>) {
    let radical = f.radical(pol);
    let complement = complete_basis(&radical, f.dim(), pol);
    (complement, radical)
}

/// For two complements `a`, `b` of the radical, the matrix `X` with
/// `a_i = sum_j b_j X[j, i]` modulo the radical. `F|a` is `F|b` in the
/// basis given by the columns of `X`.
pub fn radical_complement_congruence<S: Scalar>(
    f: &MultiForm<S>,
    a: &[Vec<S>],
    b: &[Vec<S>],
    pol: &TolerancePolicy,
) -> Result<Matrix<S>, DecomposeError> {
    let dim = f.dim();
    let radical = f.radical(pol);
    let k = b.len();
    if a.len() != k || k + radical.len() != dim {
        return Err(DecomposeError::NotAComplement);
    }
    let full: Vec<Vec<S>> = b.iter().chain(&radical).cloned().collect();
    let basis = Matrix::from_columns(dim, &full)?;
    let with_a: Vec<Vec<S>> = a.iter().chain(&radical).cloned().collect();
    if crate::matrix::span_rank(&with_a, dim, pol) != dim {
        return Err(DecomposeError::NotAComplement);
    }
    let coords = basis.solve(&Matrix::from_columns(dim, a)?).map_err(|_| DecomposeError::NotAComplement)?;
    let rows: Vec<usize> = (0..k).collect();
    let cols: Vec<usize> = (0..a.len()).collect();
    Ok(coords.submatrix(&rows, &cols))
}

/// Groups basis indices that occur together in a nonzero coefficient.
/// Indices touching no nonzero coefficient form the radical part.
pub fn support_blocks<S: Scalar>(f: &MultiForm<S>, pol: &TolerancePolicy) -> Decomposition<S> {
    let m = f.dim();
    let mut parent: Vec<usize> = (0..m).collect();
    let mut used = vec![false; m];
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    let scale = f.max_abs();
    for (idx, c) in f.indices().zip(f.coeffs()) {
        if c.is_negligible(scale, pol) {
            continue;
        }
        for &i in &idx {
            used[i] = true;
            let (a, b) = (find(&mut parent, i), find(&mut parent, idx[0]));
            parent[a] = b;
        }
    }
    let mut blocks: Vec<(usize, Vec<Vec<S>>)> = Vec::new();
    let mut radical = Vec::new();
    for i in 0..m {
        if !used[i] {
            radical.push(unit(m, i));
            continue;
        }
        let r = find(&mut parent, i);
        match blocks.iter_mut().find(|(root, _)| *root == r) {
            Some((_, vs)) => vs.push(unit(m, i)),
            None => blocks.push((r, vec![unit(m, i)])),
        }
    }
    Decomposition::new(blocks.into_iter().map(|(_, vs)| vs).collect(), radical)
}

/// Number of nonzero blocks found by [`support_blocks`].
pub fn count_nonzero_summands<S: Scalar>(f: &MultiForm<S>, pol: &TolerancePolicy) -> Result<usize, TensorError> {
    let d = support_blocks(f, pol);
    let mut count = 0;
    for b in &d.blocks {
        if !f.restrict(b)?.is_negligible(pol) {
            count += 1;
        }
    }
    Ok(count)
}

/// Result of matching two decompositions of one form.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment<S> {
    /// Block `p` of the first decomposition matches block `permutation[p]`
    /// of the second.
    pub permutation: Vec<usize>,
    /// `congruences[p]` maps coordinates in the matched second block to
    /// coordinates in block `p`: `F|V = (F|U_p).change_basis(X)`.
    pub congruences: Vec<Matrix<S>>,
}

/// Matches the blocks of `d2` to those of `d1`.
///
/// The second decomposition's block vectors are written in the first
/// decomposition's basis with radical coordinates dropped, giving a
/// transition matrix `C` with row strips (blocks of `d1`) and column
/// blocks (of `d2`). Columns are chosen per strip so that the diagonal
/// pieces are invertible; each strip is then normalised to an identity
/// diagonal piece and every other entry of the strip must vanish.
pub fn align_decompositions<S: Scalar>(
    f: &MultiForm<S>,
    d1: &Decomposition<S>,
    d2: &Decomposition<S>,
    pol: &TolerancePolicy,
) -> Result<Alignment<S>, DecomposeError> {
    if d1.len() != d2.len() {
        return Err(DecomposeError::BlockCountMismatch { left: d1.len(), right: d2.len() });
    }
    let (dims1, dims2) = (d1.dims(), d2.dims());
    let (mut s1, mut s2) = (dims1.clone(), dims2.clone());
    s1.sort_unstable();
    s2.sort_unstable();
    if s1 != s2 {
        return Err(DecomposeError::DimensionMismatch { left: dims1, right: dims2 });
    }
    let dim = f.dim();
    let b1 = d1.basis_matrix(dim)?;
    let k: usize = dims1.iter().sum();
    let v2: Vec<Vec<S>> = d2.blocks.iter().flatten().cloned().collect();
    let coords = b1.solve(&Matrix::from_columns(dim, &v2)?)?;
    let c = coords.submatrix(&(0..k).collect::<Vec<_>>(), &(0..v2.len()).collect::<Vec<_>>());

    let strips = offsets(&dims1);
    let col_blocks = offsets(&dims2);
    let col_owner: Vec<usize> = col_blocks.iter().enumerate().flat_map(|(q, r)| r.clone().map(move |_| q)).collect();

    let mut chosen: Vec<Vec<usize>> = Vec::new();
    let mut free = vec![true; c.cols()];
    if !choose_columns(&c, &strips, &col_blocks, &mut free, &mut chosen, pol) {
        // C itself is singular: the inputs do not decompose the same space.
        return Err(DecomposeError::NotABasis { rank: c.rank(pol), dim: k });
    }

    let strip_ranks: Vec<Vec<usize>> = strips
        .iter()
        .map(|rs| {
            col_blocks
                .iter()
                .map(|cs| c.submatrix(&rs.clone().collect::<Vec<_>>(), &cs.clone().collect::<Vec<_>>()).rank(pol))
                .collect()
        })
        .collect();

    let mut permutation = Vec::with_capacity(d1.len());
    let mut congruences = Vec::with_capacity(d1.len());
    for (p, rows) in strips.iter().enumerate() {
        let rows: Vec<usize> = rows.clone().collect();
        let strip = c.submatrix(&rows, &(0..c.cols()).collect::<Vec<_>>());
        let pivot = strip.submatrix(&(0..rows.len()).collect::<Vec<_>>(), &chosen[p]);
        let normalised = pivot.inverse()?.mul(&strip);
        let scale = normalised.max_abs();
        for col in 0..c.cols() {
            if chosen[p].contains(&col) {
                continue;
            }
            for r in 0..rows.len() {
                let v = &normalised[(r, col)];
                if !v.is_negligible(scale, pol) {
                    return Err(DecomposeError::OffDiagonalNonzero {
                        strip: p,
                        block: col_owner[col],
                        row: rows[r],
                        col,
                        value: v.format(),
                        strip_ranks,
                    });
                }
            }
        }
        let q = col_owner[chosen[p][0]];
        if chosen[p].iter().any(|&col| col_owner[col] != q) || col_blocks[q].len() != rows.len() {
            return Err(DecomposeError::StripSplitsBlock { strip: p });
        }
        let cols: Vec<usize> = col_blocks[q].clone().collect();
        let x = strip.submatrix(&(0..rows.len()).collect::<Vec<_>>(), &cols);
        let lhs = f.restrict(&d2.blocks[q])?;
        let rhs = f.restrict(&d1.blocks[p])?.change_basis(&x)?;
        if !lhs.approx_eq(&rhs, pol) {
            return Err(DecomposeError::CongruenceFailed { strip: p, block: q });
        }
        let mut u = d1.blocks[p].clone();
        u.extend(d1.radical.iter().cloned());
        let mut v = d2.blocks[q].clone();
        v.extend(d1.radical.iter().cloned());
        if !same_span(&u, &v, dim, pol) {
            return Err(DecomposeError::CongruenceFailed { strip: p, block: q });
        }
        permutation.push(q);
        congruences.push(x);
    }
    Ok(Alignment { permutation, congruences })
}

fn offsets(dims: &[usize]) -> Vec<std::ops::Range<usize>> {
    let mut start = 0;
    dims.iter()
        .map(|&d| {
            let r = start..start + d;
            start += d;
            r
        })
        .collect()
}

/// Backtracking choice of one column set per strip, with invertible
/// diagonal pieces. Whole column blocks of matching size are tried first.
fn choose_columns<S: Scalar>(
    c: &Matrix<S>,
    strips: &[std::ops::Range<usize>],
    col_blocks: &[std::ops::Range<usize>],
    free: &mut [bool],
    chosen: &mut Vec<Vec<usize>>,
    pol: &TolerancePolicy,
) -> bool {
    let p = chosen.len();
    if p == strips.len() {
        return true;
    }
    let rows: Vec<usize> = strips[p].clone().collect();
    let d = rows.len();
    let mut candidates: Vec<Vec<usize>> = col_blocks
        .iter()
        .filter(|r| r.len() == d && (r.start..r.end).all(|j| free[j]))
        .map(|r| r.clone().collect())
        .collect();
    let available: Vec<usize> = (0..free.len()).filter(|&j| free[j]).collect();
    for combo in combinations(&available, d) {
        if !candidates.contains(&combo) {
            candidates.push(combo);
        }
    }
    for cols in candidates {
        if c.submatrix(&rows, &cols).rank(pol) != d {
            continue;
        }
        for &j in &cols {
            free[j] = false;
        }
        chosen.push(cols.clone());
        if choose_columns(c, strips, col_blocks, free, chosen, pol) {
            return true;
        }
        chosen.pop();
        for &j in &cols {
            free[j] = true;
        }
    }
    false
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if items.len() < k {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        for mut rest in combinations(&items[i + 1..], k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Searches for a splitting of a form on a space of dimension at most 2.
///
/// Dimension 1: indecomposable iff nonzero. Dimension 2: a nonzero radical
/// splits the form; otherwise first basis vectors `(1, t)` for `t` on a
/// rational grid and `(0, 1)` are tried, the second vector is solved for
/// exactly, and all mixed coefficients are checked. `None` for larger
/// dimensions.
///
/// A negative answer in dimension 2 is only as strong as the grid.
pub fn is_indecomposable_small<S: Scalar>(f: &MultiForm<S>, pol: &TolerancePolicy) -> Option<bool> {
    match f.dim() {
        0 => Some(false),
        1 => Some(!f.is_negligible(pol)),
        2 => {
            if f.is_negligible(pol) || !f.radical(pol).is_empty() {
                return Some(false);
            }
            let mut dirs = vec![vec![S::zero(), S::one()]];
            for num in -12i64..=12 {
                for den in 1i64..=4 {
                    if num::integer::gcd(num, den) != 1 {
                        continue;
                    }
                    dirs.push(vec![S::one(), S::from_ratio(num, den)]);
                }
            }
            Some(!dirs.iter().any(|v1| splits_with(f, v1, pol)))
        }
        _ => None,
    }
}

fn splits_with<S: Scalar>(f: &MultiForm<S>, v1: &[S], pol: &TolerancePolicy) -> bool {
    let n = f.arity();
    // v2 must kill every functional with v1 in all but one slot.
    let rows: Vec<Vec<S>> = (0..n)
        .map(|slot| {
            (0..2)
                .map(|x| {
                    let args: Vec<Vec<S>> =
                        (0..n).map(|k| if k == slot { unit(2, x) } else { v1.to_vec() }).collect();
                    f.eval(&args).expect("shapes match")
                })
                .collect()
        })
        .collect();
    let kernel = Matrix::from_rows(rows).expect("rows of length 2").kernel(pol);
    kernel.into_iter().any(|v2| {
        if crate::matrix::span_rank(&[v1.to_vec(), v2.clone()], 2, pol) != 2 {
            return false;
        }
        let basis = Matrix::from_columns(2, &[v1.to_vec(), v2]).expect("two columns");
        let h = f.change_basis(&basis).expect("square basis");
        mixed_violation(&h, &[Some(0), Some(1)], pol).is_none()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Q;

    fn q(v: i64) -> Q {
        Q::from_i64(v)
    }

    fn pol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    fn xyz_plus_zero() -> MultiForm<Q> {
        MultiForm::from_fn(3, 2, |idx| if idx == [0, 0, 0] { q(1) } else { q(0) })
    }

    #[test]
    fn radical_split_of_padded_form() {
        let (comp, rad) = split_radical(&xyz_plus_zero(), &pol());
        assert_eq!(rad, vec![vec![q(0), q(1)]]);
        assert_eq!(comp, vec![vec![q(1), q(0)]]);
        let zero = MultiForm::<Q>::zeros(3, 2);
        let (comp, rad) = split_radical(&zero, &pol());
        assert!(comp.is_empty());
        assert_eq!(rad.len(), 2);
    }

    #[test]
    fn complement_congruence_hand_case() {
        let f = xyz_plus_zero();
        let x = radical_complement_congruence(&f, &[vec![q(1), q(0)]], &[vec![q(1), q(1)]], &pol()).unwrap();
        assert_eq!(x, Matrix::identity(1));
        let err = radical_complement_congruence(&f, &[vec![q(0), q(1)]], &[vec![q(1), q(1)]], &pol());
        assert!(matches!(err, Err(DecomposeError::NotAComplement)));
    }

    #[test]
    fn support_blocks_of_direct_sum() {
        let a = MultiForm::from_fn(3, 1, |_| q(2));
        let b = MultiForm::from_fn(3, 2, |idx| q((idx[0] + 2 * idx[1] + idx[2]) as i64 + 1));
        let f = a.direct_sum(&b).unwrap().direct_sum(&MultiForm::zeros(3, 1)).unwrap();
        let d = support_blocks(&f, &pol());
        assert_eq!(d.dims(), vec![1, 2]);
        assert_eq!(d.radical.len(), 1);
        d.validate(&f, &pol()).unwrap();
        assert_eq!(count_nonzero_summands(&f, &pol()).unwrap(), 2);
        assert_eq!(count_nonzero_summands(&MultiForm::<Q>::zeros(3, 2), &pol()).unwrap(), 0);
    }

    #[test]
    fn align_reversed_blocks() {
        let a = MultiForm::from_fn(3, 1, |_| q(2));
        let b = MultiForm::from_fn(3, 1, |_| q(5));
        let f = a.direct_sum(&b).unwrap();
        let d1 = support_blocks(&f, &pol());
        let same = align_decompositions(&f, &d1, &d1, &pol()).unwrap();
        assert_eq!(same.permutation, vec![0, 1]);
        let d2 = Decomposition::new(vec![d1.blocks[1].clone(), d1.blocks[0].clone()], Vec::new());
        let rev = align_decompositions(&f, &d1, &d2, &pol()).unwrap();
        assert_eq!(rev.permutation, vec![1, 0]);
        assert_eq!(rev.congruences, vec![Matrix::identity(1), Matrix::identity(1)]);
    }

    #[test]
    fn rotated_bilinear_identity_fails() {
        let f = MultiForm::from_fn(2, 2, |idx| if idx[0] == idx[1] { q(1) } else { q(0) });
        let d1 = support_blocks(&f, &pol());
        let (c, s) = (Q::from_ratio(3, 5), Q::from_ratio(4, 5));
        let d2 = Decomposition::new(vec![vec![vec![c.clone(), s.clone()]], vec![vec![-s, c]]], Vec::new());
        d2.validate(&f, &pol()).unwrap();
        match align_decompositions(&f, &d1, &d2, &pol()) {
            Err(DecomposeError::OffDiagonalNonzero { value, .. }) => assert_eq!(value, "-4/3"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn small_indecomposability() {
        let xyz = MultiForm::from_fn(3, 1, |_| q(1));
        assert_eq!(is_indecomposable_small(&xyz, &pol()), Some(true));
        let split = xyz.direct_sum(&xyz).unwrap();
        assert_eq!(is_indecomposable_small(&split, &pol()), Some(false));
        // same split hidden by a shear
        let c = Matrix::from_rows(vec![vec![q(1), q(1)], vec![q(0), q(1)]]).unwrap();
        assert_eq!(is_indecomposable_small(&split.change_basis(&c).unwrap(), &pol()), Some(false));
        // x^2 y-type form: F(e0,e0,e1) and permutations
        let dense = MultiForm::from_fn(3, 2, |idx| {
            if idx.iter().filter(|&&i| i == 1).count() == 1 { q(1) } else { q(0) }
        });
        assert_eq!(is_indecomposable_small(&dense, &pol()), Some(true));
    }
}
