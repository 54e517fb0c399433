//! Maps that can be moved freely between the slots of a form, and the
//! block splitting of a form along their spectral groups.

use thiserror::Error;

use crate::decompose::{mixed_violation, Decomposition};
use crate::matfun::{poly_apply, Poly, SpectralSplit};
use crate::matrix::Matrix;
use crate::scalar::{Scalar, TolerancePolicy};
use crate::tensor::{MultiForm, TensorError};

#[derive(Debug, Error)]
pub enum SelfadjointError {
    #[error("coefficient at {index:?} (split basis) mixes spectral groups: {value}")]
    MixedBlockNonzero { index: Vec<usize>, value: String },
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Where moving the map from `slot_a` to `slot_b` changes the form.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotViolation {
    pub slot_a: usize,
    pub slot_b: usize,
    pub index: Vec<usize>,
}

/// `None` if `G(.., tau x_i, ..) = G(.., tau x_j, ..)` for all slot
/// pairs, otherwise the first violation found. Only slot 0 is compared
/// with the others, which suffices by transitivity.
pub fn is_selfadjoint<S: Scalar>(
    g: &MultiForm<S>,
    tau: &Matrix<S>,
    pol: &TolerancePolicy,
) -> Result<Option<SlotViolation>, TensorError> {
    let base = g.contract_slot(0, tau)?;
    for j in 1..g.arity() {
        let other = g.contract_slot(j, tau)?;
        if let Some(index) = base.first_difference(&other, pol) {
            return Ok(Some(SlotViolation { slot_a: 0, slot_b: j, index }));
        }
    }
    Ok(None)
}

/// Same predicate as [`is_selfadjoint`], checking every slot pair.
pub fn is_selfadjoint_pairwise<S: Scalar>(
    g: &MultiForm<S>,
    tau: &Matrix<S>,
    pol: &TolerancePolicy,
) -> Result<Option<SlotViolation>, TensorError> {
    let moved: Vec<MultiForm<S>> = (0..g.arity()).map(|k| g.contract_slot(k, tau)).collect::<Result<_, _>>()?;
    for i in 0..moved.len() {
        for j in i + 1..moved.len() {
            if let Some(index) = moved[i].first_difference(&moved[j], pol) {
                return Ok(Some(SlotViolation { slot_a: i, slot_b: j, index }));
            }
        }
    }
    Ok(None)
}

/// Whether `f(tau)` is selfadjoint too (it is whenever `tau` is).
pub fn polynomial_closure<S: Scalar>(
    g: &MultiForm<S>,
    tau: &Matrix<S>,
    f: &Poly<S>,
    pol: &TolerancePolicy,
) -> Result<bool, TensorError> {
    Ok(is_selfadjoint(g, &poly_apply(f, tau), pol)?.is_none())
}

/// Splits `g` along the spectral groups of a selfadjoint map: in the
/// adapted basis every coefficient mixing two groups must vanish.
pub fn split_by_spectral_groups<S: Scalar>(
    g: &MultiForm<S>,
    split: &SpectralSplit<S>,
    pol: &TolerancePolicy,
) -> Result<Decomposition<S>, SelfadjointError> {
    let b = split.basis_matrix();
    let h = g.change_basis(&b)?;
    let labels: Vec<Option<usize>> =
        split.ranges().iter().enumerate().flat_map(|(k, r)| r.clone().map(move |_| Some(k))).collect();
    if let Some(index) = mixed_violation(&h, &labels, pol) {
        let value = h.get(&index).format();
        return Err(SelfadjointError::MixedBlockNonzero { index, value });
    }
    Ok(Decomposition::new(split.groups.iter().map(|grp| grp.basis.clone()).collect(), Vec::new()))
}
