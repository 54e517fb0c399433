//! JSON documents for forms, maps, decompositions and certificates.
//!
//! Scalars are always strings (`"3/4"`, `"1/2+3i"`, `"0.25"`), so exact
//! values survive a round trip. Forms list only nonzero coefficients, in
//! lexicographic index order.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decompose::Decomposition;
use crate::matrix::Matrix;
use crate::scalar::{FieldKind, Scalar, ScalarError, C64, Q, Qi, R64};
use crate::symmetrize::SignedCongruence;
use crate::tensor::{MultiForm, TensorError};

#[derive(Debug, Error)]
pub enum JsonError {
    #[error(transparent)]
    Syntax(#[from] serde_json::Error),
    #[error("field mismatch: document is {found}, expected {expected}")]
    FieldMismatch { expected: FieldKind, found: FieldKind },
    #[error("coefficient index {idx:?} out of range for arity {arity}, dim {dim}")]
    BadIndex { idx: Vec<usize>, arity: usize, dim: usize },
    #[error("ragged or non-square matrix {index}")]
    BadMatrix { index: usize },
    #[error("vector of length {found} in a space of dimension {dim}")]
    BadVector { found: usize, dim: usize },
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryDoc {
    pub idx: Vec<usize>,
    pub val: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormDoc {
    pub arity: usize,
    pub dim: usize,
    pub field: FieldKind,
    pub entries: Vec<EntryDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapsDoc {
    pub field: FieldKind,
    pub maps: Vec<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionDoc {
    pub field: FieldKind,
    pub blocks: Vec<Vec<Vec<String>>>,
    #[serde(default)]
    pub radical: Vec<Vec<String>>,
}

/// Output of symmetrization. `signs` is empty over complex fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub field: FieldKind,
    pub psi: Vec<Vec<String>>,
    #[serde(default)]
    pub signs: Vec<i8>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sign_blocks: Vec<Vec<Vec<String>>>,
    pub residual: String,
}

/// Scalars that can appear in documents, tagged with their field.
pub trait FieldScalar: Scalar {
    const FIELD: FieldKind;
}

impl FieldScalar for Q {
    const FIELD: FieldKind = FieldKind::ExactRational;
}
impl FieldScalar for Qi {
    const FIELD: FieldKind = FieldKind::ExactGaussianRational;
}
impl FieldScalar for R64 {
    const FIELD: FieldKind = FieldKind::FloatReal;
}
impl FieldScalar for C64 {
    const FIELD: FieldKind = FieldKind::FloatComplex;
}

fn expect_field<S: FieldScalar>(found: FieldKind) -> Result<(), JsonError> {
    if found == S::FIELD {
        Ok(())
    } else {
        Err(JsonError::FieldMismatch { expected: S::FIELD, found })
    }
}

fn strings<S: Scalar>(v: &[S]) -> Vec<String> {
    v.iter().map(Scalar::format).collect()
}

fn parse_vec<S: Scalar>(v: &[String]) -> Result<Vec<S>, JsonError> {
    v.iter().map(|s| S::parse(s).map_err(JsonError::from)).collect()
}

pub fn form_to_doc<S: FieldScalar>(f: &MultiForm<S>) -> FormDoc {
    let entries = f
        .indices()
        .zip(f.coeffs())
        .filter(|(_, c)| !c.is_zero())
        .map(|(idx, c)| EntryDoc { idx, val: c.format() })
        .collect();
    FormDoc { arity: f.arity(), dim: f.dim(), field: S::FIELD, entries }
}

pub fn form_from_doc<S: FieldScalar>(doc: &FormDoc) -> Result<MultiForm<S>, JsonError> {
    expect_field::<S>(doc.field)?;
    let mut f = MultiForm::zeros(doc.arity, doc.dim);
    if doc.arity < 2 {
        return Err(TensorError::InvalidArity(doc.arity).into());
    }
    for e in &doc.entries {
        if e.idx.len() != doc.arity || e.idx.iter().any(|&i| i >= doc.dim) {
            return Err(JsonError::BadIndex { idx: e.idx.clone(), arity: doc.arity, dim: doc.dim });
        }
        f.set(&e.idx, S::parse(&e.val)?);
    }
    Ok(f)
}

pub fn matrix_to_doc<S: Scalar>(m: &Matrix<S>) -> Vec<Vec<String>> {
    m.to_rows().iter().map(|r| strings(r)).collect()
}

pub fn matrix_from_doc<S: Scalar>(rows: &[Vec<String>], index: usize) -> Result<Matrix<S>, JsonError> {
    let parsed: Vec<Vec<S>> = rows.iter().map(|r| parse_vec(r)).collect::<Result<_, _>>()?;
    let m = Matrix::from_rows(parsed).map_err(|_| JsonError::BadMatrix { index })?;
    if !m.is_square() {
        return Err(JsonError::BadMatrix { index });
    }
    Ok(m)
}

pub fn maps_to_doc<S: FieldScalar>(maps: &[Matrix<S>]) -> MapsDoc {
    MapsDoc { field: S::FIELD, maps: maps.iter().map(matrix_to_doc).collect() }
}

pub fn maps_from_doc<S: FieldScalar>(doc: &MapsDoc) -> Result<Vec<Matrix<S>>, JsonError> {
    expect_field::<S>(doc.field)?;
    doc.maps.iter().enumerate().map(|(i, m)| matrix_from_doc(m, i)).collect()
}

pub fn decomposition_to_doc<S: FieldScalar>(d: &Decomposition<S>) -> DecompositionDoc {
    DecompositionDoc {
        field: S::FIELD,
        blocks: d.blocks.iter().map(|b| b.iter().map(|v| strings(v)).collect()).collect(),
        radical: d.radical.iter().map(|v| strings(v)).collect(),
    }
}

pub fn decomposition_from_doc<S: FieldScalar>(doc: &DecompositionDoc, dim: usize) -> Result<Decomposition<S>, JsonError> {
    expect_field::<S>(doc.field)?;
    let vector = |v: &Vec<String>| {
        if v.len() != dim {
            return Err(JsonError::BadVector { found: v.len(), dim });
        }
        parse_vec::<S>(v)
    };
    let blocks = doc.blocks.iter().map(|b| b.iter().map(vector).collect()).collect::<Result<_, _>>()?;
    let radical = doc.radical.iter().map(vector).collect::<Result<_, _>>()?;
    Ok(Decomposition::new(blocks, radical))
}

pub fn certificate_to_doc<S: FieldScalar>(psi: &Matrix<S>, congruence: Option<&SignedCongruence<S>>, residual: f64) -> CertificateDoc {
    let (signs, sign_blocks) = match congruence {
        Some(c) => (
            c.signs(),
            c.blocks.iter().map(|b| b.basis.iter().map(|v| strings(v)).collect()).collect(),
        ),
        None => (Vec::new(), Vec::new()),
    };
    CertificateDoc { field: S::FIELD, psi: matrix_to_doc(psi), signs, sign_blocks, residual: format!("{residual:e}") }
}

/// A form over whichever field its document names.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyForm {
    Q(MultiForm<Q>),
    Qi(MultiForm<Qi>),
    R64(MultiForm<R64>),
    C64(MultiForm<C64>),
}

impl AnyForm {
    pub fn from_doc(doc: &FormDoc) -> Result<Self, JsonError> {
        Ok(match doc.field {
            FieldKind::ExactRational => AnyForm::Q(form_from_doc(doc)?),
            FieldKind::ExactGaussianRational => AnyForm::Qi(form_from_doc(doc)?),
            FieldKind::FloatReal => AnyForm::R64(form_from_doc(doc)?),
            FieldKind::FloatComplex => AnyForm::C64(form_from_doc(doc)?),
        })
    }

    pub fn from_json(text: &str) -> Result<Self, JsonError> {
        Self::from_doc(&serde_json::from_str(text)?)
    }

    pub fn field(&self) -> FieldKind {
        match self {
            AnyForm::Q(_) => FieldKind::ExactRational,
            AnyForm::Qi(_) => FieldKind::ExactGaussianRational,
            AnyForm::R64(_) => FieldKind::FloatReal,
            AnyForm::C64(_) => FieldKind::FloatComplex,
        }
    }

    pub fn to_doc(&self) -> FormDoc {
        match self {
            AnyForm::Q(f) => form_to_doc(f),
            AnyForm::Qi(f) => form_to_doc(f),
            AnyForm::R64(f) => form_to_doc(f),
            AnyForm::C64(f) => form_to_doc(f),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn form_doc_lists_nonzero_entries_in_order() {
        let f = MultiForm::from_fn(2, 2, |idx| Q::from_ratio(idx[0] as i64 * 3, 4 + idx[1] as i64));
        let doc = form_to_doc(&f);
        let idx: Vec<_> = doc.entries.iter().map(|e| e.idx.clone()).collect();
        assert_eq!(idx, vec![vec![1, 0], vec![1, 1]]);
        assert_eq!(doc.entries[1].val, "3/5");
        let text = serde_json::to_string(&doc).unwrap();
        assert_eq!(AnyForm::from_json(&text).unwrap(), AnyForm::Q(f));
    }

    #[test]
    fn field_mismatch_is_reported() {
        let doc = form_to_doc(&MultiForm::<R64>::zeros(2, 1));
        assert!(matches!(form_from_doc::<Q>(&doc), Err(JsonError::FieldMismatch { .. })));
    }

    #[test]
    fn out_of_range_index() {
        let text = r#"{"arity":2,"dim":2,"field":"Q","entries":[{"idx":[0,2],"val":"1"}]}"#;
        assert!(matches!(AnyForm::from_json(text), Err(JsonError::BadIndex { .. })));
    }
}
