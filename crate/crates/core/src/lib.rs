//! Multilinear forms, witnesses of symmetric pull-backs, and the algorithms
//! that turn a witness into a single congruence.
//!
//! The scalar layer covers exact rationals and Gaussian rationals as well as
//! double precision; every algorithm is generic over [`Scalar`].

pub mod decompose;
pub mod gen;
pub mod json;
pub mod matfun;
pub mod matrix;
pub mod scalar;
pub mod selfadjoint;
pub mod symmetrize;
pub mod tensor;

pub use decompose::{Alignment, DecomposeError, Decomposition};
pub use gen::{EigenSpec, GenError, GenSpec};
pub use json::{AnyForm, FieldScalar, JsonError};
pub use matfun::{Eigen, MatFunError, SpectralSplit, SplitMode};
pub use matrix::{Matrix, MatrixError};
pub use scalar::{ComplexScalar, FieldKind, RealScalar, Scalar, ScalarError, TolerancePolicy, C64, Q, Qi, R64};
pub use selfadjoint::{is_selfadjoint, SelfadjointError, SlotViolation};
pub use symmetrize::{
    check_witness, symmetrize_complex, symmetrize_real, Counterexample, SignedBlock, SignedCongruence, Solved,
    SymmetrizeError, SymmetrizeOptions, Witness,
};
pub use tensor::{MultiForm, Permutation, TensorError};
