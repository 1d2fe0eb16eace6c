//! Shared result record for all factorizers and the error type of the
//! factorization pipelines.

use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

use crate::mat::{commutator, l2_norm, operator_norm, CMatrix, MatError};
use crate::steinitz::{RearrangementCertificate, SteinitzError};

/// Which construction produced a factorization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    NormalShift,
    CyclicUnitary,
    NilpotentRecurrence,
    ShodaBaseline,
}

/// Result record of a factorization `a ≈ [b, c]`.
///
/// `norm_product` is reported, never bounded: no general lower bound against
/// `‖a‖` exists. The stored residuals are measured at construction time;
/// [`crate::report::verify`] recomputes them from scratch.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub b: CMatrix,
    pub c: CMatrix,
    pub residual_op: f64,
    pub residual_l2: f64,
    pub norm_product: f64,
    pub method: Method,
    pub certificate: Option<RearrangementCertificate>,
}

impl Factorization {
    /// Assembles the record, measuring residuals and norms against `input`.
    pub fn measured(
        input: &CMatrix,
        b: CMatrix,
        c: CMatrix,
        method: Method,
        certificate: Option<RearrangementCertificate>,
    ) -> Result<Self, FactorError> {
        let diff = input - commutator(&b, &c)?;
        let residual_op = operator_norm(&diff);
        let residual_l2 = l2_norm(&diff);
        let norm_product = operator_norm(&b) * operator_norm(&c);
        Ok(Self { b, c, residual_op, residual_l2, norm_product, method, certificate })
    }
}

#[derive(Debug, Clone, Error)]
pub enum FactorError {
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Steinitz(#[from] SteinitzError),
    #[error("trace modulus {trace_norm:.3e} exceeds bound {bound:.3e}; input must be traceless")]
    TraceNotZero { trace_norm: f64, bound: f64 },
    #[error("entry ({row},{col}) = {value_norm:.3e} sits on or below the diagonal; input must be strictly upper triangular")]
    NotStrictlyUpper { row: usize, col: usize, value_norm: f64 },
    #[error("flag construction left block coupling of norm {residual:.3e}; no commuting block decomposition at this tolerance")]
    BlockCoupling { residual: f64 },
    #[error("eigenfunction eigenvalue ζ = {zeta} is degenerate (ζ = 1)")]
    EigenvalueDegenerate { zeta: C64 },
    #[error("no eigenfunction of the {order}-point system avoids ζ^k = 1 for all k in {terms:?}")]
    NoAdmissibleEigenvalue { order: usize, terms: Vec<i64> },
    #[error("measure mean {mean_norm:.3e} is not zero")]
    MeasureMeanNonzero { mean_norm: f64 },
    #[error("sample size {n} is below the number of atoms {atoms}")]
    SampleTooSmall { n: usize, atoms: usize },
    #[error("invalid discrete measure: {reason}")]
    InvalidMeasure { reason: String },
    #[error("index {value} out of range {bound}")]
    IndexOutOfRange { value: usize, bound: usize },
    #[error("zero-diagonal reduction stalled at diagonal norm {diagonal_norm:.3e} after {rotations} rotations")]
    ZeroDiagonalStalled { diagonal_norm: f64, rotations: usize },
    #[error("coefficient mismatch at index {index}: a = {a}, b·c = {bc}")]
    CoefficientMismatch { index: usize, a: C64, bc: C64 },
    #[error("depth {depth} exceeds the dense cap {cap}")]
    DenseCapExceeded { depth: usize, cap: usize },
    #[error("exponent r = {r} outside (1, 2]")]
    ExponentOutOfRange { r: f64 },
}
