//! Dense complex matrix arithmetic, norms, spectral factorizations and
//! numerical-rank primitives shared by every factorizer.

use num_complex::Complex64 as C64;
use thiserror::Error;

mod power;
mod random;
mod spectral;
mod triangular;

pub use power::{operator_norm_estimate, DenseOp, LinearOp, StartVector};
pub use random::{
    haar_unitary, random_nilpotent, random_normal_traceless, random_strict_upper,
    random_traceless, random_zero_sum,
};
pub use spectral::{spectral_decomposition_normal, SpectralData};
pub use triangular::{
    is_nilpotent, numerical_kernel, schur_strict_triangularize, spectral_radius_estimate,
};
pub(crate) use triangular::{staircase, Staircase};

/// Dense square matrix of complex scalars; the universal carrier type.
pub type CMatrix = nalgebra::DMatrix<C64>;

/// Dimension above which `operator_norm` stops running a dense SVD and
/// switches to seeded power iteration.
pub const DENSE_NORM_CAP: usize = 512;

/// Iteration cap for power-iteration norm estimates.
pub const POWER_MAX_ITERS: usize = 1000;

/// Numerical thresholds used across the crate.
///
/// `rank_rel` drives singular-value cutoffs (values below
/// `rank_rel * sigma_max * n` count as zero), `residual_rel` is the relative
/// acceptance threshold for reconstructions and factorizations, and
/// `norm_iter_rel` is the relative convergence target of power iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rank_rel: f64,
    pub residual_rel: f64,
    pub norm_iter_rel: f64,
}

impl Tolerances {
    pub fn new(rank_rel: f64, residual_rel: f64, norm_iter_rel: f64) -> Result<Self, MatError> {
        for (name, v) in [
            ("rank_rel", rank_rel),
            ("residual_rel", residual_rel),
            ("norm_iter_rel", norm_iter_rel),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(MatError::InvalidTolerance { name, value: v });
            }
        }
        Ok(Self { rank_rel, residual_rel, norm_iter_rel })
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rank_rel: 1e-10, residual_rel: 1e-8, norm_iter_rel: 1e-6 }
    }
}

#[derive(Debug, Clone, Error)]
pub enum MatError {
    #[error("dimension mismatch: {left}x{left} vs {right}x{right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("tolerance {name} must lie in (0, 1), got {value}")]
    InvalidTolerance { name: &'static str, value: f64 },
    #[error("norm estimate did not converge after {iterations} iterations (best estimate {best_estimate})")]
    NonConvergence { best_estimate: f64, iterations: usize },
    #[error("input is not normal within tolerance (defect norm {defect:.3e})")]
    NormalityViolation { defect: f64 },
    #[error("input is not nilpotent within tolerance (spectral radius estimate {spectral_radius:.3e})")]
    NilpotencyViolation { spectral_radius: f64 },
    #[error("ambiguous numerical rank decision (kept/discarded singular value ratio {gap_ratio:.2})")]
    RankDegeneracy { gap_ratio: f64 },
    #[error("triangularization left below-diagonal mass {max_lower:.3e}, above tolerance")]
    TriangularizationFailed { max_lower: f64 },
    #[error("spectral reconstruction residual {residual:.3e} exceeds tolerance")]
    SpectralResidual { residual: f64 },
}

/// `[x, y] = xy - yx`.
pub fn commutator(x: &CMatrix, y: &CMatrix) -> Result<CMatrix, MatError> {
    if x.nrows() != y.nrows() {
        return Err(MatError::DimensionMismatch { left: x.nrows(), right: y.nrows() });
    }
    Ok(x * y - y * x)
}

/// Trace normalized so the identity maps to 1.
pub fn normalized_trace(x: &CMatrix) -> C64 {
    let n = x.nrows();
    if n == 0 {
        return C64::new(0.0, 0.0);
    }
    x.diagonal().sum() / n as f64
}

/// Largest singular value. Dense SVD up to [`DENSE_NORM_CAP`], seeded power
/// iteration beyond (relative tolerance 1e-6, deterministic start).
pub fn operator_norm(x: &CMatrix) -> f64 {
    let n = x.nrows();
    if n == 0 {
        return 0.0;
    }
    if n <= DENSE_NORM_CAP {
        dense_operator_norm(x)
    } else {
        // Power iteration returns its best estimate even when flagged
        // unconverged; for norm reporting that estimate is still the most
        // informative number available.
        match operator_norm_estimate(
            &DenseOp::new(x),
            1e-6,
            POWER_MAX_ITERS,
            StartVector::Seeded(0x6e6f726d),
        ) {
            Ok(v) => v,
            Err(MatError::NonConvergence { best_estimate, .. }) => best_estimate,
            Err(_) => unreachable!("power iteration only fails with NonConvergence"),
        }
    }
}

/// Like [`operator_norm`] but surfaces power-iteration non-convergence.
pub fn try_operator_norm(x: &CMatrix) -> Result<f64, MatError> {
    let n = x.nrows();
    if n == 0 {
        return Ok(0.0);
    }
    if n <= DENSE_NORM_CAP {
        Ok(dense_operator_norm(x))
    } else {
        operator_norm_estimate(
            &DenseOp::new(x),
            1e-6,
            POWER_MAX_ITERS,
            StartVector::Seeded(0x6e6f726d),
        )
    }
}

fn dense_operator_norm(x: &CMatrix) -> f64 {
    if x.iter().all(|z| z.norm_sqr() == 0.0) {
        return 0.0;
    }
    x.clone().svd(false, false).singular_values.max()
}

/// Trace norm `sqrt(tr_n(x* x))`; dominated by the operator norm.
pub fn l2_norm(x: &CMatrix) -> f64 {
    let n = x.nrows();
    if n == 0 {
        return 0.0;
    }
    (x.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64).sqrt()
}

/// Frobenius norm (unnormalized).
pub fn frobenius_norm(x: &CMatrix) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖x*x - xx*‖`, the distance from normality that
/// [`spectral_decomposition_normal`] checks against `residual_rel * ‖x‖²`.
pub fn normality_defect(x: &CMatrix) -> f64 {
    let xs = x.adjoint();
    operator_norm(&(&xs * x - x * &xs))
}

pub(crate) fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}
