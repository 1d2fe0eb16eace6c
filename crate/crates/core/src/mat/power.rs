//! Matrix-free operator-norm estimation by power iteration on `x* x`.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{CMatrix, MatError};

/// Anything that can apply itself and its adjoint to a vector. Implemented by
/// dense matrices here and by the tensor-leg operators in the Tucci module.
pub trait LinearOp {
    fn dim(&self) -> usize;
    fn apply(&self, v: &[C64], out: &mut [C64]);
    fn apply_adjoint(&self, v: &[C64], out: &mut [C64]);
}

/// Dense adapter so `operator_norm_estimate` works on plain matrices.
pub struct DenseOp<'a> {
    m: &'a CMatrix,
}

impl<'a> DenseOp<'a> {
    pub fn new(m: &'a CMatrix) -> Self {
        Self { m }
    }
}

impl LinearOp for DenseOp<'_> {
    fn dim(&self) -> usize {
        self.m.nrows()
    }

    fn apply(&self, v: &[C64], out: &mut [C64]) {
        let n = self.dim();
        for i in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..n {
                acc += self.m[(i, j)] * v[j];
            }
            out[i] = acc;
        }
    }

    fn apply_adjoint(&self, v: &[C64], out: &mut [C64]) {
        let n = self.dim();
        for j in 0..n {
            out[j] = C64::new(0.0, 0.0);
        }
        for i in 0..n {
            let vi = v[i];
            for j in 0..n {
                out[j] += self.m[(i, j)].conj() * vi;
            }
        }
    }
}

/// Deterministic start vector for the iteration.
///
/// `Ones` is the normalized all-ones vector; useful when the caller can prove
/// a Rayleigh lower bound against it (the ℓ¹ certificate does). `Seeded` draws
/// a fixed complex Gaussian from the given seed.
#[derive(Debug, Clone, Copy)]
pub enum StartVector {
    Ones,
    Seeded(u64),
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [C64]) -> f64 {
    let n = norm(v);
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
    n
}

/// Estimates the largest singular value of `op` by power iteration on the
/// Gram operator, stopping when successive estimates agree to `rel_tol`.
///
/// The returned value is a certified lower bound on the true norm (it is
/// `‖op v‖` for an explicit unit vector). Non-convergence after `max_iters`
/// reports the best estimate found.
pub fn operator_norm_estimate(
    op: &impl LinearOp,
    rel_tol: f64,
    max_iters: usize,
    start: StartVector,
) -> Result<f64, MatError> {
    let n = op.dim();
    if n == 0 {
        return Ok(0.0);
    }

    let mut v: Vec<C64> = match start {
        StartVector::Ones => vec![C64::new(1.0, 0.0); n],
        StartVector::Seeded(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    C64::new(re, im)
                })
                .collect()
        }
    };
    normalize(&mut v);

    let mut forward = vec![C64::new(0.0, 0.0); n];
    let mut back = vec![C64::new(0.0, 0.0); n];
    let mut best = 0.0f64;
    let mut prev = f64::NAN;

    for iter in 0..max_iters {
        op.apply(&v, &mut forward);
        let sigma = norm(&forward);
        if sigma == 0.0 {
            // v is (numerically) in the kernel; with a fixed start this means
            // the operator itself is zero to machine precision.
            return Ok(best);
        }
        best = best.max(sigma);
        if !prev.is_nan() && (sigma - prev).abs() <= rel_tol * sigma.max(f64::MIN_POSITIVE) {
            return Ok(best);
        }
        prev = sigma;

        op.apply_adjoint(&forward, &mut back);
        v.copy_from_slice(&back);
        if normalize(&mut v) == 0.0 {
            return Ok(best);
        }
        let _ = iter;
    }

    Err(MatError::NonConvergence { best_estimate: best, iterations: max_iters })
}

#[cfg(test)]
mod tests {
    use super::super::{haar_unitary, operator_norm, random_traceless};
    use super::*;

    #[test]
    fn matches_dense_svd_norm() {
        for seed in 0..6 {
            let m = random_traceless(40, seed);
            let dense = operator_norm(&m);
            let est =
                operator_norm_estimate(&DenseOp::new(&m), 1e-9, 5000, StartVector::Seeded(1))
                    .unwrap();
            assert!((dense - est).abs() <= 1e-6 * dense, "dense {dense} vs est {est}");
            assert!(est <= dense + 1e-12);
        }
    }

    #[test]
    fn zero_operator() {
        let m = CMatrix::zeros(12, 12);
        let est =
            operator_norm_estimate(&DenseOp::new(&m), 1e-6, 100, StartVector::Ones).unwrap();
        assert_eq!(est, 0.0);
    }

    #[test]
    fn unitary_norm_one() {
        let u = haar_unitary(30, 11);
        let est =
            operator_norm_estimate(&DenseOp::new(&u), 1e-10, 2000, StartVector::Seeded(2)).unwrap();
        assert!((est - 1.0).abs() < 1e-9);
    }
}
