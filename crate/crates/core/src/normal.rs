//! Single-commutator factorization of traceless normal matrices.
//!
//! Diagonalize, reorder the eigenvalues so all prefix sums are small, and
//! write the diagonal as `[B, B*D]` with `B` the nilpotent shift and `D` the
//! diagonal of prefix sums. The prefix bound of the rearrangement certificate
//! is exactly `‖D‖`, which is what keeps `‖B‖‖C‖` within √5/2 (exhaustive
//! search) or 2 (greedy) of `‖A‖`. A cyclic-shift variant realizes a
//! prescribed zero-mean atom multiset as the spectrum of a commutator.

use num_complex::Complex64 as C64;

use crate::factorization::{FactorError, Factorization, Method};
use crate::mat::{
    identity, normalized_trace, operator_norm, spectral_decomposition_normal, CMatrix, Tolerances,
};
use crate::steinitz::{
    center_zero_sum, exhaustive_best_order, greedy_order, RearrangementCertificate,
    EXHAUSTIVE_CAP,
};

/// Nilpotent shift: ones on the superdiagonal, operator norm 1 for n ≥ 2.
pub fn shift_matrix(n: usize) -> CMatrix {
    let mut b = CMatrix::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        b[(i, i + 1)] = C64::new(1.0, 0.0);
    }
    b
}

/// Cyclic permutation unitary `U e_j = e_{j-1 mod n}`: the shift matrix with
/// the wraparound corner filled in.
pub fn cyclic_shift(n: usize) -> CMatrix {
    let mut u = shift_matrix(n);
    if n >= 1 {
        u[(n - 1, 0)] = C64::new(1.0, 0.0);
    }
    if n == 1 {
        u[(0, 0)] = C64::new(1.0, 0.0);
    }
    u
}

/// `diag(λ_1, λ_1+λ_2, …, λ_1+⋯+λ_{n-1}, 0)`. The final entry is forced to
/// zero rather than summed, so the construction closes exactly.
pub fn partial_sum_diagonal(ordered: &[C64]) -> Result<CMatrix, FactorError> {
    // rejects tuples that are not zero-sum within tolerance
    center_zero_sum(ordered).map_err(FactorError::Steinitz)?;
    let n = ordered.len();
    let mut d = CMatrix::zeros(n, n);
    let mut acc = C64::new(0.0, 0.0);
    for (k, v) in ordered.iter().enumerate() {
        if k + 1 == n {
            break;
        }
        acc += v;
        d[(k, k)] = acc;
    }
    Ok(d)
}

fn trivial_certificate(n: usize) -> RearrangementCertificate {
    RearrangementCertificate {
        permutation: (0..n).collect(),
        prefix_max: 0.0,
        max_modulus: 0.0,
        bound_class: crate::steinitz::BoundClass::Banaszczyk,
    }
}

fn rearrange(values: &[C64]) -> Result<RearrangementCertificate, FactorError> {
    let cert = if values.len() <= EXHAUSTIVE_CAP {
        exhaustive_best_order(values)?
    } else {
        greedy_order(values)?
    };
    Ok(cert)
}

fn check_traceless(a: &CMatrix, tol: &Tolerances) -> Result<(C64, f64), FactorError> {
    let tr = normalized_trace(a);
    let scale = operator_norm(a);
    let bound = tol.residual_rel * scale;
    if tr.norm() > bound {
        return Err(FactorError::TraceNotZero { trace_norm: tr.norm(), bound });
    }
    Ok((tr, scale))
}

/// Factors a traceless normal matrix as a single commutator with
/// `‖b‖ ≤ 1` and `‖c‖` bounded by the rearrangement certificate's prefix
/// maximum. Inputs with a tiny trace are centered first; larger traces are
/// rejected.
pub fn factor_normal(a: &CMatrix, tol: &Tolerances) -> Result<Factorization, FactorError> {
    let n = a.nrows();
    let (tr, scale) = check_traceless(a, tol)?;
    if scale == 0.0 || n <= 1 {
        // only the zero matrix is traceless at n = 1
        return Factorization::measured(
            a,
            shift_matrix(n),
            CMatrix::zeros(n, n),
            Method::NormalShift,
            Some(trivial_certificate(n)),
        );
    }

    let centered_input = a - identity(n) * tr;
    let sd = spectral_decomposition_normal(&centered_input, tol)?;
    let values = center_zero_sum(&sd.values)?;
    let cert = rearrange(&values)?;
    let ordered = cert.apply(&values);

    let b_tilde = shift_matrix(n);
    let d = partial_sum_diagonal(&ordered)?;
    let c_tilde = b_tilde.adjoint() * &d;

    // permute the eigenbasis columns to match the rearranged order
    let mut u = CMatrix::zeros(n, n);
    for (dst, &src) in cert.permutation.iter().enumerate() {
        u.column_mut(dst).copy_from(&sd.unitary.column(src));
    }

    let b = &u * b_tilde * u.adjoint();
    let c = &u * c_tilde * u.adjoint();
    Factorization::measured(a, b, c, Method::NormalShift, Some(cert))
}

/// Realizes a zero-sum tuple as the spectrum of a commutator of the cyclic
/// shift unitary with a diagonal. Returns the factorization of
/// `diag(values in rearranged order)`; the diagonal of `c* b*` — the function
/// `f` of the crossed-product picture — is the prefix-sum diagonal, whose sup
/// norm is the certificate's prefix maximum.
pub fn factor_diagonal_cyclic(values: &[C64]) -> Result<Factorization, FactorError> {
    let n = values.len();
    let centered = center_zero_sum(values)?;
    if n == 0 {
        return Factorization::measured(
            &CMatrix::zeros(0, 0),
            CMatrix::zeros(0, 0),
            CMatrix::zeros(0, 0),
            Method::CyclicUnitary,
            None,
        );
    }
    let cert = rearrange(&centered)?;
    let ordered = cert.apply(&centered);

    let target = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(ordered.clone()));
    let u = cyclic_shift(n);
    let d = partial_sum_diagonal(&ordered)?;
    let c = u.adjoint() * &d;
    Factorization::measured(&target, u, c, Method::CyclicUnitary, Some(cert))
}

/// Finitely many atoms with positive weights summing to one.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    atoms: Vec<C64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<C64>, weights: Vec<f64>) -> Result<Self, FactorError> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(FactorError::InvalidMeasure {
                reason: format!("{} atoms vs {} weights", atoms.len(), weights.len()),
            });
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(FactorError::InvalidMeasure { reason: "non-positive weight".into() });
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(FactorError::InvalidMeasure {
                reason: format!("weights sum to {total}"),
            });
        }
        for i in 0..atoms.len() {
            for j in (i + 1)..atoms.len() {
                if atoms[i] == atoms[j] {
                    return Err(FactorError::InvalidMeasure { reason: "duplicate atoms".into() });
                }
            }
        }
        Ok(Self { atoms, weights })
    }

    pub fn atoms(&self) -> &[C64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mean(&self) -> C64 {
        self.atoms.iter().zip(&self.weights).map(|(a, &w)| a * w).sum()
    }
}

/// Length-n atom sample of a measure plus the magnitude of the mean
/// correction that was applied to restore an exact zero sum.
#[derive(Debug, Clone)]
pub struct EmpiricalSample {
    pub values: Vec<C64>,
    pub correction: f64,
}

/// Samples a zero-mean discrete measure into a length-n zero-sum tuple:
/// atom counts by largest-remainder rounding of `n·weight`, then a mean
/// subtraction whose magnitude (at most `max|atom|·atoms/n`) is reported.
pub fn approximate_measure(
    mu: &DiscreteMeasure,
    n: usize,
) -> Result<EmpiricalSample, FactorError> {
    let mean = mu.mean();
    if mean.norm() > 1e-12 {
        return Err(FactorError::MeasureMeanNonzero { mean_norm: mean.norm() });
    }
    let k = mu.atoms.len();
    if n < k {
        return Err(FactorError::SampleTooSmall { n, atoms: k });
    }

    let mut counts: Vec<usize> = Vec::with_capacity(k);
    let mut remainders: Vec<(f64, usize)> = Vec::with_capacity(k);
    for (i, &w) in mu.weights.iter().enumerate() {
        let exact = n as f64 * w;
        let floor = exact.floor();
        counts.push(floor as usize);
        remainders.push((exact - floor, i));
    }
    let assigned: usize = counts.iter().sum();
    // largest remainder first, ties to the lower atom index
    remainders.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    for r in 0..(n - assigned) {
        counts[remainders[r % k].1] += 1;
    }

    let mut values: Vec<C64> = Vec::with_capacity(n);
    for (i, &count) in counts.iter().enumerate() {
        values.extend(std::iter::repeat(mu.atoms[i]).take(count));
    }
    let first_mean = values.iter().sum::<C64>() / n as f64;
    for _ in 0..2 {
        let m = values.iter().sum::<C64>() / n as f64;
        for v in values.iter_mut() {
            *v -= m;
        }
    }
    Ok(EmpiricalSample { values, correction: first_mean.norm() })
}

/// `p − τ(p)·1` for the rank-k diagonal projection: k entries `1 − k/n` and
/// n−k entries `−k/n`. Traceless, normal, and ready for [`factor_normal`].
pub fn centered_projection(n: usize, k: usize) -> Result<CMatrix, FactorError> {
    if k == 0 || k >= n {
        return Err(FactorError::IndexOutOfRange { value: k, bound: n });
    }
    let hi = 1.0 - k as f64 / n as f64;
    let lo = -(k as f64) / n as f64;
    let mut d = CMatrix::zeros(n, n);
    for i in 0..n {
        d[(i, i)] = C64::new(if i < k { hi } else { lo }, 0.0);
    }
    Ok(d)
}
