//! Baseline factorizer for arbitrary traceless matrices.
//!
//! Classical two-step construction: conjugate by a unitary until the diagonal
//! vanishes, then solve `[diag(0..n-1), c] = z` entrywise by dividing each
//! off-diagonal entry by `i - j`. No norm control is attempted — this is the
//! universal oracle the structured factorizers are compared against.
//!
//! The diagonal is driven to zero by plane "equalization" unitaries. For any
//! index pair, the midpoint of the two diagonal entries lies in the numerical
//! range of the 2x2 compression, so some plane unitary maps both entries to
//! their average; pairing the largest entry with the most opposite one makes
//! `Σ|z_ii|²` shrink by at least `max|z_ii|²/2` per rotation, which is a
//! geometric decay.

use num_complex::Complex64 as C64;

use crate::factorization::{FactorError, Factorization, Method};
use crate::mat::{identity, normalized_trace, operator_norm, CMatrix, Tolerances};

/// Rotation budget: this many sweeps of n rotations each before giving up.
pub const MAX_SWEEPS: usize = 100;

fn diag_max(z: &CMatrix) -> (usize, f64) {
    let mut arg = 0;
    let mut best = -1.0;
    for i in 0..z.nrows() {
        let v = z[(i, i)].norm();
        if v > best {
            best = v;
            arg = i;
        }
    }
    (arg, best)
}

/// Applies the plane unitary with columns `v = (1, z)/s`, `w = (-z̄, 1)/s` to
/// rows/columns `i, j` of `m` (conjugation `V* m V`).
fn conjugate_plane(m: &mut CMatrix, i: usize, j: usize, z: C64) {
    let s = (1.0 + z.norm_sqr()).sqrt();
    let (v1, v2) = (C64::new(1.0 / s, 0.0), z / s);
    let (w1, w2) = (-z.conj() / s, C64::new(1.0 / s, 0.0));
    let n = m.nrows();
    for r in 0..n {
        let (a, b) = (m[(r, i)], m[(r, j)]);
        m[(r, i)] = a * v1 + b * v2;
        m[(r, j)] = a * w1 + b * w2;
    }
    for c in 0..n {
        let (a, b) = (m[(i, c)], m[(j, c)]);
        m[(i, c)] = v1.conj() * a + v2.conj() * b;
        m[(j, c)] = w1.conj() * a + w2.conj() * b;
    }
}

fn rotate_columns(m: &mut CMatrix, i: usize, j: usize, z: C64) {
    let s = (1.0 + z.norm_sqr()).sqrt();
    let (v1, v2) = (C64::new(1.0 / s, 0.0), z / s);
    let (w1, w2) = (-z.conj() / s, C64::new(1.0 / s, 0.0));
    let n = m.nrows();
    for r in 0..n {
        let (a, b) = (m[(r, i)], m[(r, j)]);
        m[(r, i)] = a * v1 + b * v2;
        m[(r, j)] = a * w1 + b * w2;
    }
}

/// Solves for the plane coordinate `z` such that the conjugated 2x2 block
/// `[[α, β], [γ, δ]]` gets both diagonal entries equal to `(α+δ)/2`.
fn equalizing_coordinate(alpha: C64, delta: C64, beta: C64, gamma: C64) -> Option<C64> {
    let mu = (delta - alpha) * 0.5;
    if mu.norm() == 0.0 {
        return None;
    }
    let mu_hat = mu / mu.norm();
    // pick the phase that aligns the cross term with μ's direction
    let p = (mu_hat.conj() * (beta + gamma)).im;
    let q = (mu_hat.conj() * (beta - gamma)).re;
    let theta = (-p).atan2(q);
    let e = C64::from_polar(1.0, theta);
    let g = beta * e + gamma * e.conj();
    let s = (mu_hat.conj() * g).re;
    let r = (-s + (s * s + 4.0 * mu.norm_sqr()).sqrt()) / (2.0 * mu.norm());
    Some(C64::from_polar(r, theta))
}

/// Unitary `w` such that every diagonal entry of `w* a w` has modulus at most
/// `rank_rel * ‖a‖`. Requires a traceless input; stalls (with the achieved
/// diagonal norm) only if the rotation budget runs out.
pub fn zero_diagonal_unitary(a: &CMatrix, tol: &Tolerances) -> Result<CMatrix, FactorError> {
    let n = a.nrows();
    let scale = operator_norm(a);
    let trace = normalized_trace(a);
    let bound = tol.residual_rel * scale;
    if trace.norm() > bound {
        return Err(FactorError::TraceNotZero { trace_norm: trace.norm(), bound });
    }
    if n <= 1 || scale == 0.0 {
        return Ok(identity(n));
    }

    let target = tol.rank_rel * scale;
    let mut z = a.clone();
    let mut w = identity(n);
    let budget = MAX_SWEEPS * n;

    for _rotation in 0..budget {
        let (i, worst) = diag_max(&z);
        if worst <= target {
            return Ok(w);
        }
        // partner with the most opposite component along z_ii's direction;
        // the zero trace guarantees a strictly negative one exists
        let zi = z[(i, i)];
        let mut j = usize::MAX;
        let mut most_opposite = f64::INFINITY;
        for k in 0..n {
            if k == i {
                continue;
            }
            let proj = (z[(k, k)] * zi.conj()).re;
            if proj < most_opposite {
                most_opposite = proj;
                j = k;
            }
        }
        let plane = match equalizing_coordinate(z[(i, i)], z[(j, j)], z[(i, j)], z[(j, i)]) {
            Some(p) => p,
            None => continue,
        };
        conjugate_plane(&mut z, i, j, plane);
        rotate_columns(&mut w, i, j, plane);
    }

    let (_, worst) = diag_max(&z);
    if worst <= target {
        Ok(w)
    } else {
        Err(FactorError::ZeroDiagonalStalled { diagonal_norm: worst, rotations: budget })
    }
}

/// Factors any traceless matrix as a single commutator: zero the diagonal,
/// then `b = w diag(0..n-1) w*` and `c_ij = z_ij/(i-j)` pulled back through
/// the same unitary. Integer spectrum keeps every divisor at least 1.
pub fn factor_traceless(a: &CMatrix, tol: &Tolerances) -> Result<Factorization, FactorError> {
    let n = a.nrows();
    let w = zero_diagonal_unitary(a, tol)?;
    let z = w.adjoint() * a * &w;

    let mut b_tilde = CMatrix::zeros(n, n);
    for i in 0..n {
        b_tilde[(i, i)] = C64::new(i as f64, 0.0);
    }
    let mut c_tilde = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                c_tilde[(i, j)] = z[(i, j)] / C64::new(i as f64 - j as f64, 0.0);
            }
        }
    }

    let b = &w * b_tilde * w.adjoint();
    let c = &w * c_tilde * w.adjoint();
    Factorization::measured(a, b, c, Method::ShodaBaseline, None)
}
