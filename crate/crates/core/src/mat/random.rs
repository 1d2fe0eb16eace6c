//! Seeded generators for test populations: Haar unitaries, traceless normal
//! matrices, nilpotents, and plain traceless matrices.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{identity, CMatrix};

fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) / (2.0f64).sqrt()
}

fn ginibre(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| gaussian(rng))
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of the
/// R diagonal absorbed into Q.
pub fn haar_unitary(n: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let qr = ginibre(n, &mut rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Subtracts the mean twice; the second pass mops up the rounding of the
/// first so the returned sum is zero to the last bit that matters.
fn recenter(values: &mut [C64]) {
    for _ in 0..2 {
        let mean = values.iter().sum::<C64>() / values.len() as f64;
        for v in values.iter_mut() {
            *v -= mean;
        }
    }
}

/// Zero-sum tuple of complex Gaussians.
pub fn random_zero_sum(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values: Vec<C64> = (0..n).map(|_| gaussian(&mut rng)).collect();
    recenter(&mut values);
    values
}

/// `U diag(λ) U*` with Haar `U` and mean-subtracted Gaussian eigenvalues.
pub fn random_normal_traceless(n: usize, seed: u64) -> CMatrix {
    let values = random_zero_sum(n, seed);
    let u = haar_unitary(n, seed.wrapping_add(0x9e3779b9));
    let d = CMatrix::from_diagonal(&DVector::from_vec(values));
    &u * d * u.adjoint()
}

/// Unitary conjugate of a strictly upper triangular Gaussian matrix.
pub fn random_nilpotent(n: usize, seed: u64) -> CMatrix {
    let s = random_strict_upper(n, seed);
    let u = haar_unitary(n, seed.wrapping_add(0x7f4a7c15));
    &u * s * u.adjoint()
}

/// Strictly upper triangular matrix with Gaussian entries (exact zeros on and
/// below the diagonal).
pub fn random_strict_upper(n: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            s[(i, j)] = gaussian(&mut rng);
        }
    }
    s
}

/// Gaussian matrix recentered to trace zero.
pub fn random_traceless(n: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = ginibre(n, &mut rng);
    for _ in 0..2 {
        let tr = super::normalized_trace(&g);
        g -= identity(n) * tr;
    }
    g
}

#[cfg(test)]
mod tests {
    use super::super::{l2_norm, normalized_trace, operator_norm};
    use super::*;

    #[test]
    fn haar_is_unitary() {
        let u = haar_unitary(8, 5);
        let defect = operator_norm(&(u.adjoint() * &u - identity(8)));
        assert!(defect <= 1e-12, "unitarity defect {defect}");
    }

    #[test]
    fn determinism() {
        assert_eq!(haar_unitary(6, 42), haar_unitary(6, 42));
        assert_eq!(random_nilpotent(6, 42), random_nilpotent(6, 42));
    }

    #[test]
    fn normal_traceless_trace() {
        let a = random_normal_traceless(8, 17);
        assert!(normalized_trace(&a).norm() < 1e-14);
    }

    #[test]
    fn nilpotent_nth_power_vanishes() {
        let t = random_nilpotent(8, 17);
        let mut p = t.clone();
        for _ in 1..8 {
            p = &p * &t;
        }
        assert!(operator_norm(&p) < 1e-10 * operator_norm(&t).powi(8).max(1.0));
    }

    #[test]
    fn zero_sum_tuple_sums_to_zero() {
        let v = random_zero_sum(9, 3);
        let s: num_complex::Complex64 = v.iter().sum();
        assert!(s.norm() < 1e-15);
    }

    #[test]
    fn traceless_is_traceless() {
        let g = random_traceless(10, 23);
        assert!(normalized_trace(&g).norm() < 1e-15 * l2_norm(&g).max(1.0));
    }
}
