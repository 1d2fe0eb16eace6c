//! Spectral decomposition of (numerically) normal matrices.
//!
//! A normal matrix is `X + iY` with `X = (A+A*)/2`, `Y = (A-A*)/2i` Hermitian
//! and commuting. We diagonalize `X`, then re-diagonalize the compression of
//! `Y` inside each cluster of near-equal `X` eigenvalues. This avoids QR
//! iteration on a non-Hermitian matrix entirely: the routine is deterministic
//! and has no convergence failure mode, and exact eigenvalue degeneracies
//! (projections, `diag(i, -i)` where `X = 0`) fall out naturally.

use num_complex::Complex64 as C64;

use super::{identity, normality_defect, operator_norm, CMatrix, MatError, Tolerances};

/// Unitary + eigenvalues of a normal matrix, `a = U diag(values) U*`.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub unitary: CMatrix,
    pub values: Vec<C64>,
}

impl SpectralData {
    /// Rebuilds `U diag(values) U*`.
    pub fn reconstruct(&self) -> CMatrix {
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(
            self.values.clone(),
        ));
        &self.unitary * d * self.unitary.adjoint()
    }
}

/// Eigenvalue clusters widen by this factor on each retry when the
/// reconstruction residual is not met.
const CLUSTER_GAPS: [f64; 4] = [1e-12, 1e-10, 1e-8, 1e-6];

/// Diagonalizes a normal matrix. Eigenvalues are returned sorted
/// lexicographically by (Re, Im) so downstream factorizations are
/// reproducible run to run.
pub fn spectral_decomposition_normal(
    a: &CMatrix,
    tol: &Tolerances,
) -> Result<SpectralData, MatError> {
    let n = a.nrows();
    if n == 0 {
        return Ok(SpectralData { unitary: CMatrix::zeros(0, 0), values: vec![] });
    }
    let scale = operator_norm(a);
    if scale == 0.0 {
        return Ok(SpectralData { unitary: identity(n), values: vec![C64::new(0.0, 0.0); n] });
    }

    let defect = normality_defect(a);
    if defect > tol.residual_rel * scale * scale {
        return Err(MatError::NormalityViolation { defect });
    }

    let adj = a.adjoint();
    let x = (a + &adj).map(|z| z * 0.5);
    let y = (a - &adj).map(|z| z * C64::new(0.0, -0.5));

    let eig = x.clone().symmetric_eigen();
    // Sort X's spectrum ascending, carrying the eigenvector columns along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let xvals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let base = permute_columns(&eig.eigenvectors, &order);

    let mut last_residual = f64::INFINITY;
    for gap_rel in CLUSTER_GAPS {
        let gap = gap_rel * scale;
        let mut u = base.clone();
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && xvals[end] - xvals[end - 1] <= gap {
                end += 1;
            }
            if end - start > 1 {
                rediagonalize_cluster(&mut u, &y, start, end);
            }
            start = end;
        }

        // Rayleigh values off the conjugated matrix, then a deterministic
        // global (Re, Im) sort.
        let conj = u.adjoint() * a * &u;
        let mut values: Vec<C64> = (0..n).map(|i| conj[(i, i)]).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.sort_by(|&i, &j| {
            (values[i].re, values[i].im)
                .partial_cmp(&(values[j].re, values[j].im))
                .unwrap()
        });
        values = perm.iter().map(|&i| values[i]).collect();
        let u = permute_columns(&u, &perm);

        let data = SpectralData { unitary: u, values };
        let residual = operator_norm(&(data.reconstruct() - a));
        if residual <= tol.residual_rel * scale {
            return Ok(data);
        }
        last_residual = residual;
    }
    Err(MatError::SpectralResidual { residual: last_residual })
}

/// Replaces the columns `start..end` of `u` with the basis that also
/// diagonalizes the compression of `y` onto their span.
fn rediagonalize_cluster(u: &mut CMatrix, y: &CMatrix, start: usize, end: usize) {
    let cols = u.columns(start, end - start).into_owned();
    let yc = cols.adjoint() * y * &cols;
    if yc.iter().all(|z| z.norm_sqr() == 0.0) {
        return;
    }
    let sub = yc.symmetric_eigen();
    let rotated = &cols * &sub.eigenvectors;
    u.columns_mut(start, end - start).copy_from(&rotated);
}

fn permute_columns(m: &CMatrix, perm: &[usize]) -> CMatrix {
    let n = m.nrows();
    let mut out = CMatrix::zeros(n, perm.len());
    for (dst, &src) in perm.iter().enumerate() {
        out.column_mut(dst).copy_from(&m.column(src));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::{haar_unitary, random_normal_traceless, random_traceless};
    use super::*;
    use nalgebra::DVector;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn diag(values: &[C64]) -> CMatrix {
        CMatrix::from_diagonal(&DVector::from_vec(values.to_vec()))
    }

    #[test]
    fn diag_i_minus_i() {
        let a = diag(&[c(0.0, 1.0), c(0.0, -1.0)]);
        let sd = spectral_decomposition_normal(&a, &Tolerances::default()).unwrap();
        // deterministic order: (0,-1) before (0,1)
        assert!((sd.values[0] - c(0.0, -1.0)).norm() < 1e-12);
        assert!((sd.values[1] - c(0.0, 1.0)).norm() < 1e-12);
        assert!(operator_norm(&(sd.reconstruct() - a)) < 1e-12);
    }

    #[test]
    fn hermitian_spectra_are_real() {
        let g = random_traceless(12, 4);
        let h = (&g + g.adjoint()).map(|z| z * 0.5);
        let sd = spectral_decomposition_normal(&h, &Tolerances::default()).unwrap();
        for v in &sd.values {
            assert!(v.im.abs() < 1e-10);
        }
    }

    #[test]
    fn conjugation_invariance_of_spectrum() {
        let a = diag(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        let u = haar_unitary(2, 9);
        let conj = &u * &a * u.adjoint();
        let sd = spectral_decomposition_normal(&conj, &Tolerances::default()).unwrap();
        assert!((sd.values[0] - c(-1.0, 0.0)).norm() < 1e-10);
        assert!((sd.values[1] - c(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn random_normal_reconstructs() {
        for seed in 0..8 {
            let n = 4 + 7 * (seed as usize % 5);
            let a = random_normal_traceless(n, seed);
            let sd = spectral_decomposition_normal(&a, &Tolerances::default()).unwrap();
            let res = operator_norm(&(sd.reconstruct() - &a));
            assert!(res <= 1e-8 * operator_norm(&a), "residual {res}");
            let defect = operator_norm(&(sd.unitary.adjoint() * &sd.unitary - identity(n)));
            assert!(defect < 1e-12);
        }
    }

    #[test]
    fn degenerate_eigenvalues_cluster() {
        // centered projection: two eigenvalues, both multiple
        let a = diag(&[c(0.6, 0.0), c(0.6, 0.0), c(-0.4, 0.0), c(-0.4, 0.0), c(-0.4, 0.0)]);
        let u = haar_unitary(5, 31);
        let m = &u * &a * u.adjoint();
        let sd = spectral_decomposition_normal(&m, &Tolerances::default()).unwrap();
        assert!(operator_norm(&(sd.reconstruct() - &m)) < 1e-10);
    }

    #[test]
    fn rejects_non_normal() {
        let mut t = CMatrix::zeros(3, 3);
        t[(0, 1)] = c(1.0, 0.0);
        let err = spectral_decomposition_normal(&t, &Tolerances::default());
        assert!(matches!(err, Err(MatError::NormalityViolation { .. })));
    }
}
