//! Strict unitary triangularization of nilpotent matrices by staircase
//! deflation, plus the numerical-kernel and nilpotency primitives it rests on.
//!
//! QR-iteration Schur forms are useless here: the computed spectrum of an
//! exactly nilpotent matrix scatters on a disk of radius ~ eps^(1/n), so
//! zeroing the Schur diagonal of a 64x64 nilpotent can change the matrix by
//! several percent. Deflating along the kernel chain instead keeps the
//! below-diagonal mass at the rank-cutoff level: each round splits off the
//! kernel of the remaining block, which the block maps to (numerical) zero.

use num_complex::Complex64 as C64;

use super::{frobenius_norm, identity, operator_norm, CMatrix, MatError, Tolerances};

/// Orthonormal basis of the numerical right null space: right singular
/// vectors with singular value at most `rank_rel * sigma_max * n`. The result
/// has one column per kernel direction (possibly none).
pub fn numerical_kernel(x: &CMatrix, tol: &Tolerances) -> CMatrix {
    let n = x.nrows();
    let svd = x.clone().svd(false, true);
    let vt = svd.v_t.as_ref().expect("requested right singular vectors");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&i, &j| {
        svd.singular_values[j].partial_cmp(&svd.singular_values[i]).unwrap().then(i.cmp(&j))
    });
    let sigma_max = svd.singular_values[idx[0]];
    let cutoff = tol.rank_rel * sigma_max * n as f64;
    let kernel: Vec<usize> =
        idx.into_iter().filter(|&i| svd.singular_values[i] <= cutoff).collect();
    let mut out = CMatrix::zeros(n, kernel.len());
    for (col, &i) in kernel.iter().enumerate() {
        // rows of v_t are the adjoint right singular vectors
        out.column_mut(col).copy_from(&vt.row(i).adjoint());
    }
    out
}

/// Power-ladder nilpotency test: normalizes, squares repeatedly, accepts once
/// `‖(t/‖t‖)^k‖ ≤ residual_rel` for some k covering the dimension.
pub fn is_nilpotent(t: &CMatrix, tol: &Tolerances) -> bool {
    let n = t.nrows();
    if n == 0 {
        return true;
    }
    let scale = operator_norm(t);
    if scale == 0.0 {
        return true;
    }
    let s = t.map(|z| z / scale);
    let mut p = s;
    let mut k = 1usize;
    loop {
        if operator_norm(&p) <= tol.residual_rel {
            return true;
        }
        if k >= n {
            return false;
        }
        p = &p * &p;
        k *= 2;
    }
}

/// `max_k ‖(t/‖t‖)^k‖^(1/k) * ‖t‖` over the squaring ladder: a cheap spectral
/// radius estimate used in error reports.
pub fn spectral_radius_estimate(t: &CMatrix) -> f64 {
    let n = t.nrows();
    let scale = operator_norm(t);
    if n == 0 || scale == 0.0 {
        return 0.0;
    }
    let s = t.map(|z| z / scale);
    let mut p = s;
    let mut k = 1usize;
    let mut est = operator_norm(&p);
    while k < n {
        p = &p * &p;
        k *= 2;
        let nk = operator_norm(&p);
        if nk == 0.0 {
            return 0.0;
        }
        est = nk.powf(1.0 / k as f64);
    }
    est * scale
}

pub(crate) struct Staircase {
    /// accumulated unitary; `unitary* t unitary = reduced`
    pub unitary: CMatrix,
    /// kernel-chain layer dimensions, weakly decreasing
    pub layer_dims: Vec<usize>,
    pub reduced: CMatrix,
}

/// Deflates along the kernel chain. Layer j of the result spans
/// `ker(t^j) ⊖ ker(t^(j-1))` and the reduced matrix is strictly upper
/// triangular up to the rank cutoff.
pub(crate) fn staircase(t: &CMatrix, tol: &Tolerances) -> Result<Staircase, MatError> {
    let n = t.nrows();
    let scale = operator_norm(t);
    if scale == 0.0 {
        return Ok(Staircase { unitary: identity(n), layer_dims: vec![n], reduced: t.clone() });
    }
    let cutoff = tol.rank_rel * scale * n as f64;

    let mut m = t.clone();
    let mut q = identity(n);
    let mut layers = Vec::new();
    let mut offset = 0usize;

    while offset < n {
        let k = n - offset;
        let block = m.view((offset, offset), (k, k)).into_owned();
        if frobenius_norm(&block) <= cutoff {
            layers.push(k);
            break;
        }

        let svd = block.clone().svd(false, true);
        let vt = svd.v_t.as_ref().expect("requested right singular vectors");
        let mut idx: Vec<usize> = (0..k).collect();
        idx.sort_by(|&i, &j| {
            svd.singular_values[j].partial_cmp(&svd.singular_values[i]).unwrap().then(i.cmp(&j))
        });
        let rank = idx.iter().take_while(|&&i| svd.singular_values[i] > cutoff).count();
        let kdim = k - rank;
        if kdim == 0 {
            return Err(MatError::NilpotencyViolation {
                spectral_radius: spectral_radius_estimate(t),
            });
        }

        // new block basis: kernel directions first, then the rest
        let mut w = CMatrix::zeros(k, k);
        for (col, &i) in idx[rank..].iter().chain(idx[..rank].iter()).enumerate() {
            w.column_mut(col).copy_from(&vt.row(i).adjoint());
        }

        let mut g = identity(n);
        g.view_mut((offset, offset), (k, k)).copy_from(&w);
        m = g.adjoint() * m * &g;
        q *= &g;

        layers.push(kdim);
        offset += kdim;
    }

    if layers.len() >= 2 && layers.windows(2).any(|p| p[1] > p[0]) {
        // kernel-chain dimensions must be weakly decreasing; growth means a
        // rank decision misfired
        return Err(MatError::RankDegeneracy { gap_ratio: 0.0 });
    }

    Ok(Staircase { unitary: q, layer_dims: layers, reduced: m })
}

fn is_exactly_strict_upper(t: &CMatrix) -> bool {
    let n = t.nrows();
    (0..n).all(|i| (0..=i).all(|j| t[(i, j)] == C64::new(0.0, 0.0)))
}

fn max_on_or_below_diagonal(t: &CMatrix) -> f64 {
    let n = t.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..=i {
            worst = worst.max(t[(i, j)].norm());
        }
    }
    worst
}

/// Unitarily strict-triangularizes a (numerically) nilpotent matrix:
/// `unitary* · t · unitary = upper` with the returned `upper` carrying exact
/// zeros on and below the diagonal.
pub fn schur_strict_triangularize(
    t: &CMatrix,
    tol: &Tolerances,
) -> Result<(CMatrix, CMatrix), MatError> {
    let n = t.nrows();
    if n == 0 {
        return Ok((CMatrix::zeros(0, 0), CMatrix::zeros(0, 0)));
    }
    if is_exactly_strict_upper(t) {
        return Ok((identity(n), t.clone()));
    }
    if !is_nilpotent(t, tol) {
        return Err(MatError::NilpotencyViolation {
            spectral_radius: spectral_radius_estimate(t),
        });
    }

    let st = staircase(t, tol)?;
    let scale = operator_norm(t);
    let worst = max_on_or_below_diagonal(&st.reduced);
    if worst > tol.residual_rel * scale {
        return Err(MatError::TriangularizationFailed { max_lower: worst });
    }

    let mut upper = st.reduced;
    for i in 0..n {
        for j in 0..=i {
            upper[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    Ok((st.unitary, upper))
}

#[cfg(test)]
mod tests {
    use super::super::{haar_unitary, random_nilpotent, random_strict_upper};
    use super::*;

    fn jordan(n: usize) -> CMatrix {
        let mut j = CMatrix::zeros(n, n);
        for i in 0..n - 1 {
            j[(i, i + 1)] = C64::new(1.0, 0.0);
        }
        j
    }

    #[test]
    fn kernel_of_zero_matrix_is_everything() {
        let k = numerical_kernel(&CMatrix::zeros(3, 3), &Tolerances::default());
        assert_eq!(k.ncols(), 3);
    }

    #[test]
    fn kernel_of_invertible_is_empty() {
        let u = haar_unitary(5, 2);
        let k = numerical_kernel(&u, &Tolerances::default());
        assert_eq!(k.ncols(), 0);
    }

    #[test]
    fn kernel_of_jordan_block() {
        let k = numerical_kernel(&jordan(3), &Tolerances::default());
        assert_eq!(k.ncols(), 1);
        // right kernel of J3 is the e1 direction
        assert!((k[(0, 0)].norm() - 1.0).abs() < 1e-12);
        assert!(k[(1, 0)].norm() < 1e-12 && k[(2, 0)].norm() < 1e-12);
    }

    #[test]
    fn nilpotency_detection() {
        let tol = Tolerances::default();
        assert!(is_nilpotent(&jordan(5), &tol));
        assert!(is_nilpotent(&random_nilpotent(24, 5), &tol));
        assert!(is_nilpotent(&CMatrix::zeros(4, 4), &tol));
        assert!(!is_nilpotent(&haar_unitary(6, 1), &tol));
        assert!(!is_nilpotent(&identity(3), &tol));
    }

    #[test]
    fn already_strict_upper_passes_through() {
        let s = random_strict_upper(8, 3);
        let (u, upper) = schur_strict_triangularize(&s, &Tolerances::default()).unwrap();
        assert_eq!(upper, s);
        assert!(operator_norm(&(u - identity(8))) == 0.0);
    }

    #[test]
    fn zero_matrix_triangularizes_trivially() {
        let (u, upper) = schur_strict_triangularize(&CMatrix::zeros(4, 4), &Tolerances::default())
            .unwrap();
        assert_eq!(u, identity(4));
        assert!(frobenius_norm(&upper) == 0.0);
    }

    #[test]
    fn conjugated_jordan_block_recovers_strict_upper() {
        let tol = Tolerances::default();
        let j = jordan(6);
        let w = haar_unitary(6, 8);
        let t = &w * &j * w.adjoint();
        let (u, upper) = schur_strict_triangularize(&t, &tol).unwrap();
        assert!(is_exactly_strict_upper(&upper));
        let residual = operator_norm(&(&u * &upper * u.adjoint() - &t));
        assert!(residual <= 1e-10 * operator_norm(&t), "residual {residual}");
    }

    #[test]
    fn large_conjugated_nilpotent_residual() {
        let tol = Tolerances::default();
        let t = random_nilpotent(64, 77);
        let (u, upper) = schur_strict_triangularize(&t, &tol).unwrap();
        let residual = operator_norm(&(&u * &upper * u.adjoint() - &t));
        assert!(residual <= 1e-7 * operator_norm(&t), "residual {residual}");
        let unitarity = operator_norm(&(u.adjoint() * &u - identity(64)));
        assert!(unitarity < 1e-11);
    }

    #[test]
    fn rejects_non_nilpotent() {
        let err = schur_strict_triangularize(&identity(4), &Tolerances::default());
        match err {
            Err(MatError::NilpotencyViolation { spectral_radius }) => {
                assert!((spectral_radius - 1.0).abs() < 0.2);
            }
            other => panic!("expected NilpotencyViolation, got {other:?}"),
        }
    }

    #[test]
    fn staircase_layers_match_jordan_structure() {
        let tol = Tolerances::default();
        // J2 ⊕ 0: kernel chain dims (2, 1)
        let mut t = CMatrix::zeros(3, 3);
        t[(0, 1)] = C64::new(1.0, 0.0);
        let st = staircase(&t, &tol).unwrap();
        assert_eq!(st.layer_dims, vec![2, 1]);

        let st = staircase(&jordan(3), &tol).unwrap();
        assert_eq!(st.layer_dims, vec![1, 1, 1]);
    }
}
