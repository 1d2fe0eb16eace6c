//! Single-commutator factorization of nilpotent matrices.
//!
//! Two triangularization paths feed the same exact recurrence:
//!
//! * the default staircase deflation
//!   ([`crate::mat::schur_strict_triangularize`]), robust on any numerically
//!   nilpotent input;
//! * the flag construction ([`flag_decomposition`]), which builds the
//!   kernel-chain projections, the range chain `q_k` and the join flags of
//!   the structural decomposition, and refuses to answer when the numerics
//!   are ambiguous. It exists because the decomposition itself is worth
//!   testing, not just bypassing.
//!
//! The recurrence ([`strict_triangular_factor`]) writes any strictly upper
//! triangular matrix as `[shift, C]` by back-substitution along diagonals;
//! the identity is exact in exact arithmetic.

use num_complex::Complex64 as C64;

use crate::factorization::{FactorError, Factorization, Method};
use crate::mat::{
    commutator, frobenius_norm, identity, is_nilpotent, operator_norm, schur_strict_triangularize,
    spectral_radius_estimate, staircase, CMatrix, MatError, Tolerances,
};
use crate::normal::shift_matrix;

/// Orthonormal bases of the kernel-chain layers: layer 1 spans `ker t`,
/// layer j spans `ker(t^j) ⊖ ker(t^(j-1))`. Dimensions weakly decrease and
/// the layers sum to the whole space.
pub fn kernel_chain(t: &CMatrix, tol: &Tolerances) -> Result<Vec<CMatrix>, MatError> {
    if !is_nilpotent(t, tol) {
        return Err(MatError::NilpotencyViolation {
            spectral_radius: spectral_radius_estimate(t),
        });
    }
    let st = staircase(t, tol)?;
    let mut out = Vec::with_capacity(st.layer_dims.len());
    let mut offset = 0;
    for &d in &st.layer_dims {
        out.push(st.unitary.columns(offset, d).into_owned());
        offset += d;
    }
    Ok(out)
}

/// Block data of the structural decomposition: `block_sizes[j]` equivalent
/// (equal-rank) sub-projections of dimension `subspace_dims[j]` each, grouped
/// as consecutive column blocks of the unitary `basis`. Conjugating the
/// decomposed matrix by `basis` is block diagonal, each block strictly upper
/// triangular with respect to its sub-projections.
#[derive(Debug, Clone)]
pub struct FlagDecomposition {
    pub block_sizes: Vec<usize>,
    pub basis: CMatrix,
    pub subspace_dims: Vec<usize>,
}

impl FlagDecomposition {
    /// Total dimension accounted for; equals n when the decomposition is
    /// complete.
    pub fn total_dim(&self) -> usize {
        self.block_sizes.iter().zip(&self.subspace_dims).map(|(&k, &d)| k * d).sum()
    }
}

/// One round of the flag construction, kept separate for testability.
pub(crate) struct FlagRound {
    /// q_1, …, q_k in current coordinates (q_k is the deepest kernel layer)
    pub q_bases: Vec<CMatrix>,
    /// the flag columns f_1 | f_2 | … | f_k
    pub f_basis: CMatrix,
    /// orthonormal basis of the complement
    pub complement: CMatrix,
    pub index: usize,
    pub dim: usize,
}

const GAP_RATIO_MIN: f64 = 10.0;

/// Orthonormalizes the columns of `z`, insisting the numerical rank is
/// unambiguous and equal to `expect`.
fn orthonormalize_expecting(
    z: &CMatrix,
    expect: usize,
    tol: &Tolerances,
) -> Result<CMatrix, FactorError> {
    let svd = z.clone().svd(true, false);
    let u = svd.u.as_ref().expect("requested left singular vectors");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&i, &j| {
        svd.singular_values[j].partial_cmp(&svd.singular_values[i]).unwrap().then(i.cmp(&j))
    });
    let sigma: Vec<f64> = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let cutoff = tol.rank_rel * sigma[0] * z.nrows() as f64;
    let rank = sigma.iter().take_while(|&&s| s > cutoff).count();
    let discarded = if rank < sigma.len() { sigma[rank] } else { 0.0 };
    let gap_ratio = if discarded == 0.0 { f64::INFINITY } else { sigma[rank - 1] / discarded };
    if rank != expect || gap_ratio < GAP_RATIO_MIN {
        return Err(FactorError::Mat(MatError::RankDegeneracy { gap_ratio }));
    }
    let mut out = CMatrix::zeros(z.nrows(), rank);
    for (col, &i) in idx[..rank].iter().enumerate() {
        out.column_mut(col).copy_from(&u.column(i));
    }
    Ok(out)
}

/// Orthonormal basis of the orthogonal complement of the (orthonormal)
/// columns of `g` — the singular directions of `I - gg*` at 1.
fn orthonormal_complement(g: &CMatrix) -> CMatrix {
    let n = g.nrows();
    let p = identity(n) - g * g.adjoint();
    let svd = p.svd(true, false);
    let u = svd.u.as_ref().expect("requested left singular vectors");
    let mut cols: Vec<usize> =
        (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > 0.5).collect();
    cols.sort();
    let mut out = CMatrix::zeros(n, cols.len());
    for (col, &i) in cols.iter().enumerate() {
        out.column_mut(col).copy_from(&u.column(i));
    }
    out
}

pub(crate) fn flag_round(
    t: &CMatrix,
    tol: &Tolerances,
    global_scale: f64,
) -> Result<FlagRound, FactorError> {
    let m = t.nrows();
    let st = staircase(t, tol).map_err(FactorError::Mat)?;
    let k = st.layer_dims.len();
    let d = *st.layer_dims.last().expect("staircase yields at least one layer");

    // q_k is the deepest kernel layer; walk the range chain downwards
    let mut offset_last = m - d;
    let q_k = st.unitary.columns(offset_last, d).into_owned();
    let _ = &mut offset_last;
    let mut q_rev: Vec<CMatrix> = vec![q_k];
    for _ in (1..k).rev() {
        let prev = q_rev.last().unwrap();
        let z = t * prev;
        q_rev.push(orthonormalize_expecting(&z, d, tol)?);
    }
    q_rev.reverse(); // now q_1, …, q_k

    // joins from the bottom: f_i = (q_1 ∨ … ∨ q_i) − (q_1 ∨ … ∨ q_{i-1})
    let mut joined = CMatrix::zeros(m, 0);
    let mut f_cols: Vec<CMatrix> = Vec::with_capacity(k);
    for q in &q_rev {
        let projected = if joined.ncols() == 0 {
            q.clone()
        } else {
            q - &joined * (joined.adjoint() * q)
        };
        let f = orthonormalize_expecting(&projected, d, tol)?;
        let mut next = CMatrix::zeros(m, joined.ncols() + d);
        next.columns_mut(0, joined.ncols()).copy_from(&joined);
        next.columns_mut(joined.ncols(), d).copy_from(&f);
        joined = next;
        f_cols.push(f);
    }

    let mut f_basis = CMatrix::zeros(m, k * d);
    for (i, f) in f_cols.iter().enumerate() {
        f_basis.columns_mut(i * d, d).copy_from(f);
    }
    let complement = orthonormal_complement(&f_basis);

    // the structural claim: the flag span reduces t. T(flag) ⊆ flag holds by
    // construction; the coupling back from the complement is the part that
    // can genuinely fail, so measure both.
    let coupling = operator_norm(&(f_basis.adjoint() * t * &complement))
        .max(operator_norm(&(complement.adjoint() * t * &f_basis)));
    if coupling > tol.residual_rel * global_scale {
        return Err(FactorError::BlockCoupling { residual: coupling });
    }

    Ok(FlagRound { q_bases: q_rev, f_basis, complement, index: k, dim: d })
}

/// Lemma-style structural decomposition of a nilpotent matrix: repeatedly
/// peel off the flag built from the deepest kernel layer and recurse on the
/// complement. Errors rather than guessing when a rank decision is ambiguous
/// or the flag span fails to reduce the matrix.
pub fn flag_decomposition(t: &CMatrix, tol: &Tolerances) -> Result<FlagDecomposition, FactorError> {
    let n = t.nrows();
    if !is_nilpotent(t, tol) {
        return Err(FactorError::Mat(MatError::NilpotencyViolation {
            spectral_radius: spectral_radius_estimate(t),
        }));
    }
    let scale = operator_norm(t);
    if scale == 0.0 || n == 0 {
        return Ok(FlagDecomposition {
            block_sizes: vec![1],
            basis: identity(n),
            subspace_dims: vec![n],
        });
    }

    let mut block_sizes = Vec::new();
    let mut subspace_dims = Vec::new();
    let mut basis_cols: Vec<CMatrix> = Vec::new();

    let mut current = t.clone();
    let mut lift = identity(n); // maps current coordinates into the original
    let mut prev_index = usize::MAX;

    while current.nrows() > 0 {
        let round = flag_round(&current, tol, scale)?;
        if round.index >= prev_index {
            // block sizes must strictly decrease down the recursion
            return Err(FactorError::Mat(MatError::RankDegeneracy { gap_ratio: 0.0 }));
        }
        prev_index = round.index;
        block_sizes.push(round.index);
        subspace_dims.push(round.dim);
        basis_cols.push(&lift * &round.f_basis);

        lift = &lift * &round.complement;
        current = round.complement.adjoint() * current * &round.complement;
    }

    let mut basis = CMatrix::zeros(n, n);
    let mut offset = 0;
    for cols in &basis_cols {
        basis.columns_mut(offset, cols.ncols()).copy_from(cols);
        offset += cols.ncols();
    }

    let decomp = FlagDecomposition { block_sizes, basis, subspace_dims };
    let residual = flag_residual(t, &decomp);
    if residual > tol.residual_rel * scale {
        return Err(FactorError::BlockCoupling { residual });
    }
    Ok(decomp)
}

/// Mass of `basis* t basis` outside the allowed pattern (block diagonal,
/// each block strictly upper triangular w.r.t. its sub-projections).
pub fn flag_residual(t: &CMatrix, decomp: &FlagDecomposition) -> f64 {
    let m = decomp.basis.adjoint() * t * &decomp.basis;
    let mut disallowed = m.clone();
    let mut offset = 0;
    for (&k, &d) in decomp.block_sizes.iter().zip(&decomp.subspace_dims) {
        for bi in 0..k {
            for bj in (bi + 1)..k {
                disallowed
                    .view_mut((offset + bi * d, offset + bj * d), (d, d))
                    .fill(C64::new(0.0, 0.0));
            }
        }
        offset += k * d;
    }
    operator_norm(&disallowed)
}

/// Writes an exactly strictly upper triangular matrix as `[shift, c]` via
/// the diagonal recurrence `c_{p+1,j} = a_{p,j} + c_{p,j-1}` (first row and
/// column of `c` zero). The identity is exact; the floating residual stays at
/// rounding level.
pub fn strict_triangular_factor(a: &CMatrix) -> Result<Factorization, FactorError> {
    let n = a.nrows();
    for i in 0..n {
        for j in 0..=i {
            if a[(i, j)] != C64::new(0.0, 0.0) {
                return Err(FactorError::NotStrictlyUpper {
                    row: i,
                    col: j,
                    value_norm: a[(i, j)].norm(),
                });
            }
        }
    }
    let b = shift_matrix(n);
    let mut c = CMatrix::zeros(n, n);
    if n >= 2 {
        for j in 1..n {
            c[(1, j)] = a[(0, j)];
        }
        for p in 1..n - 1 {
            for j in (p + 1)..n {
                c[(p + 1, j)] = a[(p, j)] + c[(p, j - 1)];
            }
        }
    }
    Factorization::measured(a, b, c, Method::NilpotentRecurrence, None)
}

/// Which triangularization feeds the recurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NilpotentPath {
    /// staircase deflation (robust default)
    #[default]
    Staircase,
    /// structural flag decomposition (diagnostic; may refuse)
    Flag,
}

/// Factors a nilpotent matrix as a single commutator by triangularizing and
/// applying the recurrence in the triangularizing basis.
pub fn factor_nilpotent(t: &CMatrix, tol: &Tolerances) -> Result<Factorization, FactorError> {
    factor_nilpotent_via(t, tol, NilpotentPath::Staircase)
}

pub fn factor_nilpotent_via(
    t: &CMatrix,
    tol: &Tolerances,
    path: NilpotentPath,
) -> Result<Factorization, FactorError> {
    let (u, upper) = match path {
        NilpotentPath::Staircase => schur_strict_triangularize(t, tol)?,
        NilpotentPath::Flag => {
            let decomp = flag_decomposition(t, tol)?;
            let u = decomp.basis.clone();
            let mut m = u.adjoint() * t * &u;
            let scale = operator_norm(t);
            let mut worst = 0.0f64;
            for i in 0..m.nrows() {
                for j in 0..=i {
                    worst = worst.max(m[(i, j)].norm());
                    m[(i, j)] = C64::new(0.0, 0.0);
                }
            }
            if worst > tol.residual_rel * scale {
                return Err(FactorError::Mat(MatError::TriangularizationFailed {
                    max_lower: worst,
                }));
            }
            (u, m)
        }
    };
    let inner = strict_triangular_factor(&upper)?;
    let b = &u * inner.b * u.adjoint();
    let c = &u * inner.c * u.adjoint();
    Factorization::measured(t, b, c, Method::NilpotentRecurrence, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::{haar_unitary, random_nilpotent, random_strict_upper};

    fn c64(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn jordan(n: usize) -> CMatrix {
        let mut j = CMatrix::zeros(n, n);
        for i in 0..n - 1 {
            j[(i, i + 1)] = c64(1.0, 0.0);
        }
        j
    }

    fn direct_sum(a: &CMatrix, b: &CMatrix) -> CMatrix {
        let (na, nb) = (a.nrows(), b.nrows());
        let mut m = CMatrix::zeros(na + nb, na + nb);
        m.view_mut((0, 0), (na, na)).copy_from(a);
        m.view_mut((na, na), (nb, nb)).copy_from(b);
        m
    }

    #[test]
    fn kernel_chain_dims() {
        let tol = Tolerances::default();
        let dims = |t: &CMatrix| -> Vec<usize> {
            kernel_chain(t, &tol).unwrap().iter().map(|b| b.ncols()).collect()
        };
        assert_eq!(dims(&jordan(3)), vec![1, 1, 1]);
        assert_eq!(dims(&CMatrix::zeros(2, 2)), vec![2]);
        assert_eq!(dims(&direct_sum(&jordan(2), &CMatrix::zeros(1, 1))), vec![2, 1]);
    }

    #[test]
    fn kernel_chain_layers_span_everything() {
        let tol = Tolerances::default();
        let t = random_nilpotent(12, 5);
        let layers = kernel_chain(&t, &tol).unwrap();
        let total: usize = layers.iter().map(|b| b.ncols()).sum();
        assert_eq!(total, 12);
        // first layer really is the kernel
        let k = &layers[0];
        assert!(operator_norm(&(&t * k)) < 1e-10 * operator_norm(&t));
    }

    #[test]
    fn kernel_chain_rejects_invertible() {
        assert!(matches!(
            kernel_chain(&haar_unitary(4, 3), &Tolerances::default()),
            Err(MatError::NilpotencyViolation { .. })
        ));
    }

    #[test]
    fn flag_block_sizes_on_jordan_sums() {
        let tol = Tolerances::default();
        let d = flag_decomposition(&jordan(3), &tol).unwrap();
        assert_eq!(d.block_sizes, vec![3]);
        assert_eq!(d.subspace_dims, vec![1]);

        let d = flag_decomposition(&direct_sum(&jordan(2), &jordan(2)), &tol).unwrap();
        assert_eq!(d.block_sizes, vec![2]);
        assert_eq!(d.subspace_dims, vec![2]);

        let d = flag_decomposition(&direct_sum(&jordan(3), &CMatrix::zeros(1, 1)), &tol).unwrap();
        assert_eq!(d.block_sizes, vec![3, 1]);
        assert_eq!(d.subspace_dims, vec![1, 1]);
        assert_eq!(d.total_dim(), 4);
    }

    #[test]
    fn flag_under_unitary_conjugation() {
        let tol = Tolerances::default();
        let t0 = direct_sum(&jordan(3), &jordan(2));
        let w = haar_unitary(5, 21);
        let t = &w * &t0 * w.adjoint();
        let d = flag_decomposition(&t, &tol).unwrap();
        assert_eq!(d.block_sizes, vec![3, 2]);
        assert!(flag_residual(&t, &d) <= 1e-8 * operator_norm(&t));
        // basis is unitary
        let defect = operator_norm(&(d.basis.adjoint() * &d.basis - identity(5)));
        assert!(defect < 1e-11);
    }

    #[test]
    fn flag_matches_kernel_chain_dims() {
        // Σ_{j : k_j ≥ i} dim f^{(j)} = dim p_i
        let tol = Tolerances::default();
        for t in [
            direct_sum(&jordan(3), &CMatrix::zeros(1, 1)),
            direct_sum(&jordan(2), &jordan(2)),
            direct_sum(&jordan(4), &jordan(2)),
        ] {
            let d = flag_decomposition(&t, &tol).unwrap();
            let chain = kernel_chain(&t, &tol).unwrap();
            for (i, layer) in chain.iter().enumerate() {
                let predicted: usize = d
                    .block_sizes
                    .iter()
                    .zip(&d.subspace_dims)
                    .filter(|(&k, _)| k >= i + 1)
                    .map(|(_, &dim)| dim)
                    .sum();
                assert_eq!(predicted, layer.ncols(), "layer {i} of {:?}", d.block_sizes);
            }
        }
    }

    #[test]
    fn flag_refuses_non_reducing_input() {
        // chains cross: T e2 = e1, T e3 = e1, T e4 = e2. The flag span
        // (e1, e2, e4) is invariant but not reducing, so the construction
        // must refuse rather than return a fake block decomposition.
        let mut t = CMatrix::zeros(4, 4);
        t[(0, 1)] = c64(1.0, 0.0);
        t[(0, 2)] = c64(1.0, 0.0);
        t[(1, 3)] = c64(1.0, 0.0);
        match flag_decomposition(&t, &Tolerances::default()) {
            Err(FactorError::BlockCoupling { residual }) => assert!(residual > 0.1),
            other => panic!("expected BlockCoupling, got {other:?}"),
        }
    }

    #[test]
    fn flag_q_bases_avoid_lower_kernel_layers() {
        // principal angles: q_k has no intersection with span(p_1..p_{k-1})
        let tol = Tolerances::default();
        let t = direct_sum(&jordan(3), &jordan(2));
        let round = flag_round(&t, &tol, operator_norm(&t)).unwrap();
        let chain = kernel_chain(&t, &tol).unwrap();
        let k = round.q_bases.len();
        let mut lower = CMatrix::zeros(5, 0);
        for layer in chain.iter().take(k - 1) {
            let mut next = CMatrix::zeros(5, lower.ncols() + layer.ncols());
            next.columns_mut(0, lower.ncols()).copy_from(&lower);
            next.columns_mut(lower.ncols(), layer.ncols()).copy_from(layer);
            lower = next;
        }
        let overlap = operator_norm(&(lower.adjoint() * &round.q_bases[k - 1]));
        assert!(overlap < 1.0 - 1e-6, "cos of smallest principal angle {overlap}");
    }

    #[test]
    fn recurrence_three_by_three() {
        let mut a = CMatrix::zeros(3, 3);
        a[(0, 1)] = c64(1.0, 0.0);
        a[(1, 2)] = c64(1.0, 0.0);
        let f = strict_triangular_factor(&a).unwrap();
        assert_eq!(f.c[(1, 1)], c64(1.0, 0.0));
        assert_eq!(f.c[(1, 2)], c64(0.0, 0.0));
        assert_eq!(f.c[(2, 2)], c64(2.0, 0.0));
        assert_eq!(f.residual_op, 0.0);
    }

    #[test]
    fn recurrence_zero_and_shape_error() {
        let f = strict_triangular_factor(&CMatrix::zeros(4, 4)).unwrap();
        assert!(frobenius_norm(&f.c) == 0.0);

        let mut bad = CMatrix::zeros(2, 2);
        bad[(1, 0)] = c64(1e-30, 0.0);
        assert!(matches!(
            strict_triangular_factor(&bad),
            Err(FactorError::NotStrictlyUpper { row: 1, col: 0, .. })
        ));
    }

    #[test]
    fn recurrence_large_random() {
        let a = random_strict_upper(128, 9);
        let f = strict_triangular_factor(&a).unwrap();
        assert!(f.residual_op <= 1e-10 * operator_norm(&a));
        // exact-identity bound: n² · eps · max|a_ij|
        let max_entry = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(f.residual_op <= 128.0 * 128.0 * f64::EPSILON * max_entry);
    }

    #[test]
    fn factor_j2_literal() {
        let f = factor_nilpotent(&jordan(2), &Tolerances::default()).unwrap();
        assert_eq!(f.b, jordan(2));
        assert_eq!(f.c, CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c64(0.0, 0.0),
            c64(1.0, 0.0),
        ])));
        assert_eq!(f.residual_op, 0.0);
    }

    #[test]
    fn factor_zero() {
        let f = factor_nilpotent(&CMatrix::zeros(3, 3), &Tolerances::default()).unwrap();
        assert_eq!(f.residual_op, 0.0);
    }

    #[test]
    fn factor_conjugated_nilpotent_pipeline() {
        let tol = Tolerances::default();
        let t = random_nilpotent(64, 13);
        let f = factor_nilpotent(&t, &tol).unwrap();
        let scale = operator_norm(&t);
        assert!(f.residual_op <= 1e-7 * scale, "residual {}", f.residual_op);
        assert!(operator_norm(&f.b) <= 1.0 + 1e-12);
        assert_eq!(f.method, Method::NilpotentRecurrence);
    }

    #[test]
    fn flag_path_agrees_on_decomposable_input() {
        let tol = Tolerances::default();
        let t0 = direct_sum(&jordan(3), &jordan(2));
        let w = haar_unitary(5, 17);
        let t = &w * &t0 * w.adjoint();
        let f = factor_nilpotent_via(&t, &tol, NilpotentPath::Flag).unwrap();
        assert!(f.residual_op <= 1e-8 * operator_norm(&t));
        assert!(operator_norm(&f.b) <= 1.0 + 1e-12);
    }

    #[test]
    fn nilpotency_index_preserved() {
        let tol = Tolerances::default();
        let t = random_nilpotent(10, 31);
        let f = factor_nilpotent(&t, &tol).unwrap();
        let k = commutator(&f.b, &f.c).unwrap();
        let index = |m: &CMatrix| staircase(m, &tol).unwrap().layer_dims.len();
        assert_eq!(index(&t), index(&k));
    }

    #[test]
    fn factor_rejects_non_nilpotent() {
        assert!(matches!(
            factor_nilpotent(&identity(3), &Tolerances::default()),
            Err(FactorError::Mat(MatError::NilpotencyViolation { .. }))
        ));
    }
}
