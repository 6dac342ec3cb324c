//! Dense helpers on top of `nalgebra`: ordered singular values, Householder
//! completions to full orthogonal bases, and column-pivoted solves.

use nalgebra::{DMatrix, DVector};

use crate::scalar::{Real, Ring};

/// Singular values in descending order. Empty for matrices with a zero dimension.
pub fn singular_values<T: Real>(m: &DMatrix<T>) -> Vec<T> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv = T::thin_svd(m, false)
        .map(|(sv, _)| sv)
        .unwrap_or_else(|| vec![T::lit(f64::NAN); m.nrows().min(m.ncols())]);
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// Singular values in descending order with the matching left singular
/// vectors as columns (thin). `None` if the decomposition does not converge.
pub fn left_singular_pairs<T: Real>(m: &DMatrix<T>) -> Option<(Vec<T>, DMatrix<T>)> {
    let (values, u) = T::thin_svd(m, true)?;
    let u = u?;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].partial_cmp(&values[i]).unwrap_or(std::cmp::Ordering::Equal));
    let sv = order.iter().map(|&i| values[i]).collect();
    let cols = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    Some((sv, cols))
}

/// Largest singular value (spectral norm); zero for empty matrices.
pub fn sigma_max<T: Real>(m: &DMatrix<T>) -> T {
    singular_values(m).first().copied().unwrap_or_else(T::zero)
}

/// Smallest singular value of a square matrix; zero for empty input.
pub fn sigma_min<T: Real>(m: &DMatrix<T>) -> T {
    singular_values(m).last().copied().unwrap_or_else(T::zero)
}

/// Number of singular values strictly above `tol`.
pub fn numerical_rank<T: Real>(sv: &[T], tol: T) -> usize {
    sv.iter().filter(|&&s| s > tol).count()
}

/// Threshold `sigma_max * dim * ulp * 1e3` below which a square matrix is
/// treated as singular.
pub fn invertibility_threshold<T: Real>(sigma_max: T, dim: usize) -> T {
    sigma_max * T::lit(dim.max(1) as f64) * T::ulp() * T::lit(1e3)
}

/// Returns `true` when `m` is square and its smallest singular value clears
/// [`invertibility_threshold`].
pub fn is_numerically_invertible<T: Real>(m: &DMatrix<T>) -> bool {
    if !m.is_square() {
        return false;
    }
    if m.nrows() == 0 {
        return true;
    }
    let sv = singular_values(m);
    let smax = sv[0];
    let smin = sv[sv.len() - 1];
    smax > T::zero() && smin > invertibility_threshold(smax, m.nrows())
}

/// Frobenius norm.
pub fn frobenius<T: Real>(m: &DMatrix<T>) -> T {
    m.norm()
}

/// Full `p x p` orthogonal matrix `Q = H_1 H_2 ... H_k` from Householder QR of
/// `cols` (`p x k`), with the leading columns signed so that `R` has a
/// non-negative diagonal. When `cols` has full column rank, the leading `k`
/// columns of `Q` span its range.
pub fn householder_basis<T: Real>(cols: &DMatrix<T>) -> DMatrix<T> {
    let p = cols.nrows();
    let k = cols.ncols().min(p);
    let mut work = cols.clone();
    let mut reflectors: Vec<Option<(DVector<T>, T, T)>> = Vec::with_capacity(k);

    for j in 0..k {
        let x: DVector<T> = work.view((j, j), (p - j, 1)).column(0).clone_owned();
        let norm = x.norm();
        if norm == T::zero() {
            reflectors.push(None);
            continue;
        }
        let alpha = if x[0] >= T::zero() { -norm } else { norm };
        let mut v = x;
        v[0] -= alpha;
        let vv = v.dot(&v);
        if vv == T::zero() {
            reflectors.push(None);
            continue;
        }
        let beta = T::lit(2.0) / vv;
        let mut block = work.view_mut((j, j), (p - j, work.ncols() - j));
        let w = block.tr_mul(&v);
        block.ger(-beta, &v, &w, T::one());
        reflectors.push(Some((v, beta, alpha)));
    }

    let mut q = DMatrix::<T>::identity(p, p);
    for (j, refl) in reflectors.iter().enumerate().rev() {
        if let Some((v, beta, _)) = refl {
            let mut block = q.view_mut((j, 0), (p - j, p));
            let w = block.tr_mul(v);
            block.ger(-*beta, v, &w, T::one());
        }
    }
    // Make the diagonal of R positive so inputs already aligned with the
    // coordinate axes give Q = I.
    for (j, refl) in reflectors.iter().enumerate() {
        if let Some((_, _, alpha)) = refl {
            if *alpha < T::zero() {
                q.column_mut(j).neg_mut();
            }
        }
    }
    q
}

/// Orthonormal rows spanning the orthogonal complement of the row space of a
/// full-row-rank `r x c` matrix. Result is `(c - r) x c`.
pub fn row_space_complement<T: Real>(a: &DMatrix<T>) -> DMatrix<T> {
    let (r, c) = a.shape();
    let q = householder_basis(&a.transpose());
    q.columns(r.min(c), c - r.min(c)).transpose()
}

/// Solves `a x = b` with a column-pivoted QR factorization.
pub fn solve<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> Option<DMatrix<T>> {
    if a.nrows() == 0 {
        return Some(b.clone());
    }
    a.clone().col_piv_qr().solve(b)
}

/// Computes `x a^{-1}` by solving `a^T y^T = x^T`.
pub fn solve_right<T: Real>(x: &DMatrix<T>, a: &DMatrix<T>) -> Option<DMatrix<T>> {
    solve(&a.transpose(), &x.transpose()).map(|y| y.transpose())
}

/// Inverse materialized from a column-pivoted QR factorization.
pub fn inverse<T: Real>(a: &DMatrix<T>) -> Option<DMatrix<T>> {
    if a.nrows() == 0 {
        return Some(a.clone());
    }
    a.clone().col_piv_qr().try_inverse()
}

/// Stacks matrices with equal column counts vertically.
pub fn vstack<T: Ring>(blocks: &[DMatrix<T>], ncols: usize) -> DMatrix<T> {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::<T>::zeros(rows, ncols);
    let mut r = 0;
    for b in blocks {
        debug_assert_eq!(b.ncols(), ncols);
        out.view_mut((r, 0), b.shape()).copy_from(b);
        r += b.nrows();
    }
    out
}

/// `M^k` by repeated multiplication; `M^0 = I`.
pub fn matrix_power<T: Ring>(m: &DMatrix<T>, k: usize) -> DMatrix<T> {
    let mut p = DMatrix::<T>::identity(m.nrows(), m.ncols());
    for _ in 0..k {
        p = &p * m;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn householder_basis_is_orthogonal_and_spans_input() {
        let cols = DMatrix::from_row_slice(4, 2, &[1.0, 2.0, 0.0, 1.0, 3.0, -1.0, 2.0, 0.5]);
        let q = householder_basis(&cols);
        let eye = DMatrix::<f64>::identity(4, 4);
        assert_relative_eq!(&q.transpose() * &q, eye, epsilon = 1e-14);
        // Trailing columns are orthogonal to the input columns.
        let tail = q.columns(2, 2);
        assert!((tail.transpose() * &cols).norm() < 1e-13);
    }

    #[test]
    fn complement_of_unit_row() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0f64, 0.0]);
        let s = row_space_complement(&a);
        assert_eq!(s.shape(), (1, 2));
        assert!(s[(0, 0)].abs() < 1e-15);
        assert_relative_eq!(s[(0, 1)].abs(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn singular_values_sorted_descending() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0, 2.0]));
        assert_eq!(singular_values(&m), vec![4.0, 2.0, 1.0]);
        assert!(singular_values(&DMatrix::<f64>::zeros(0, 3)).is_empty());
    }

    #[test]
    fn left_pairs_match_values() {
        let m = DMatrix::<f64>::from_row_slice(4, 3, &[
            0.3, -1.2, 0.7, 1.1, 0.4, -0.5, 1.5, 0.2, 0.8, -0.4, 0.9, 0.1,
        ]);
        let (sv, u) = left_singular_pairs(&m).unwrap();
        for (k, s) in sv.iter().enumerate() {
            // ||m^T u_k|| equals the k-th singular value.
            let s: f64 = *s;
            assert!(((m.transpose() * u.column(k)).norm() - s).abs() < 1e-13);
        }
        assert!(sv.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn pivoted_solves() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 1.0, 1.0]);
        let b = DMatrix::from_row_slice(2, 1, &[4.0, 3.0]);
        let x = solve(&a, &b).unwrap();
        assert_relative_eq!(&a * &x, b, epsilon = 1e-14);
        let y = solve_right(&b.transpose(), &a).unwrap();
        assert_relative_eq!(&y * &a, b.transpose(), epsilon = 1e-14);
        assert!(inverse(&DMatrix::<f64>::zeros(2, 2)).is_none());
    }
}
