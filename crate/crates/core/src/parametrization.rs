//! Linear parametrization of Brunovsky transformations of a staircase pair.
//!
//! An observation matrix `C = col(C_j)` is built from free blocks placed after
//! an exact zero prefix:
//!
//! ```text
//! C_j = [ 0 (sum_{i<k_j} w_i) | S^r_j (w_{k_j}) | S^f_j (sum_{i>k_j} w_i) ]
//! ```
//!
//! Every row of `C_j` then has relative degree `k_j` with respect to
//! `(A_s, B_s)`, and the decoupling matrix `D = col(C_j A^{k_j-1} B)` is
//! invertible exactly when `S^r_1` and each `[A_{k_j+1,k_j}; S^r_j]`, `j >= 2`,
//! are. The chains `C_{j,l} A^i` stacked for `i < k_j` give the state
//! transformation, `G = D^{-1}` and `F = -D^{-1} col(C_j A^{k_j})`.

use std::ops::Range;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::partition::IndexSummary;
use crate::scalar::{Real, Ring};
use crate::staircase::StaircasePair;
use crate::transform::TransformTriple;

/// Parameter blocks for one group `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamBlock<T: Ring> {
    /// `S^r_{k_j}`: `epsilon_{k_j} x omega_{k_j}`, rank constrained.
    pub rank: DMatrix<T>,
    /// `S^f_{k_j}`: `epsilon_{k_j} x sum_{i>k_j} omega_i`, unconstrained.
    pub free: DMatrix<T>,
}

/// The free matrices of the parametrization, one block pair per group.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSet<T: Ring> {
    pub blocks: Vec<ParamBlock<T>>,
}

impl<T: Ring> ParameterSet<T> {
    /// All-zero parameters with the shapes dictated by `idx`.
    pub fn zeros(idx: &IndexSummary) -> Self {
        let blocks = (0..idx.groups())
            .map(|j| ParamBlock {
                rank: DMatrix::zeros(idx.multiplicities[j], idx.weyr_at_distinct[j]),
                free: DMatrix::zeros(idx.multiplicities[j], idx.trailing_weyr_sums[j]),
            })
            .collect();
        Self { blocks }
    }

    pub fn check_shapes(&self, idx: &IndexSummary) -> Result<()> {
        if self.blocks.len() != idx.groups() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} parameter groups, got {}",
                idx.groups(),
                self.blocks.len()
            )));
        }
        for (j, blk) in self.blocks.iter().enumerate() {
            let eps = idx.multiplicities[j];
            let want_r = (eps, idx.weyr_at_distinct[j]);
            let want_f = (eps, idx.trailing_weyr_sums[j]);
            if blk.rank.shape() != want_r || blk.free.shape() != want_f {
                return Err(Error::ShapeMismatch(format!(
                    "group {}: S^r is {:?} (want {:?}), S^f is {:?} (want {:?})",
                    j + 1,
                    blk.rank.shape(),
                    want_r,
                    blk.free.shape(),
                    want_f
                )));
            }
        }
        Ok(())
    }

    /// Number of scalar parameters.
    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.rank.len() + b.free.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flattens to a vector: all `S^r` blocks column-major in group order,
    /// then all `S^f` blocks the same way.
    pub fn to_vec(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.len());
        for b in &self.blocks {
            out.extend(b.rank.iter().cloned());
        }
        for b in &self.blocks {
            out.extend(b.free.iter().cloned());
        }
        out
    }

    /// Inverse of [`ParameterSet::to_vec`].
    pub fn from_vec(idx: &IndexSummary, values: &[T]) -> Result<Self> {
        let mut out = Self::zeros(idx);
        if values.len() != out.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} parameters, got {}",
                out.len(),
                values.len()
            )));
        }
        let mut it = values.iter().cloned();
        for b in &mut out.blocks {
            b.rank.iter_mut().for_each(|v| *v = it.next().expect("length checked"));
        }
        for b in &mut out.blocks {
            b.free.iter_mut().for_each(|v| *v = it.next().expect("length checked"));
        }
        Ok(out)
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: T, other: &Self, beta: T) -> Self {
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(x, y)| ParamBlock {
                rank: &x.rank * alpha.clone() + &y.rank * beta.clone(),
                free: &x.free * alpha.clone() + &y.free * beta.clone(),
            })
            .collect();
        Self { blocks }
    }
}

/// Observation matrix `C` with its per-group row ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationMatrix<T: Ring> {
    pub c: DMatrix<T>,
    pub groups: Vec<Range<usize>>,
}

/// Assembles `C = col(C_j)` from the parameter blocks.
pub fn build_observation_matrix<T: Ring>(
    params: &ParameterSet<T>,
    idx: &IndexSummary,
) -> Result<ObservationMatrix<T>> {
    params.check_shapes(idx)?;
    let mut c = DMatrix::<T>::zeros(idx.m, idx.n);
    let mut groups = Vec::with_capacity(idx.groups());
    let mut row = 0;
    for (j, blk) in params.blocks.iter().enumerate() {
        let eps = idx.multiplicities[j];
        let lead = idx.leading_weyr_sums[j];
        let w = idx.weyr_at_distinct[j];
        c.view_mut((row, lead), blk.rank.shape()).copy_from(&blk.rank);
        c.view_mut((row, lead + w), blk.free.shape()).copy_from(&blk.free);
        groups.push(row..row + eps);
        row += eps;
    }
    Ok(ObservationMatrix { c, groups })
}

/// The stacked quantities before any inversion: `T`, `D` and `C*`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainProducts<T: Ring> {
    /// `col_j col_l col_{i<k_j} C_{j,l} A^i`
    pub t: DMatrix<T>,
    /// `col_j C_j A^{k_j - 1} B`
    pub d: DMatrix<T>,
    /// `col_j C_j A^{k_j}`
    pub c_star: DMatrix<T>,
}

/// Forms `T`, `D` and `C*` by iterating `P <- P A` on the rows of `C` that
/// still need higher powers. Groups are ordered by decreasing chain length,
/// so the active rows are always a prefix of `C`.
pub fn chain_products<T: Ring>(
    obs: &ObservationMatrix<T>,
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    idx: &IndexSummary,
) -> ChainProducts<T> {
    let (n, m) = (idx.n, idx.m);
    let mut t = DMatrix::<T>::zeros(n, n);
    let mut d = DMatrix::<T>::zeros(m, m);
    let mut c_star = DMatrix::<T>::zeros(m, n);

    let mut base = Vec::with_capacity(idx.groups());
    let mut acc = 0;
    for j in 0..idx.groups() {
        base.push(acc);
        acc += idx.multiplicities[j] * idx.distinct[j];
    }

    let mut power = obs.c.clone();
    for step in 0..=idx.mu_max {
        for (j, range) in obs.groups.iter().enumerate() {
            let k = idx.distinct[j];
            if step > k {
                continue;
            }
            for (l, r) in range.clone().enumerate() {
                if step < k {
                    t.row_mut(base[j] + l * k + step).copy_from(&power.row(r));
                } else {
                    c_star.row_mut(r).copy_from(&power.row(r));
                }
            }
            if step + 1 == k {
                let rows = power.rows(range.start, range.len()) * b;
                d.rows_mut(range.start, range.len()).copy_from(&rows);
            }
        }
        // Rows of groups with k_j > step need the next power.
        let active: usize = obs
            .groups
            .iter()
            .zip(&idx.distinct)
            .filter(|(_, &k)| k > step)
            .map(|(r, _)| r.len())
            .sum();
        if active == 0 {
            break;
        }
        let next = power.rows(0, active) * a;
        power.rows_mut(0, active).copy_from(&next);
    }
    ChainProducts { t, d, c_star }
}

/// Smallest singular values of the matrices whose invertibility is required.
#[derive(Debug, Clone, PartialEq)]
pub struct RankReport<T> {
    /// `sigma_min(S^r_1)`, then `sigma_min([A_{k_j+1,k_j}; S^r_j])` for `j >= 2`.
    pub sigma_min: Vec<T>,
    /// Per-matrix thresholds `sigma_max * dim * ulp * 1e3`.
    pub thresholds: Vec<T>,
}

impl<T: Real> RankReport<T> {
    pub fn satisfied(&self) -> bool {
        self.sigma_min
            .iter()
            .zip(&self.thresholds)
            .all(|(s, t)| s > t)
    }

    pub fn worst(&self) -> T {
        self.sigma_min
            .iter()
            .copied()
            .fold(T::max_value().unwrap_or_else(T::one), |a, b| a.min(b))
    }
}

/// The square matrices that must be invertible for `D` to be nonsingular.
pub fn constraint_matrices<T: Real>(
    params: &ParameterSet<T>,
    stair: &StaircasePair<T>,
    idx: &IndexSummary,
) -> Result<Vec<DMatrix<T>>> {
    params.check_shapes(idx)?;
    let mut out = Vec::with_capacity(idx.groups());
    for (j, blk) in params.blocks.iter().enumerate() {
        if j == 0 {
            out.push(blk.rank.clone());
            continue;
        }
        let k = idx.distinct[j];
        let stair_blk = stair
            .stair_block(k + 1)
            .ok_or_else(|| Error::ShapeMismatch(format!("missing stair block {}", k + 1)))?;
        out.push(linalg::vstack(&[stair_blk, blk.rank.clone()], idx.weyr_at_distinct[j]));
    }
    Ok(out)
}

/// Reports the smallest singular value of each constraint matrix.
pub fn check_rank_constraints<T: Real>(
    params: &ParameterSet<T>,
    stair: &StaircasePair<T>,
    idx: &IndexSummary,
) -> Result<RankReport<T>> {
    let mats = constraint_matrices(params, stair, idx)?;
    let mut sigma_min = Vec::with_capacity(mats.len());
    let mut thresholds = Vec::with_capacity(mats.len());
    for mat in &mats {
        let sv = linalg::singular_values(mat);
        let smax = sv.first().copied().unwrap_or_else(T::zero);
        sigma_min.push(sv.last().copied().unwrap_or_else(T::zero));
        thresholds.push(linalg::invertibility_threshold(smax, mat.nrows()));
    }
    Ok(RankReport {
        sigma_min,
        thresholds,
    })
}

/// Outcome of the block test for a matrix of the shape
/// `col(S_p A_p ... A_1, ..., S_2 A_2 A_1, S_1 A_1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockInvertibility<T> {
    pub invertible: bool,
    /// Relative `sigma_min / sigma_max` of `S_p`, then of `[A_i; S_{i-1}]` for
    /// `i = p, ..., 2`.
    pub relative_sigma_min: Vec<T>,
}

fn check_block_hypotheses<T: Real>(s: &[DMatrix<T>], a: &[DMatrix<T>]) -> Result<()> {
    let p = a.len();
    let bad = |msg: String| Err(Error::HypothesisViolated(msg));
    if p == 0 || s.len() != p {
        return bad(format!("need p >= 1 blocks of each kind, got {} S and {} A", s.len(), p));
    }
    let m = a[0].nrows();
    if a[0].ncols() != m {
        return bad(format!("A_1 must be square, got {:?}", a[0].shape()));
    }
    for j in 0..p {
        let (rj, cj) = a[j].shape();
        let prev = if j == 0 { m } else { a[j - 1].nrows() };
        if cj != prev || rj > prev {
            return bad(format!("A_{} is {:?}, expected {} columns and at most {} rows", j + 1, a[j].shape(), prev, prev));
        }
        let sv = linalg::singular_values(&a[j]);
        let tol = linalg::invertibility_threshold(sv.first().copied().unwrap_or_else(T::zero), rj.max(cj));
        if linalg::numerical_rank(&sv, tol) < rj {
            return bad(format!("A_{} lacks full row rank", j + 1));
        }
        if s[j].ncols() != rj {
            return bad(format!("S_{} has {} columns, expected {}", j + 1, s[j].ncols(), rj));
        }
        let k_expected = if j + 1 < p { rj - a[j + 1].nrows().min(rj) } else { rj };
        if s[j].nrows() != k_expected {
            return bad(format!("S_{} has {} rows, expected {}", j + 1, s[j].nrows(), k_expected));
        }
    }
    Ok(())
}

/// Assembles `col(S_p A_p ... A_1, ..., S_1 A_1)` (top block uses the longest product).
pub fn block_product_matrix<T: Ring>(s: &[DMatrix<T>], a: &[DMatrix<T>]) -> DMatrix<T> {
    let m = a[0].ncols();
    let mut prefix = DMatrix::<T>::identity(m, m);
    let mut rows = Vec::with_capacity(s.len());
    for (sj, aj) in s.iter().zip(a) {
        prefix = aj * &prefix;
        rows.push(sj * &prefix);
    }
    rows.reverse();
    linalg::vstack(&rows, m)
}

/// Invertibility of the block-product matrix decided from its factors:
/// `S_p` and each `[A_i; S_{i-1}]` must be invertible.
///
/// `rel_tol` bounds `sigma_min / sigma_max`; `None` uses `dim * ulp * 1e3`.
pub fn block_invertibility<T: Real>(
    s: &[DMatrix<T>],
    a: &[DMatrix<T>],
    rel_tol: Option<T>,
) -> Result<BlockInvertibility<T>> {
    check_block_hypotheses(s, a)?;
    let p = a.len();
    let mut mats = vec![s[p - 1].clone()];
    for i in (2..=p).rev() {
        let cols = a[i - 2].nrows();
        mats.push(linalg::vstack(&[a[i - 1].clone(), s[i - 2].clone()], cols));
    }
    let mut rel = Vec::with_capacity(mats.len());
    let mut invertible = true;
    for mat in &mats {
        if mat.nrows() == 0 {
            rel.push(T::one());
            continue;
        }
        let sv = linalg::singular_values(mat);
        let (smax, smin) = (sv[0], sv[sv.len() - 1]);
        let r = if smax > T::zero() { smin / smax } else { T::zero() };
        let tol = rel_tol.unwrap_or_else(|| linalg::invertibility_threshold(T::one(), mat.nrows()));
        invertible &= r > tol;
        rel.push(r);
    }
    Ok(BlockInvertibility {
        invertible,
        relative_sigma_min: rel,
    })
}

/// Starting parameters satisfying the rank constraints by construction:
/// `S^r_1 = I`, `S^r_j` an orthonormal basis of the complement of the row
/// space of `A_{k_j+1,k_j}`, and `S^f = 0`.
pub fn default_parameters<T: Real>(stair: &StaircasePair<T>, idx: &IndexSummary) -> ParameterSet<T> {
    let mut params = ParameterSet::zeros(idx);
    for (j, blk) in params.blocks.iter_mut().enumerate() {
        if j == 0 {
            blk.rank = DMatrix::identity(idx.multiplicities[0], idx.weyr_at_distinct[0]);
        } else {
            let stair_blk = stair
                .stair_block(idx.distinct[j] + 1)
                .expect("groups after the first sit above an existing stair block");
            blk.rank = linalg::row_space_complement(&stair_blk);
        }
    }
    params
}

/// Builds `(T, F, G)` for the staircase-structured pair `stair` (which may
/// carry a pre-applied deadbeat feedback).
///
/// `G` is materialized from a pivoted factorization of `D`; `F` solves
/// `D F = -C*`.
pub fn build_transformations<T: Real>(
    params: &ParameterSet<T>,
    stair: &StaircasePair<T>,
    idx: &IndexSummary,
) -> Result<TransformTriple<T>> {
    let obs = build_observation_matrix(params, idx)?;
    let prod = chain_products(&obs, &stair.a, &stair.b, idx);

    let check = |mat: &DMatrix<T>| -> (bool, f64, f64) {
        let sv = linalg::singular_values(mat);
        let (smax, smin) = (sv[0], sv[sv.len() - 1]);
        let thr = linalg::invertibility_threshold(smax, mat.nrows());
        (smin > thr && smax.is_finite(), smin.as_f64(), thr.as_f64())
    };
    let (ok_d, smin_d, thr_d) = check(&prod.d);
    if !ok_d {
        return Err(Error::SingularD {
            sigma_min: smin_d,
            threshold: thr_d,
        });
    }
    let (ok_t, smin_t, thr_t) = check(&prod.t);
    if !ok_t {
        return Err(Error::SingularT {
            sigma_min: smin_t,
            threshold: thr_t,
        });
    }
    let singular_d = || Error::SingularD {
        sigma_min: smin_d,
        threshold: thr_d,
    };
    let g = linalg::inverse(&prod.d).ok_or_else(singular_d)?;
    let f = -linalg::solve(&prod.d, &prod.c_star).ok_or_else(singular_d)?;
    Ok(TransformTriple::new(prod.t, f, g, idx.mu.clone()).verified(&stair.a, &stair.b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Rational;
    use crate::types::brunovsky_target;
    use nalgebra::dmatrix;

    /// The three-state pair with `w = {2, 1}`: `A_s = e3 e1^T`, `B_s = [I_2; 0]`.
    fn three_state() -> StaircasePair<f64> {
        let mut a = DMatrix::zeros(3, 3);
        a[(2, 0)] = 1.0;
        StaircasePair {
            a,
            b: dmatrix![1.0, 0.0; 0.0, 1.0; 0.0, 0.0],
            u: DMatrix::identity(3, 3),
            weyr: vec![2, 1],
        }
    }

    fn three_state_params() -> ParameterSet<f64> {
        ParameterSet {
            blocks: vec![
                ParamBlock {
                    rank: dmatrix![1.0],
                    free: DMatrix::zeros(1, 0),
                },
                ParamBlock {
                    rank: dmatrix![0.0, 1.0],
                    free: dmatrix![0.0],
                },
            ],
        }
    }

    #[test]
    fn three_state_observation_matrix() {
        let st = three_state();
        let idx = st.index_summary().unwrap();
        let obs = build_observation_matrix(&three_state_params(), &idx).unwrap();
        assert_eq!(obs.c, dmatrix![0.0, 0.0, 1.0; 0.0, 1.0, 0.0]);
        assert_eq!(obs.groups, vec![0..1, 1..2]);
    }

    #[test]
    fn three_state_transformations() {
        let st = three_state();
        let idx = st.index_summary().unwrap();
        let triple = build_transformations(&three_state_params(), &st, &idx).unwrap();
        assert_eq!(triple.t, dmatrix![0.0, 0.0, 1.0; 1.0, 0.0, 0.0; 0.0, 1.0, 0.0]);
        assert_eq!(triple.g, DMatrix::identity(2, 2));
        assert!(triple.f.iter().all(|v| *v == 0.0));
        let diag = triple.diagnostics.unwrap();
        assert!(diag.residual_a <= 1e-12 && diag.residual_b <= 1e-12);
    }

    #[test]
    fn three_state_defaults() {
        let st = three_state();
        let idx = st.index_summary().unwrap();
        let p = default_parameters(&st, &idx);
        assert_eq!(p.blocks[0].rank, dmatrix![1.0]);
        assert!(p.blocks[1].rank[(0, 0)].abs() < 1e-15);
        assert!((p.blocks[1].rank[(0, 1)].abs() - 1.0).abs() < 1e-15);
        assert!(check_rank_constraints(&p, &st, &idx).unwrap().satisfied());
    }

    #[test]
    fn zero_rank_block_violates_constraints() {
        let st = three_state();
        let idx = st.index_summary().unwrap();
        let mut p = three_state_params();
        p.blocks[0].rank[(0, 0)] = 0.0;
        let rep = check_rank_constraints(&p, &st, &idx).unwrap();
        assert_eq!(rep.sigma_min[0], 0.0);
        assert!(!rep.satisfied());
        assert!(matches!(
            build_transformations(&p, &st, &idx),
            Err(Error::SingularD { .. })
        ));
    }

    #[test]
    fn equal_index_observation_has_leading_zeros() {
        let idx = IndexSummary::from_indices(&[2, 2]).unwrap();
        let mut p = ParameterSet::<f64>::zeros(&idx);
        p.blocks[0].rank = dmatrix![1.0, 2.0; 3.0, 4.0];
        let obs = build_observation_matrix(&p, &idx).unwrap();
        assert_eq!(obs.c, dmatrix![0.0, 0.0, 1.0, 2.0; 0.0, 0.0, 3.0, 4.0]);
    }

    #[test]
    fn table_one_block_shapes() {
        let idx = IndexSummary::from_indices(&[4, 4, 2, 2, 2, 1]).unwrap();
        let p = ParameterSet::<f64>::zeros(&idx);
        let shapes: Vec<_> = p.blocks.iter().map(|b| (b.rank.shape(), b.free.shape())).collect();
        assert_eq!(shapes, vec![((2, 2), (2, 0)), ((3, 5), (3, 4)), ((1, 6), (1, 9))]);
        assert_eq!(p.len(), 46);
        assert_eq!(idx.leading_weyr_sums, vec![13, 6, 0]);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let idx = IndexSummary::from_indices(&[2, 1]).unwrap();
        let mut p = ParameterSet::<f64>::zeros(&idx);
        p.blocks[1].free = DMatrix::zeros(1, 2);
        assert!(matches!(build_observation_matrix(&p, &idx), Err(Error::ShapeMismatch(_))));
        assert!(ParameterSet::<f64>::from_vec(&idx, &[1.0]).is_err());
    }

    #[test]
    fn vectorization_round_trip_and_order() {
        let idx = IndexSummary::from_indices(&[2, 1]).unwrap();
        let v = vec![1.0, 2.0, 3.0, 4.0];
        let p = ParameterSet::from_vec(&idx, &v).unwrap();
        assert_eq!(p.blocks[0].rank, dmatrix![1.0]);
        assert_eq!(p.blocks[1].rank, dmatrix![2.0, 3.0]);
        assert_eq!(p.blocks[1].free, dmatrix![4.0]);
        assert_eq!(p.to_vec(), v);
    }

    #[test]
    fn block_test_single_level() {
        let a1 = dmatrix![2.0, 1.0; 0.0, 1.0];
        let ok = block_invertibility(&[dmatrix![1.0, 0.0; 0.0, 3.0]], std::slice::from_ref(&a1), None).unwrap();
        assert!(ok.invertible);
        let bad = block_invertibility(&[dmatrix![1.0, 2.0; 2.0, 4.0]], &[a1], None).unwrap();
        assert!(!bad.invertible);
    }

    #[test]
    fn block_test_three_state_identity() {
        // A_1 = I_2, A_2 = [1 0], S_2 = [1], S_1 = [0 1]: D = I_2.
        let a = vec![DMatrix::identity(2, 2), dmatrix![1.0, 0.0]];
        let s = vec![dmatrix![0.0, 1.0], dmatrix![1.0]];
        assert_eq!(block_product_matrix(&s, &a), DMatrix::identity(2, 2));
        assert!(block_invertibility(&s, &a, None).unwrap().invertible);
    }

    #[test]
    fn block_hypotheses_are_checked() {
        let a = vec![DMatrix::identity(2, 2), dmatrix![1.0, 0.0]];
        let s = vec![dmatrix![0.0, 1.0; 1.0, 0.0], dmatrix![1.0]];
        assert!(matches!(
            block_invertibility(&s, &a, None),
            Err(Error::HypothesisViolated(_))
        ));
        let rank_def = vec![DMatrix::identity(2, 2), dmatrix![0.0, 0.0]];
        assert!(block_invertibility(&[dmatrix![0.0, 1.0], dmatrix![1.0]], &rank_def, None).is_err());
    }

    #[test]
    fn brunovsky_pair_is_fixed_by_defaults() {
        // (A_b, B_b) for mu = {2, 1} is already in staircase form after the
        // state ordering (x2, x3, x1); the build maps it to itself.
        let st = three_state();
        let idx = st.index_summary().unwrap();
        let p = default_parameters(&st, &idx);
        let triple = build_transformations(&p, &st, &idx).unwrap();
        let tg = brunovsky_target::<f64>(&[2, 1]).unwrap();
        let (a_hat, b_hat) = crate::transform::apply_triple(&st.a, &st.b, &triple).unwrap();
        assert!((a_hat - tg.a).norm() <= 1e-12);
        assert!((b_hat - tg.b).norm() <= 1e-12);
    }

    #[test]
    fn chain_products_are_exact_over_rationals() {
        let r = |v: i64| Rational::from_integer(v.into());
        let idx = IndexSummary::from_indices(&[2, 1]).unwrap();
        let mut a = DMatrix::from_element(3, 3, r(0));
        a[(2, 0)] = r(1);
        a[(0, 1)] = r(3);
        let b = DMatrix::from_row_slice(3, 2, &[r(1), r(2), r(0), r(1), r(0), r(0)]);
        let p = ParameterSet {
            blocks: vec![
                ParamBlock { rank: DMatrix::from_element(1, 1, r(2)), free: DMatrix::from_element(1, 0, r(0)) },
                ParamBlock { rank: DMatrix::from_row_slice(1, 2, &[r(0), r(1)]), free: DMatrix::from_element(1, 1, r(5)) },
            ],
        };
        let obs = build_observation_matrix(&p, &idx).unwrap();
        let prod = chain_products(&obs, &a, &b, &idx);
        // Row 0 of C is 2 e3, row 1 is e2 + 5 e3.
        assert_eq!(prod.t.row(1).clone_owned(), (obs.c.row(0) * &a).clone_owned());
        assert_eq!(prod.d, &linalg::vstack(&[obs.c.rows(0, 1) * &a, obs.c.rows(1, 1).clone_owned()], 3) * &b);
    }
}
