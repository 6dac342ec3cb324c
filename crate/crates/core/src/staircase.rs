//! Orthogonal reduction of a controllable pair to staircase form.
//!
//! `U A U^T = A_s` is block upper Hessenberg with block sizes given by the
//! Weyr characteristics, each sub-diagonal block `A_{i,i-1}` has full row
//! rank, and `U B = B_s` is zero below its leading `m x m` block `A_{1,0}`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::partition::IndexSummary;
use crate::scalar::Real;
use crate::types::LinearSystem;

/// A pair in staircase form together with the orthogonal `U` that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct StaircasePair<T: Real> {
    pub a: DMatrix<T>,
    pub b: DMatrix<T>,
    pub u: DMatrix<T>,
    pub weyr: Vec<usize>,
}

impl<T: Real> StaircasePair<T> {
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    /// Row offset of block `i` (1-based).
    fn offset(&self, i: usize) -> usize {
        self.weyr[..i - 1].iter().sum()
    }

    /// `A_{i,i-1}` for `i >= 2`, or the leading block `A_{1,0}` of `B_s` for
    /// `i == 1`. `None` past the last block.
    pub fn stair_block(&self, i: usize) -> Option<DMatrix<T>> {
        if i == 0 || i > self.weyr.len() {
            return None;
        }
        let rows = self.weyr[i - 1];
        if i == 1 {
            return Some(self.b.rows(0, rows).clone_owned());
        }
        let (r0, c0) = (self.offset(i), self.offset(i - 1));
        Some(self.a.view((r0, c0), (rows, self.weyr[i - 2])).clone_owned())
    }

    /// Replaces the system matrix, re-imposing the exact zeros below the stair.
    pub fn with_system_matrix(&self, a: DMatrix<T>) -> Self {
        let mut a = a;
        zero_below_stair(&mut a, &self.weyr);
        Self {
            a,
            b: self.b.clone(),
            u: self.u.clone(),
            weyr: self.weyr.clone(),
        }
    }

    pub fn index_summary(&self) -> Result<IndexSummary> {
        index_summary(self)
    }

    /// Largest absolute entry found where the staircase template demands a zero.
    pub fn template_violation(&self) -> T {
        let mut worst = T::zero();
        let mut row0 = 0;
        let mut col_end = 0;
        for (i, &w) in self.weyr.iter().enumerate() {
            if i >= 2 {
                col_end += self.weyr[i - 2];
                for r in row0..row0 + w {
                    for c in 0..col_end {
                        worst = worst.max(self.a[(r, c)].abs());
                    }
                }
            }
            row0 += w;
        }
        for r in self.m()..self.n() {
            for c in 0..self.m() {
                worst = worst.max(self.b[(r, c)].abs());
            }
        }
        worst
    }
}

/// Overwrites entries strictly below the stair (block row `i`, block columns
/// `< i - 1`) with exact zeros.
pub fn zero_below_stair<T: Real>(a: &mut DMatrix<T>, weyr: &[usize]) {
    let mut row0 = 0;
    let mut col_end = 0;
    for (i, &w) in weyr.iter().enumerate() {
        if i >= 2 {
            col_end += weyr[i - 2];
            a.view_mut((row0, 0), (w, col_end)).fill(T::zero());
        }
        row0 += w;
    }
}

/// Reduces `(A, B)` to staircase form by stage-wise orthogonal rank revelation.
///
/// Stage ranks come from the SVD of the current sub-stair block with the
/// single global threshold `sigma_max([A B]) * max(n, m) * ulp`.
pub fn reduce_to_staircase<T: Real>(sys: &LinearSystem<T>) -> Result<StaircasePair<T>> {
    let (n, m) = (sys.n(), sys.m());
    let mut ab = DMatrix::<T>::zeros(n, n + m);
    ab.columns_mut(0, n).copy_from(sys.a());
    ab.columns_mut(n, m).copy_from(sys.b());
    let tol = linalg::sigma_max(&ab) * T::lit(n.max(m) as f64) * T::ulp();

    // Stage 1: compress the range of B (full column rank) into the first m rows.
    let q0 = linalg::householder_basis(sys.b());
    let mut u = q0.transpose();
    let mut a = &u * sys.a() * &q0;
    let mut b = &u * sys.b();
    b.rows_mut(m, n - m).fill(T::zero());

    let mut weyr = vec![m];
    let mut prev = (0usize, m);
    let mut offset = m;
    while offset < n {
        let stage = weyr.len() + 1;
        let below = a.view((offset, prev.0), (n - offset, prev.1)).clone_owned();
        let (sv, left) = linalg::left_singular_pairs(&below).ok_or(Error::SvdFailed)?;
        let rank = linalg::numerical_rank(&sv, tol);
        if rank == 0 {
            return Err(Error::Uncontrollable {
                stage,
                achieved_rank: offset,
                n,
            });
        }
        let q = linalg::householder_basis(&left.columns(0, rank).clone_owned());

        let rows = q.tr_mul(&a.rows(offset, n - offset));
        a.rows_mut(offset, n - offset).copy_from(&rows);
        let cols = a.columns(offset, n - offset) * &q;
        a.columns_mut(offset, n - offset).copy_from(&cols);
        let urows = q.tr_mul(&u.rows(offset, n - offset));
        u.rows_mut(offset, n - offset).copy_from(&urows);

        a.view_mut((offset + rank, prev.0), (n - offset - rank, prev.1))
            .fill(T::zero());
        weyr.push(rank);
        prev = (offset, rank);
        offset += rank;
    }
    zero_below_stair(&mut a, &weyr);
    Ok(StaircasePair { a, b, u, weyr })
}

/// Index summary of a reduced pair.
pub fn index_summary<T: Real>(stair: &StaircasePair<T>) -> Result<IndexSummary> {
    IndexSummary::from_weyr(&stair.weyr, stair.n(), stair.m())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::brunovsky_target;

    fn orthogonality_defect(u: &DMatrix<f64>) -> f64 {
        (u * u.transpose() - DMatrix::identity(u.nrows(), u.nrows())).norm()
    }

    fn check_structure(sys: &LinearSystem<f64>, st: &StaircasePair<f64>) {
        let n = sys.n();
        assert!(orthogonality_defect(&st.u) <= 10.0 * n as f64 * f64::EPSILON);
        let a_err = (&st.u * sys.a() * st.u.transpose() - &st.a).norm();
        let b_err = (&st.u * sys.b() - &st.b).norm();
        assert!(a_err < 1e-12 * (1.0 + sys.a().norm()), "a_err = {a_err}");
        assert!(b_err < 1e-12 * (1.0 + sys.b().norm()), "b_err = {b_err}");
        assert_eq!(st.template_violation(), 0.0);
        for i in 1..=st.weyr.len() {
            let blk = st.stair_block(i).unwrap();
            assert_eq!(linalg::numerical_rank(&linalg::singular_values(&blk), 1e-10), st.weyr[i - 1]);
        }
    }

    #[test]
    fn siso_chain() {
        let p = brunovsky_target::<f64>(&[3]).unwrap();
        let sys = LinearSystem::new(p.a, p.b).unwrap();
        let st = reduce_to_staircase(&sys).unwrap();
        assert_eq!(st.weyr, vec![1, 1, 1]);
        check_structure(&sys, &st);
    }

    #[test]
    fn two_one_pair() {
        let p = brunovsky_target::<f64>(&[2, 1]).unwrap();
        let sys = LinearSystem::new(p.a, p.b).unwrap();
        let st = reduce_to_staircase(&sys).unwrap();
        assert_eq!(st.weyr, vec![2, 1]);
        assert_eq!(st.index_summary().unwrap().mu, vec![2, 1]);
        check_structure(&sys, &st);
    }

    #[test]
    fn unreachable_state_is_reported_at_stage_two() {
        let sys = LinearSystem::new(
            DMatrix::<f64>::identity(2, 2),
            DMatrix::from_column_slice(2, 1, &[1.0, 0.0]),
        )
        .unwrap();
        assert_eq!(
            reduce_to_staircase(&sys),
            Err(Error::Uncontrollable {
                stage: 2,
                achieved_rank: 1,
                n: 2
            })
        );
    }

    #[test]
    fn square_input_terminates_in_one_stage() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let b = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 1.0]);
        let sys = LinearSystem::new(a, b).unwrap();
        let st = reduce_to_staircase(&sys).unwrap();
        assert_eq!(st.weyr, vec![2]);
        assert_eq!(st.index_summary().unwrap().mu, vec![1, 1]);
    }

    #[test]
    fn dense_pair() {
        let a = DMatrix::from_fn(5, 5, |i, j| ((i * 7 + j * 3) % 5) as f64 - 1.5);
        let b = DMatrix::from_fn(5, 2, |i, j| ((i + 2 * j) % 3) as f64 + 0.25 * j as f64);
        let sys = LinearSystem::new(a, b).unwrap();
        let st = reduce_to_staircase(&sys).unwrap();
        assert_eq!(st.weyr.iter().sum::<usize>(), 5);
        check_structure(&sys, &st);
    }
}
