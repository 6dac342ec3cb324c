//! Validated systems and the Brunovsky target pair.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{Real, Ring};

/// A dense pair `(A, B)` for `x+ = A x + B u` with `B` of full column rank.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem<T: Real> {
    a: DMatrix<T>,
    b: DMatrix<T>,
    b_rank: usize,
}

impl<T: Real> LinearSystem<T> {
    /// Validates shapes and the column rank of `B`.
    ///
    /// The rank threshold is `sigma_max(B) * max(n, m) * ulp`.
    pub fn new(a: DMatrix<T>, b: DMatrix<T>) -> Result<Self> {
        let n = a.nrows();
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "A must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "B has {} rows but A is {}x{}",
                b.nrows(),
                n,
                n
            )));
        }
        let m = b.ncols();
        if n == 0 || m == 0 || m > n {
            return Err(Error::DimensionMismatch(format!(
                "need n >= m >= 1, got n = {n}, m = {m}"
            )));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::DimensionMismatch("non-finite entry".into()));
        }
        let sv = linalg::singular_values(&b);
        let tol = sv[0] * T::lit(n.max(m) as f64) * T::ulp();
        let b_rank = linalg::numerical_rank(&sv, tol);
        if b_rank < m {
            return Err(Error::RankDeficientB { rank: b_rank, m });
        }
        Ok(Self { a, b, b_rank })
    }

    pub fn a(&self) -> &DMatrix<T> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<T> {
        &self.b
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Input dimension.
    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    /// Numerical rank of `B` recorded at validation.
    pub fn b_rank(&self) -> usize {
        self.b_rank
    }

    /// Full controllability matrix `[B, AB, ..., A^{n-1} B]`.
    pub fn controllability_matrix(&self) -> DMatrix<T> {
        let (n, m) = (self.n(), self.m());
        let mut out = DMatrix::<T>::zeros(n, n * m);
        let mut block = self.b.clone();
        for k in 0..n {
            out.view_mut((0, k * m), (n, m)).copy_from(&block);
            if k + 1 < n {
                block = &self.a * &block;
            }
        }
        out
    }
}

/// The Brunovsky canonical pair for a set of controllability indices.
#[derive(Debug, Clone, PartialEq)]
pub struct BrunovskyPair<T: Ring> {
    pub a: DMatrix<T>,
    pub b: DMatrix<T>,
    pub mu: Vec<usize>,
}

/// Checks that `mu` is non-empty, positive and non-increasing.
pub fn check_descending(mu: &[usize]) -> bool {
    !mu.is_empty() && mu.iter().all(|&v| v > 0) && mu.windows(2).all(|w| w[0] >= w[1])
}

/// Builds `(A_b, B_b)`: block-diagonal shift chains of lengths `mu[i]`, each
/// driven through its last state by input `i`.
pub fn brunovsky_target<T: Ring>(mu: &[usize]) -> Result<BrunovskyPair<T>> {
    if !check_descending(mu) {
        return Err(Error::NonDescendingIndices(mu.to_vec()));
    }
    let n: usize = mu.iter().sum();
    let m = mu.len();
    let mut a = DMatrix::<T>::zeros(n, n);
    let mut b = DMatrix::<T>::zeros(n, m);
    let mut offset = 0;
    for (i, &len) in mu.iter().enumerate() {
        for r in 0..len - 1 {
            a[(offset + r, offset + r + 1)] = T::one();
        }
        b[(offset + len - 1, i)] = T::one();
        offset += len;
    }
    Ok(BrunovskyPair {
        a,
        b,
        mu: mu.to_vec(),
    })
}
