//! Integer-partition bookkeeping: conjugation of Ferrers diagrams and the
//! index summary that drives the parametrization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::check_descending;

/// Conjugate partition: transpose of the Ferrers diagram.
///
/// `part[i]` of the result counts the entries of `p` that are `> i`.
pub fn conjugate_partition(p: &[usize]) -> Result<Vec<usize>> {
    if !check_descending(p) {
        return Err(Error::EmptyOrNonDescending(p.to_vec()));
    }
    let width = p[0];
    Ok((0..width)
        .map(|i| p.iter().take_while(|&&v| v > i).count())
        .collect())
}

/// Controllability indices and the derived block data of the staircase.
///
/// Groups `j = 0..g` run over the distinct index values `k_j` in decreasing
/// order; `multiplicities[j]` chains have length `k_j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSummary {
    pub n: usize,
    pub m: usize,
    /// Weyr characteristics `omega_1 >= ... >= omega_mu` (staircase block sizes).
    pub weyr: Vec<usize>,
    /// Controllability indices, descending.
    pub mu: Vec<usize>,
    pub mu_max: usize,
    /// Distinct index values `k_1 > ... > k_g`.
    pub distinct: Vec<usize>,
    /// `epsilon_{k_j}`: number of chains of length `k_j`.
    pub multiplicities: Vec<usize>,
    /// `omega_{k_j}`.
    pub weyr_at_distinct: Vec<usize>,
    /// `sum_{i > k_j} omega_i`.
    pub trailing_weyr_sums: Vec<usize>,
    /// `sum_{i < k_j} omega_i`: width of the zero prefix of `C_j`.
    pub leading_weyr_sums: Vec<usize>,
    /// Rank-constrained degrees of freedom `N_R`.
    pub n_rank: usize,
    /// Free degrees of freedom `N_F`.
    pub n_free: usize,
}

impl IndexSummary {
    /// Builds the summary from Weyr characteristics of an `n`-state,
    /// `m`-input staircase.
    pub fn from_weyr(weyr: &[usize], n: usize, m: usize) -> Result<Self> {
        let inconsistent = || Error::InconsistentWeyr {
            weyr: weyr.to_vec(),
            n,
            m,
        };
        if !check_descending(weyr) || weyr.iter().sum::<usize>() != n || weyr[0] != m {
            return Err(inconsistent());
        }
        let mu = conjugate_partition(weyr)?;
        let mu_max = weyr.len();
        // omega_i for 1-based i, with omega_{mu+1} = 0 appended.
        let omega = |i: usize| if i <= mu_max { weyr[i - 1] } else { 0 };

        let mut distinct = Vec::new();
        let mut multiplicities = Vec::new();
        for i in (1..=mu_max).rev() {
            let eps = omega(i) - omega(i + 1);
            if eps > 0 {
                distinct.push(i);
                multiplicities.push(eps);
            }
        }
        let weyr_at_distinct: Vec<usize> = distinct.iter().map(|&k| omega(k)).collect();
        let trailing_weyr_sums: Vec<usize> =
            distinct.iter().map(|&k| weyr[k..].iter().sum()).collect();
        let leading_weyr_sums: Vec<usize> =
            distinct.iter().map(|&k| weyr[..k - 1].iter().sum()).collect();
        let n_rank = multiplicities
            .iter()
            .zip(&weyr_at_distinct)
            .map(|(e, w)| e * w)
            .sum();
        let n_free = multiplicities
            .iter()
            .zip(&trailing_weyr_sums)
            .map(|(e, s)| e * s)
            .sum();

        Ok(Self {
            n,
            m,
            weyr: weyr.to_vec(),
            mu,
            mu_max,
            distinct,
            multiplicities,
            weyr_at_distinct,
            trailing_weyr_sums,
            leading_weyr_sums,
            n_rank,
            n_free,
        })
    }

    /// Builds the summary from controllability indices (descending).
    pub fn from_indices(mu: &[usize]) -> Result<Self> {
        let weyr = conjugate_partition(mu).map_err(|_| Error::NonDescendingIndices(mu.to_vec()))?;
        Self::from_weyr(&weyr, mu.iter().sum(), mu.len())
    }

    /// Number of groups `g`.
    pub fn groups(&self) -> usize {
        self.distinct.len()
    }

    /// Row offset of staircase block `i` (1-based).
    pub fn block_offset(&self, i: usize) -> usize {
        self.weyr[..i - 1].iter().sum()
    }

    /// Total number of scalar parameters `N_R + N_F`.
    pub fn parameter_count(&self) -> usize {
        self.n_rank + self.n_free
    }
}
