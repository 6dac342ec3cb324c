//! Deadbeat pre-processing of the staircase pair and composition of the
//! coordinate changes back to the original system.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::parametrization::{build_transformations, default_parameters, ParameterSet};
use crate::partition::IndexSummary;
use crate::scalar::{Real, Ring};
use crate::staircase::StaircasePair;
use crate::transform::TransformTriple;

/// Chooses one deadbeat gain `K_s` whose closed loop has Jordan blocks of
/// sizes equal to the controllability indices.
pub trait DeadbeatStrategy<T: Real> {
    fn gain(&self, stair: &StaircasePair<T>, idx: &IndexSummary) -> Result<DMatrix<T>>;
}

/// Takes `K_s = F` from the parametric build at the given (or default) parameters.
#[derive(Debug, Clone)]
pub struct ParametricGain<T: Ring> {
    pub params: Option<ParameterSet<T>>,
}

impl<T: Ring> Default for ParametricGain<T> {
    fn default() -> Self {
        Self { params: None }
    }
}

impl<T: Real> DeadbeatStrategy<T> for ParametricGain<T> {
    fn gain(&self, stair: &StaircasePair<T>, idx: &IndexSummary) -> Result<DMatrix<T>> {
        let params = match &self.params {
            Some(p) => p.clone(),
            None => default_parameters(stair, idx),
        };
        Ok(build_transformations(&params, stair, idx)?.f)
    }
}

/// Deadbeat gain of the staircase pair from the default-parameter build.
pub fn deadbeat_gain_staircase<T: Real>(
    stair: &StaircasePair<T>,
    idx: &IndexSummary,
) -> Result<DMatrix<T>> {
    ParametricGain::default().gain(stair, idx)
}

/// `(A_s + B_s K_s, B_s)` with the stair zeros re-imposed.
pub fn apply_predeadbeat<T: Real>(stair: &StaircasePair<T>, gain: &DMatrix<T>) -> StaircasePair<T> {
    stair.with_system_matrix(&stair.a + &stair.b * gain)
}

/// Maps a triple for the pre-processed staircase pair back to the original
/// coordinates: `T U`, `(K_s + F) U`, `G`.
pub fn compose_transforms<T: Ring>(
    u: &DMatrix<T>,
    gain: &DMatrix<T>,
    inner: &TransformTriple<T>,
) -> TransformTriple<T> {
    TransformTriple::new(
        &inner.t * u,
        (gain + &inner.f) * u,
        inner.g.clone(),
        inner.mu.clone(),
    )
}
