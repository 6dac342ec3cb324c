//! The proposed route: staircase reduction, deadbeat pre-processing,
//! condition-number optimization, parametric build, composition.

use nalgebra::DMatrix;

use crate::conditioning::{minimize_condition, OptimizerSettings};
use crate::deadbeat::{apply_predeadbeat, compose_transforms, DeadbeatStrategy, ParametricGain};
use crate::error::Result;
use crate::parametrization::{build_transformations, default_parameters, ParameterSet};
use crate::partition::IndexSummary;
use crate::scalar::Real;
use crate::staircase::{reduce_to_staircase, StaircasePair};
use crate::transform::TransformTriple;
use crate::types::LinearSystem;

/// Switches for the proposed route. Both steps are on by default.
#[derive(Debug, Clone)]
pub struct ProposedOptions<T: Real> {
    pub deadbeat: bool,
    pub optimize: bool,
    pub optimizer: OptimizerSettings,
    /// Starting parameters; defaults to [`default_parameters`] on the
    /// (pre-processed) staircase pair.
    pub init: Option<ParameterSet<T>>,
}

impl<T: Real> Default for ProposedOptions<T> {
    fn default() -> Self {
        Self {
            deadbeat: true,
            optimize: true,
            optimizer: OptimizerSettings::default(),
            init: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProposedOutcome<T: Real> {
    /// Triple for the original `(A, B)`, diagnostics recomputed on it.
    pub triple: TransformTriple<T>,
    pub staircase: StaircasePair<T>,
    pub indices: IndexSummary,
    /// Deadbeat gain applied to the staircase pair (zero when disabled).
    pub gain: DMatrix<T>,
    pub params: ParameterSet<T>,
    /// Optimizer objective trace (empty when optimization is off).
    pub trace: Vec<f64>,
}

/// Runs the proposed route with the default deadbeat strategy.
pub fn proposed_pipeline<T: Real>(
    sys: &LinearSystem<T>,
    opts: &ProposedOptions<T>,
) -> Result<ProposedOutcome<T>> {
    proposed_pipeline_with(sys, opts, &ParametricGain::default())
}

/// Runs the proposed route with a caller-chosen deadbeat gain.
pub fn proposed_pipeline_with<T: Real>(
    sys: &LinearSystem<T>,
    opts: &ProposedOptions<T>,
    strategy: &dyn DeadbeatStrategy<T>,
) -> Result<ProposedOutcome<T>> {
    let staircase = reduce_to_staircase(sys)?;
    let indices = staircase.index_summary()?;
    let (pair, gain) = if opts.deadbeat {
        let k = strategy.gain(&staircase, &indices)?;
        (apply_predeadbeat(&staircase, &k), k)
    } else {
        (staircase.clone(), DMatrix::zeros(sys.m(), sys.n()))
    };

    let init = match &opts.init {
        Some(p) => {
            p.check_shapes(&indices)?;
            p.clone()
        }
        None => default_parameters(&pair, &indices),
    };
    let (params, inner, trace) = if opts.optimize {
        let out = minimize_condition(&pair, &indices, &init, &opts.optimizer)?;
        (out.params, out.triple, out.trace)
    } else {
        let inner = build_transformations(&init, &pair, &indices)?;
        (init, inner, Vec::new())
    };

    let triple = compose_transforms(&staircase.u, &gain, &inner).verified(sys.a(), sys.b());
    Ok(ProposedOutcome {
        triple,
        staircase,
        indices,
        gain,
        params,
        trace,
    })
}
