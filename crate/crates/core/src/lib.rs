//! Brunovsky canonical form of controllable linear systems `x' = Ax + Bu`.
//!
//! The proposed route reduces `(A, B)` to an orthogonal staircase form,
//! applies a deadbeat feedback, and builds `(T, F, G)` from a free
//! observation-matrix parametrization whose parameters are tuned to lower
//! the condition numbers of `T` and `G`. A classical Luenberger route is
//! included as a baseline.
//!
//! All routines are generic over the scalar; `f64` aliases live at the root.

pub mod conditioning;
pub mod deadbeat;
pub mod document;
pub mod error;
pub mod exact;
pub mod linalg;
pub mod luenberger;
pub mod parametrization;
pub mod partition;
pub mod pipeline;
pub mod scalar;
pub mod staircase;
pub mod transform;
pub mod types;

pub use conditioning::{
    kappa_cond, minimize_condition, objective, omega_cond, ConditionReport, MinimizeOutcome,
    OptimizerSettings,
};
pub use deadbeat::{
    apply_predeadbeat, compose_transforms, deadbeat_gain_staircase, DeadbeatStrategy,
    ParametricGain,
};
pub use document::SystemDocument;
pub use error::{Error, Result};
pub use luenberger::{canonical_to_brunovsky, luenberger_pipeline, modified_ctrb_matrix, LuenbergerOutcome};
pub use parametrization::{
    block_invertibility, build_observation_matrix, build_transformations,
    check_rank_constraints, default_parameters, ParamBlock, ParameterSet,
};
pub use partition::{conjugate_partition, IndexSummary};
pub use pipeline::{proposed_pipeline, proposed_pipeline_with, ProposedOptions, ProposedOutcome};
pub use scalar::{Field, Real, Ring};
pub use staircase::{index_summary, reduce_to_staircase, StaircasePair};
pub use transform::{apply_triple, Diagnostics, TransformTriple};
pub use types::{brunovsky_target, BrunovskyPair, LinearSystem};

pub type Matrix = nalgebra::DMatrix<f64>;
pub type System = LinearSystem<f64>;
pub type Staircase = StaircasePair<f64>;
pub type Triple = TransformTriple<f64>;
pub type Params = ParameterSet<f64>;
pub type System32 = LinearSystem<f32>;
pub type Triple32 = TransformTriple<f32>;
pub use exact::{Rational, RationalMatrix};
