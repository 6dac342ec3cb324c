use thiserror::Error;

/// Errors raised by the transformation pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("input matrix B has numerical rank {rank}, expected {m}")]
    RankDeficientB { rank: usize, m: usize },

    #[error("indices must be positive and non-increasing: {0:?}")]
    NonDescendingIndices(Vec<usize>),

    #[error("partition must be non-empty, positive and non-increasing: {0:?}")]
    EmptyOrNonDescending(Vec<usize>),

    #[error("system is uncontrollable: stair block {stage} has rank 0 after reaching rank {achieved_rank} of {n}")]
    Uncontrollable { stage: usize, achieved_rank: usize, n: usize },

    #[error("Weyr characteristics {weyr:?} do not form a partition of n = {n} with leading part m = {m}")]
    InconsistentWeyr { weyr: Vec<usize>, n: usize, m: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("block hypotheses violated: {0}")]
    HypothesisViolated(String),

    #[error("decoupling matrix is numerically singular (sigma_min = {sigma_min:e}, threshold = {threshold:e})")]
    SingularD { sigma_min: f64, threshold: f64 },

    #[error("state transformation is numerically singular (sigma_min = {sigma_min:e}, threshold = {threshold:e})")]
    SingularT { sigma_min: f64, threshold: f64 },

    #[error("singular value decomposition did not converge")]
    SvdFailed,

    #[error("matrix is numerically singular")]
    SingularInput,

    #[error("pair is not in controllable canonical form (template residual {residual:e})")]
    TemplateViolation { residual: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
