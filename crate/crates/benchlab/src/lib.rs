//! Benchmark harness comparing the proposed Brunovsky construction with
//! Luenberger's classical route on seeded random systems.

pub mod acceptance;
pub mod bench;
pub mod generator;
pub mod output;
pub mod trial;

pub use bench::{run_benchmark, BenchConfig, BenchResult, BenchSummary, MethodSummary, Quantiles};
pub use generator::{generate_feedback_system, generate_system, random_parameters, GeneratedSystem, GeneratorKind};
pub use output::write_all;
pub use trial::{evaluate_triple, run_trial, Method, TrialMetrics, TrialRecord, SENTINEL};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] brunovsky::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
