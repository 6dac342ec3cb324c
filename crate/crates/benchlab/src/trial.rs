//! One method on one system, scored against the exact Brunovsky pair.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use brunovsky::linalg;
use brunovsky::{
    apply_triple, brunovsky_target, kappa_cond, luenberger_pipeline, proposed_pipeline, LinearSystem,
    ProposedOptions, Result, TransformTriple,
};
use serde::{Deserialize, Serialize};

/// Stored in place of non-finite metrics and for failed runs.
pub const SENTINEL: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Proposed,
    Luenberger,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::Luenberger => "luenberger",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "proposed" => Ok(Method::Proposed),
            "luenberger" => Ok(Method::Luenberger),
            _ => Err(format!("unknown method `{s}` (expected proposed or luenberger)")),
        }
    }
}

/// Metrics of one triple, all Frobenius norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialMetrics {
    /// `kappa(T) * kappa(G)`
    pub cond_tg: f64,
    /// `||T (A + B F) T^{-1} - A_b||`
    pub err_ab: f64,
    /// `||T B G - B_b||`
    pub err_bb: f64,
    /// `||(T (A + B F) T^{-1})^{mu_1}||`
    pub nilpotency: f64,
}

impl TrialMetrics {
    pub fn total_error(&self) -> f64 {
        self.err_ab + self.err_bb
    }
}

/// Scores `triple` on `sys` against the Brunovsky pair of `mu`. A triple
/// whose computed pair has the wrong shape or cannot be formed scores
/// infinite error.
pub fn evaluate_triple(sys: &LinearSystem<f64>, triple: &TransformTriple<f64>, mu: &[usize]) -> TrialMetrics {
    let cond_tg = kappa_cond(&triple.t) * kappa_cond(&triple.g);
    let target = brunovsky_target::<f64>(mu).ok();
    match (apply_triple(sys.a(), sys.b(), triple), target) {
        (Some((a_hat, b_hat)), Some(tg)) if a_hat.shape() == tg.a.shape() && b_hat.shape() == tg.b.shape() => {
            TrialMetrics {
                cond_tg,
                err_ab: (&a_hat - &tg.a).norm(),
                err_bb: (&b_hat - &tg.b).norm(),
                nilpotency: linalg::matrix_power(&a_hat, mu[0]).norm(),
            }
        }
        _ => TrialMetrics {
            cond_tg,
            err_ab: f64::INFINITY,
            err_bb: f64::INFINITY,
            nilpotency: f64::INFINITY,
        },
    }
}

/// Runs `method` on `sys` and scores it against the pair of `mu`.
pub fn run_trial(
    sys: &LinearSystem<f64>,
    mu: &[usize],
    method: Method,
    opts: &ProposedOptions<f64>,
) -> Result<TrialMetrics> {
    let triple = match method {
        Method::Proposed => proposed_pipeline(sys, opts)?.triple,
        Method::Luenberger => luenberger_pipeline(sys)?.triple,
    };
    Ok(evaluate_triple(sys, &triple, mu))
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub method: Method,
    pub cond_ctrb: f64,
    #[serde(rename = "cond_TG")]
    pub cond_tg: f64,
    #[serde(rename = "err_Ab")]
    pub err_ab: f64,
    #[serde(rename = "err_Bb")]
    pub err_bb: f64,
    pub nilpotency: f64,
    pub wall_ms: f64,
    pub failed: bool,
}

impl TrialRecord {
    pub fn total_error(&self) -> f64 {
        self.err_ab + self.err_bb
    }
}

fn finite_or_sentinel(v: f64) -> f64 {
    if v.is_finite() {
        v.min(SENTINEL)
    } else {
        SENTINEL
    }
}

/// A generated system and its place in the sweep.
#[derive(Debug, Clone)]
pub struct TrialCase {
    pub trial: usize,
    pub seed: u64,
    pub mu: Vec<usize>,
    pub system: LinearSystem<f64>,
    pub cond_ctrb: f64,
}

/// Runs and records one trial. Failures become sentinel rows; `wall_ms` is
/// measured only when `timed` is set, so untimed tables are reproducible.
pub fn record_trial(case: &TrialCase, method: Method, opts: &ProposedOptions<f64>, timed: bool) -> TrialRecord {
    let start = Instant::now();
    let outcome = run_trial(&case.system, &case.mu, method, opts);
    let wall_ms = if timed {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    };
    let failed_metrics = TrialMetrics {
        cond_tg: f64::INFINITY,
        err_ab: f64::INFINITY,
        err_bb: f64::INFINITY,
        nilpotency: f64::INFINITY,
    };
    let (metrics, failed) = match outcome {
        Ok(m) => (m, !(m.err_ab.is_finite() && m.err_bb.is_finite() && m.nilpotency.is_finite())),
        Err(_) => (failed_metrics, true),
    };
    TrialRecord {
        trial: case.trial,
        seed: case.seed,
        method,
        cond_ctrb: finite_or_sentinel(case.cond_ctrb),
        cond_tg: finite_or_sentinel(metrics.cond_tg),
        err_ab: finite_or_sentinel(metrics.err_ab),
        err_bb: finite_or_sentinel(metrics.err_bb),
        nilpotency: finite_or_sentinel(metrics.nilpotency),
        wall_ms,
        failed,
    }
}
