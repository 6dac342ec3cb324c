//! Seeded sweep over system conditioning, both methods per draw.

use brunovsky::{conjugate_partition, types::check_descending, OptimizerSettings, ProposedOptions};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::generator::{ctrb_condition, generate, GeneratorKind};
use crate::trial::{record_trial, Method, TrialCase, TrialRecord};
use crate::BenchError;

/// Benchmark configuration. Defaults reproduce the 100-trial comparison on
/// `n = 15`, `m = 4`, `mu = {5, 5, 3, 2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub trials: usize,
    pub n: usize,
    pub m: usize,
    pub indices: Vec<usize>,
    /// Sweep endpoints of the conditioning target, log-spaced.
    pub cond_range: (f64, f64),
    pub seed: u64,
    pub methods: Vec<Method>,
    pub generator: GeneratorKind,
    /// `kappa(T0)` for the feedback generator.
    pub state_cond: f64,
    pub deadbeat: bool,
    pub optimize: bool,
    pub optimizer: OptimizerSettings,
    /// Record wall-clock time per run (makes the CSV non-reproducible).
    pub timing: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            trials: 100,
            n: 15,
            m: 4,
            indices: vec![5, 5, 3, 2],
            cond_range: (1e2, 1e12),
            seed: 2024,
            methods: vec![Method::Proposed, Method::Luenberger],
            generator: GeneratorKind::Feedback,
            state_cond: 10.0,
            deadbeat: true,
            optimize: true,
            optimizer: OptimizerSettings::default(),
            timing: false,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.trials == 0 {
            return Err(BenchError::Config("at least one trial is required".into()));
        }
        if !check_descending(&self.indices) {
            return Err(BenchError::Config(format!(
                "indices must be positive and non-increasing: {:?}",
                self.indices
            )));
        }
        if self.indices.len() != self.m {
            return Err(BenchError::Config(format!(
                "{} indices given for m = {}",
                self.indices.len(),
                self.m
            )));
        }
        let sum: usize = self.indices.iter().sum();
        if sum != self.n {
            return Err(BenchError::Config(format!("indices sum to {sum}, expected n = {}", self.n)));
        }
        let (lo, hi) = self.cond_range;
        if !(lo >= 1.0 && hi >= lo && hi.is_finite()) {
            return Err(BenchError::Config(format!("invalid conditioning range {lo}:{hi}")));
        }
        if self.methods.is_empty() {
            return Err(BenchError::Config("no methods selected".into()));
        }
        if !(self.state_cond >= 1.0 && self.state_cond.is_finite()) {
            return Err(BenchError::Config(format!("invalid state conditioning {}", self.state_cond)));
        }
        Ok(())
    }

    pub fn proposed_options(&self) -> ProposedOptions<f64> {
        ProposedOptions {
            deadbeat: self.deadbeat,
            optimize: self.optimize,
            optimizer: self.optimizer,
            init: None,
        }
    }

    /// Conditioning target of trial `i`: log-spaced over `cond_range`.
    pub fn cond_target(&self, i: usize) -> f64 {
        let (lo, hi) = self.cond_range;
        if self.trials <= 1 {
            return lo;
        }
        let t = i as f64 / (self.trials - 1) as f64;
        (lo.ln() + t * (hi.ln() - lo.ln())).exp()
    }
}

/// Seed of trial `i`: first word of ChaCha stream `i` under the master seed.
pub fn trial_seed(master: u64, i: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(i as u64);
    rng.next_u64()
}

/// Draws the system of trial `i`.
pub fn make_case(config: &BenchConfig, i: usize) -> Result<TrialCase, BenchError> {
    let seed = trial_seed(config.seed, i);
    let g = generate(config.generator, &config.indices, config.cond_target(i), config.state_cond, seed)?;
    let cond_ctrb = ctrb_condition(&g.system);
    Ok(TrialCase {
        trial: i,
        seed,
        mu: config.indices.clone(),
        system: g.system,
        cond_ctrb,
    })
}

/// Quantiles of one metric over all runs of a method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub min: f64,
    pub q10: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q90: f64,
    pub max: f64,
}

impl Quantiles {
    /// Nearest-rank quantiles; `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let at = |p: f64| v[((p * (v.len() - 1) as f64).round() as usize).min(v.len() - 1)];
        Some(Self {
            min: v[0],
            q10: at(0.1),
            q25: at(0.25),
            median: median(&v),
            q75: at(0.75),
            q90: at(0.9),
            max: v[v.len() - 1],
        })
    }
}

/// Median with the mean of the two middle values for even lengths.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    match k {
        0 => f64::NAN,
        _ if k % 2 == 1 => v[k / 2],
        _ => 0.5 * (v[k / 2 - 1] + v[k / 2]),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub runs: usize,
    pub failed: usize,
    /// Quantiles over all runs, failures included at the sentinel.
    pub err_total: Option<Quantiles>,
    #[serde(rename = "err_Ab")]
    pub err_ab: Option<Quantiles>,
    #[serde(rename = "err_Bb")]
    pub err_bb: Option<Quantiles>,
    pub nilpotency: Option<Quantiles>,
    #[serde(rename = "cond_TG")]
    pub cond_tg: Option<Quantiles>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub config: BenchConfig,
    pub cond_ctrb: Option<Quantiles>,
    pub methods: Vec<MethodSummary>,
}

impl BenchSummary {
    pub fn of(config: &BenchConfig, records: &[TrialRecord]) -> Self {
        let first = config.methods.first().copied();
        let ctrb: Vec<f64> = records
            .iter()
            .filter(|r| Some(r.method) == first)
            .map(|r| r.cond_ctrb)
            .collect();
        let methods = config
            .methods
            .iter()
            .map(|&method| {
                let rows: Vec<&TrialRecord> = records.iter().filter(|r| r.method == method).collect();
                let q = |f: fn(&TrialRecord) -> f64| Quantiles::of(&rows.iter().map(|r| f(r)).collect::<Vec<_>>());
                MethodSummary {
                    method,
                    runs: rows.len(),
                    failed: rows.iter().filter(|r| r.failed).count(),
                    err_total: q(TrialRecord::total_error),
                    err_ab: q(|r| r.err_ab),
                    err_bb: q(|r| r.err_bb),
                    nilpotency: q(|r| r.nilpotency),
                    cond_tg: q(|r| r.cond_tg),
                }
            })
            .collect();
        Self {
            config: config.clone(),
            cond_ctrb: Quantiles::of(&ctrb),
            methods,
        }
    }

    pub fn method(&self, method: Method) -> Option<&MethodSummary> {
        self.methods.iter().find(|s| s.method == method)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    /// Sorted by `cond_ctrb`, then trial, then method order of the config.
    pub records: Vec<TrialRecord>,
    pub summary: BenchSummary,
}

impl BenchResult {
    pub fn records_for(&self, method: Method) -> impl Iterator<Item = &TrialRecord> {
        self.records.iter().filter(move |r| r.method == method)
    }
}

/// Runs all trials (in parallel) and collects them in a schedule-independent order.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchResult, BenchError> {
    config.validate()?;
    conjugate_partition(&config.indices).map_err(|e| BenchError::Config(e.to_string()))?;
    let opts = config.proposed_options();
    let per_trial: Vec<Vec<TrialRecord>> = (0..config.trials)
        .into_par_iter()
        .map(|i| {
            let case = make_case(config, i)?;
            Ok(config
                .methods
                .iter()
                .map(|&m| record_trial(&case, m, &opts, config.timing))
                .collect())
        })
        .collect::<Result<_, BenchError>>()?;
    let mut records: Vec<TrialRecord> = per_trial.into_iter().flatten().collect();
    let rank = |m: Method| config.methods.iter().position(|&x| x == m).unwrap_or(usize::MAX);
    records.sort_by(|a, b| {
        a.cond_ctrb
            .total_cmp(&b.cond_ctrb)
            .then(a.trial.cmp(&b.trial))
            .then(rank(a.method).cmp(&rank(b.method)))
    });
    let summary = BenchSummary::of(config, &records);
    Ok(BenchResult { records, summary })
}
