//! Acceptance checks, one function per criterion. Each returns a [`Check`]
//! with a one-line detail; the `acceptance` test target prints them.

use std::path::Path;
use std::time::{Duration, Instant};

use brunovsky::parametrization::{block_invertibility, block_product_matrix, build_observation_matrix, chain_products};
use brunovsky::{
    conjugate_partition, index_summary, kappa_cond, linalg, omega_cond, proposed_pipeline,
    reduce_to_staircase, IndexSummary, LinearSystem, ParameterSet, ProposedOptions, StaircasePair,
};
use nalgebra::{dmatrix, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bench::{make_case, median, run_benchmark, BenchConfig, BenchResult};
use crate::generator::{gaussian, generate_feedback_system, generate_system, random_orthogonal, random_parameters};
use crate::output::{write_all, CSV_FILE};
use crate::trial::Method;

/// Outcome of one criterion.
#[derive(Debug, Clone)]
pub struct Check {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(id: u32, name: &'static str, passed: bool, detail: String) -> Self {
        Self { id, name, passed, detail }
    }

    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("[{tag}] {}. {}: {}", self.id, self.name, self.detail)
    }
}

pub const RUNTIME_BUDGET: Duration = Duration::from_secs(300);

/// Criterion 1: proposed-method accuracy over the default sweep.
pub fn check_reproduction(result: &BenchResult, elapsed: Duration) -> Check {
    let rows: Vec<_> = result.records_for(Method::Proposed).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.total_error()).collect();
    let good = errs.iter().filter(|&&e| e <= 1e-4).count();
    let med = median(&errs);
    let worst_nil = rows.iter().map(|r| r.nilpotency).fold(0.0, f64::max);
    let passed = rows.len() == 100 && good >= 95 && med <= 1e-7 && worst_nil <= 1e-6 && elapsed <= RUNTIME_BUDGET;
    Check::new(
        1,
        "default sweep reproduction",
        passed,
        format!(
            "{good}/{} trials with error <= 1e-4 (need >= 95), median {med:.2e} (need <= 1e-7), \
             max nilpotency {worst_nil:.2e} (need <= 1e-6), runtime {:.1}s (budget {}s)",
            rows.len(),
            elapsed.as_secs_f64(),
            RUNTIME_BUDGET.as_secs()
        ),
    )
}

/// Criterion 2: baseline separation on the ill-conditioned end.
pub fn check_separation(result: &BenchResult) -> Check {
    let pick = |m: Method| -> Vec<f64> {
        result
            .records_for(m)
            .filter(|r| r.cond_ctrb >= 1e9)
            .map(|r| r.total_error())
            .collect()
    };
    let (p, l) = (pick(Method::Proposed), pick(Method::Luenberger));
    let (mp, ml) = (median(&p), median(&l));
    let ratio = ml / mp;
    let passed = !p.is_empty() && ratio >= 1e3;
    Check::new(
        2,
        "baseline separation",
        passed,
        format!(
            "{} trials with cond_ctrb >= 1e9: median error luenberger {ml:.2e}, proposed {mp:.2e}, ratio {ratio:.2e} (need >= 1e3)",
            p.len()
        ),
    )
}

/// Criterion 3: index summary of a system with `mu = {4, 4, 2, 2, 2, 1}`.
pub fn check_table_one() -> Check {
    let mu = [4, 4, 2, 2, 2, 1];
    let got = generate_feedback_system(&mu, 1e4, 10.0, 7)
        .and_then(|g| reduce_to_staircase(&g.system))
        .and_then(|st| index_summary(&st));
    let (passed, detail) = match got {
        Ok(s) => {
            let ok = s.distinct == [4, 2, 1]
                && s.multiplicities == [2, 3, 1]
                && s.weyr_at_distinct == [2, 5, 6]
                && s.trailing_weyr_sums == [0, 4, 9]
                && s.n_rank == 25
                && s.n_free == 21;
            (
                ok,
                format!(
                    "k = {:?}, eps = {:?}, omega_k = {:?}, trailing = {:?}, N_R = {}, N_F = {}",
                    s.distinct, s.multiplicities, s.weyr_at_distinct, s.trailing_weyr_sums, s.n_rank, s.n_free
                ),
            )
        }
        Err(e) => (false, format!("error: {e}")),
    };
    Check::new(3, "index table exactness", passed, detail)
}

/// Criterion 4: the three-state worked example at its stated parameters.
pub fn check_three_state() -> Check {
    let run = || -> brunovsky::Result<(bool, String)> {
        let sys = LinearSystem::new(
            dmatrix![0.0, 0.0, 0.0; 0.0, 0.0, 0.0; 1.0, 0.0, 0.0],
            dmatrix![1.0, 0.0; 0.0, 1.0; 0.0, 0.0],
        )?;
        let st = reduce_to_staircase(&sys)?;
        let idx = index_summary(&st)?;
        let mut params = ParameterSet::zeros(&idx);
        params.blocks[0].rank = dmatrix![1.0];
        params.blocks[1].rank = dmatrix![0.0, 1.0];
        let opts = ProposedOptions {
            deadbeat: false,
            optimize: false,
            init: Some(params),
            ..ProposedOptions::default()
        };
        let out = proposed_pipeline(&sys, &opts)?;
        let t = &out.triple;
        let d = t.diagnostics.expect("pipeline verifies its output");
        let perm = dmatrix![0.0, 0.0, 1.0; 1.0, 0.0, 0.0; 0.0, 1.0, 0.0];
        let ok = t.t == perm
            && t.f.iter().all(|v| *v == 0.0)
            && t.g == DMatrix::identity(2, 2)
            && d.residual_a <= 1e-12
            && d.residual_b <= 1e-12;
        Ok((
            ok,
            format!(
                "T permutation: {}, F = 0: {}, G = I: {}, residuals {:.1e} / {:.1e}",
                t.t == perm,
                t.f.iter().all(|v| *v == 0.0),
                t.g == DMatrix::identity(2, 2),
                d.residual_a,
                d.residual_b
            ),
        ))
    };
    let (passed, detail) = run().unwrap_or_else(|e| (false, format!("error: {e}")));
    Check::new(4, "three-state worked example", passed, detail)
}

/// Random instance for the block-product invertibility test: `A_1` square,
/// `A_j` wide with full row rank, occasionally a deliberately singular factor.
fn block_instance(rng: &mut impl Rng) -> (Vec<DMatrix<f64>>, Vec<DMatrix<f64>>) {
    let p = rng.random_range(1..=4);
    let m = rng.random_range(p.max(1)..=6);
    let mut rows = vec![m];
    for _ in 1..p {
        let prev = *rows.last().expect("non-empty");
        rows.push(rng.random_range(1..=prev));
    }
    let a: Vec<DMatrix<f64>> = (0..p)
        .map(|j| {
            let cols = if j == 0 { m } else { rows[j - 1] };
            gaussian(rng, rows[j], cols)
        })
        .collect();
    let mut s: Vec<DMatrix<f64>> = (0..p)
        .map(|j| {
            let k = if j + 1 < p { rows[j] - rows[j + 1] } else { rows[j] };
            gaussian(rng, k, rows[j])
        })
        .collect();
    // Make roughly a third of the instances singular in one factor.
    if rng.random_bool(0.35) {
        let j = rng.random_range(0..p);
        let sj = &mut s[j];
        if sj.nrows() > 0 {
            if j + 1 == p {
                // S_p rank deficient: copy a row or zero it.
                if sj.nrows() > 1 {
                    let r = sj.row(0).clone_owned();
                    sj.row_mut(1).copy_from(&(r * 2.0));
                } else {
                    sj.fill(0.0);
                }
            } else {
                // A row of S_j inside the row space of A_{j+1}.
                let coeff = gaussian(rng, 1, a[j + 1].nrows());
                let r = &coeff * &a[j + 1];
                sj.row_mut(0).copy_from(&r);
            }
        }
    }
    (s, a)
}

/// Criterion 5: block test versus a dense rank oracle.
pub fn check_block_oracle(instances: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut done, mut redrawn, mut disagree, mut singular) = (0, 0, 0, 0);
    while done < instances {
        let (s, a) = block_instance(&mut rng);
        let dense = block_product_matrix(&s, &a);
        let sv = linalg::singular_values(&dense);
        let rel = sv[sv.len() - 1] / sv[0].max(f64::MIN_POSITIVE);
        if (1e-10..=1e-6).contains(&rel) {
            redrawn += 1;
            continue;
        }
        let oracle = rel > 1e-6;
        match block_invertibility(&s, &a, None) {
            Ok(r) => {
                if r.invertible != oracle {
                    disagree += 1;
                }
            }
            Err(_) => disagree += 1,
        }
        singular += usize::from(!oracle);
        done += 1;
    }
    Check::new(
        5,
        "block invertibility oracle",
        disagree == 0,
        format!("{done} instances ({singular} singular), {disagree} disagreements, {redrawn} redrawn from the dead band"),
    )
}

fn random_partition(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut left = n;
    let mut parts = Vec::new();
    while left > 0 {
        let p = rng.random_range(1..=left);
        parts.push(p);
        left -= p;
    }
    parts.sort_unstable_by(|a, b| b.cmp(a));
    parts
}

fn rel_dev(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn staircase_of(mu: &[usize], seed: u64) -> brunovsky::Result<(StaircasePair<f64>, IndexSummary)> {
    let g = generate_feedback_system(mu, 1e3, 10.0, seed)?;
    let st = reduce_to_staircase(&g.system)?;
    let idx = index_summary(&st)?;
    Ok((st, idx))
}

/// Criterion 6: property suites.
pub fn check_properties(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();

    let involution = (0..500).all(|_| {
        let n = rng.random_range(1..=30);
        let p = random_partition(&mut rng, n);
        conjugate_partition(&p).and_then(|c| conjugate_partition(&c)).map(|cc| cc == p).unwrap_or(false)
    });
    if !involution {
        failures.push("conjugate involution");
    }

    let mut worst_inv = 0.0f64;
    for _ in 0..500 {
        let n = rng.random_range(2..=8);
        let m = gaussian(&mut rng, n, n);
        let q = random_orthogonal(&mut rng, n);
        let c = 10f64.powf(rng.random_range(-6.0..6.0)) * if rng.random_bool(0.5) { -1.0 } else { 1.0 };
        let k = kappa_cond(&m);
        let w = omega_cond(&m).unwrap_or(f64::NAN);
        for t in [&m * c, &q * &m, &m * &q] {
            worst_inv = worst_inv.max(rel_dev(kappa_cond(&t), k));
            worst_inv = worst_inv.max(rel_dev(omega_cond(&t).unwrap_or(f64::NAN), w));
        }
    }
    if worst_inv.is_nan() || worst_inv > 1e-10 {
        failures.push("kappa/omega invariance");
    }

    let indices_ok = (0..200).all(|i| {
        let n = rng.random_range(1..=10);
        let mu = random_partition(&mut rng, n);
        generate_system(&mu, 10.0, 1000 + i)
            .and_then(|g| reduce_to_staircase(&g.system))
            .and_then(|st| index_summary(&st))
            .map(|s| s.mu == mu)
            .unwrap_or(false)
    });
    if !indices_ok {
        failures.push("index invariance");
    }

    let shapes: [&[usize]; 4] = [&[5, 5, 3, 2], &[4, 4, 2, 2, 2, 1], &[3, 1], &[6, 3, 3]];
    let mut worst_lin = 0.0f64;
    let mut d_exact = true;
    for i in 0..200u64 {
        let mu = shapes[i as usize % shapes.len()];
        let Ok((st, idx)) = staircase_of(mu, 2000 + i) else {
            failures.push("linearity setup");
            break;
        };
        let p1 = random_parameters(&idx, 3 * i);
        let p2 = random_parameters(&idx, 3 * i + 1);
        let (al, be): (f64, f64) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let cp = |p: &ParameterSet<f64>| {
            let obs = build_observation_matrix(p, &idx).expect("shapes come from idx");
            chain_products(&obs, &st.a, &st.b, &idx)
        };
        let (c1, c2, c12) = (cp(&p1), cp(&p2), cp(&p1.combine(al, &p2, be)));
        for (x, y, z) in [(&c1.t, &c2.t, &c12.t), (&c1.d, &c2.d, &c12.d), (&c1.c_star, &c2.c_star, &c12.c_star)] {
            let scale = al.abs() * x.norm() + be.abs() * y.norm();
            worst_lin = worst_lin.max((z - (x * al + y * be)).norm() / scale.max(f64::MIN_POSITIVE));
        }
        let mut p3 = p1.clone();
        let p4 = random_parameters(&idx, 3 * i + 2);
        for (b, src) in p3.blocks.iter_mut().zip(&p4.blocks) {
            b.free = src.free.clone();
        }
        d_exact &= cp(&p3).d == c1.d;
    }
    if worst_lin.is_nan() || worst_lin > 1e-9 {
        failures.push("linearity of T, D, C*");
    }
    if !d_exact {
        failures.push("D independent of S^f");
    }

    Check::new(
        6,
        "property suites",
        failures.is_empty(),
        if failures.is_empty() {
            format!(
                "involution x500, invariance x500 (worst {worst_inv:.1e}), indices x200, \
                 linearity x200 (worst {worst_lin:.1e}), D exact under S^f perturbation"
            )
        } else {
            format!("failed: {}", failures.join(", "))
        },
    )
}

/// Criterion 7: optimizer never worsens the objective and rarely the conditioning.
pub fn check_optimizer(systems: usize) -> Check {
    let config = BenchConfig::default();
    let with_opt = config.proposed_options();
    let without = ProposedOptions {
        optimize: false,
        ..config.proposed_options()
    };
    let (mut monotone, mut better, mut errors) = (0, 0, 0);
    for i in 0..systems {
        let Ok(case) = make_case(&config, i) else {
            errors += 1;
            continue;
        };
        match (proposed_pipeline(&case.system, &with_opt), proposed_pipeline(&case.system, &without)) {
            (Ok(o), Ok(d)) => {
                let (first, last) = (o.trace[0], *o.trace.last().expect("non-empty trace"));
                monotone += usize::from(last <= first);
                let k = |t: &brunovsky::TransformTriple<f64>| kappa_cond(&t.t) * kappa_cond(&t.g);
                better += usize::from(k(&o.triple) <= k(&d.triple) * (1.0 + 1e-12));
            }
            _ => errors += 1,
        }
    }
    let need = (systems * 95).div_ceil(100);
    Check::new(
        7,
        "optimizer contract",
        errors == 0 && monotone == systems && better >= need,
        format!(
            "objective non-increasing {monotone}/{systems}, kappa(T)kappa(G) no worse than default {better}/{systems} (need >= {need}), {errors} errors"
        ),
    )
}

/// Criterion 8: byte-identical CSV for repeated seeded runs, the second on a
/// single worker thread.
pub fn check_determinism(first: &BenchResult, dir: &Path) -> Check {
    let run = || -> Result<bool, String> {
        let a = dir.join("run_a");
        let b = dir.join("run_b");
        write_all(first, &a).map_err(|e| e.to_string())?;
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| e.to_string())?;
        let second = pool
            .install(|| run_benchmark(&first.summary.config))
            .map_err(|e| e.to_string())?;
        write_all(&second, &b).map_err(|e| e.to_string())?;
        let read = |d: &Path| std::fs::read(d.join(CSV_FILE)).map_err(|e| e.to_string());
        Ok(read(&a)? == read(&b)?)
    };
    let (passed, detail) = match run() {
        Ok(same) => (same, format!("CSV identical across a parallel and a single-threaded run: {same}")),
        Err(e) => (false, format!("error: {e}")),
    };
    Check::new(8, "determinism", passed, detail)
}

/// Runs the default benchmark and times it.
pub fn timed_default_bench() -> Result<(BenchResult, Duration), crate::BenchError> {
    let start = Instant::now();
    let result = run_benchmark(&BenchConfig::default())?;
    Ok((result, start.elapsed()))
}
