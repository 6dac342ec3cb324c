//! Seeded random systems with known Brunovsky transformation.

use brunovsky::linalg;
use brunovsky::{brunovsky_target, IndexSummary, LinearSystem, ParameterSet, Result, TransformTriple};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Standard normal `rows x cols` matrix.
pub fn gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian, signs fixed by `R`).
pub fn random_orthogonal(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let qr = gaussian(rng, n, n).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `n` singular values, log-uniform in `[c^{-1/2}, c^{1/2}]` with both
/// endpoints attained, sorted descending.
pub fn log_uniform_spectrum(rng: &mut impl Rng, n: usize, cond: f64) -> Vec<f64> {
    let half = 0.5 * cond.ln();
    let mut s: Vec<f64> = (0..n)
        .map(|i| match i {
            0 => half,
            _ if i + 1 == n => -half,
            _ => rng.random_range(-half..=half),
        })
        .map(f64::exp)
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// A generated system together with the triple that produced it.
#[derive(Debug, Clone)]
pub struct GeneratedSystem {
    pub system: LinearSystem<f64>,
    pub truth: TransformTriple<f64>,
}

/// How a benchmark draw is made ill-conditioned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    /// Scaled random feedback on the Brunovsky pair, `T0` moderately
    /// conditioned; the sweep value targets `kappa(C)`.
    Feedback,
    /// Ill-conditioned `T0`; the sweep value is `kappa(T0)`.
    State,
}

impl std::str::FromStr for GeneratorKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "feedback" => Ok(Self::Feedback),
            "state" => Ok(Self::State),
            _ => Err(format!("unknown generator `{s}` (expected feedback or state)")),
        }
    }
}

struct Draw {
    t0: DMatrix<f64>,
    t0_inv: DMatrix<f64>,
    f0: DMatrix<f64>,
    g0: DMatrix<f64>,
    g0_inv: DMatrix<f64>,
}

fn draw(rng: &mut ChaCha8Rng, n: usize, m: usize, cond: f64) -> Draw {
    let u1 = random_orthogonal(rng, n);
    let u2 = random_orthogonal(rng, n);
    let sigma = log_uniform_spectrum(rng, n, cond.max(1.0));
    let inv: Vec<f64> = sigma.iter().map(|s| 1.0 / s).collect();
    let t0 = &u1 * DMatrix::from_diagonal(&sigma.into()) * u2.transpose();
    let t0_inv = &u2 * DMatrix::from_diagonal(&inv.into()) * u1.transpose();
    let f0 = gaussian(rng, m, n);
    let q = random_orthogonal(rng, m);
    let d: Vec<f64> = (0..m).map(|_| rng.random_range(0.5..=2.0)).collect();
    let d_inv: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
    let g0 = &q * DMatrix::from_diagonal(&d.into());
    let g0_inv = DMatrix::from_diagonal(&d_inv.into()) * q.transpose();
    Draw { t0, t0_inv, f0, g0, g0_inv }
}

/// Random pair with controllability indices `mu` and `kappa(T0) = cond`.
///
/// `A = T0^{-1} A_b T0 - B F0`, `B = T0^{-1} B_b G0^{-1}` with
/// `T0 = U1 diag(sigma) U2^T`, `F0` standard normal and `G0 = Q diag(d)`,
/// `d` uniform in `[0.5, 2]`.
pub fn generate_system(mu: &[usize], cond: f64, seed: u64) -> Result<GeneratedSystem> {
    let target = brunovsky_target::<f64>(mu)?;
    let (n, m) = (target.a.nrows(), target.b.ncols());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = draw(&mut rng, n, m, cond);
    let b = &d.t0_inv * &target.b * &d.g0_inv;
    let a = &d.t0_inv * &target.a * &d.t0 - &b * &d.f0;
    let system = LinearSystem::new(a, b)?;
    let truth = TransformTriple::new(d.t0, d.f0, d.g0, mu.to_vec()).verified(system.a(), system.b());
    Ok(GeneratedSystem { system, truth })
}

/// Feedback scales searched by [`generate_feedback_system`].
pub const FEEDBACK_SCALE_RANGE: (f64, f64) = (1e-3, 1e3);

/// Random pair with controllability indices `mu` whose controllability
/// matrix has condition number close to `ctrb_cond`.
///
/// `A = T0^{-1} (A_b + s B_b F0) T0`, `B = T0^{-1} B_b G0^{-1}` with
/// `kappa(T0) = state_cond` and the same draws as [`generate_system`].
/// The scale `s` is found by bisection on `log kappa(C)` within
/// [`FEEDBACK_SCALE_RANGE`]; targets outside the reachable range clamp.
pub fn generate_feedback_system(
    mu: &[usize],
    ctrb_cond: f64,
    state_cond: f64,
    seed: u64,
) -> Result<GeneratedSystem> {
    let target = brunovsky_target::<f64>(mu)?;
    let (n, m) = (target.a.nrows(), target.b.ncols());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = draw(&mut rng, n, m, state_cond);
    let b = &d.t0_inv * &target.b * &d.g0_inv;
    let build = |s: f64| -> Result<LinearSystem<f64>> {
        let a = &d.t0_inv * (&target.a + &target.b * (&d.f0 * s)) * &d.t0;
        LinearSystem::new(a, b.clone())
    };
    let goal = ctrb_cond.max(1.0).ln();
    let log_kappa = |sys: &LinearSystem<f64>| {
        let k = ctrb_condition(sys);
        if k.is_finite() { k.ln() } else { f64::INFINITY }
    };
    let (mut lo, mut hi) = (FEEDBACK_SCALE_RANGE.0.ln(), FEEDBACK_SCALE_RANGE.1.ln());
    let mut scale = lo.exp();
    if log_kappa(&build(scale)?) < goal {
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let k = log_kappa(&build(mid.exp())?);
            if (k - goal).abs() < 1e-3 {
                lo = mid;
                break;
            }
            if k < goal {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        scale = lo.exp();
    }
    let system = build(scale)?;
    let f = -(&d.g0 * (&d.f0 * scale) * &d.t0);
    let truth = TransformTriple::new(d.t0, f, d.g0, mu.to_vec()).verified(system.a(), system.b());
    Ok(GeneratedSystem { system, truth })
}

/// Dispatches on the generator kind; `cond` is the sweep value.
pub fn generate(kind: GeneratorKind, mu: &[usize], cond: f64, state_cond: f64, seed: u64) -> Result<GeneratedSystem> {
    match kind {
        GeneratorKind::Feedback => generate_feedback_system(mu, cond, state_cond, seed),
        GeneratorKind::State => generate_system(mu, cond, seed),
    }
}

/// Random parameters whose blocks satisfy the rank constraints with
/// probability one: entries standard normal.
pub fn random_parameters(idx: &IndexSummary, seed: u64) -> ParameterSet<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..idx.parameter_count()).map(|_| StandardNormal.sample(&mut rng)).collect();
    ParameterSet::from_vec(idx, &values).expect("length matches parameter count")
}

/// `kappa` of the controllability matrix `[B, AB, ..., A^{n-1}B]`: largest
/// over `n`-th singular value.
pub fn ctrb_condition(sys: &LinearSystem<f64>) -> f64 {
    let sv = linalg::singular_values(&sys.controllability_matrix());
    match (sv.first(), sv.get(sys.n() - 1)) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}
