//! Condition numbers and minimization of `log omega(T) + log omega(D)` over
//! the parameter set.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::parametrization::{
    build_observation_matrix, build_transformations, chain_products, check_rank_constraints,
    ParameterSet,
};
use crate::partition::IndexSummary;
use crate::scalar::Real;
use crate::staircase::StaircasePair;
use crate::transform::TransformTriple;

/// Singular-value summary of a square matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub kappa: f64,
    pub omega: f64,
    pub singular_values: Vec<f64>,
}

impl ConditionReport {
    pub fn of<T: Real>(m: &DMatrix<T>) -> Self {
        Self {
            kappa: kappa_cond(m).as_f64(),
            omega: omega_cond(m).map(Real::as_f64).unwrap_or(f64::INFINITY),
            singular_values: linalg::singular_values(m).into_iter().map(Real::as_f64).collect(),
        }
    }
}

/// `sigma_1 / sigma_n`; `+inf` when `sigma_n <= ulp * sigma_1`.
pub fn kappa_cond<T: Real>(m: &DMatrix<T>) -> T {
    let sv = linalg::singular_values(m);
    let (Some(&smax), Some(&smin)) = (sv.first(), sv.last()) else {
        return T::one();
    };
    if !smax.is_finite() || smin <= T::ulp() * smax {
        return T::lit(f64::INFINITY);
    }
    smax / smin
}

fn log_omega_from_sv<T: Real>(sv: &[T]) -> Result<T> {
    let (Some(&smax), Some(&smin)) = (sv.first(), sv.last()) else {
        return Ok(T::zero());
    };
    if !smax.is_finite() || smin <= T::ulp() * smax {
        return Err(Error::SingularInput);
    }
    // Scale by sigma_max before summing; the ratio is scale free.
    let count = T::lit(sv.len() as f64);
    let mut sum = T::zero();
    let mut log_sum = T::zero();
    for &s in sv {
        let r = s / smax;
        sum += r;
        log_sum += r.ln();
    }
    let log_omega = (sum / count).ln() - log_sum / count;
    Ok(log_omega.max(T::zero()))
}

/// Arithmetic over geometric mean of the singular values, evaluated in the
/// log domain.
pub fn omega_cond<T: Real>(m: &DMatrix<T>) -> Result<T> {
    log_omega_from_sv(&linalg::singular_values(m)).map(|l| l.exp())
}

/// Tunables of the condition-number optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerSettings {
    pub max_iters: usize,
    /// Stop when the infinity norm of the gradient falls below this.
    pub grad_tol: f64,
    /// Objective value used where `T` or `D` is numerically singular.
    pub penalty_value: f64,
    /// Multiplier on the finite-difference step `sqrt(ulp) * (1 + |x_i|)`.
    pub h_scale: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo_c1: f64,
    /// Maximum step halvings per line search.
    pub max_halvings: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            max_iters: 200,
            grad_tol: 1e-6,
            penalty_value: 1e12,
            h_scale: 1.0,
            armijo_c1: 1e-4,
            max_halvings: 40,
        }
    }
}

/// `log omega(T) + log omega(D)` for the given parameters, or the penalty
/// value when either matrix is numerically singular.
pub fn objective<T: Real>(
    params: &ParameterSet<T>,
    pair: &StaircasePair<T>,
    idx: &IndexSummary,
    settings: &OptimizerSettings,
) -> T {
    let penalty = T::lit(settings.penalty_value);
    let Ok(obs) = build_observation_matrix(params, idx) else {
        return penalty;
    };
    let prod = chain_products(&obs, &pair.a, &pair.b, idx);
    let mut total = T::zero();
    for mat in [&prod.t, &prod.d] {
        let sv = linalg::singular_values(mat);
        let smax = sv[0];
        if !smax.is_finite() || sv[sv.len() - 1] <= linalg::invertibility_threshold(smax, mat.nrows()) {
            return penalty;
        }
        match log_omega_from_sv(&sv) {
            Ok(v) => total += v,
            Err(_) => return penalty,
        }
    }
    total
}

/// Objective as a function of the flattened parameter vector.
pub struct Objective<'a, T: Real> {
    pub pair: &'a StaircasePair<T>,
    pub idx: &'a IndexSummary,
    pub settings: OptimizerSettings,
}

impl<T: Real> Objective<'_, T> {
    pub fn value(&self, x: &[T]) -> T {
        match ParameterSet::from_vec(self.idx, x) {
            Ok(p) => objective(&p, self.pair, self.idx, &self.settings),
            Err(_) => T::lit(self.settings.penalty_value),
        }
    }

    fn step(&self, xi: T) -> T {
        T::lit(self.settings.h_scale) * T::ulp().sqrt() * (T::one() + xi.abs())
    }

    /// Central-difference gradient.
    pub fn gradient(&self, x: &[T]) -> Vec<T> {
        let mut work = x.to_vec();
        (0..x.len())
            .map(|i| {
                let h = self.step(x[i]);
                work[i] = x[i] + h;
                let fp = self.value(&work);
                work[i] = x[i] - h;
                let fm = self.value(&work);
                work[i] = x[i];
                (fp - fm) / (h + h)
            })
            .collect()
    }

    /// Forward-difference gradient, used to cross-check [`Objective::gradient`].
    pub fn forward_gradient(&self, x: &[T]) -> Vec<T> {
        let f0 = self.value(x);
        let mut work = x.to_vec();
        (0..x.len())
            .map(|i| {
                let h = self.step(x[i]);
                work[i] = x[i] + h;
                let fp = self.value(&work);
                work[i] = x[i];
                (fp - f0) / h
            })
            .collect()
    }
}

/// Result of [`minimize_condition`].
#[derive(Debug, Clone)]
pub struct MinimizeOutcome<T: Real> {
    pub params: ParameterSet<T>,
    pub triple: TransformTriple<T>,
    /// Objective at the start and after every accepted step.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Real> MinimizeOutcome<T> {
    pub fn initial_objective(&self) -> f64 {
        self.trace[0]
    }

    pub fn final_objective(&self) -> f64 {
        *self.trace.last().expect("trace holds the initial value")
    }
}

fn inf_norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

/// Quasi-Newton (BFGS, inverse-Hessian form) descent with Armijo
/// backtracking and finite-difference gradients.
///
/// Only steps that decrease the objective are accepted, so the returned
/// parameters never score worse than `init`. If the best iterate fails the
/// rank constraints or its build fails, `init` is returned instead.
pub fn minimize_condition<T: Real>(
    pair: &StaircasePair<T>,
    idx: &IndexSummary,
    init: &ParameterSet<T>,
    settings: &OptimizerSettings,
) -> Result<MinimizeOutcome<T>> {
    init.check_shapes(idx)?;
    let obj = Objective {
        pair,
        idx,
        settings: *settings,
    };
    let dim = init.len();
    let mut x = DVector::from_vec(init.to_vec());
    let mut fx = obj.value(x.as_slice());
    let mut grad = DVector::from_vec(obj.gradient(x.as_slice()));
    let mut h_inv = DMatrix::<T>::identity(dim, dim);
    let mut scaled = false;
    let mut trace = vec![fx.as_f64()];
    let mut iterations = 0;
    let mut converged = dim == 0;
    let c1 = T::lit(settings.armijo_c1);
    let half = T::lit(0.5);

    while !converged && iterations < settings.max_iters {
        if inf_norm(grad.as_slice()) <= T::lit(settings.grad_tol) {
            converged = true;
            break;
        }
        iterations += 1;
        let mut dir = -(&h_inv * &grad);
        let mut slope = grad.dot(&dir);
        if slope >= T::zero() || !slope.is_finite() {
            h_inv = DMatrix::identity(dim, dim);
            dir = -grad.clone();
            slope = grad.dot(&dir);
        }

        let mut t = T::one();
        let mut accepted = None;
        for _ in 0..=settings.max_halvings {
            let cand = &x + &dir * t;
            let fc = obj.value(cand.as_slice());
            if fc.is_finite() && fc <= fx + c1 * t * slope && fc < fx {
                accepted = Some((cand, fc));
                break;
            }
            t *= half;
        }
        let Some((x_new, f_new)) = accepted else {
            break;
        };

        let g_new = DVector::from_vec(obj.gradient(x_new.as_slice()));
        let s = &x_new - &x;
        let y = &g_new - &grad;
        let sy = s.dot(&y);
        if sy > T::lit(1e-12) * s.norm() * y.norm() {
            if !scaled {
                h_inv = DMatrix::identity(dim, dim) * (sy / y.dot(&y));
                scaled = true;
            }
            let rho = T::one() / sy;
            let hy = &h_inv * &y;
            let yhy = y.dot(&hy);
            // H+ = H - rho (H y s^T + s y^T H) + (rho^2 y^T H y + rho) s s^T
            h_inv.ger(-rho, &hy, &s, T::one());
            h_inv.ger(-rho, &s, &hy, T::one());
            h_inv.ger(rho * rho * yhy + rho, &s, &s, T::one());
        }
        x = x_new;
        fx = f_new;
        grad = g_new;
        trace.push(fx.as_f64());
    }

    let mut params = ParameterSet::from_vec(idx, x.as_slice())?;
    let mut built = None;
    if check_rank_constraints(&params, pair, idx)?.satisfied() {
        built = build_transformations(&params, pair, idx).ok();
    }
    let triple = match built {
        Some(t) => t,
        None => {
            params = init.clone();
            trace.push(trace[0]);
            build_transformations(init, pair, idx)?
        }
    };
    Ok(MinimizeOutcome {
        params,
        triple,
        trace,
        iterations,
        converged,
    })
}
