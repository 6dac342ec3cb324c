//! Brunovsky transformation triples and their verification.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::conditioning;
use crate::linalg;
use crate::scalar::{Real, Ring};
use crate::types::brunovsky_target;

/// Residuals and conditioning of a triple against a given pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `||T (A + B F) T^{-1} - A_b||_F`
    pub residual_a: f64,
    /// `||T B G - B_b||_F`
    pub residual_b: f64,
    /// `||(T (A + B F) T^{-1})^{mu_1}||_F`
    pub nilpotency: f64,
    pub kappa_t: f64,
    pub kappa_g: f64,
    pub omega_t: f64,
    pub omega_g: f64,
}

/// `(T, F, G)` with `T (A + B F) T^{-1} = A_b` and `T B G = B_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformTriple<T: Ring> {
    pub t: DMatrix<T>,
    pub f: DMatrix<T>,
    pub g: DMatrix<T>,
    /// Controllability indices of the target form, descending.
    pub mu: Vec<usize>,
    pub diagnostics: Option<Diagnostics>,
}

impl<T: Ring> TransformTriple<T> {
    pub fn new(t: DMatrix<T>, f: DMatrix<T>, g: DMatrix<T>, mu: Vec<usize>) -> Self {
        Self {
            t,
            f,
            g,
            mu,
            diagnostics: None,
        }
    }
}

impl<T: Real> TransformTriple<T> {
    /// Recomputes diagnostics of this triple applied to `(a, b)`.
    pub fn verified(mut self, a: &DMatrix<T>, b: &DMatrix<T>) -> Self {
        self.diagnostics = Some(diagnostics(a, b, &self));
        self
    }
}

/// Computed pair `(T (A + B F) T^{-1}, T B G)`. `None` if `T` cannot be factored.
pub fn apply_triple<T: Real>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    triple: &TransformTriple<T>,
) -> Option<(DMatrix<T>, DMatrix<T>)> {
    let closed = a + b * &triple.f;
    let a_hat = linalg::solve_right(&(&triple.t * closed), &triple.t)?;
    let b_hat = &triple.t * b * &triple.g;
    Some((a_hat, b_hat))
}

/// Residual and conditioning diagnostics. Non-finite values signal failure.
pub fn diagnostics<T: Real>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    triple: &TransformTriple<T>,
) -> Diagnostics {
    let target = brunovsky_target::<T>(&triple.mu).ok();
    let (residual_a, residual_b, nilpotency) = match (apply_triple(a, b, triple), target) {
        (Some((a_hat, b_hat)), Some(tg)) if a_hat.shape() == tg.a.shape() && b_hat.shape() == tg.b.shape() => {
            let nil = linalg::matrix_power(&a_hat, triple.mu[0]);
            (
                (a_hat - tg.a).norm().as_f64(),
                (b_hat - tg.b).norm().as_f64(),
                nil.norm().as_f64(),
            )
        }
        _ => (f64::INFINITY, f64::INFINITY, f64::INFINITY),
    };
    Diagnostics {
        residual_a,
        residual_b,
        nilpotency,
        kappa_t: conditioning::kappa_cond(&triple.t).as_f64(),
        kappa_g: conditioning::kappa_cond(&triple.g).as_f64(),
        omega_t: conditioning::omega_cond(&triple.t)
            .map(Real::as_f64)
            .unwrap_or(f64::INFINITY),
        omega_g: conditioning::omega_cond(&triple.g)
            .map(Real::as_f64)
            .unwrap_or(f64::INFINITY),
    }
}
