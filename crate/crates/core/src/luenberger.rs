//! Classical route: modified controllability matrix, Luenberger's state
//! transformation to controllable canonical form, then last-row elimination.
//!
//! Matrix powers act on the raw `A`; no deadbeat pre-processing is applied.

use nalgebra::DMatrix;

use crate::conditioning::kappa_cond;
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;
use crate::transform::TransformTriple;
use crate::types::LinearSystem;

/// `C_bar = [b_1, A b_1, ..., A^{mu_1 - 1} b_1, ..., b_m, ..., A^{mu_m - 1} b_m]`
/// with `mu` in input-column order.
#[derive(Debug, Clone, PartialEq)]
pub struct ModifiedCtrb<T: Real> {
    pub matrix: DMatrix<T>,
    pub mu: Vec<usize>,
}

/// Selects the first `n` linearly independent columns of
/// `[B, AB, ..., A^{n-1} B]`, scanning left to right.
///
/// Independence is judged on normalized columns against an orthonormal basis
/// of the columns kept so far (two passes of Gram-Schmidt), with threshold
/// `100 n ulp`.
pub fn modified_ctrb_matrix<T: Real>(sys: &LinearSystem<T>) -> Result<ModifiedCtrb<T>> {
    let (n, m) = (sys.n(), sys.m());
    let tol = T::lit(100.0 * n as f64) * T::ulp();
    let mut basis: Vec<nalgebra::DVector<T>> = Vec::with_capacity(n);
    let mut kept: Vec<Vec<nalgebra::DVector<T>>> = vec![Vec::new(); m];
    let mut alive = vec![true; m];
    let mut current: Vec<nalgebra::DVector<T>> =
        (0..m).map(|i| sys.b().column(i).clone_owned()).collect();

    'scan: for power in 0..n {
        for i in 0..m {
            if basis.len() == n {
                break 'scan;
            }
            if !alive[i] {
                continue;
            }
            if power > 0 {
                current[i] = sys.a() * &current[i];
            }
            let v = &current[i];
            let norm = v.norm();
            let mut accepted = false;
            if norm > T::zero() && norm.is_finite() {
                let mut w = v / norm;
                for _ in 0..2 {
                    for q in &basis {
                        let c = q.dot(&w);
                        w.axpy(-c, q, T::one());
                    }
                }
                let r = w.norm();
                if r > tol {
                    basis.push(w / r);
                    accepted = true;
                }
            }
            if accepted {
                kept[i].push(v.clone());
            } else {
                // Once A^k b_i depends on earlier columns, so do all higher powers.
                alive[i] = false;
            }
        }
    }
    if basis.len() < n {
        return Err(Error::Uncontrollable {
            stage: n,
            achieved_rank: basis.len(),
            n,
        });
    }
    let mut matrix = DMatrix::<T>::zeros(n, n);
    let mut col = 0;
    for chain in &kept {
        for v in chain {
            matrix.set_column(col, v);
            col += 1;
        }
    }
    Ok(ModifiedCtrb {
        matrix,
        mu: kept.iter().map(Vec::len).collect(),
    })
}

/// `T_L = col(Q_k)`, `Q_k = col(q_k A^i, i < mu_k)`, where `q_k` is row
/// `sigma_k = mu_1 + ... + mu_k` of `C_bar^{-1}` (obtained by a pivoted
/// solve of `C_bar^T x = e_{sigma_k}`).
pub fn luenberger_t<T: Real>(sys: &LinearSystem<T>, ctrb: &ModifiedCtrb<T>) -> Result<DMatrix<T>> {
    let n = sys.n();
    let ct = ctrb.matrix.transpose();
    let mut t = DMatrix::<T>::zeros(n, n);
    let mut sigma = 0;
    let mut row = 0;
    for &len in &ctrb.mu {
        sigma += len;
        let mut e = DMatrix::<T>::zeros(n, 1);
        e[(sigma - 1, 0)] = T::one();
        let q = linalg::solve(&ct, &e).ok_or(Error::SingularInput)?.transpose();
        let mut r = q;
        for i in 0..len {
            if i > 0 {
                r = &r * sys.a();
            }
            t.row_mut(row).copy_from(&r.row(0));
            row += 1;
        }
    }
    Ok(t)
}

/// Largest deviation of `(A_c, B_c)` from the controllable canonical
/// template (chains in the order of `mu`).
pub fn canonical_template_residual<T: Real>(a_c: &DMatrix<T>, b_c: &DMatrix<T>, mu: &[usize]) -> T {
    let mut worst = T::zero();
    let mut off = 0;
    for (i, &len) in mu.iter().enumerate() {
        for r in off..off + len - 1 {
            for c in 0..a_c.ncols() {
                let want = if c == r + 1 { T::one() } else { T::zero() };
                worst = worst.max((a_c[(r, c)] - want).abs());
            }
            for c in 0..b_c.ncols() {
                worst = worst.max(b_c[(r, c)].abs());
            }
        }
        let last = off + len - 1;
        for c in 0..=i {
            let want = if c == i { T::one() } else { T::zero() };
            worst = worst.max((b_c[(last, c)] - want).abs());
        }
        off += len;
    }
    worst
}

fn last_rows<T: Real>(m: &DMatrix<T>, mu: &[usize]) -> DMatrix<T> {
    let mut out = DMatrix::<T>::zeros(mu.len(), m.ncols());
    let mut off = 0;
    for (i, &len) in mu.iter().enumerate() {
        off += len;
        out.row_mut(i).copy_from(&m.row(off - 1));
    }
    out
}

fn eliminate_last_rows<T: Real>(
    a_c: &DMatrix<T>,
    b_c: &DMatrix<T>,
    mu: &[usize],
) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let alpha = last_rows(a_c, mu);
    let beta = last_rows(b_c, mu);
    let g = linalg::inverse(&beta).ok_or(Error::SingularInput)?;
    let f = -(&g * alpha);
    Ok((f, g))
}

/// `(F_c, G_c)` with `G_c = beta^{-1}` (unit upper triangular for an exact
/// template) and `F_c = -G_c alpha`, where `alpha`, `beta` are the last rows
/// of the chains in `A_c`, `B_c`.
///
/// Fails with [`Error::TemplateViolation`] if the pair deviates from the
/// template by more than `tol` (default `1e-8 * max(1, ||A_c||_F)`).
pub fn canonical_to_brunovsky<T: Real>(
    a_c: &DMatrix<T>,
    b_c: &DMatrix<T>,
    mu: &[usize],
    tol: Option<T>,
) -> Result<(DMatrix<T>, DMatrix<T>)> {
    if mu.iter().sum::<usize>() != a_c.nrows() || mu.len() != b_c.ncols() || mu.contains(&0) {
        return Err(Error::ShapeMismatch(format!(
            "indices {mu:?} do not match a {}x{} pair with {} inputs",
            a_c.nrows(),
            a_c.ncols(),
            b_c.ncols()
        )));
    }
    let tol = tol.unwrap_or_else(|| T::lit(1e-8) * T::one().max(a_c.norm()));
    let residual = canonical_template_residual(a_c, b_c, mu);
    if !residual.is_finite() || residual > tol {
        return Err(Error::TemplateViolation {
            residual: residual.as_f64(),
        });
    }
    eliminate_last_rows(a_c, b_c, mu)
}

/// Baseline output with the conditioning data the comparison needs.
#[derive(Debug, Clone)]
pub struct LuenbergerOutcome<T: Real> {
    pub triple: TransformTriple<T>,
    /// Indices in input-column order as detected by the column scan.
    pub mu_input_order: Vec<usize>,
    pub kappa_ctrb_bar: f64,
    /// Deviation of the computed `(A_c, B_c)` from the canonical template.
    pub template_residual: f64,
}

/// Full classical route. Chains are stably re-sorted by decreasing length;
/// the permutation is folded into `T` and `G`.
pub fn luenberger_pipeline<T: Real>(sys: &LinearSystem<T>) -> Result<LuenbergerOutcome<T>> {
    let (n, m) = (sys.n(), sys.m());
    let ctrb = modified_ctrb_matrix(sys)?;
    let t_l = luenberger_t(sys, &ctrb)?;
    let a_c = linalg::solve_right(&(&t_l * sys.a()), &t_l).ok_or(Error::SingularInput)?;
    let b_c = &t_l * sys.b();
    let template_residual = canonical_template_residual(&a_c, &b_c, &ctrb.mu).as_f64();
    let (f_c, g_c) = eliminate_last_rows(&a_c, &b_c, &ctrb.mu)?;

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| ctrb.mu[y].cmp(&ctrb.mu[x]));
    let starts: Vec<usize> = ctrb
        .mu
        .iter()
        .scan(0, |acc, &len| {
            let s = *acc;
            *acc += len;
            Some(s)
        })
        .collect();
    let mut t = DMatrix::<T>::zeros(n, n);
    let mut perm_in = DMatrix::<T>::zeros(m, m);
    let mut row = 0;
    for (new, &old) in order.iter().enumerate() {
        for r in 0..ctrb.mu[old] {
            t.row_mut(row).copy_from(&t_l.row(starts[old] + r));
            row += 1;
        }
        perm_in[(old, new)] = T::one();
    }
    let mu: Vec<usize> = order.iter().map(|&i| ctrb.mu[i]).collect();
    let triple = TransformTriple::new(t, f_c * &t_l, g_c * perm_in, mu).verified(sys.a(), sys.b());
    Ok(LuenbergerOutcome {
        triple,
        mu_input_order: ctrb.mu.clone(),
        kappa_ctrb_bar: kappa_cond(&ctrb.matrix).as_f64(),
        template_residual,
    })
}
