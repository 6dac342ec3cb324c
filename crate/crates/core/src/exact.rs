//! Exact rational arithmetic for small fixtures.

use nalgebra::DMatrix;
use num_traits::{FromPrimitive, Zero};

use crate::scalar::Field;

/// Arbitrary-precision rational scalar.
pub type Rational = num_rational::BigRational;

pub type RationalMatrix = DMatrix<Rational>;

/// Exact rational image of a finite `f64` matrix. `None` on non-finite entries.
pub fn to_rational(m: &DMatrix<f64>) -> Option<RationalMatrix> {
    let mut out = DMatrix::from_element(m.nrows(), m.ncols(), Rational::zero());
    for (o, v) in out.iter_mut().zip(m.iter()) {
        *o = Rational::from_f64(*v)?;
    }
    Some(out)
}

/// Integer matrix from row-major entries.
pub fn integer_matrix(rows: usize, cols: usize, entries: &[i64]) -> RationalMatrix {
    DMatrix::from_row_iterator(
        rows,
        cols,
        entries.iter().map(|&v| Rational::from_integer(v.into())),
    )
}

/// Gauss-Jordan inverse over an exact field. `None` if singular or not square.
pub fn inverse<T: Field>(m: &DMatrix<T>) -> Option<DMatrix<T>> {
    let n = m.nrows();
    if m.ncols() != n {
        return None;
    }
    let mut a = m.clone();
    let mut inv = DMatrix::<T>::identity(n, n);
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[(r, col)].is_zero())?;
        a.swap_rows(col, pivot);
        inv.swap_rows(col, pivot);
        let p = a[(col, col)].clone();
        for c in 0..n {
            a[(col, c)] /= p.clone();
            inv[(col, c)] /= p.clone();
        }
        for r in 0..n {
            if r == col || a[(r, col)].is_zero() {
                continue;
            }
            let f = a[(r, col)].clone();
            for c in 0..n {
                let da = a[(col, c)].clone() * f.clone();
                a[(r, c)] -= da;
                let di = inv[(col, c)].clone() * f.clone();
                inv[(r, c)] -= di;
            }
        }
    }
    Some(inv)
}

/// `X` with `M X = R`, exactly.
pub fn solve<T: Field>(m: &DMatrix<T>, rhs: &DMatrix<T>) -> Option<DMatrix<T>> {
    Some(inverse(m)? * rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let m = integer_matrix(3, 3, &[0, 2, 1, 1, 0, 0, 3, 1, 4]);
        let inv = inverse(&m).unwrap();
        assert_eq!(&m * &inv, DMatrix::identity(3, 3));
        assert_eq!(inv[(0, 1)], Rational::from_integer(1.into()));
    }

    #[test]
    fn singular_has_no_inverse() {
        let m = integer_matrix(2, 2, &[1, 2, 2, 4]);
        assert!(inverse(&m).is_none());
    }

    #[test]
    fn float_conversion_is_exact() {
        let r = to_rational(&DMatrix::from_element(1, 1, 0.1)).unwrap();
        assert_ne!(r[(0, 0)], Rational::new(1.into(), 10.into()));
        assert!(to_rational(&DMatrix::from_element(1, 1, f64::NAN)).is_none());
    }
}
