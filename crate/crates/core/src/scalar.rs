//! Scalar abstractions.
//!
//! Structural constructions (Brunovsky targets, observation matrices, the
//! chain products behind `T`, `D` and `C*`, transform composition) only need
//! ring operations and are generic over [`Ring`], so they also run on exact
//! rationals. Everything that needs square roots, SVDs or pivoted solves is
//! generic over [`Real`] (`f32` or `f64`).

use nalgebra::{ClosedAddAssign, ClosedDivAssign, ClosedMulAssign, ClosedSubAssign};
use nalgebra::{DMatrix, RealField, Scalar};
use num_traits::{FromPrimitive, One, ToPrimitive, Zero};
use std::ops::Neg;

/// Commutative ring scalar usable in dense `nalgebra` products.
pub trait Ring:
    Scalar + Zero + One + ClosedAddAssign + ClosedSubAssign + ClosedMulAssign + Neg<Output = Self>
{
}

impl<T> Ring for T where
    T: Scalar + Zero + One + ClosedAddAssign + ClosedSubAssign + ClosedMulAssign + Neg<Output = Self>
{
}

/// Ring with exact division (rationals, floats).
pub trait Field: Ring + ClosedDivAssign {}

impl<T> Field for T where T: Ring + ClosedDivAssign {}

/// Floating-point scalar: `f32` or `f64`.
pub trait Real: Ring + RealField + Copy + FromPrimitive + ToPrimitive {
    /// Machine epsilon (unit roundoff times two).
    fn ulp() -> Self;

    /// Converts an `f64` literal. Panics only for values the type cannot hold.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Thin SVD of a non-empty matrix: singular values (in the backend's
    /// order) and, if requested, the matching left singular vectors.
    fn thin_svd(m: &DMatrix<Self>, want_u: bool) -> Option<(Vec<Self>, Option<DMatrix<Self>>)>;
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            fn ulp() -> Self {
                <$t>::EPSILON
            }

            fn thin_svd(m: &DMatrix<Self>, want_u: bool) -> Option<(Vec<Self>, Option<DMatrix<Self>>)> {
                let fm = faer::Mat::<$t>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
                if want_u {
                    let svd = fm.thin_svd().ok()?;
                    let s = svd.S().column_vector();
                    let sv = (0..s.nrows()).map(|i| s[i]).collect();
                    let u = svd.U();
                    let um = DMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)]);
                    Some((sv, Some(um)))
                } else {
                    let sv = fm.singular_values().ok()?;
                    Some((sv, None))
                }
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);
