//! Scalar abstraction shared by every numerical routine in the crate.

use num_traits::{FloatConst, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display, LowerExp};

/// Real floating-point scalar (`f32` or `f64`).
///
/// Combines the nalgebra field traits needed by the dense factorizations
/// with the num-traits conversions used by assembly and quadrature.
pub trait Real:
    nalgebra::RealField
    + Copy
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + std::iter::Sum
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Machine epsilon.
    fn eps() -> Self;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `C ← A B` with `A` of size `m × k`, `B` of size `k × n` and explicit
    /// row/column strides for all three operands.
    fn gemm(dims: (usize, usize, usize), a: Strided<'_, Self>, b: Strided<'_, Self>, c: StridedMut<'_, Self>);
}

/// Read-only strided matrix view: `(data, row stride, column stride)`.
pub type Strided<'a, T> = (&'a [T], usize, usize);
/// Writable strided matrix view.
pub type StridedMut<'a, T> = (&'a mut [T], usize, usize);

fn span(rows: usize, cols: usize, rs: usize, cs: usize) -> usize {
    if rows == 0 || cols == 0 {
        0
    } else {
        (rows - 1) * rs + (cols - 1) * cs + 1
    }
}

macro_rules! impl_real {
    ($t:ty, $gemm:path) => {
        impl Real for $t {
            #[inline]
            fn eps() -> Self {
                <$t>::EPSILON
            }

            fn gemm((m, k, n): (usize, usize, usize), a: Strided<'_, $t>, b: Strided<'_, $t>, c: StridedMut<'_, $t>) {
                assert!(span(m, k, a.1, a.2) <= a.0.len(), "gemm: A view out of bounds");
                assert!(span(k, n, b.1, b.2) <= b.0.len(), "gemm: B view out of bounds");
                assert!(span(m, n, c.1, c.2) <= c.0.len(), "gemm: C view out of bounds");
                if m == 0 || n == 0 {
                    return;
                }
                // SAFETY: every index touched lies inside the slices checked above,
                // and `c` is uniquely borrowed.
                unsafe {
                    $gemm(
                        m,
                        k,
                        n,
                        1.0,
                        a.0.as_ptr(),
                        a.1 as isize,
                        a.2 as isize,
                        b.0.as_ptr(),
                        b.1 as isize,
                        b.2 as isize,
                        0.0,
                        c.0.as_mut_ptr(),
                        c.1 as isize,
                        c.2 as isize,
                    );
                }
            }
        }
    };
}

impl_real!(f32, matrixmultiply::sgemm);
impl_real!(f64, matrixmultiply::dgemm);
