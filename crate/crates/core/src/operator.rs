//! Square linear maps consumed by the Krylov solver.

use crate::matrix::DenseMatrix;
use crate::scalar::Real;

/// A square linear map `y = Op(x)`.
///
/// Implementations panic when slice lengths disagree with [`dim`](Self::dim);
/// fallible entry points live on the concrete types.
pub trait LinearOperator<T>: Send + Sync {
    fn dim(&self) -> usize;

    fn apply_into(&self, x: &[T], y: &mut [T]);

    fn apply_vec(&self, x: &[T]) -> Vec<T>
    where
        T: Real,
    {
        let mut y = vec![T::zero(); self.dim()];
        self.apply_into(x, &mut y);
        y
    }
}

impl<T: Real> LinearOperator<T> for DenseMatrix<T> {
    fn dim(&self) -> usize {
        assert_eq!(self.rows(), self.cols(), "operator must be square");
        self.rows()
    }

    fn apply_into(&self, x: &[T], y: &mut [T]) {
        y.copy_from_slice(&self.matvec(x));
    }
}

/// The identity map of a given size.
#[derive(Clone, Copy, Debug)]
pub struct Identity(pub usize);

impl<T: Real> LinearOperator<T> for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply_into(&self, x: &[T], y: &mut [T]) {
        y.copy_from_slice(x);
    }
}
