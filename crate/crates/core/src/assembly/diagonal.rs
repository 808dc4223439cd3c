use crate::kronop::KronSumOperator;
use crate::scalar::Real;

/// Diagonal of a sum of Kronecker products without forming it.
pub fn system_diagonal<T: Real>(a: &KronSumOperator<T>) -> Vec<T> {
    a.diagonal()
}
