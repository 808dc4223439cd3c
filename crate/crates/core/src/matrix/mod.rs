//! Matrix storage formats used by assembly and the Kronecker operators.

mod banded;
mod csr;
mod dense;

pub use banded::{BandedCholesky, BandedMatrix};
pub use csr::CsrMatrix;
pub use dense::DenseMatrix;
