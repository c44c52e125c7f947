//! Complex dense linear algebra and random sampling shared by the detectors.

mod matrix;
mod qr;
mod random;
mod solve;

pub use matrix::{ComplexMatrix, ComplexVector};
pub use qr::{sorted_gram_schmidt_qr, SortedQr};
pub use random::{sample_complex_gaussian, RandomStream};
pub use solve::hermitian_solve;
pub(crate) use solve::cholesky;

pub type C64 = num_complex::Complex64;
