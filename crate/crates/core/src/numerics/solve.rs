use num_complex::Complex64 as C64;

use super::ComplexMatrix;
use crate::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-9;
const SINGULARITY_REL: f64 = 1e-12;

/// Solves `A X = B` for Hermitian positive-definite `A` via a Cholesky
/// factorization `A = L L^H`.
pub fn hermitian_solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::Dimension(format!(
            "hermitian_solve needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if b.rows() != n {
        return Err(Error::Dimension(format!(
            "right-hand side has {} rows, expected {n}",
            b.rows()
        )));
    }
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }

    let l = cholesky(a)?;

    // A X = B  =>  L (L^H X) = B: forward then back substitution, per column.
    let mut x = b.clone();
    let k = b.cols();
    for c in 0..k {
        for i in 0..n {
            let mut acc = x[(i, c)];
            for j in 0..i {
                acc -= l[(i, j)] * x[(j, c)];
            }
            x[(i, c)] = acc / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut acc = x[(i, c)];
            for j in i + 1..n {
                acc -= l[(j, i)].conj() * x[(j, c)];
            }
            x[(i, c)] = acc / l[(i, i)];
        }
    }
    Ok(x)
}

/// Lower-triangular Cholesky factor of a Hermitian positive-definite matrix.
pub(crate) fn cholesky(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.rows();
    let threshold = SINGULARITY_REL * a.trace().re / n as f64;
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) || d.sqrt() < threshold {
            return Err(Error::Singular {
                pivot: if d > 0.0 { d.sqrt() } else { d },
                threshold,
            });
        }
        let pivot = d.sqrt();
        l[(j, j)] = C64::new(pivot, 0.0);
        for i in j + 1..n {
            let mut acc = a[(i, j)];
            for k in 0..j {
                acc -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = acc / pivot;
        }
    }
    Ok(l)
}
