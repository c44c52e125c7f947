use num_complex::Complex64 as C64;

use super::{ComplexMatrix, ComplexVector};
use crate::{Error, Result};

const RANK_TOL: f64 = 1e-12;

/// Result of the sorted QR decomposition: `A[:, perm] = Q R`.
#[derive(Debug, Clone)]
pub struct SortedQr {
    pub q: ComplexMatrix,
    pub r: ComplexMatrix,
    /// `perm[k]` is the original column index placed at QR position `k`.
    pub perm: Vec<usize>,
}

/// Modified Gram-Schmidt QR with SQRD column pivoting: at each step the
/// remaining column with the smallest residual norm is orthogonalized next,
/// so back-substitution (which starts from the last column) handles the
/// strongest columns first.
pub fn sorted_gram_schmidt_qr(a: &ComplexMatrix) -> Result<SortedQr> {
    let (rows, cols) = (a.rows(), a.cols());
    if rows < cols {
        return Err(Error::Dimension(format!(
            "sorted QR needs rows >= cols, got {rows}x{cols}"
        )));
    }
    let mut work = a.clone();
    let mut q = ComplexMatrix::zeros(rows, cols);
    let mut r = ComplexMatrix::zeros(cols, cols);
    let mut perm: Vec<usize> = (0..cols).collect();
    let mut norms: Vec<f64> = (0..cols).map(|j| work.col_norm_sq(j)).collect();

    for k in 0..cols {
        // smallest residual norm among remaining columns; ties keep the
        // lowest index for determinism
        let mut pick = k;
        for j in k + 1..cols {
            if norms[j] < norms[pick] {
                pick = j;
            }
        }
        work.swap_cols(k, pick);
        perm.swap(k, pick);
        norms.swap(k, pick);
        r.swap_cols(k, pick);

        let col = work.col(k);
        let norm = col.norm();
        if norm < RANK_TOL {
            return Err(Error::RankDeficient { column: k, norm });
        }
        r[(k, k)] = C64::new(norm, 0.0);
        let qk: ComplexVector = col.entries().iter().map(|z| z / norm).collect();
        q.set_col(k, &qk);
        for j in k + 1..cols {
            let mut proj = C64::ZERO;
            for i in 0..rows {
                proj += qk[i].conj() * work[(i, j)];
            }
            r[(k, j)] = proj;
            for i in 0..rows {
                let v = work[(i, j)] - proj * qk[i];
                work[(i, j)] = v;
            }
            norms[j] = work.col_norm_sq(j);
        }
    }
    Ok(SortedQr { q, r, perm })
}
