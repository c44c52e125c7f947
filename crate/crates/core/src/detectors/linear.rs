//! One-shot linear detectors.

use num_complex::Complex64 as C64;

use super::{quantize, quantize_nonzero, DetectionResult, DetectorId, MultCounter};
use crate::model::SystemConfig;
use crate::numerics::{hermitian_solve, ComplexMatrix, ComplexVector};
use crate::{Error, Result};

fn check_dims(y: &ComplexVector, h_hat: &ComplexMatrix, config: &SystemConfig) -> Result<()> {
    if h_hat.rows() != config.spreading || h_hat.cols() != config.n_devices {
        return Err(Error::Dimension(format!(
            "channel is {}x{}, config expects {}x{}",
            h_hat.rows(),
            h_hat.cols(),
            config.spreading,
            config.n_devices
        )));
    }
    if y.len() != config.spreading {
        return Err(Error::Dimension(format!(
            "observation has length {}, expected {}",
            y.len(),
            config.spreading
        )));
    }
    Ok(())
}

/// Soft linear MMSE estimate Hᴴ(HHᴴ + αI)⁻¹y for the given columns.
fn mmse_soft(
    y: &ComplexVector,
    h: &ComplexMatrix,
    alpha: f64,
    counter: &mut MultCounter,
) -> Result<ComplexVector> {
    let m = h.rows();
    let mut a = h.mul(&h.conj_transpose())?;
    counter.add((m * m * h.cols()) as u64);
    for i in 0..m {
        a[(i, i)] += C64::new(alpha, 0.0);
    }
    let rhs = ComplexMatrix::from_rows(m, 1, y.entries().to_vec())?;
    let u = hermitian_solve(&a, &rhs)?;
    counter.add_hermitian_solve(m as u64, 1);
    let soft = h.conj_transpose().mul_vec(&u.col(0))?;
    counter.add((m * h.cols()) as u64);
    Ok(soft)
}

/// Conventional linear MMSE detection with quantization over the augmented
/// alphabet.
pub fn detect_mmse(
    y: &ComplexVector,
    h_hat: &ComplexMatrix,
    config: &SystemConfig,
) -> Result<DetectionResult> {
    check_dims(y, h_hat, config)?;
    let mut counter = MultCounter::default();
    let alpha = config.noise_variance() / config.signal_power;
    let soft = mmse_soft(y, h_hat, alpha, &mut counter)?;
    let x_hat = soft
        .entries()
        .iter()
        .map(|&z| quantize(z, &config.constellation).0)
        .collect();
    Ok(DetectionResult {
        x_hat,
        mf_activations: 0,
        complex_mult_count: counter.0,
        detector_id: DetectorId::Mmse,
    })
}

/// Genie-aided MMSE: the true active set is known, so the filter is built
/// from the active columns only and active devices are quantized over the
/// nonzero alphabet.
pub fn detect_oracle_mmse(
    y: &ComplexVector,
    h_hat: &ComplexMatrix,
    active_set: &[usize],
    config: &SystemConfig,
) -> Result<DetectionResult> {
    check_dims(y, h_hat, config)?;
    let n = config.n_devices;
    if active_set.iter().any(|&k| k >= n) {
        return Err(Error::Dimension("active set index out of range".into()));
    }
    let mut x_hat = ComplexVector::zeros(n);
    let mut counter = MultCounter::default();
    if !active_set.is_empty() {
        let h_a = h_hat.select_cols(active_set);
        let alpha = config.noise_variance() / config.signal_power;
        // column-space form (HᴴH + αI)⁻¹Hᴴy: the Gram of the active columns
        // stays positive definite even at zero noise, unlike HHᴴ when fewer
        // devices are active than the spreading length
        let k = h_a.cols();
        let m = h_a.rows();
        let mut g = h_a.gram();
        counter.add((m * k * (k + 1) / 2) as u64);
        for i in 0..k {
            g[(i, i)] += C64::new(alpha, 0.0);
        }
        let hy = h_a.conj_transpose().mul_vec(y)?;
        counter.add((m * k) as u64);
        let rhs = ComplexMatrix::from_rows(k, 1, hy.entries().to_vec())?;
        let soft = hermitian_solve(&g, &rhs)?.col(0);
        counter.add_hermitian_solve(k as u64, 1);
        for (i, &k) in active_set.iter().enumerate() {
            x_hat[k] = quantize_nonzero(soft[i], &config.constellation).0;
        }
    }
    Ok(DetectionResult {
        x_hat,
        mf_activations: 0,
        complex_mult_count: counter.0,
        detector_id: DetectorId::OracleMmse,
    })
}
