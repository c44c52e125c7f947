//! Sparse-activity uplink model: augmented constellation, per-device activity
//! profile, channel generation, and the zero-augmented observation used by the
//! activity-regularized detectors.

use serde::{Deserialize, Serialize};

use crate::numerics::{sample_complex_gaussian, ComplexMatrix, ComplexVector, RandomStream, C64};
use crate::{Error, Result};

/// Symbol alphabet optionally augmented with the zero (inactive) symbol.
/// Canonical ordering lists zero first when present, then the nonzero points.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedConstellation {
    nonzero_points: Vec<C64>,
    includes_zero: bool,
}

impl AugmentedConstellation {
    /// QPSK points (±1±j)/√2 augmented with zero.
    pub fn qpsk_augmented() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            nonzero_points: vec![
                C64::new(s, s),
                C64::new(s, -s),
                C64::new(-s, s),
                C64::new(-s, -s),
            ],
            includes_zero: true,
        }
    }

    pub fn new(nonzero_points: Vec<C64>, includes_zero: bool) -> Result<Self> {
        if nonzero_points.is_empty() {
            return Err(Error::Domain("constellation has no nonzero points".into()));
        }
        for (i, a) in nonzero_points.iter().enumerate() {
            if *a == C64::ZERO {
                return Err(Error::Domain(
                    "zero must be expressed via includes_zero, not as a point".into(),
                ));
            }
            for b in &nonzero_points[..i] {
                if a == b {
                    return Err(Error::Domain("duplicate constellation point".into()));
                }
            }
        }
        let avg_power: f64 = nonzero_points.iter().map(|z| z.norm_sqr()).sum::<f64>()
            / nonzero_points.len() as f64;
        if (avg_power - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "nonzero points must have unit average power, got {avg_power}"
            )));
        }
        Ok(Self {
            nonzero_points,
            includes_zero,
        })
    }

    pub fn nonzero_points(&self) -> &[C64] {
        &self.nonzero_points
    }

    pub fn includes_zero(&self) -> bool {
        self.includes_zero
    }

    /// Number of nonzero symbols |A|.
    pub fn alphabet_size(&self) -> usize {
        self.nonzero_points.len()
    }

    /// All decision points in canonical order: zero first (when present),
    /// then the nonzero points.
    pub fn points(&self) -> Vec<C64> {
        let mut pts = Vec::with_capacity(self.nonzero_points.len() + 1);
        if self.includes_zero {
            pts.push(C64::ZERO);
        }
        pts.extend_from_slice(&self.nonzero_points);
        pts
    }
}

/// Per-device activity probabilities and the regularization weights they
/// induce: λ_n = ln((1 − p_n)·|A| / p_n).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityProfile {
    pub p: Vec<f64>,
    pub lambda: Vec<f64>,
}

pub fn make_activity_profile(p: &[f64], alphabet_size: usize) -> Result<ActivityProfile> {
    if alphabet_size < 1 {
        return Err(Error::Domain("alphabet size must be at least 1".into()));
    }
    let mut lambda = Vec::with_capacity(p.len());
    for (n, &pn) in p.iter().enumerate() {
        if !(pn > 0.0 && pn < 1.0) {
            return Err(Error::Domain(format!(
                "activity probability p[{n}] = {pn} outside (0, 1)"
            )));
        }
        lambda.push(((1.0 - pn) * alphabet_size as f64 / pn).ln());
    }
    Ok(ActivityProfile {
        p: p.to_vec(),
        lambda,
    })
}

/// System-level parameters for one simulated uplink.
#[derive(Debug, Clone)]
pub struct SystemConfig {
    pub n_devices: usize,
    pub spreading: usize,
    pub snr_db: f64,
    pub constellation: AugmentedConstellation,
    pub activity: ActivityProfile,
    pub signal_power: f64,
}

impl SystemConfig {
    pub fn new(
        n_devices: usize,
        spreading: usize,
        snr_db: f64,
        constellation: AugmentedConstellation,
        activity: ActivityProfile,
    ) -> Result<Self> {
        if n_devices < 1 || spreading < 1 {
            return Err(Error::Dimension(
                "need at least one device and spreading dimension".into(),
            ));
        }
        if activity.p.len() != n_devices {
            return Err(Error::Dimension(format!(
                "activity profile covers {} devices, expected {n_devices}",
                activity.p.len()
            )));
        }
        Ok(Self {
            n_devices,
            spreading,
            snr_db,
            constellation,
            activity,
            signal_power: 1.0,
        })
    }

    /// σ_n² = σ_x² / 10^(snr_db/10).
    pub fn noise_variance(&self) -> f64 {
        self.signal_power / 10f64.powf(self.snr_db / 10.0)
    }
}

/// True channel plus the receiver's (possibly perturbed) estimate.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub h: ComplexMatrix,
    pub h_hat: ComplexMatrix,
    pub csi_error_var: f64,
}

/// One transmitted vector and the matching received observation.
#[derive(Debug, Clone)]
pub struct TransmitRealization {
    pub x: ComplexVector,
    pub active_set: Vec<usize>,
    pub y: ComplexVector,
}

/// Zero-augmented observation: y0 = [y; 0_N] and H' with the activity
/// penalty block σ_n·diag(√λ_n) stacked under the channel estimate.
#[derive(Debug, Clone)]
pub struct AugmentedSystem {
    pub y0: ComplexVector,
    pub h_prime: ComplexMatrix,
}

/// Draws one channel and one transmit vector. Channel entries are i.i.d.
/// complex Gaussian with per-entry variance 1/M, so columns have unit norm
/// in expectation and the per-active-device receive power matches σ_x².
pub fn draw_realization(
    config: &SystemConfig,
    stream: &mut RandomStream,
) -> Result<(ChannelRealization, TransmitRealization)> {
    let (m, n) = (config.spreading, config.n_devices);
    let h = sample_complex_gaussian(stream, m, n, 1.0 / m as f64)?;

    let points = config.constellation.nonzero_points();
    let scale = config.signal_power.sqrt();
    let mut x = ComplexVector::zeros(n);
    let mut active_set = Vec::new();
    for k in 0..n {
        if stream.uniform() < config.activity.p[k] {
            x[k] = scale * points[stream.index(points.len())];
            active_set.push(k);
        }
    }

    let mut y = h.mul_vec(&x)?;
    let noise_var = config.noise_variance();
    for e in y.entries_mut() {
        *e += stream.complex_gaussian(noise_var);
    }

    Ok((
        ChannelRealization {
            h: h.clone(),
            h_hat: h,
            csi_error_var: 0.0,
        },
        TransmitRealization { x, active_set, y },
    ))
}

/// Builds the zero-augmented system from the channel the receiver uses.
/// Negative λ_n (possible for very high activity) are clamped to zero here;
/// the signed values stay in the profile for threshold logic.
pub fn zero_augment(
    y: &ComplexVector,
    h_used: &ComplexMatrix,
    profile: &ActivityProfile,
    noise_var: f64,
) -> Result<AugmentedSystem> {
    if noise_var < 0.0 {
        return Err(Error::Domain(format!("negative noise variance {noise_var}")));
    }
    let (m, n) = (h_used.rows(), h_used.cols());
    if y.len() != m || profile.lambda.len() != n {
        return Err(Error::Dimension(format!(
            "zero_augment shapes: y len {} vs {m} rows, profile len {} vs {n} cols",
            y.len(),
            profile.lambda.len()
        )));
    }
    let sigma_n = noise_var.sqrt();
    let mut bottom = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let lam = profile.lambda[k].max(0.0);
        bottom[(k, k)] = C64::new(sigma_n * lam.sqrt(), 0.0);
    }
    let h_prime = h_used.vstack(&bottom)?;
    let y0 = y.concat(&ComplexVector::zeros(n));
    Ok(AugmentedSystem { y0, h_prime })
}

/// Adds an i.i.d. complex Gaussian estimation error of the given per-entry
/// variance to the true channel.
pub fn perturb_csi(
    h: &ComplexMatrix,
    csi_error_var: f64,
    stream: &mut RandomStream,
) -> Result<ChannelRealization> {
    if csi_error_var < 0.0 {
        return Err(Error::Domain(format!(
            "negative CSI error variance {csi_error_var}"
        )));
    }
    let h_hat = if csi_error_var == 0.0 {
        h.clone()
    } else {
        let e = sample_complex_gaussian(stream, h.rows(), h.cols(), csi_error_var)?;
        h.add(&e)?
    };
    Ok(ChannelRealization {
        h: h.clone(),
        h_hat,
        csi_error_var,
    })
}
