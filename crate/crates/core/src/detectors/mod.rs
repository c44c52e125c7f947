//! Detection algorithms: linear MMSE (plain and genie-aided), successive
//! interference cancellation chains on the zero-augmented system, sorted-QR
//! detection, K-Best tree search, an exhaustive sparsity-MAP oracle, and the
//! activity-aware multi-feedback SIC detector.

mod linear;
mod qrd;
mod sic;
mod smap;

pub use linear::{detect_mmse, detect_oracle_mmse};
pub use qrd::{detect_kbest, detect_sa_sic_asqrd};
pub use sic::{
    build_reweighting, detect_aa_mf_sic, detect_aa_mf_sic_traced, detect_sa_sic,
    detect_sa_sic_regularized, regularized_filter, AaMfSicOptions, ChainOptions,
    MfCandidateMatrix, MfRollout, SacMode, SicOrdering,
};
pub use smap::detect_smap_oracle;

use serde::{Deserialize, Serialize};

use crate::model::AugmentedConstellation;
use crate::numerics::{ComplexVector, C64};

/// Identifies which algorithm produced a result (and names rows in reports).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorId {
    Mmse,
    OracleMmse,
    SaSic,
    OrderedSaSic,
    SaSicAsqrd,
    KBest,
    AaMfSic,
    SmapOracle,
}

impl DetectorId {
    pub const ALL: [DetectorId; 8] = [
        DetectorId::Mmse,
        DetectorId::OracleMmse,
        DetectorId::SaSic,
        DetectorId::OrderedSaSic,
        DetectorId::SaSicAsqrd,
        DetectorId::KBest,
        DetectorId::AaMfSic,
        DetectorId::SmapOracle,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            DetectorId::Mmse => "mmse",
            DetectorId::OracleMmse => "oracle-mmse",
            DetectorId::SaSic => "sa-sic",
            DetectorId::OrderedSaSic => "ordered-sa-sic",
            DetectorId::SaSicAsqrd => "sa-sic-asqrd",
            DetectorId::KBest => "k-best",
            DetectorId::AaMfSic => "aa-mf-sic",
            DetectorId::SmapOracle => "smap-oracle",
        }
    }

    pub fn parse(s: &str) -> Option<DetectorId> {
        Self::ALL.iter().copied().find(|d| d.as_str() == s)
    }
}

impl std::fmt::Display for DetectorId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Output of one detection call.
#[derive(Debug, Clone)]
pub struct DetectionResult {
    pub x_hat: ComplexVector,
    /// Devices whose soft estimate failed the reliability test (nonzero only
    /// for the multi-feedback detector).
    pub mf_activations: usize,
    pub complex_mult_count: u64,
    pub detector_id: DetectorId,
}

/// Running tally of complex multiplications. Kernels report their standard
/// flop counts (a Cholesky factorization of size n counts n^3/6, a
/// triangular solve n^2 per right-hand side, and so on).
#[derive(Debug, Default, Clone)]
pub struct MultCounter(pub u64);

impl MultCounter {
    #[inline]
    pub fn add(&mut self, n: u64) {
        self.0 += n;
    }

    /// Standard count for a Cholesky factorization of size n plus a
    /// forward/back substitution pair for `rhs` right-hand sides.
    #[inline]
    pub fn add_hermitian_solve(&mut self, n: u64, rhs: u64) {
        self.add(n * n * n / 6 + n * n * rhs);
    }
}

/// Nearest decision point over the augmented alphabet and the distance to
/// it. Ties break by canonical ordering (zero first, then the nonzero
/// points in listed order).
pub fn quantize(z: C64, constellation: &AugmentedConstellation) -> (C64, f64) {
    let mut best = C64::ZERO;
    let mut best_d = f64::INFINITY;
    for a in constellation.points() {
        let d = (z - a).norm();
        if d < best_d {
            best_d = d;
            best = a;
        }
    }
    (best, best_d)
}

/// Nearest point over the nonzero alphabet only (used by the genie-aided
/// detector, which knows the device is active).
pub(crate) fn quantize_nonzero(z: C64, constellation: &AugmentedConstellation) -> (C64, f64) {
    let mut best = constellation.nonzero_points()[0];
    let mut best_d = f64::INFINITY;
    for &a in constellation.nonzero_points() {
        let d = (z - a).norm();
        if d < best_d {
            best_d = d;
            best = a;
        }
    }
    (best, best_d)
}

/// Reliability radius for the shadow-region test: 1/λ when the nearest point
/// is the zero symbol, 1 − 1/λ otherwise, clamped to [0, 1]. Nonpositive λ
/// saturates the clamp: the zero branch is always reliable (d_th = 1) and
/// the nonzero branch never is (d_th = 0).
pub fn sac_threshold(lambda_n: f64, nearest_is_zero: bool) -> f64 {
    let raw = if lambda_n <= 0.0 {
        if nearest_is_zero {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    } else if nearest_is_zero {
        1.0 / lambda_n
    } else {
        1.0 - 1.0 / lambda_n
    };
    raw.clamp(0.0, 1.0)
}

/// One reliability decision for a soft estimate.
#[derive(Debug, Clone, Copy)]
pub struct SacDecision {
    pub d_k: f64,
    pub d_th: f64,
    pub nearest_is_zero: bool,
    pub reliable: bool,
}
