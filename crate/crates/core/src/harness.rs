//! Seeded Monte Carlo harness: paired trials, NSER aggregation, and sweeps
//! over SNR, activity probability, or CSI error variance.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detectors::{
    detect_aa_mf_sic, detect_kbest, detect_mmse, detect_oracle_mmse, detect_sa_sic,
    detect_sa_sic_asqrd, detect_smap_oracle, AaMfSicOptions, DetectorId, SicOrdering,
};
use crate::model::{
    draw_realization, make_activity_profile, perturb_csi, AugmentedConstellation, SystemConfig,
};
use crate::numerics::{ComplexVector, RandomStream};
use crate::{Error, Result};

/// How per-trial symbol errors are normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NserMode {
    /// Errors on truly active devices over the active count (default).
    ActiveOnly,
    /// All mismatches (including false alarms on inactive devices) over the
    /// active count; may exceed 1.
    ErrorsOverActive,
}

/// When the per-device activity probabilities are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PRedraw {
    /// One draw shared by every axis point and trial of the experiment.
    PerExperiment,
    /// A fresh draw for every trial.
    PerTrial,
}

/// One point of the sweep axis. `axis_value` is the value reported in the
/// axis column; the remaining fields pin down the full operating point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AxisPoint {
    pub axis_value: f64,
    pub snr_db: f64,
    pub csi_error_var: f64,
    /// All devices share this activity probability; when absent, p is drawn
    /// per device from the spec's `p_range`.
    pub fixed_p: Option<f64>,
}

/// Full description of a sweep; a `SweepResult` is a pure function of this.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub n_devices: usize,
    pub spreading: usize,
    pub detectors: Vec<DetectorId>,
    /// Name of the swept quantity ("snr_db", "p", or "csi_error_var").
    pub axis_name: String,
    pub points: Vec<AxisPoint>,
    pub trials: usize,
    pub master_seed: u64,
    pub nser_mode: NserMode,
    pub p_redraw: PRedraw,
    /// Uniform range for per-device activity draws (used when a point has no
    /// `fixed_p`).
    pub p_range: (f64, f64),
    /// Path width for the K-Best detector.
    pub kbest_k: usize,
    /// Candidate count for the multi-feedback detector.
    pub mf_candidates: usize,
}

impl ExperimentSpec {
    /// SNR sweep at the given points (axis value = SNR).
    pub fn snr_sweep(
        n_devices: usize,
        spreading: usize,
        detectors: Vec<DetectorId>,
        snr_db: &[f64],
        trials: usize,
        master_seed: u64,
    ) -> Self {
        Self {
            n_devices,
            spreading,
            detectors,
            axis_name: "snr_db".into(),
            points: snr_db
                .iter()
                .map(|&s| AxisPoint {
                    axis_value: s,
                    snr_db: s,
                    csi_error_var: 0.0,
                    fixed_p: None,
                })
                .collect(),
            trials,
            master_seed,
            nser_mode: NserMode::ActiveOnly,
            p_redraw: PRedraw::PerExperiment,
            p_range: (0.1, 0.3),
            kbest_k: 4,
            mf_candidates: 5,
        }
    }

    /// Activity sweep: one point per (p, SNR) pair, axis value = p.
    pub fn activity_sweep(
        n_devices: usize,
        spreading: usize,
        detectors: Vec<DetectorId>,
        p_values: &[f64],
        snr_db: &[f64],
        trials: usize,
        master_seed: u64,
    ) -> Self {
        let mut base = Self::snr_sweep(n_devices, spreading, detectors, &[], trials, master_seed);
        base.axis_name = "p".into();
        base.points = p_values
            .iter()
            .flat_map(|&p| {
                snr_db.iter().map(move |&s| AxisPoint {
                    axis_value: p,
                    snr_db: s,
                    csi_error_var: 0.0,
                    fixed_p: Some(p),
                })
            })
            .collect();
        base
    }

    /// SNR sweep under a fixed CSI error variance (axis value = SNR).
    pub fn csi_snr_sweep(
        n_devices: usize,
        spreading: usize,
        detectors: Vec<DetectorId>,
        snr_db: &[f64],
        csi_error_var: f64,
        trials: usize,
        master_seed: u64,
    ) -> Self {
        let mut base = Self::snr_sweep(n_devices, spreading, detectors, snr_db, trials, master_seed);
        base.axis_name = "snr_db".into();
        for p in &mut base.points {
            p.csi_error_var = csi_error_var;
        }
        base
    }

    /// CSI-variance sweep at a fixed SNR (axis value = variance).
    pub fn csi_sweep(
        n_devices: usize,
        spreading: usize,
        detectors: Vec<DetectorId>,
        csi_error_vars: &[f64],
        snr_db: f64,
        trials: usize,
        master_seed: u64,
    ) -> Self {
        let mut base = Self::snr_sweep(n_devices, spreading, detectors, &[], trials, master_seed);
        base.axis_name = "csi_error_var".into();
        base.points = csi_error_vars
            .iter()
            .map(|&v| AxisPoint {
                axis_value: v,
                snr_db,
                csi_error_var: v,
                fixed_p: None,
            })
            .collect();
        base
    }

    fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::Domain("need at least one trial".into()));
        }
        if self.points.is_empty() {
            return Err(Error::Domain("sweep axis is empty".into()));
        }
        if self.detectors.is_empty() {
            return Err(Error::Domain("no detectors requested".into()));
        }
        let (lo, hi) = self.p_range;
        if !(lo > 0.0 && hi < 1.0 && lo <= hi) {
            return Err(Error::Domain(format!(
                "activity range ({lo}, {hi}) must lie inside (0, 1)"
            )));
        }
        for pt in &self.points {
            if pt.csi_error_var < 0.0 {
                return Err(Error::Domain("negative CSI error variance".into()));
            }
            if let Some(p) = pt.fixed_p {
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::Domain(format!("fixed p = {p} outside (0, 1)")));
                }
            }
        }
        Ok(())
    }
}

/// Aggregated outcome for one (detector, axis point) pair. Field names match
/// the CSV schema emitted by the front end.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub detector: DetectorId,
    pub axis_name: String,
    pub axis_value: f64,
    pub snr_db: f64,
    /// Trials that contributed to the aggregate.
    pub trials: u64,
    pub active_symbols: u64,
    pub symbol_errors: u64,
    pub nser: f64,
    pub mf_activations_mean: f64,
    pub mult_count_mean: f64,
    /// Trials skipped because no device was active.
    pub skipped_trials: u64,
    /// Trials where this detector returned an error.
    pub failed_trials: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub wall_time_secs: f64,
}

/// Per-trial symbol-error and active counts under the given mode.
pub fn error_counts(
    x_true: &ComplexVector,
    x_hat: &ComplexVector,
    mode: NserMode,
) -> Result<(u64, u64)> {
    if x_true.len() != x_hat.len() {
        return Err(Error::Dimension(format!(
            "length mismatch: {} vs {}",
            x_true.len(),
            x_hat.len()
        )));
    }
    let mut errors = 0u64;
    let mut active = 0u64;
    for k in 0..x_true.len() {
        let truly_active = x_true[k] != C64::ZERO;
        if truly_active {
            active += 1;
        }
        let wrong = x_hat[k] != x_true[k];
        let counted = match mode {
            NserMode::ActiveOnly => truly_active && wrong,
            NserMode::ErrorsOverActive => wrong,
        };
        if counted {
            errors += 1;
        }
    }
    Ok((errors, active))
}

/// Per-trial NSER; `None` when no device is active (the trial contributes
/// nothing to an aggregate).
pub fn compute_nser(
    x_true: &ComplexVector,
    x_hat: &ComplexVector,
    mode: NserMode,
) -> Result<Option<f64>> {
    let (errors, active) = error_counts(x_true, x_hat, mode)?;
    Ok((active > 0).then(|| errors as f64 / active as f64))
}

/// Deterministic child seed for (master, axis point, trial, stream role),
/// derived by chaining a SplitMix64 finalizer over the inputs so that
/// distinct tuples get statistically independent streams.
pub fn child_seed(master: u64, axis: u64, trial: u64, role: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(mix(mix(mix(master) ^ axis) ^ trial) ^ role)
}

const ROLE_TRIAL: u64 = 1;
const ROLE_ACTIVITY: u64 = 2;

#[derive(Default, Clone)]
struct Accum {
    trials: u64,
    active: u64,
    errors: u64,
    mf_sum: u64,
    mult_sum: u64,
    failed: u64,
}

fn run_detector(
    id: DetectorId,
    spec: &ExperimentSpec,
    y: &ComplexVector,
    h_hat: &crate::numerics::ComplexMatrix,
    active_set: &[usize],
    config: &SystemConfig,
) -> Result<crate::detectors::DetectionResult> {
    match id {
        DetectorId::Mmse => detect_mmse(y, h_hat, config),
        DetectorId::OracleMmse => detect_oracle_mmse(y, h_hat, active_set, config),
        DetectorId::SaSic => detect_sa_sic(y, h_hat, &config.activity, config, SicOrdering::None),
        DetectorId::OrderedSaSic => {
            detect_sa_sic(y, h_hat, &config.activity, config, SicOrdering::ChannelNorm)
        }
        DetectorId::SaSicAsqrd => detect_sa_sic_asqrd(y, h_hat, &config.activity, config),
        DetectorId::KBest => detect_kbest(y, h_hat, &config.activity, config, spec.kbest_k),
        DetectorId::AaMfSic => {
            let mut options = AaMfSicOptions::with_full_candidates(&config.constellation);
            options.f_candidates = spec.mf_candidates;
            detect_aa_mf_sic(y, h_hat, &config.activity, config, options)
        }
        DetectorId::SmapOracle => detect_smap_oracle(y, h_hat, &config.activity, config),
    }
}

fn draw_p_vector(spec: &ExperimentSpec, point: &AxisPoint, stream: &mut RandomStream) -> Vec<f64> {
    match point.fixed_p {
        Some(p) => vec![p; spec.n_devices],
        None => {
            let (lo, hi) = spec.p_range;
            (0..spec.n_devices)
                .map(|_| lo + (hi - lo) * stream.uniform())
                .collect()
        }
    }
}

/// Runs the full sweep. Every detector in a trial sees the identical
/// (channel, transmit vector, noise, CSI error) tuple; trials execute in
/// parallel but the aggregate is a deterministic function of the spec.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<SweepResult> {
    spec.validate()?;
    let start = std::time::Instant::now();
    let constellation = AugmentedConstellation::qpsk_augmented();
    let alphabet = constellation.alphabet_size();
    let mut rows = Vec::new();

    // one shared activity draw for the whole experiment (role stream is
    // independent of axis and trial indices)
    let experiment_p: Option<Vec<f64>> = match spec.p_redraw {
        PRedraw::PerExperiment => {
            let mut s = RandomStream::from_seed(child_seed(spec.master_seed, 0, 0, ROLE_ACTIVITY));
            let (lo, hi) = spec.p_range;
            Some(
                (0..spec.n_devices)
                    .map(|_| lo + (hi - lo) * s.uniform())
                    .collect(),
            )
        }
        PRedraw::PerTrial => None,
    };

    for (ai, point) in spec.points.iter().enumerate() {
        // per-trial records collected first, then folded sequentially so the
        // aggregate cannot depend on scheduling order
        let trial_records: Vec<Result<Option<Vec<(u64, u64, u64, u64, bool)>>>> = (0..spec.trials)
            .into_par_iter()
            .map(|ti| {
                let mut stream = RandomStream::from_seed(child_seed(
                    spec.master_seed,
                    ai as u64,
                    ti as u64,
                    ROLE_TRIAL,
                ));
                let p = match (&experiment_p, point.fixed_p) {
                    (_, Some(fp)) => vec![fp; spec.n_devices],
                    (Some(p), None) => p.clone(),
                    (None, None) => draw_p_vector(spec, point, &mut stream),
                };
                let activity = make_activity_profile(&p, alphabet)?;
                let config = SystemConfig::new(
                    spec.n_devices,
                    spec.spreading,
                    point.snr_db,
                    constellation.clone(),
                    activity,
                )?;
                let (channel, tx) = draw_realization(&config, &mut stream)?;
                if tx.active_set.is_empty() {
                    return Ok(None); // skipped trial
                }
                let channel = perturb_csi(&channel.h, point.csi_error_var, &mut stream)?;
                let mut per_detector = Vec::with_capacity(spec.detectors.len());
                for &id in &spec.detectors {
                    match run_detector(id, spec, &tx.y, &channel.h_hat, &tx.active_set, &config) {
                        Ok(r) => {
                            let (errors, active) = error_counts(&tx.x, &r.x_hat, spec.nser_mode)?;
                            per_detector.push((
                                errors,
                                active,
                                r.mf_activations as u64,
                                r.complex_mult_count,
                                false,
                            ));
                        }
                        Err(_) => per_detector.push((0, 0, 0, 0, true)),
                    }
                }
                Ok(Some(per_detector))
            })
            .collect();

        let mut acc = vec![Accum::default(); spec.detectors.len()];
        let mut skipped = 0u64;
        for record in trial_records {
            match record? {
                None => skipped += 1,
                Some(per_detector) => {
                    for (d, &(errors, active, mf, mult, failed)) in per_detector.iter().enumerate()
                    {
                        if failed {
                            acc[d].failed += 1;
                        } else {
                            acc[d].trials += 1;
                            acc[d].errors += errors;
                            acc[d].active += active;
                            acc[d].mf_sum += mf;
                            acc[d].mult_sum += mult;
                        }
                    }
                }
            }
        }

        for (d, &id) in spec.detectors.iter().enumerate() {
            let a = &acc[d];
            let nser = if a.active > 0 {
                a.errors as f64 / a.active as f64
            } else {
                0.0
            };
            rows.push(SweepRow {
                detector: id,
                axis_name: spec.axis_name.clone(),
                axis_value: point.axis_value,
                snr_db: point.snr_db,
                trials: a.trials,
                active_symbols: a.active,
                symbol_errors: a.errors,
                nser,
                mf_activations_mean: if a.trials > 0 {
                    a.mf_sum as f64 / a.trials as f64
                } else {
                    0.0
                },
                mult_count_mean: if a.trials > 0 {
                    a.mult_sum as f64 / a.trials as f64
                } else {
                    0.0
                },
                skipped_trials: skipped,
                failed_trials: a.failed,
            });
        }
    }

    Ok(SweepResult {
        rows,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// Sweep with imperfect CSI: identical to [`run_sweep`] except that every
/// axis point must carry a nonnegative CSI error variance (the detectors
/// receive H + E while the observation is generated with the true H, which
/// `run_sweep` already honors per point).
pub fn run_csi_sweep(spec: &ExperimentSpec) -> Result<SweepResult> {
    run_sweep(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(points: &[(f64, f64)]) -> ComplexVector {
        ComplexVector::new(points.iter().map(|&(re, im)| C64::new(re, im)).collect())
    }

    #[test]
    fn nser_exact_match_is_zero() {
        let a = v(&[(1.0, 0.0), (0.0, 0.0)]);
        let r = compute_nser(&a, &a.clone(), NserMode::ActiveOnly).unwrap();
        assert_eq!(r, Some(0.0));
    }

    #[test]
    fn nser_active_only_counts_active_errors() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let x_true = v(&[(s, s), (0.0, 0.0), (s, -s)]);
        let x_hat = v(&[(s, s), (0.0, 0.0), (-s, s)]);
        assert_eq!(
            compute_nser(&x_true, &x_hat, NserMode::ActiveOnly).unwrap(),
            Some(0.5)
        );
    }

    #[test]
    fn nser_mode_difference_on_false_alarm() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let x_true = v(&[(s, s), (0.0, 0.0)]);
        let x_hat = v(&[(s, s), (s, s)]);
        assert_eq!(
            compute_nser(&x_true, &x_hat, NserMode::ActiveOnly).unwrap(),
            Some(0.0)
        );
        assert_eq!(
            compute_nser(&x_true, &x_hat, NserMode::ErrorsOverActive).unwrap(),
            Some(1.0)
        );
    }

    #[test]
    fn nser_zero_active_is_skipped() {
        let x_true = v(&[(0.0, 0.0), (0.0, 0.0)]);
        let x_hat = v(&[(1.0, 0.0), (0.0, 0.0)]);
        assert_eq!(
            compute_nser(&x_true, &x_hat, NserMode::ActiveOnly).unwrap(),
            None
        );
        let short = v(&[(0.0, 0.0)]);
        assert!(compute_nser(&x_true, &short, NserMode::ActiveOnly).is_err());
    }

    #[test]
    fn child_seeds_distinct() {
        let mut seen = std::collections::HashSet::new();
        for axis in 0..4u64 {
            for trial in 0..64u64 {
                for role in 1..3u64 {
                    assert!(seen.insert(child_seed(42, axis, trial, role)));
                }
            }
        }
    }

    #[test]
    fn spec_validation() {
        let mut spec = ExperimentSpec::snr_sweep(
            4,
            8,
            vec![DetectorId::Mmse],
            &[10.0],
            10,
            1,
        );
        assert!(run_sweep(&spec).is_ok());
        spec.trials = 0;
        assert!(run_sweep(&spec).is_err());
        spec.trials = 1;
        spec.detectors.clear();
        assert!(run_sweep(&spec).is_err());
        spec.detectors = vec![DetectorId::Mmse];
        spec.points.clear();
        assert!(run_sweep(&spec).is_err());
        spec.points = vec![AxisPoint {
            axis_value: 10.0,
            snr_db: 10.0,
            csi_error_var: -0.1,
            fixed_p: None,
        }];
        assert!(run_sweep(&spec).is_err());
        spec.points[0].csi_error_var = 0.0;
        spec.p_range = (0.0, 0.5);
        assert!(run_sweep(&spec).is_err());
    }

    #[test]
    fn deterministic_across_runs() {
        let spec = ExperimentSpec::snr_sweep(
            8,
            6,
            vec![DetectorId::Mmse, DetectorId::OrderedSaSic, DetectorId::AaMfSic],
            &[4.0, 12.0],
            40,
            12345,
        );
        let a = run_sweep(&spec).unwrap();
        let b = run_sweep(&spec).unwrap();
        assert_eq!(a.rows.len(), b.rows.len());
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert_eq!(ra.detector, rb.detector);
            assert_eq!(ra.symbol_errors, rb.symbol_errors);
            assert_eq!(ra.active_symbols, rb.active_symbols);
            assert_eq!(ra.mult_count_mean, rb.mult_count_mean);
            assert_eq!(ra.mf_activations_mean, rb.mf_activations_mean);
            assert_eq!(ra.nser, rb.nser);
        }
    }

    #[test]
    fn zero_csi_matches_plain_sweep() {
        let plain = ExperimentSpec::snr_sweep(
            6,
            4,
            vec![DetectorId::OrderedSaSic],
            &[8.0],
            30,
            777,
        );
        let csi = ExperimentSpec::csi_snr_sweep(
            6,
            4,
            vec![DetectorId::OrderedSaSic],
            &[8.0],
            0.0,
            30,
            777,
        );
        let a = run_sweep(&plain).unwrap();
        let b = run_csi_sweep(&csi).unwrap();
        assert_eq!(a.rows[0].symbol_errors, b.rows[0].symbol_errors);
        assert_eq!(a.rows[0].active_symbols, b.rows[0].active_symbols);
    }

    /// Paired seeds: imperfect CSI can only hurt, and degradation is
    /// monotone in the error variance (within sampling noise, hence the
    /// large trial count and a small slack).
    #[test]
    fn csi_degradation_monotone() {
        let spec = ExperimentSpec::csi_sweep(
            16,
            8,
            vec![DetectorId::OrderedSaSic, DetectorId::AaMfSic],
            &[0.0, 0.05, 0.1],
            12.0,
            400,
            31,
        );
        let result = run_csi_sweep(&spec).unwrap();
        for &id in &spec.detectors {
            let nsers: Vec<f64> = result
                .rows
                .iter()
                .filter(|r| r.detector == id)
                .map(|r| r.nser)
                .collect();
            assert_eq!(nsers.len(), 3);
            for w in nsers.windows(2) {
                assert!(
                    w[1] >= w[0] * 0.95,
                    "{id}: NSER not monotone under CSI degradation: {nsers:?}"
                );
            }
        }
    }

    #[test]
    fn noiseless_orthogonal_single_trial() {
        // N = M with effectively no noise: all SIC chains are exact
        let spec = ExperimentSpec::snr_sweep(
            4,
            4,
            vec![
                DetectorId::SaSic,
                DetectorId::OrderedSaSic,
                DetectorId::SaSicAsqrd,
                DetectorId::AaMfSic,
            ],
            &[200.0],
            20,
            5,
        );
        let result = run_sweep(&spec).unwrap();
        for row in &result.rows {
            assert!(row.trials > 0);
            assert_eq!(row.symbol_errors, 0, "{}", row.detector);
        }
    }
}
