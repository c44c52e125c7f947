//! Successive interference cancellation on the zero-augmented system,
//! including the activity-aware multi-feedback variant.

use num_complex::Complex64 as C64;

use super::{quantize, sac_threshold, DetectionResult, DetectorId, MultCounter, SacDecision};
use crate::model::{zero_augment, ActivityProfile, AugmentedConstellation, SystemConfig};
use crate::numerics::{hermitian_solve, ComplexMatrix, ComplexVector};
use crate::{Error, Result};

/// Detection order for the plain SIC chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SicOrdering {
    /// Natural device order.
    None,
    /// Descending column norm of the augmented channel (ties keep the lower
    /// device index).
    ChannelNorm,
}

/// How the per-device reliability test is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SacMode {
    /// Scalar Euclidean distance of the soft estimate to its nearest point,
    /// compared against the reliability radius. Default.
    Distance,
    /// Real and imaginary deviations compared against the radius separately;
    /// reliable only if both pass.
    ComponentWise,
    /// Every device treated as reliable (multi-feedback branch disabled).
    ForceReliable,
    /// Every device treated as unreliable (multi-feedback branch always on).
    ForceUnreliable,
}

/// Options shared by the SIC chains.
#[derive(Debug, Clone, Copy)]
pub struct ChainOptions {
    pub ordering: SicOrdering,
    /// `Some(ε)` enables per-stage filter reweighting from the previous
    /// filter magnitudes; `None` refits a plain regularized MMSE filter per
    /// stage (the default, and much cheaper).
    pub reweighting_epsilon: Option<f64>,
}

impl Default for ChainOptions {
    fn default() -> Self {
        Self {
            ordering: SicOrdering::ChannelNorm,
            reweighting_epsilon: None,
        }
    }
}

/// Options for the activity-aware multi-feedback detector.
#[derive(Debug, Clone, Copy)]
pub struct AaMfSicOptions {
    /// Number of feedback candidates F; must satisfy 2 ≤ F ≤ |A0|.
    pub f_candidates: usize,
    pub sac_mode: SacMode,
    pub chain: ChainOptions,
}

impl AaMfSicOptions {
    pub fn with_full_candidates(constellation: &AugmentedConstellation) -> Self {
        Self {
            f_candidates: constellation.points().len(),
            sac_mode: SacMode::Distance,
            chain: ChainOptions::default(),
        }
    }
}

/// Candidate matrix produced by one multi-feedback activation: column f is a
/// complete length-N candidate vector (in original device order) whose entry
/// for the unreliable device is the f-th feedback candidate; entries for
/// already-detected devices are constant across columns and the remaining
/// devices are filled by rolling the chain forward.
#[derive(Debug, Clone)]
pub struct MfCandidateMatrix {
    pub b: ComplexMatrix,
    pub f: usize,
}

/// Record of one multi-feedback activation (for inspection and testing).
#[derive(Debug, Clone)]
pub struct MfRollout {
    /// Original index of the device that failed the reliability test.
    pub device: usize,
    pub candidates: MfCandidateMatrix,
    /// ‖y0 − H'·b_f‖² per candidate column.
    pub residuals: Vec<f64>,
    /// Index of the winning column (minimum residual; first on ties).
    pub best: usize,
    pub decision: SacDecision,
}

/// Diagonal reweighting from the previous filter: Λ_ii = 1/(|w_i| + ε).
pub fn build_reweighting(w_prev: &ComplexVector, epsilon: f64) -> Result<Vec<f64>> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!(
            "reweighting epsilon must be positive, got {epsilon}"
        )));
    }
    Ok(w_prev
        .entries()
        .iter()
        .map(|w| 1.0 / (w.norm() + epsilon))
        .collect())
}

/// Regularized per-stage filter
/// w = (H̄H̄ᴴ + (σ_n²/σ_x²)I + (2λ_n/σ_x²)Λ)⁻¹ H̄ δ_n,
/// where H̄ holds the not-yet-cancelled columns and Λ is the diagonal
/// reweighting (pass all zeros for a plain MMSE refit).
pub fn regularized_filter(
    h_active: &ComplexMatrix,
    n: usize,
    lambda_n: f64,
    sigma_n2: f64,
    sigma_x2: f64,
    lambda_diag: &[f64],
) -> Result<ComplexVector> {
    let rows = h_active.rows();
    if n >= h_active.cols() {
        return Err(Error::Dimension(format!(
            "filter target column {n} out of range for {} columns",
            h_active.cols()
        )));
    }
    if lambda_diag.len() != rows {
        return Err(Error::Dimension(format!(
            "reweighting diagonal has length {}, expected {rows}",
            lambda_diag.len()
        )));
    }
    if lambda_diag.iter().any(|&d| d < 0.0 || !d.is_finite()) {
        return Err(Error::Domain(
            "reweighting diagonal must be finite and nonnegative".into(),
        ));
    }
    let alpha = sigma_n2 / sigma_x2;
    let mut a = h_active.mul(&h_active.conj_transpose())?;
    let penalty = 2.0 * lambda_n.max(0.0) / sigma_x2;
    for i in 0..rows {
        a[(i, i)] += C64::new(alpha + penalty * lambda_diag[i], 0.0);
    }
    let rhs_col = h_active.col(n);
    let rhs = ComplexMatrix::from_rows(rows, 1, rhs_col.entries().to_vec())?;
    let w = hermitian_solve(&a, &rhs)?;
    Ok(w.col(0))
}

/// Shared state for one SIC pass over the augmented system, in detection
/// order. The fast path never forms filters explicitly: with Λ = 0 the soft
/// estimate of the leading remaining device is an entry of
/// (Ḡ + αI)⁻¹ H̄ᴴ y_r, where Ḡ is the trailing block of the precomputed Gram
/// matrix. Storing the Gram in reverse detection order makes every trailing
/// block a leading principal block, whose Cholesky factor is a sub-block of
/// one up-front factorization — so each stage costs a single forward
/// substitution instead of a fresh factorization.
struct Chain<'a> {
    h_prime: ComplexMatrix,
    g0: ComplexMatrix,
    alpha: f64,
    /// Signed regularization weights, in detection order.
    lambda: Vec<f64>,
    /// perm[k] = original device index detected at position k.
    perm: Vec<usize>,
    y_r: ComplexVector,
    /// H'ᴴ y_r, maintained incrementally.
    t: ComplexVector,
    stage: usize,
    decided: Vec<C64>,
    reweighting: Option<f64>,
    w_prev: Option<ComplexVector>,
    /// Cholesky factor of (G0 + αI) in reverse detection order (fast path).
    chol_rev: Option<ComplexMatrix>,
    /// (G0 + αI)⁻¹, built lazily for multi-feedback rollouts.
    bank: Option<ComplexMatrix>,
    counter: MultCounter,
    constellation: &'a AugmentedConstellation,
    sigma_n2: f64,
    sigma_x2: f64,
}

impl<'a> Chain<'a> {
    fn new(
        y: &ComplexVector,
        h_hat: &ComplexMatrix,
        profile: &ActivityProfile,
        config: &'a SystemConfig,
        options: ChainOptions,
    ) -> Result<Self> {
        if h_hat.rows() != config.spreading || h_hat.cols() != config.n_devices {
            return Err(Error::Dimension(format!(
                "channel is {}x{}, config expects {}x{}",
                h_hat.rows(),
                h_hat.cols(),
                config.spreading,
                config.n_devices
            )));
        }
        let sigma_n2 = config.noise_variance();
        let aug = zero_augment(y, h_hat, profile, sigma_n2)?;
        let n = config.n_devices;

        let mut perm: Vec<usize> = (0..n).collect();
        if options.ordering == SicOrdering::ChannelNorm {
            let norms: Vec<f64> = (0..n).map(|j| aug.h_prime.col_norm_sq(j)).collect();
            perm.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap());
        }
        let h_prime = aug.h_prime.select_cols(&perm);
        let lambda: Vec<f64> = perm.iter().map(|&j| profile.lambda[j]).collect();

        let mut counter = MultCounter::default();
        let m = config.spreading as u64;
        // the augmentation rows are diagonal, so the Gram of H' is the Gram
        // of the channel block plus a diagonal penalty
        let mut g0 = h_hat.select_cols(&perm).gram();
        counter.add(m * (n as u64) * (n as u64 + 1) / 2);
        for k in 0..n {
            g0[(k, k)] += C64::new(sigma_n2 * lambda[k].max(0.0), 0.0);
        }
        // y0 is zero below the channel rows, so H'ᴴy0 only involves them
        let t = h_hat.select_cols(&perm).conj_transpose().mul_vec(y)?;
        counter.add(m * n as u64);

        let alpha = sigma_n2 / config.signal_power;
        let chol_rev = if options.reweighting_epsilon.is_none() {
            let mut g_rev = ComplexMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    g_rev[(i, j)] = g0[(n - 1 - i, n - 1 - j)];
                }
                g_rev[(i, i)] += C64::new(alpha, 0.0);
            }
            let l = crate::numerics::cholesky(&g_rev)?;
            counter.add((n as u64).pow(3) / 6);
            Some(l)
        } else {
            None
        };

        Ok(Self {
            h_prime,
            g0,
            alpha,
            lambda,
            perm,
            y_r: aug.y0,
            t,
            stage: 0,
            decided: Vec::with_capacity(n),
            reweighting: options.reweighting_epsilon,
            w_prev: None,
            chol_rev,
            bank: None,
            counter,
            constellation: &config.constellation,
            sigma_n2,
            sigma_x2: config.signal_power,
        })
    }

    fn n(&self) -> usize {
        self.g0.rows()
    }

    /// Soft estimate for the device at the current stage.
    fn soft_estimate(&mut self) -> Result<C64> {
        let n = self.n();
        let k = n - self.stage;
        if let Some(eps) = self.reweighting {
            // explicit filter in the row space, reweighted from the previous
            // stage's filter magnitudes (first stage starts from Λ = 0)
            let remaining: Vec<usize> = (self.stage..n).collect();
            let h_bar = self.h_prime.select_cols(&remaining);
            let rows = h_bar.rows();
            let lam_diag = match &self.w_prev {
                Some(w) => build_reweighting(w, eps)?,
                None => vec![0.0; rows],
            };
            let w = regularized_filter(
                &h_bar,
                0,
                self.lambda[self.stage],
                self.sigma_n2,
                self.sigma_x2,
                &lam_diag,
            )?;
            let r = rows as u64;
            self.counter
                .add(r * r * (k as u64) + r * r * r / 6 + r * r + r);
            let z = w.dot(&self.y_r);
            self.w_prev = Some(w);
            Ok(z)
        } else {
            // solve (Ḡ + αI)v = H̄ᴴy_r over the remaining devices; in the
            // reverse-order layout the system matrix is the leading k×k
            // block of the precomputed factor L, and only the last entry of
            // v is needed: Lu = rhs forward, then v[k-1] = u[k-1]/L[k-1,k-1]
            let l = self.chol_rev.as_ref().expect("fast path factor");
            let mut u = vec![C64::ZERO; k];
            for i in 0..k {
                let mut acc = self.t[n - 1 - i];
                for j in 0..i {
                    acc -= l[(i, j)] * u[j];
                }
                u[i] = acc / l[(i, i)];
            }
            self.counter.add((k * k / 2 + k) as u64);
            Ok(u[k - 1] / l[(k - 1, k - 1)])
        }
    }

    /// Commits a symbol for the current stage and cancels it.
    fn commit(&mut self, symbol: C64) {
        let k = self.stage;
        if symbol != C64::ZERO {
            let col = self.h_prime.col(k);
            self.y_r.axpy_sub(symbol, &col);
            let n = self.n();
            for j in 0..n {
                self.t[j] -= symbol * self.g0[(j, k)];
            }
            self.counter.add((col.len() + n) as u64);
        }
        self.decided.push(symbol);
        self.stage += 1;
    }

    /// (G0 + αI)⁻¹ for the shared rollout filter bank.
    fn bank(&mut self) -> Result<&ComplexMatrix> {
        if self.bank.is_none() {
            let n = self.n();
            let mut a = self.g0.clone();
            for i in 0..n {
                a[(i, i)] += C64::new(self.alpha, 0.0);
            }
            let inv = hermitian_solve(&a, &ComplexMatrix::identity(n))?;
            self.counter.add_hermitian_solve(n as u64, n as u64);
            self.bank = Some(inv);
        }
        Ok(self.bank.as_ref().unwrap())
    }

    /// Rolls out F feedback candidates for the current (unreliable) stage
    /// using the shared full-system filter bank, and returns the populated
    /// candidate matrix with per-column residuals.
    fn mf_rollout(&mut self, z: C64, f_candidates: usize) -> Result<(MfCandidateMatrix, Vec<f64>, usize)> {
        let n = self.n();
        let stage = self.stage;
        let points = self.constellation.points();
        if f_candidates < 2 || f_candidates > points.len() {
            return Err(Error::Domain(format!(
                "candidate count {f_candidates} outside 2..={}",
                points.len()
            )));
        }

        // F nearest points to z, ties by canonical order; the zero symbol is
        // forced into the set (replacing the farthest pick) if absent
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| {
            (z - points[a])
                .norm()
                .partial_cmp(&(z - points[b]).norm())
                .unwrap()
        });
        let mut chosen: Vec<C64> = order[..f_candidates].iter().map(|&i| points[i]).collect();
        if self.constellation.includes_zero() && !chosen.contains(&C64::ZERO) {
            let last = chosen.len() - 1;
            chosen[last] = C64::ZERO;
        }

        self.bank()?;
        let bank = self.bank.as_ref().unwrap();

        let mut b = ComplexMatrix::zeros(n, f_candidates);
        let mut residuals = Vec::with_capacity(f_candidates);
        let base_resid = self.y_r.norm_sq();
        self.counter.add(self.h_prime.rows() as u64);
        // residuals are tracked incrementally through the correlation vector:
        // cancelling symbol s of device j turns ‖y‖² into
        // ‖y‖² − 2Re(s*·t[j]) + |s|²·G[j,j]
        for (f, &cand) in chosen.iter().enumerate() {
            for (k, &d) in self.decided.iter().enumerate() {
                b[(k, f)] = d;
            }
            b[(stage, f)] = cand;
            let mut resid = base_resid;
            let mut t_f = self.t.clone();
            if cand != C64::ZERO {
                resid += cand.norm_sqr() * self.g0[(stage, stage)].re
                    - 2.0 * (cand.conj() * t_f[stage]).re;
                for j in 0..n {
                    t_f[j] -= cand * self.g0[(j, stage)];
                }
                self.counter.add(n as u64 + 3);
            }
            for j in stage + 1..n {
                let zj = bank.col(j).dot(&t_f);
                self.counter.add(n as u64);
                let (q, _) = quantize(zj, self.constellation);
                b[(j, f)] = q;
                if q != C64::ZERO {
                    resid += q.norm_sqr() * self.g0[(j, j)].re
                        - 2.0 * (q.conj() * t_f[j]).re;
                    for i in 0..n {
                        t_f[i] -= q * self.g0[(i, j)];
                    }
                    self.counter.add(n as u64 + 3);
                }
            }
            residuals.push(resid);
        }

        let mut best = 0;
        for f in 1..f_candidates {
            if residuals[f] < residuals[best] {
                best = f;
            }
        }

        // de-permute rows to original device order
        let mut b_orig = ComplexMatrix::zeros(n, f_candidates);
        for k in 0..n {
            for f in 0..f_candidates {
                b_orig[(self.perm[k], f)] = b[(k, f)];
            }
        }
        Ok((
            MfCandidateMatrix {
                b: b_orig,
                f: f_candidates,
            },
            residuals,
            best,
        ))
    }

    /// De-permutes the decided symbols back to original device order.
    fn finish(self) -> (ComplexVector, u64) {
        let n = self.n();
        debug_assert_eq!(self.decided.len(), n);
        let mut x_hat = ComplexVector::zeros(n);
        for k in 0..n {
            x_hat[self.perm[k]] = self.decided[k];
        }
        (x_hat, self.counter.0)
    }
}

/// Plain SIC on the zero-augmented system: per stage, regularized MMSE soft
/// estimate of the leading remaining device, quantization over the augmented
/// alphabet, and cancellation.
pub fn detect_sa_sic(
    y: &ComplexVector,
    h_hat: &ComplexMatrix,
    profile: &ActivityProfile,
    config: &SystemConfig,
    ordering: SicOrdering,
) -> Result<DetectionResult> {
    let options = ChainOptions {
        ordering,
        reweighting_epsilon: None,
    };
    let id = match ordering {
        SicOrdering::None => DetectorId::SaSic,
        SicOrdering::ChannelNorm => DetectorId::OrderedSaSic,
    };
    run_chain(y, h_hat, profile, config, options, id)
}

/// The SIC chain with the full per-stage regularized filter options (the
/// no-multi-feedback reference for the activity-aware detector).
pub fn detect_sa_sic_regularized(
    y: &ComplexVector,
    h_hat: &ComplexMatrix,
    profile: &ActivityProfile,
    config: &SystemConfig,
    options: ChainOptions,
) -> Result<DetectionResult> {
    run_chain(y, h_hat, profile, config, options, DetectorId::OrderedSaSic)
}

fn run_chain(
    y: &ComplexVector,
    h_hat: &ComplexMatrix,
    profile: &ActivityProfile,
    config: &SystemConfig,
    options: ChainOptions,
    id: DetectorId,
) -> Result<DetectionResult> {
    let mut chain = Chain::new(y, h_hat, profile, config, options)?;
    for _ in 0..config.n_devices {
        let z = chain.soft_estimate()?;
        let (q, _) = quantize(z, chain.constellation);
        chain.commit(q);
    }
    let (x_hat, mults) = chain.finish();
    Ok(DetectionResult {
        x_hat,
        mf_activations: 0,
        complex_mult_count: mults,
        detector_id: id,
    })
}

/// Activity-aware multi-feedback SIC. Like the ordered SIC chain, but each
/// soft estimate is screened by the reliability radius; unreliable devices
/// trigger a rollout of the F nearest augmented-alphabet candidates through
/// the remaining devices, and the candidate whose completed vector leaves the
/// smallest augmented residual is committed.
pub fn detect_aa_mf_sic(
    y: &ComplexVector,
    h_hat: &ComplexMatrix,
    profile: &ActivityProfile,
    config: &SystemConfig,
    options: AaMfSicOptions,
) -> Result<DetectionResult> {
    detect_aa_mf_sic_traced(y, h_hat, profile, config, options).map(|(r, _)| r)
}

/// As [`detect_aa_mf_sic`], additionally returning the rollout record of
/// every multi-feedback activation.
pub fn detect_aa_mf_sic_traced(
    y: &ComplexVector,
    h_hat: &ComplexMatrix,
    profile: &ActivityProfile,
    config: &SystemConfig,
    options: AaMfSicOptions,
) -> Result<(DetectionResult, Vec<MfRollout>)> {
    let points = config.constellation.points().len();
    if options.f_candidates < 2 || options.f_candidates > points {
        return Err(Error::Domain(format!(
            "candidate count {} outside 2..={points}",
            options.f_candidates
        )));
    }
    let mut chain = Chain::new(y, h_hat, profile, config, options.chain)?;
    let mut rollouts = Vec::new();
    for stage in 0..config.n_devices {
        let z = chain.soft_estimate()?;
        let (q, d_k) = quantize(z, chain.constellation);
        let nearest_is_zero = q == C64::ZERO;
        let d_th = sac_threshold(chain.lambda[stage], nearest_is_zero);
        let reliable = match options.sac_mode {
            SacMode::Distance => d_k <= d_th,
            SacMode::ComponentWise => {
                let diff = z - q;
                diff.re.abs() <= d_th && diff.im.abs() <= d_th
            }
            SacMode::ForceReliable => true,
            SacMode::ForceUnreliable => false,
        };
        if reliable {
            chain.commit(q);
        } else {
            let device = chain.perm[stage];
            let (candidates, residuals, best) = chain.mf_rollout(z, options.f_candidates)?;
            let committed = candidates.b[(device, best)];
            rollouts.push(MfRollout {
                device,
                candidates,
                residuals,
                best,
                decision: SacDecision {
                    d_k,
                    d_th,
                    nearest_is_zero,
                    reliable: false,
                },
            });
            chain.commit(committed);
        }
    }
    let (x_hat, mults) = chain.finish();
    Ok((
        DetectionResult {
            x_hat,
            mf_activations: rollouts.len(),
            complex_mult_count: mults,
            detector_id: DetectorId::AaMfSic,
        },
        rollouts,
    ))
}
