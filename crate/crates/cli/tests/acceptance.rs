//! Acceptance suite: one test per release criterion, each printing a single
//! PASS/FAIL line (visible with `cargo test -- --nocapture`).

use num_complex::Complex64 as C64;

use mtc_detect::complexity::{table1_count, Table1Count, Table1Detector, Table1Params};
use mtc_detect::detectors::{
    detect_aa_mf_sic, detect_kbest, detect_sa_sic, detect_sa_sic_asqrd, detect_sa_sic_regularized,
    regularized_filter, AaMfSicOptions, ChainOptions, DetectorId, SacMode, SicOrdering,
};
use mtc_detect::harness::{run_sweep, ExperimentSpec, SweepRow};
use mtc_detect::model::{
    draw_realization, make_activity_profile, zero_augment, AugmentedConstellation, SystemConfig,
};
use mtc_detect::numerics::{
    hermitian_solve, sample_complex_gaussian, ComplexMatrix, ComplexVector, RandomStream,
};

fn report(criterion: &str, outcome: Result<String, String>) {
    match &outcome {
        Ok(detail) => println!("[acceptance] {criterion}: PASS — {detail}"),
        Err(detail) => println!("[acceptance] {criterion}: FAIL — {detail}"),
    }
    if let Err(detail) = outcome {
        panic!("{criterion}: {detail}");
    }
}

fn nser_of(rows: &[SweepRow], id: DetectorId) -> f64 {
    rows.iter().find(|r| r.detector == id).unwrap().nser
}

fn qpsk_config(n: usize, m: usize, snr_db: f64, p: &[f64]) -> SystemConfig {
    SystemConfig::new(
        n,
        m,
        snr_db,
        AugmentedConstellation::qpsk_augmented(),
        make_activity_profile(p, 4).unwrap(),
    )
    .unwrap()
}

/// Criterion 1: at the large-system operating point (N=128, M=64, activity
/// in [0.1, 0.3], 16 dB) the paired NSER ordering holds across the detector
/// family, with the multi-feedback detector at most 0.8x the plain chain.
#[test]
fn c01_detector_ordering_large_system() {
    let spec = ExperimentSpec::snr_sweep(
        128,
        64,
        vec![
            DetectorId::Mmse,
            DetectorId::SaSic,
            DetectorId::OrderedSaSic,
            DetectorId::SaSicAsqrd,
            DetectorId::AaMfSic,
        ],
        &[16.0],
        500,
        11,
    );
    let rows = run_sweep(&spec).unwrap().rows;
    let mmse = nser_of(&rows, DetectorId::Mmse);
    let sa = nser_of(&rows, DetectorId::SaSic);
    let ordered = nser_of(&rows, DetectorId::OrderedSaSic);
    let asqrd = nser_of(&rows, DetectorId::SaSicAsqrd);
    let aa = nser_of(&rows, DetectorId::AaMfSic);
    let chain = format!(
        "aa-mf-sic {aa:.4} < a-sqrd {asqrd:.4} <= ordered {ordered:.4} <= sa-sic {sa:.4} < mmse {mmse:.4}"
    );
    let outcome = if aa < asqrd && asqrd <= ordered && ordered <= sa && sa < mmse && aa <= 0.8 * sa
    {
        Ok(format!("{chain}; ratio {:.3} <= 0.8", aa / sa))
    } else {
        Err(format!("{chain}; ratio {:.3}", aa / sa))
    };
    report("criterion 1 (detector ordering at N=128)", outcome);
}

/// Criterion 2: the exhaustive sparsity-MAP oracle dominates every detector
/// on small instances (5% slack), and the multi-feedback detector stays
/// within 2x of the oracle.
#[test]
fn c02_oracle_dominance() {
    let spec = ExperimentSpec::snr_sweep(
        4,
        8,
        DetectorId::ALL.to_vec(),
        &[20.0],
        2000,
        99,
    );
    let rows = run_sweep(&spec).unwrap().rows;
    let oracle = nser_of(&rows, DetectorId::SmapOracle);
    let aa = nser_of(&rows, DetectorId::AaMfSic);
    let mut failures = Vec::new();
    for row in &rows {
        if oracle > row.nser * 1.05 + 1e-12 {
            failures.push(format!("{} nser {:.5} < oracle {oracle:.5}", row.detector, row.nser));
        }
    }
    if aa > 2.0 * oracle {
        failures.push(format!("aa-mf-sic {aa:.5} > 2x oracle {oracle:.5}"));
    }
    let outcome = if failures.is_empty() {
        Ok(format!("oracle nser {oracle:.5}, aa-mf-sic {aa:.5}"))
    } else {
        Err(failures.join("; "))
    };
    report("criterion 2 (S-MAP oracle dominance)", outcome);
}

/// Criterion 3: forcing every reliability decision to "reliable" reduces
/// the multi-feedback detector bitwise to the ordered regularized chain.
#[test]
fn c03_multi_feedback_degeneration() {
    let mut stream = RandomStream::from_seed(303);
    let mut checked = 0usize;
    let mut outcome = Ok(());
    'outer: for instance in 0..100 {
        let n = 2 + (stream.uniform() * 15.0) as usize; // 2..=16
        let m = 1 + (stream.uniform() * (n + 4) as f64) as usize;
        let snr = stream.uniform() * 20.0;
        let p: Vec<f64> = (0..n).map(|_| 0.05 + 0.55 * stream.uniform()).collect();
        let cfg = qpsk_config(n, m, snr, &p);
        let (ch, tx) = draw_realization(&cfg, &mut stream).unwrap();

        let mut options = AaMfSicOptions::with_full_candidates(&cfg.constellation);
        options.sac_mode = SacMode::ForceReliable;
        let a = detect_aa_mf_sic(&tx.y, &ch.h_hat, &cfg.activity, &cfg, options).unwrap();
        let b = detect_sa_sic_regularized(
            &tx.y,
            &ch.h_hat,
            &cfg.activity,
            &cfg,
            ChainOptions::default(),
        )
        .unwrap();
        for k in 0..n {
            if a.x_hat[k] != b.x_hat[k] {
                outcome = Err(format!(
                    "instance {instance} (N={n}, M={m}): device {k} differs"
                ));
                break 'outer;
            }
        }
        checked += 1;
    }
    report(
        "criterion 3 (force-reliable degenerates to ordered chain)",
        outcome.map(|_| format!("{checked} instances bitwise equal")),
    );
}

/// Criterion 4: the per-stage regularized filter with zero activity penalty
/// and zero reweighting equals the plain MMSE filter to 1e-10.
#[test]
fn c04_filter_degeneration() {
    let mut stream = RandomStream::from_seed(404);
    let mut worst = 0.0f64;
    let mut outcome = Ok(());
    for instance in 0..100 {
        let m = 2 + (stream.uniform() * 7.0) as usize;
        let cols = 1 + (stream.uniform() * 6.0) as usize;
        let target = (stream.uniform() * cols as f64) as usize;
        let sigma_n2 = 0.01 + stream.uniform();
        let h = sample_complex_gaussian(&mut stream, m, cols, 1.0).unwrap();

        let w = regularized_filter(&h, target, 0.0, sigma_n2, 1.0, &vec![0.0; m]).unwrap();

        // plain MMSE filter for the same column: (HH^H + sigma_n^2 I)^-1 h_t
        let mut a = h.mul(&h.conj_transpose()).unwrap();
        for i in 0..m {
            a[(i, i)] += C64::new(sigma_n2, 0.0);
        }
        let rhs =
            ComplexMatrix::from_rows(m, 1, h.col(target).entries().to_vec()).unwrap();
        let w_ref = hermitian_solve(&a, &rhs).unwrap().col(0);
        for i in 0..m {
            let d = (w[i] - w_ref[i]).norm();
            worst = worst.max(d);
            if d > 1e-10 {
                outcome = Err(format!(
                    "instance {instance}: element {i} deviates by {d:.2e}"
                ));
            }
        }
        if outcome.is_err() {
            break;
        }
    }
    report(
        "criterion 4 (zero-penalty filter equals plain MMSE)",
        outcome.map(|_| format!("100 instances, max deviation {worst:.2e}")),
    );
}

/// Criterion 5: the K-Best search collapses correctly at both extremes:
/// K=1 equals the sorted-QR SIC, and a full-width K equals exhaustive
/// minimization of the augmented residual.
#[test]
fn c05_kbest_collapse() {
    let mut stream = RandomStream::from_seed(505);
    let mut outcome: Result<(), String> = Ok(());

    // K = 1 on 50 random N=4 instances
    let cfg4 = qpsk_config(4, 8, 8.0, &[0.2; 4]);
    for instance in 0..50 {
        let (ch, tx) = draw_realization(&cfg4, &mut stream).unwrap();
        let a = detect_sa_sic_asqrd(&tx.y, &ch.h_hat, &cfg4.activity, &cfg4).unwrap();
        let b = detect_kbest(&tx.y, &ch.h_hat, &cfg4.activity, &cfg4, 1).unwrap();
        if a.x_hat != b.x_hat {
            outcome = Err(format!("K=1 instance {instance} differs from sorted-QR SIC"));
            break;
        }
    }

    // K = |A0|^N on 50 random N=3 instances vs exhaustive surrogate search
    if outcome.is_ok() {
        let n = 3;
        let cfg3 = qpsk_config(n, 4, 6.0, &[0.2; 3]);
        let points = cfg3.constellation.points();
        'outer: for instance in 0..50 {
            let (ch, tx) = draw_realization(&cfg3, &mut stream).unwrap();
            let r = detect_kbest(&tx.y, &ch.h_hat, &cfg3.activity, &cfg3, 5usize.pow(3)).unwrap();
            let aug =
                zero_augment(&tx.y, &ch.h_hat, &cfg3.activity, cfg3.noise_variance()).unwrap();
            let mut best = ComplexVector::zeros(n);
            let mut best_cost = f64::INFINITY;
            for i in 0..points.len().pow(n as u32) {
                let mut idx = i;
                let mut x = ComplexVector::zeros(n);
                for k in 0..n {
                    x[k] = points[idx % points.len()];
                    idx /= points.len();
                }
                let mut res = aug.y0.clone();
                for k in 0..n {
                    if x[k] != C64::ZERO {
                        res.axpy_sub(x[k], &aug.h_prime.col(k));
                    }
                }
                if res.norm_sq() < best_cost {
                    best_cost = res.norm_sq();
                    best = x;
                }
            }
            for k in 0..n {
                if r.x_hat[k] != best[k] {
                    outcome = Err(format!(
                        "full-K instance {instance}: device {k} differs from exhaustive"
                    ));
                    break 'outer;
                }
            }
        }
    }
    report(
        "criterion 5 (K-Best collapses at K=1 and full K)",
        outcome.map(|_| "50 K=1 instances and 50 full-K instances bitwise equal".into()),
    );
}

/// Criterion 6: with zero noise and orthonormal columns (N <= M), every
/// SIC-family detector recovers the transmitted vector exactly.
#[test]
fn c06_noiseless_orthogonal_exactness() {
    let mut stream = RandomStream::from_seed(606);
    let mut errors = 0u64;
    let mut outcome: Result<(), String> = Ok(());
    'outer: for trial in 0..100 {
        let n = 2 + (stream.uniform() * 5.0) as usize; // 2..=6
        let m = n + (stream.uniform() * 4.0) as usize;
        let cfg = qpsk_config(n, m, f64::INFINITY, &vec![0.2; n]);

        // orthonormal columns from Gram-Schmidt on a random matrix
        let g = sample_complex_gaussian(&mut stream, m, n, 1.0).unwrap();
        let mut h = ComplexMatrix::zeros(m, n);
        for j in 0..n {
            let mut v = g.col(j);
            for i in 0..j {
                let hi = h.col(i);
                let proj = hi.dot(&v);
                v.axpy_sub(proj, &hi);
            }
            let norm = v.norm_sq().sqrt();
            for r in 0..m {
                h[(r, j)] = v[r] / norm;
            }
        }

        // transmitted vector with the profile's activity
        let points = cfg.constellation.nonzero_points();
        let mut x = ComplexVector::zeros(n);
        for k in 0..n {
            if stream.uniform() < 0.2 {
                x[k] = points[stream.index(points.len())];
            }
        }
        let y = h.mul_vec(&x).unwrap(); // sigma_n^2 = 0: no noise term

        let results = [
            detect_sa_sic(&y, &h, &cfg.activity, &cfg, SicOrdering::None).unwrap(),
            detect_sa_sic(&y, &h, &cfg.activity, &cfg, SicOrdering::ChannelNorm).unwrap(),
            detect_sa_sic_asqrd(&y, &h, &cfg.activity, &cfg).unwrap(),
            detect_aa_mf_sic(
                &y,
                &h,
                &cfg.activity,
                &cfg,
                AaMfSicOptions::with_full_candidates(&cfg.constellation),
            )
            .unwrap(),
        ];
        for r in &results {
            for k in 0..n {
                if r.x_hat[k] != x[k] {
                    errors += 1;
                    outcome = Err(format!(
                        "trial {trial}: {} missed device {k}",
                        r.detector_id
                    ));
                    break 'outer;
                }
            }
        }
    }
    report(
        "criterion 6 (noiseless orthogonal exactness)",
        outcome.map(|_| format!("100 trials, {errors} symbol errors across the SIC family")),
    );
}

/// Criterion 7: with paired seeds at 16 dB, channel-estimate error variance
/// 0.1 never improves any detector over perfect CSI.
#[test]
fn c07_csi_degradation() {
    let detectors = DetectorId::ALL.to_vec();
    let perfect = ExperimentSpec::csi_snr_sweep(6, 4, detectors.clone(), &[16.0], 0.0, 500, 777);
    let noisy = ExperimentSpec::csi_snr_sweep(6, 4, detectors.clone(), &[16.0], 0.1, 500, 777);
    let rows_p = run_sweep(&perfect).unwrap().rows;
    let rows_n = run_sweep(&noisy).unwrap().rows;
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    for &id in &detectors {
        let a = nser_of(&rows_p, id);
        let b = nser_of(&rows_n, id);
        summary.push(format!("{id} {a:.4}->{b:.4}"));
        if b < a {
            failures.push(format!("{id}: {b:.4} < {a:.4}"));
        }
    }
    let outcome = if failures.is_empty() {
        Ok(summary.join(", "))
    } else {
        Err(failures.join("; "))
    };
    report("criterion 7 (imperfect CSI never helps)", outcome);
}

/// Criterion 8: the multi-feedback detector's measured multiplication count
/// falls with SNR, and the closed-form table matches hand arithmetic.
#[test]
fn c08_complexity_direction_and_formulas() {
    let mut outcome: Result<(), String> = Ok(());

    // measured direction at N=32, M=16, 200 trials per SNR
    let mut totals = [0u64; 2];
    for (which, snr) in [0.0f64, 20.0].iter().enumerate() {
        let cfg = qpsk_config(32, 16, *snr, &[0.1; 32]);
        let mut stream = RandomStream::from_seed(515);
        for _ in 0..200 {
            let (ch, tx) = draw_realization(&cfg, &mut stream).unwrap();
            let r = detect_aa_mf_sic(
                &tx.y,
                &ch.h_hat,
                &cfg.activity,
                &cfg,
                AaMfSicOptions::with_full_candidates(&cfg.constellation),
            )
            .unwrap();
            totals[which] += r.complex_mult_count;
        }
    }
    if totals[1] >= totals[0] {
        outcome = Err(format!(
            "measured mults at 20 dB ({}) not below 0 dB ({})",
            totals[1], totals[0]
        ));
    }

    // closed-form hand arithmetic at N in {1, 2, 128}
    let single = |d, p| match table1_count(d, p).unwrap() {
        Table1Count::Single(v) => v,
        Table1Count::Range { .. } => panic!("expected single count"),
    };
    let p1 = Table1Params::new(1, 1);
    let p2 = Table1Params::new(2, 4);
    let p128 = Table1Params::new(128, 64);
    let checks = [
        (single(Table1Detector::Mmse, p1), 5.0),
        (single(Table1Detector::Mmse, p2), 15.0),
        (single(Table1Detector::Mmse, p128), 49281.0),
        (single(Table1Detector::SaSic, p1), 33.0 / 6.0),
        (single(Table1Detector::SaSic, p2), 18.0),
        (single(Table1Detector::SaSic, p128), 1079061.0),
        (single(Table1Detector::SaSicAsqrd, p2), 62.0),
        (
            single(Table1Detector::KBest, p1),
            20.0 + 5.0 * 5f64.log2().powi(2),
        ),
    ];
    if outcome.is_ok() {
        for (i, (got, want)) in checks.iter().enumerate() {
            if (got - want).abs() > 1e-9 {
                outcome = Err(format!("formula check {i}: got {got}, want {want}"));
                break;
            }
        }
    }
    if outcome.is_ok() {
        match table1_count(Table1Detector::AaMfSic, p128).unwrap() {
            Table1Count::Range { high_snr, low_snr } => {
                if high_snr != 1079061.0 || low_snr != 1079061.0 + 10.0 * 128.0 * 128.0 {
                    outcome = Err(format!("bound pair ({high_snr}, {low_snr}) wrong"));
                }
            }
            _ => outcome = Err("multi-feedback entry should be a bound pair".into()),
        }
    }
    report(
        "criterion 8 (complexity direction and hand arithmetic)",
        outcome.map(|_| {
            format!(
                "measured 20 dB {} < 0 dB {}; 8 formula spot checks exact",
                totals[1], totals[0]
            )
        }),
    );
}

/// Criterion 9: the same invocation twice produces byte-identical CSV,
/// including with the parallel trial executor engaged.
#[test]
fn c09_byte_identical_csv() {
    let dir = std::env::temp_dir().join("mtc-sim-acceptance-c9");
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let run = |label: &str| {
        let out = std::process::Command::new(env!("CARGO_BIN_EXE_mtc-sim"))
            .args([
                "sweep-snr",
                "--devices",
                "16",
                "--spreading",
                "8",
                "--detectors",
                "mmse,ordered-sa-sic,k-best,aa-mf-sic",
                "--snr",
                "0:8:16",
                "--trials",
                "200",
                "--seed",
                "2718",
                "--out-dir",
                dir.to_str().unwrap(),
                "--label",
                label,
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(dir.join(format!("{label}.csv"))).unwrap()
    };
    let a = run("first");
    let b = run("second");
    let outcome = if a == b {
        Ok(format!("{} CSV bytes identical across runs", a.len()))
    } else {
        Err("CSV bytes differ between identical invocations".into())
    };
    report("criterion 9 (byte-identical reruns)", outcome);
}

/// Criterion 10: the fig5 activity-sweep preset completes at 500 trials and
/// emits both the multi-feedback and genie-aided curves; the crossover
/// point (if any) is reported, not asserted.
#[test]
fn c10_activity_sweep_crossover() {
    let dir = std::env::temp_dir().join("mtc-sim-acceptance-c10");
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_mtc-sim"))
        .args([
            "sweep-activity",
            "--preset",
            "fig5",
            "--trials",
            "500",
            "--seed",
            "5",
            "--out-dir",
            dir.to_str().unwrap(),
            "--label",
            "fig5",
        ])
        .output()
        .unwrap();
    let mut outcome: Result<String, String> = Ok(String::new());
    if !out.status.success() {
        outcome = Err(format!(
            "fig5 run failed: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }

    let mut curves: std::collections::BTreeMap<String, Vec<(f64, f64)>> = Default::default();
    if outcome.is_ok() {
        let csv = std::fs::read_to_string(dir.join("fig5.csv")).unwrap();
        for line in csv.lines().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            curves
                .entry(fields[0].to_string())
                .or_default()
                .push((fields[2].parse().unwrap(), fields[7].parse().unwrap()));
        }
        for id in ["aa-mf-sic", "oracle-mmse"] {
            let points = curves.get(id).map(Vec::len).unwrap_or(0);
            if points != 9 {
                outcome = Err(format!("curve {id} has {points} points, expected 9"));
            }
        }
    }
    if outcome.is_ok() {
        let aa = &curves["aa-mf-sic"];
        let oracle = &curves["oracle-mmse"];
        let crossover = aa
            .iter()
            .zip(oracle)
            .find(|((_, a), (_, o))| a <= o)
            .map(|((p, _), _)| *p);
        let note = match crossover {
            Some(p) => format!("multi-feedback matches the genie-aided bound from p = {p}"),
            None => "no crossover observed on this grid (reported, not a failure)".into(),
        };
        outcome = Ok(format!("both curves emitted over 9 activity points; {note}"));
    }
    report("criterion 10 (fig5 activity sweep completes)", outcome);
}
