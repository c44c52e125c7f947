//! Python bindings: activity profiles, quantization and reliability
//! thresholds, closed-form complexity counts, single-shot detection, and the
//! Monte Carlo sweep harness (spec and result carried as JSON).

use num_complex::Complex64 as C64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use mtc_detect::complexity::{table1_count, Table1Count, Table1Detector, Table1Params};
use mtc_detect::detectors::{
    detect_aa_mf_sic, detect_kbest, detect_mmse, detect_oracle_mmse, detect_sa_sic,
    detect_sa_sic_asqrd, detect_smap_oracle, quantize, sac_threshold, AaMfSicOptions, DetectorId,
    SicOrdering,
};
use mtc_detect::harness::{run_sweep, ExperimentSpec};
use mtc_detect::model::{make_activity_profile, AugmentedConstellation, SystemConfig};
use mtc_detect::numerics::{ComplexMatrix, ComplexVector};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Per-device activity priors and the log-odds regularization weights
/// derived from them.
#[pyclass(name = "ActivityProfile", skip_from_py_object)]
#[derive(Clone)]
struct PyActivityProfile {
    #[pyo3(get)]
    p: Vec<f64>,
    #[pyo3(get, name = "lambdas")]
    lambda: Vec<f64>,
}

/// Builds an activity profile: lambda_n = ln((1 - p_n) * |A| / p_n) for a
/// nonzero alphabet of the given size.
#[pyfunction]
#[pyo3(name = "make_activity_profile")]
fn py_make_activity_profile(p: Vec<f64>, alphabet_size: usize) -> PyResult<PyActivityProfile> {
    let profile = make_activity_profile(&p, alphabet_size).map_err(value_err)?;
    Ok(PyActivityProfile {
        p: profile.p,
        lambda: profile.lambda,
    })
}

/// Nearest point of the zero-augmented QPSK alphabet and the distance to it.
#[pyfunction]
#[pyo3(name = "quantize")]
fn py_quantize(z: C64) -> (C64, f64) {
    quantize(z, &AugmentedConstellation::qpsk_augmented())
}

/// Reliability radius for a soft estimate with the given regularization
/// weight: 1/lambda when the nearest point is zero, 1 - 1/lambda otherwise,
/// clamped to [0, 1].
#[pyfunction]
#[pyo3(name = "sac_threshold")]
fn py_sac_threshold(lambda_n: f64, nearest_is_zero: bool) -> f64 {
    sac_threshold(lambda_n, nearest_is_zero)
}

/// Closed-form complex-multiplication count for one detected vector,
/// returned as a (low, high) pair (equal for single-valued entries).
#[pyfunction]
#[pyo3(name = "table1_count", signature = (detector, n, m, k=1, l=1, alphabet_size=5))]
fn py_table1_count(
    detector: &str,
    n: usize,
    m: usize,
    k: usize,
    l: usize,
    alphabet_size: usize,
) -> PyResult<(f64, f64)> {
    let entry = match detector {
        "ir" => Table1Detector::Ir,
        other => {
            let id = DetectorId::parse(other)
                .ok_or_else(|| value_err(format!("unknown detector `{other}`")))?;
            Table1Detector::try_from(id).map_err(value_err)?
        }
    };
    let params = Table1Params {
        n,
        m,
        k,
        l,
        alphabet_size,
    };
    match table1_count(entry, params).map_err(value_err)? {
        Table1Count::Single(v) => Ok((v, v)),
        Table1Count::Range { high_snr, low_snr } => Ok((high_snr, low_snr)),
    }
}

/// Runs one detector on a single observation. `h` is the channel estimate
/// in row-major order (spreading x devices). `active_set` is required by
/// the genie-aided detector and ignored otherwise. Returns a dict with
/// `x_hat`, `mf_activations`, and `complex_mult_count`.
#[pyfunction]
#[pyo3(name = "detect", signature = (detector, y, h, p, snr_db, active_set=None, kbest_k=4, mf_candidates=5))]
#[allow(clippy::too_many_arguments)]
fn py_detect(
    py: Python<'_>,
    detector: &str,
    y: Vec<C64>,
    h: Vec<Vec<C64>>,
    p: Vec<f64>,
    snr_db: f64,
    active_set: Option<Vec<usize>>,
    kbest_k: usize,
    mf_candidates: usize,
) -> PyResult<Py<pyo3::types::PyDict>> {
    let id = DetectorId::parse(detector)
        .ok_or_else(|| value_err(format!("unknown detector `{detector}`")))?;
    let spreading = h.len();
    let devices = h.first().map(Vec::len).unwrap_or(0);
    if h.iter().any(|row| row.len() != devices) {
        return Err(value_err("channel rows have inconsistent lengths"));
    }
    let h =
        ComplexMatrix::from_rows(spreading, devices, h.into_iter().flatten().collect())
            .map_err(value_err)?;
    let y = ComplexVector::new(y);
    let constellation = AugmentedConstellation::qpsk_augmented();
    let profile =
        make_activity_profile(&p, constellation.alphabet_size()).map_err(value_err)?;
    let config = SystemConfig::new(devices, spreading, snr_db, constellation.clone(), profile)
        .map_err(value_err)?;

    let result = match id {
        DetectorId::Mmse => detect_mmse(&y, &h, &config),
        DetectorId::OracleMmse => {
            let active = active_set
                .ok_or_else(|| value_err("oracle-mmse requires active_set"))?;
            detect_oracle_mmse(&y, &h, &active, &config)
        }
        DetectorId::SaSic => detect_sa_sic(&y, &h, &config.activity, &config, SicOrdering::None),
        DetectorId::OrderedSaSic => {
            detect_sa_sic(&y, &h, &config.activity, &config, SicOrdering::ChannelNorm)
        }
        DetectorId::SaSicAsqrd => detect_sa_sic_asqrd(&y, &h, &config.activity, &config),
        DetectorId::KBest => detect_kbest(&y, &h, &config.activity, &config, kbest_k),
        DetectorId::AaMfSic => {
            let mut options = AaMfSicOptions::with_full_candidates(&constellation);
            options.f_candidates = mf_candidates;
            detect_aa_mf_sic(&y, &h, &config.activity, &config, options)
        }
        DetectorId::SmapOracle => detect_smap_oracle(&y, &h, &config.activity, &config),
    }
    .map_err(value_err)?;

    let dict = pyo3::types::PyDict::new(py);
    dict.set_item("x_hat", result.x_hat.entries().to_vec())?;
    dict.set_item("mf_activations", result.mf_activations)?;
    dict.set_item("complex_mult_count", result.complex_mult_count)?;
    Ok(dict.into())
}

/// Runs a full Monte Carlo sweep. The spec is the JSON form of the harness
/// `ExperimentSpec`; the result JSON carries the per-(detector, point) rows
/// and the wall time.
#[pyfunction]
#[pyo3(name = "run_sweep")]
fn py_run_sweep(py: Python<'_>, spec_json: &str) -> PyResult<String> {
    let spec: ExperimentSpec = serde_json::from_str(spec_json).map_err(value_err)?;
    let result = py
        .detach(|| run_sweep(&spec))
        .map_err(value_err)?;
    serde_json::to_string(&result).map_err(value_err)
}

#[pymodule]
fn mtc_detect_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyActivityProfile>()?;
    m.add_function(wrap_pyfunction!(py_make_activity_profile, m)?)?;
    m.add_function(wrap_pyfunction!(py_quantize, m)?)?;
    m.add_function(wrap_pyfunction!(py_sac_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(py_table1_count, m)?)?;
    m.add_function(wrap_pyfunction!(py_detect, m)?)?;
    m.add_function(wrap_pyfunction!(py_run_sweep, m)?)?;
    m.add(
        "DETECTORS",
        DetectorId::ALL.iter().map(|d| d.as_str()).collect::<Vec<_>>(),
    )?;
    Ok(())
}
