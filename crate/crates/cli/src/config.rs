//! Experiment configuration: flag parsing, JSON config files, presets, and
//! their resolution into a harness `ExperimentSpec`.
//!
//! Precedence: command-line flags override the JSON config file, which
//! overrides the preset, which overrides built-in defaults.

use std::path::PathBuf;

use clap::Args;
use serde::Deserialize;

use mtc_detect::detectors::DetectorId;
use mtc_detect::harness::{ExperimentSpec, NserMode, PRedraw};

use crate::axis::parse_axis;
use crate::UsageError;

/// Which quantity the subcommand sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Snr,
    Activity,
    Csi,
}

impl SweepKind {
    pub fn command_name(&self) -> &'static str {
        match self {
            SweepKind::Snr => "sweep-snr",
            SweepKind::Activity => "sweep-activity",
            SweepKind::Csi => "sweep-csi",
        }
    }
}

/// Flags shared by every sweep subcommand. Unset flags fall back to the
/// config file, then the preset, then built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    /// Named preset experiment (fig4 for sweep-snr, fig5 for
    /// sweep-activity, fig6 for sweep-csi).
    #[arg(long)]
    pub preset: Option<String>,
    /// JSON config file; keys mirror the long flag names.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of devices N.
    #[arg(long)]
    pub devices: Option<usize>,
    /// Spreading length M.
    #[arg(long)]
    pub spreading: Option<usize>,
    /// Comma-separated detector names (e.g. mmse,sa-sic,aa-mf-sic).
    #[arg(long, value_delimiter = ',')]
    pub detectors: Option<Vec<String>>,
    /// SNR axis in dB: value, comma list, or start:step:end.
    #[arg(long)]
    pub snr: Option<String>,
    /// Activity-probability axis (sweep-activity only).
    #[arg(long)]
    pub p: Option<String>,
    /// Lower bound of the per-device activity draw.
    #[arg(long)]
    pub p_min: Option<f64>,
    /// Upper bound of the per-device activity draw.
    #[arg(long)]
    pub p_max: Option<f64>,
    /// Channel-estimate error variance (sweep-csi only).
    #[arg(long)]
    pub csi_error_var: Option<f64>,
    /// Monte Carlo trials per axis point.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Master seed; the whole run is a deterministic function of it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// NSER normalization: active_only or errors_over_active.
    #[arg(long)]
    pub nser_mode: Option<String>,
    /// Activity-draw cadence: per_experiment or per_trial.
    #[arg(long)]
    pub p_redraw: Option<String>,
    /// Path width K for the K-Best detector.
    #[arg(long)]
    pub kbest_k: Option<usize>,
    /// Candidate-list size for the multi-feedback detector.
    #[arg(long)]
    pub mf_candidates: Option<usize>,
    /// Output directory (default: $MTC_SIM_OUTPUT_DIR, then the cwd).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Basename for the CSV and manifest files.
    #[arg(long)]
    pub label: Option<String>,
}

/// One layer of configuration; `None` fields defer to the next layer down.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub devices: Option<usize>,
    pub spreading: Option<usize>,
    pub detectors: Option<Vec<String>>,
    pub snr: Option<String>,
    pub p: Option<String>,
    pub p_min: Option<f64>,
    pub p_max: Option<f64>,
    pub csi_error_var: Option<f64>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub nser_mode: Option<String>,
    pub p_redraw: Option<String>,
    pub kbest_k: Option<usize>,
    pub mf_candidates: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub label: Option<String>,
}

impl ConfigLayer {
    /// Takes every `Some` field of `over` in preference to `self`.
    fn overlay(mut self, over: ConfigLayer) -> ConfigLayer {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if over.$field.is_some() { self.$field = over.$field; })*
            };
        }
        take!(
            devices,
            spreading,
            detectors,
            snr,
            p,
            p_min,
            p_max,
            csi_error_var,
            trials,
            seed,
            nser_mode,
            p_redraw,
            kbest_k,
            mf_candidates,
            out_dir,
            label
        );
        self
    }

    fn from_args(args: &SweepArgs) -> ConfigLayer {
        ConfigLayer {
            devices: args.devices,
            spreading: args.spreading,
            detectors: args.detectors.clone(),
            snr: args.snr.clone(),
            p: args.p.clone(),
            p_min: args.p_min,
            p_max: args.p_max,
            csi_error_var: args.csi_error_var,
            trials: args.trials,
            seed: args.seed,
            nser_mode: args.nser_mode.clone(),
            p_redraw: args.p_redraw.clone(),
            kbest_k: args.kbest_k,
            mf_candidates: args.mf_candidates,
            out_dir: args.out_dir.clone(),
            label: args.label.clone(),
        }
    }
}

/// Detectors with tractable cost at large N (everything but the exhaustive
/// oracle, whose search space is |A0|^N).
fn scalable_detectors() -> Vec<String> {
    [
        DetectorId::Mmse,
        DetectorId::OracleMmse,
        DetectorId::SaSic,
        DetectorId::OrderedSaSic,
        DetectorId::SaSicAsqrd,
        DetectorId::KBest,
        DetectorId::AaMfSic,
    ]
    .iter()
    .map(|d| d.as_str().to_string())
    .collect()
}

fn defaults(kind: SweepKind) -> ConfigLayer {
    ConfigLayer {
        devices: Some(16),
        spreading: Some(8),
        detectors: Some(scalable_detectors()),
        snr: Some(match kind {
            SweepKind::Activity => "16".into(),
            _ => "0:2:20".into(),
        }),
        p: Some("0.1:0.1:0.9".into()),
        p_min: Some(0.1),
        p_max: Some(0.3),
        csi_error_var: Some(0.0),
        trials: Some(1000),
        seed: Some(1),
        nser_mode: Some("active_only".into()),
        p_redraw: Some("per_experiment".into()),
        kbest_k: Some(4),
        mf_candidates: Some(5),
        out_dir: None,
        label: None,
    }
}

fn preset(kind: SweepKind, name: &str) -> Result<ConfigLayer, UsageError> {
    // the large-system reference scenarios: 128 devices over 64 chips
    let large = ConfigLayer {
        devices: Some(128),
        spreading: Some(64),
        trials: Some(10000),
        ..ConfigLayer::default()
    };
    match (kind, name) {
        (SweepKind::Snr, "fig4") => Ok(ConfigLayer {
            detectors: Some(scalable_detectors()),
            snr: Some("0:2:20".into()),
            p_min: Some(0.1),
            p_max: Some(0.3),
            ..large
        }),
        (SweepKind::Activity, "fig5") => Ok(ConfigLayer {
            // the activity sweep tracks the genie-aided bound against the
            // multi-feedback detector, the pair whose crossover matters
            detectors: Some(vec!["oracle-mmse".into(), "aa-mf-sic".into()]),
            snr: Some("16".into()),
            p: Some("0.1:0.1:0.9".into()),
            ..large
        }),
        (SweepKind::Csi, "fig6") => Ok(ConfigLayer {
            detectors: Some(scalable_detectors()),
            snr: Some("0:2:20".into()),
            p_min: Some(0.1),
            p_max: Some(0.3),
            csi_error_var: Some(0.1),
            ..large
        }),
        _ => Err(UsageError(format!(
            "unknown preset `{name}` for {}",
            kind.command_name()
        ))),
    }
}

/// A fully resolved run: the harness spec plus output bookkeeping.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub kind: SweepKind,
    pub preset: Option<String>,
    pub spec: ExperimentSpec,
    pub out_dir: PathBuf,
    pub label: String,
}

fn parse_detectors(names: &[String]) -> Result<Vec<DetectorId>, UsageError> {
    if names.is_empty() {
        return Err(UsageError("detector list is empty".into()));
    }
    names
        .iter()
        .map(|n| {
            DetectorId::parse(n.trim())
                .ok_or_else(|| UsageError(format!("unknown detector `{n}`")))
        })
        .collect()
}

fn parse_nser_mode(s: &str) -> Result<NserMode, UsageError> {
    match s {
        "active_only" => Ok(NserMode::ActiveOnly),
        "errors_over_active" => Ok(NserMode::ErrorsOverActive),
        _ => Err(UsageError(format!("unknown nser mode `{s}`"))),
    }
}

fn parse_p_redraw(s: &str) -> Result<PRedraw, UsageError> {
    match s {
        "per_experiment" => Ok(PRedraw::PerExperiment),
        "per_trial" => Ok(PRedraw::PerTrial),
        _ => Err(UsageError(format!("unknown p-redraw mode `{s}`"))),
    }
}

/// Resolves flags, config file, and preset into a runnable description.
pub fn resolve(kind: SweepKind, args: &SweepArgs) -> Result<ResolvedRun, UsageError> {
    let mut layer = defaults(kind);
    if let Some(name) = &args.preset {
        layer = layer.overlay(preset(kind, name)?);
    }
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        let file: ConfigLayer = serde_json::from_str(&text)
            .map_err(|e| UsageError(format!("bad config {}: {e}", path.display())))?;
        layer = layer.overlay(file);
    }
    layer = layer.overlay(ConfigLayer::from_args(args));

    let devices = layer.devices.unwrap();
    let spreading = layer.spreading.unwrap();
    if devices == 0 || spreading == 0 {
        return Err(UsageError("devices and spreading must be positive".into()));
    }
    let detectors = parse_detectors(&layer.detectors.unwrap())?;
    let trials = layer.trials.unwrap();
    if trials == 0 {
        return Err(UsageError("need at least one trial".into()));
    }
    let seed = layer.seed.unwrap();
    let snr = parse_axis(&layer.snr.unwrap()).map_err(UsageError)?;
    let p_min = layer.p_min.unwrap();
    let p_max = layer.p_max.unwrap();
    if !(p_min > 0.0 && p_max < 1.0 && p_min <= p_max) {
        return Err(UsageError(format!(
            "activity range ({p_min}, {p_max}) must lie inside (0, 1)"
        )));
    }

    let mut spec = match kind {
        SweepKind::Snr => {
            ExperimentSpec::snr_sweep(devices, spreading, detectors, &snr, trials, seed)
        }
        SweepKind::Activity => {
            let p_values = parse_axis(&layer.p.unwrap()).map_err(UsageError)?;
            for &p in &p_values {
                if !(p > 0.0 && p < 1.0) {
                    return Err(UsageError(format!(
                        "activity probability {p} outside (0, 1)"
                    )));
                }
            }
            ExperimentSpec::activity_sweep(
                devices, spreading, detectors, &p_values, &snr, trials, seed,
            )
        }
        SweepKind::Csi => {
            let var = layer.csi_error_var.unwrap();
            if var < 0.0 {
                return Err(UsageError(format!(
                    "CSI error variance must be nonnegative, got {var}"
                )));
            }
            ExperimentSpec::csi_snr_sweep(devices, spreading, detectors, &snr, var, trials, seed)
        }
    };
    spec.p_range = (p_min, p_max);
    spec.nser_mode = parse_nser_mode(&layer.nser_mode.unwrap())?;
    spec.p_redraw = parse_p_redraw(&layer.p_redraw.unwrap())?;
    spec.kbest_k = layer.kbest_k.unwrap();
    spec.mf_candidates = layer.mf_candidates.unwrap();
    if spec.kbest_k == 0 {
        return Err(UsageError("kbest-k must be positive".into()));
    }
    if spec.mf_candidates == 0 {
        return Err(UsageError("mf-candidates must be positive".into()));
    }

    let out_dir = layer
        .out_dir
        .or_else(|| std::env::var_os("MTC_SIM_OUTPUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let label = layer
        .label
        .unwrap_or_else(|| format!("{}-seed{}", kind.command_name(), seed));

    Ok(ResolvedRun {
        kind,
        preset: args.preset.clone(),
        spec,
        out_dir,
        label,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args() -> SweepArgs {
        SweepArgs::default()
    }

    #[test]
    fn defaults_resolve() {
        let run = resolve(SweepKind::Snr, &args()).unwrap();
        assert_eq!(run.spec.n_devices, 16);
        assert_eq!(run.spec.points.len(), 11);
        assert_eq!(run.label, "sweep-snr-seed1");
    }

    #[test]
    fn flags_override_preset() {
        let mut a = args();
        a.preset = Some("fig4".into());
        a.trials = Some(500);
        a.seed = Some(9);
        let run = resolve(SweepKind::Snr, &a).unwrap();
        assert_eq!(run.spec.n_devices, 128);
        assert_eq!(run.spec.spreading, 64);
        assert_eq!(run.spec.trials, 500);
        assert_eq!(run.spec.master_seed, 9);
        assert_eq!(run.spec.p_range, (0.1, 0.3));
    }

    #[test]
    fn fig5_has_crossover_pair() {
        let mut a = args();
        a.preset = Some("fig5".into());
        let run = resolve(SweepKind::Activity, &a).unwrap();
        assert!(run.spec.detectors.contains(&DetectorId::OracleMmse));
        assert!(run.spec.detectors.contains(&DetectorId::AaMfSic));
        assert_eq!(run.spec.points.len(), 9);
        assert!(run.spec.points.iter().all(|pt| pt.snr_db == 16.0));
    }

    #[test]
    fn preset_must_match_subcommand() {
        let mut a = args();
        a.preset = Some("fig5".into());
        assert!(resolve(SweepKind::Snr, &a).is_err());
        a.preset = Some("fig9".into());
        assert!(resolve(SweepKind::Activity, &a).is_err());
    }

    #[test]
    fn invalid_values_are_usage_errors() {
        let mut a = args();
        a.csi_error_var = Some(-0.5);
        assert!(resolve(SweepKind::Csi, &a).is_err());

        let mut a = args();
        a.p = Some("0.5,1.5".into());
        assert!(resolve(SweepKind::Activity, &a).is_err());

        let mut a = args();
        a.detectors = Some(vec!["turbo-genie".into()]);
        assert!(resolve(SweepKind::Snr, &a).is_err());

        let mut a = args();
        a.trials = Some(0);
        assert!(resolve(SweepKind::Snr, &a).is_err());
    }

    #[test]
    fn config_file_between_preset_and_flags() {
        let dir = std::env::temp_dir().join("mtc-sim-cfg-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("layer.json");
        std::fs::write(&path, r#"{"trials": 250, "seed": 77}"#).unwrap();
        let mut a = args();
        a.preset = Some("fig4".into());
        a.config = Some(path);
        a.seed = Some(5);
        let run = resolve(SweepKind::Snr, &a).unwrap();
        // file overrides the preset's trials; the flag overrides the file's seed
        assert_eq!(run.spec.trials, 250);
        assert_eq!(run.spec.master_seed, 5);
        assert_eq!(run.spec.n_devices, 128);
    }
}
