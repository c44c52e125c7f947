//! Command-line front end for the detection-sweep harness: configuration
//! resolution, sweep execution, and CSV/JSON emission.

pub mod axis;
pub mod config;
pub mod output;

use std::fmt;
use std::time::{SystemTime, UNIX_EPOCH};

use mtc_detect::harness::run_sweep;

use config::{resolve, ResolvedRun, SweepArgs, SweepKind};
use output::{build_manifest, csv_string};

/// Exit code for malformed flags or config values.
pub const EXIT_USAGE: i32 = 2;
/// Exit code for runs that executed but left a detector without any
/// contributing trials (or failed outright).
pub const EXIT_RUNTIME: i32 = 1;

/// A configuration problem the user must fix; maps to [`EXIT_USAGE`].
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn unix_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// Runs one resolved sweep and writes `<label>.csv` and
/// `<label>.manifest.json` into the output directory. Returns the process
/// exit code: 0 only if every requested detector produced an aggregate.
pub fn execute(run: &ResolvedRun) -> Result<i32, Box<dyn std::error::Error>> {
    let started = unix_ms();
    let result = run_sweep(&run.spec)?;
    let finished = unix_ms();

    std::fs::create_dir_all(&run.out_dir)?;
    let csv_path = run.out_dir.join(format!("{}.csv", run.label));
    let manifest_path = run.out_dir.join(format!("{}.manifest.json", run.label));

    std::fs::write(&csv_path, csv_string(&result.rows))?;
    let manifest = build_manifest(
        run.kind.command_name(),
        run.preset.clone(),
        &run.spec,
        &result,
        started,
        finished,
    );
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;

    println!("wrote {}", csv_path.display());
    println!("wrote {}", manifest_path.display());

    let mut incomplete = false;
    for row in &result.rows {
        if row.trials == 0 {
            eprintln!(
                "warning: {} produced no aggregate at {}={} ({} failed, {} skipped)",
                row.detector, row.axis_name, row.axis_value, row.failed_trials, row.skipped_trials
            );
            incomplete = true;
        }
    }
    Ok(if incomplete { EXIT_RUNTIME } else { 0 })
}

/// Resolves and executes one subcommand, translating configuration
/// problems into the usage exit code.
pub fn run_command(kind: SweepKind, args: &SweepArgs) -> i32 {
    let resolved = match resolve(kind, args) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match execute(&resolved) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}
