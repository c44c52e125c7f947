use clap::{Parser, Subcommand};

use mtc_sim::config::{SweepArgs, SweepKind};
use mtc_sim::run_command;

/// Monte Carlo sweep runner for activity-aware multiuser detection.
#[derive(Parser)]
#[command(name = "mtc-sim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// NSER vs SNR at a fixed activity range.
    SweepSnr(SweepArgs),
    /// NSER vs shared activity probability at fixed SNR values.
    SweepActivity(SweepArgs),
    /// NSER vs SNR under a fixed channel-estimate error variance.
    SweepCsi(SweepArgs),
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::SweepSnr(args) => run_command(SweepKind::Snr, &args),
        Command::SweepActivity(args) => run_command(SweepKind::Activity, &args),
        Command::SweepCsi(args) => run_command(SweepKind::Csi, &args),
    };
    std::process::exit(code);
}
