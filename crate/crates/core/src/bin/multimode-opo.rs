use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use multimode_opo::commands::{self, TrajectoryOptions};
use multimode_opo::scenario::Scenario;
use multimode_opo::Result;

#[derive(Parser)]
#[command(
    name = "multimode-opo",
    version,
    about = "Multimode OPO supermodes, squeezing spectra and phase matching"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file; the bundled reference scenario when omitted.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Overrides the scenario's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues, thresholds and coefficients of the supermodes.
    Supermodes,
    /// Analytic squeezing spectrum of one supermode.
    Spectrum {
        #[arg(long, default_value_t = 3)]
        supermode: usize,
    },
    /// Zero-frequency squeezing across the pump-power grid.
    ThresholdScan {
        #[arg(long, default_value_t = 3)]
        supermode: usize,
    },
    /// Simulated homodyne spectrum of one supermode.
    Trajectory {
        #[arg(long, default_value_t = 3)]
        supermode: usize,
        /// Number of independent trajectories.
        #[arg(long)]
        ensemble: Option<usize>,
        /// Length of each trajectory in seconds.
        #[arg(long)]
        duration: Option<f64>,
        /// Also write the first trajectory and its photocurrent.
        #[arg(long)]
        raw: bool,
    },
    /// Signal and idler wavelengths and the degeneracy temperature.
    Wavelengths,
    /// Interferometer error signal and seeded gain over the phase grid.
    ErrorSignal,
}

fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    let mut sc = match &cli.common.scenario {
        Some(path) => Scenario::load(path)?,
        None => Scenario::reference(),
    };
    if let Some(seed) = cli.common.seed {
        sc.seed = seed;
    }
    let out = &cli.common.out;
    match cli.command {
        Command::Supermodes => commands::cmd_supermodes(&sc, out),
        Command::Spectrum { supermode } => commands::cmd_spectrum(&sc, supermode, out),
        Command::ThresholdScan { supermode } => commands::cmd_threshold_scan(&sc, supermode, out),
        Command::Trajectory {
            supermode,
            ensemble,
            duration,
            raw,
        } => commands::cmd_trajectory(
            &sc,
            supermode,
            TrajectoryOptions {
                ensemble,
                duration,
                raw,
            },
            out,
        ),
        Command::Wavelengths => commands::cmd_wavelengths(&sc, out),
        Command::ErrorSignal => commands::cmd_error_signal(&sc, out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(files) => {
            for f in files {
                eprintln!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
