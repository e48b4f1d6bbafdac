use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use dfrc_cli::output::fmt_f64;
use dfrc_cli::{cmd_pd_curve, cmd_signal_check, cmd_theta_sweep, cmd_verify, ExperimentConfig};

/// Exit status when a check fails.
const EXIT_CHECK_FAILED: u8 = 1;
/// Exit status for configuration errors and infeasible scenarios.
const EXIT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "dfrc", version, about = "Detection limits of a dual-function radar-communication transmitter")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare the signal seen by the communication receiver with the desired symbols.
    SignalCheck(Common),
    /// Detection probability versus input SNR under the optimal waveform.
    PdCurve(Common),
    /// SNR limit, loss and detection probability versus receiver direction.
    ThetaSweep(Common),
    /// Check the closed forms against the oracle and the Monte Carlo detector.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration; omitted keys take the reference values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed (overrides `seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trials (overrides `mc_trials`).
    #[arg(long)]
    trials: Option<u64>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let base = match &self.config {
            Some(path) => ExperimentConfig::from_path(path)?,
            None => ExperimentConfig::default(),
        };
        Ok(base.with_overrides(self.out.as_deref(), self.seed, self.trials)?)
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::SignalCheck(c) => {
            let r = cmd_signal_check(&c.load()?)?;
            println!("max abs error {}", fmt_f64(r.max_abs_error));
            println!("wrote {}", r.path.display());
            Ok(r.passed())
        }
        Command::PdCurve(c) => {
            let r = cmd_pd_curve(&c.load()?)?;
            println!("P_D = 0.9 at input SNR {:.4} dB", r.input_snr_db_at_090);
            println!("wrote {}", r.path.display());
            Ok(true)
        }
        Command::ThetaSweep(c) => {
            let r = cmd_theta_sweep(&c.load()?)?;
            let s = &r.summary;
            println!("mainlobe loss {:.4} dB", s.mainlobe_loss_db);
            println!("exact-null loss {:.4} dB at {:.4} deg", s.exact_null_loss_db, s.exact_null_deg);
            let roots: Vec<String> = s.zero_loss_angles_deg.iter().map(|x| format!("{x:.4}")).collect();
            println!("zero-loss angles [{}] deg", roots.join(", "));
            println!("largest loss {:.4} dB at {:.1} deg", s.max_loss_db, s.max_loss_theta_deg);
            println!("wrote {}", r.path.display());
            Ok(true)
        }
        Command::Verify(c) => {
            let r = cmd_verify(&c.load()?)?;
            print!("{}", r.text);
            println!("wrote {}", r.path.display());
            Ok(r.passed())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
