use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qumi_lab::config::{ConfigOverrides, Experiment, NoiseOverrides, OutputFormat};
use qumi_lab::experiments::{run, RunOptions};
use qumi_lab::output::write_output;
use qumi_lab::LabError;

/// Phase-sensitivity experiments for single-photon multimode interferometers.
///
/// Settings come from the optional TOML file, then from the flags.
#[derive(Debug, Parser)]
#[command(name = "qumi-lab", version)]
struct Cli {
    /// TOML file with any of the configuration fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    experiment: Option<Experiment>,
    #[arg(long)]
    n_min: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    /// Working phase in radians.
    #[arg(long, allow_negative_numbers = true)]
    phi0: Option<f64>,
    /// Haar draws per n (random-unitary-sweep).
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Lowest per-photon transmission on the loss-sweep grid.
    #[arg(long)]
    loss: Option<f64>,
    /// Largest phase-noise variance on the dephasing-sweep grid.
    #[arg(long)]
    dephasing_var: Option<f64>,
    /// Output file, `-` for stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Corrupt the network before the permanent check (negative control).
    #[arg(long, hide = true)]
    inject_fault: bool,
}

impl Cli {
    fn overrides(&self) -> ConfigOverrides {
        let noise =
            (self.loss.is_some() || self.dephasing_var.is_some()).then_some(NoiseOverrides {
                fidelity: self.loss,
                dephasing_var: self.dephasing_var,
            });
        ConfigOverrides {
            experiment: self.experiment,
            n_min: self.n_min,
            n_max: self.n_max,
            phi0: self.phi0,
            samples: self.samples,
            seed: self.seed,
            noise,
            output_path: self.out.clone(),
            format: self.format,
        }
    }
}

fn configure_threads() -> Result<(), LabError> {
    let Ok(value) = std::env::var("QUMI_LAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.trim().parse().map_err(|_| {
        LabError::Usage(format!(
            "QUMI_LAB_THREADS must be a non-negative integer, got `{value}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| LabError::Usage(e.to_string()))
}

fn main_inner(cli: Cli) -> Result<bool, LabError> {
    configure_threads()?;
    let file = match &cli.config {
        Some(path) => ConfigOverrides::from_file(path)?,
        None => ConfigOverrides::default(),
    };
    let cfg = file.merge(cli.overrides()).resolve()?;
    let report = run(
        &cfg,
        RunOptions {
            inject_fault: cli.inject_fault,
        },
    )?;
    write_output(&cfg.output_path, &report.emit(cfg.format)?)?;
    Ok(!report.has_failures())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("qumi-lab: some points failed or breached their tolerance");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("qumi-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
