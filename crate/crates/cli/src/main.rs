use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use nbiot_rach::energy::energy_availability;
use nbiot_rach_cli::output::{emit_csv, emit_runtimes, format_value, runtime_path};
use nbiot_rach_cli::preset::{build, Engine, PRESET_NAMES};
use nbiot_rach_cli::sweep::{run_sweep, worker_count};
use nbiot_rach_cli::{CliError, RunConfig};

#[derive(Parser)]
#[command(name = "nbiot-rach", version, about = "RACH success and energy availability sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a preset sweep and write it as CSV.
    Sweep {
        /// Configuration file; omitted keys take their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PRESET_NAMES))]
        preset: String,
        #[arg(long, value_enum, default_value = "analytic")]
        engine: EngineArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a configuration file and print the resolved values.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the energy availability of the configured strategy.
    Availability {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Analytic,
    Sim,
    Both,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Analytic => Engine::Analytic,
            EngineArg::Sim => Engine::Simulation,
            EngineArg::Both => Engine::Both,
        }
    }
}

fn load(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::defaults()),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sweep {
            config,
            preset,
            engine,
            seed,
            out,
        } => {
            let base = load(config.as_deref())?;
            let spec = build(&preset, engine.into(), seed, base)?;
            let workers = worker_count()?;
            let table = run_sweep(&spec, workers)?;
            emit_csv(&table, &out)?;
            emit_runtimes(&table, &runtime_path(&out))?;
            eprintln!(
                "{preset}: {} of {} rows written to {}",
                table.rows.len(),
                spec.values.len(),
                out.display()
            );
            match table.failure {
                Some((value, err)) => {
                    eprintln!("stopped at {} = {}", table.parameter, format_value(value));
                    Err(err)
                }
                None => Ok(()),
            }
        }
        Command::Validate { config } => {
            let c = RunConfig::load(&config)?;
            println!("valid");
            println!("n_t={}", c.energy.repetitions);
            println!("m0={}", c.energy.capacity);
            println!("eta0={}", c.channel.availability);
            println!("gamma_th={}", c.channel.sinr_threshold);
            println!("sigma2_w={:e}", c.channel.noise_power);
            println!("trials={}", c.trials);
            Ok(())
        }
        Command::Availability { config } => {
            let c = load(config.as_deref())?;
            let r = energy_availability(&c.energy)?;
            println!("eta0={}", r.eta0);
            println!("mean_on={}", r.mean_on);
            println!("mean_off={}", r.mean_off);
            println!("nu0={}", r.nu0);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nbiot-rach: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
