use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use qdent_cli::{run, validate, write_outputs, CliError, ExperimentSpec, Overrides};
use qdent_core::noise::NoiseMode;
use qdent_core::Preset;

#[derive(Parser)]
#[command(name = "qdent", version, about = "Quantum-dot cavity entanglement experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment file and write CSV + manifest.
    Run(Common),
    /// Check an experiment file without simulating.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    spec: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = parse_preset)]
    preset: Option<Preset>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_parser = parse_mode)]
    noise_mode: Option<NoiseMode>,
    /// Nuclear polarisation in [0, 1].
    #[arg(long, conflicts_with = "delta_b")]
    polarization: Option<f64>,
    /// Overhauser spread (ns⁻¹).
    #[arg(long)]
    delta_b: Option<f64>,
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse().map_err(|e: qdent_core::Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<NoiseMode, String> {
    s.parse().map_err(|e: qdent_core::Error| e.to_string())
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            samples: self.samples,
            out: self.out.clone(),
            preset: self.preset,
            noise_mode: self.noise_mode,
            polarization: self.polarization,
            delta_b: self.delta_b,
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate(args) => {
            let spec = ExperimentSpec::load(&args.spec, &args.overrides())?;
            print!("{}", validate(&spec));
            Ok(())
        }
        Command::Run(args) => {
            let spec = ExperimentSpec::load(&args.spec, &args.overrides())?;
            if let Some(n) = args.threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| CliError::Config(format!("cannot start {n} threads: {e}")))?;
            }
            for w in &validate(&spec).warnings {
                log::warn!("{w}");
            }
            let start = Instant::now();
            let out = run(&spec)?;
            let wall = start.elapsed().as_secs_f64();
            let csv = write_outputs(&spec.out, &out, wall, rayon::current_num_threads())?;
            for w in &out.warnings {
                log::warn!("{w}");
            }
            println!("wrote {} ({} rows) in {wall:.1} s", csv.display(), out.table.rows.len());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // Usage errors are configuration errors; --help and --version are not.
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
