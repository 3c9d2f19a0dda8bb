use clap::{Args, Parser, Subcommand};
use ftn_lab::catalog::{self, Source};
use ftn_lab::runner::{self, RunOptions};
use ftn_lab::{ExperimentConfig, ExperimentKind, LabResult};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ftn-lab", version, about = "Faster-than-Nyquist signaling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Output directory; defaults to the config's `out`, then `out/<experiment>`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Sampled and folded spectra.
    Spectrum(RunArgs),
    /// Gaussian-input capacity curves.
    Capacity(RunArgs),
    /// Simulated information rates for finite constellations.
    Rates(RunArgs),
    /// Minimum-distance scan and Mazo limit.
    Mazo(RunArgs),
    /// Uncoded BER with a time-domain equalizer.
    BerTd(RunArgs),
    /// Uncoded BER with cyclic-prefix frequency-domain equalization.
    BerFd(RunArgs),
    /// Turbo-equalized coded BER.
    Coded(RunArgs),
    /// Expected ambiguity-function slices.
    SenseAf(RunArgs),
    /// ML Doppler estimation.
    SenseMl(RunArgs),
    /// Show built-in and user configs.
    List {
        /// Extra directory of `*.toml` configs.
        #[arg(long)]
        user_dir: Option<PathBuf>,
    },
    /// Run a built-in config by name, or a config file of any kind.
    Run {
        name: String,
        #[arg(long)]
        user_dir: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

fn execute(cfg: ExperimentConfig, common: Common) -> LabResult<()> {
    let opts = RunOptions {
        seed: common.seed,
        out: common.out,
        threads: common.threads,
    };
    let report = runner::run_config(cfg, &opts)?;
    for f in &report.files {
        println!("{}", f.display());
    }
    eprintln!("done in {:.2} s (seed {})", report.elapsed_s, report.seed);
    Ok(())
}

fn main_inner(cli: Cli) -> LabResult<()> {
    let (kind, args) = match cli.command {
        Command::List { user_dir } => {
            for e in catalog::list(user_dir.as_deref())? {
                let kind = e.kind.map_or("?", |k| k.name());
                let origin = match &e.source {
                    Source::Builtin(_) => "built-in".to_string(),
                    Source::User(p) => p.display().to_string(),
                };
                println!("{}\t{}\t{}\t{}", e.name, kind, origin, e.description);
            }
            return Ok(());
        }
        Command::Run { name, user_dir, common } => {
            let cfg = catalog::resolve(&name, user_dir.as_deref())?;
            return execute(cfg, common);
        }
        Command::Spectrum(a) => (ExperimentKind::Spectrum, a),
        Command::Capacity(a) => (ExperimentKind::Capacity, a),
        Command::Rates(a) => (ExperimentKind::Rates, a),
        Command::Mazo(a) => (ExperimentKind::Mazo, a),
        Command::BerTd(a) => (ExperimentKind::BerTd, a),
        Command::BerFd(a) => (ExperimentKind::BerFd, a),
        Command::Coded(a) => (ExperimentKind::Coded, a),
        Command::SenseAf(a) => (ExperimentKind::SenseAf, a),
        Command::SenseMl(a) => (ExperimentKind::SenseMl, a),
    };
    let cfg = runner::load(&args.config, Some(kind))?;
    execute(cfg, args.common)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
