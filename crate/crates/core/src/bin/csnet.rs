use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand as ClapSubcommand};
use csnet::cli::{run, ExperimentConfig, Subcommand};

#[derive(Parser)]
#[command(name = "csnet", about = "Compressive-sensing network coding experiments")]
struct Cli {
    /// Flat TOML experiment file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for trial-level parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(ClapSubcommand)]
enum Command {
    /// Sparse recovery trials (basis pursuit, or denoising with --noise-ratio).
    CsRecover(ExperimentConfig),
    /// SDCIC over a depth-one tree against the reference schemes.
    SdcCompare(ExperimentConfig),
    /// SDCIC over a multicast network with random linear network coding.
    MulticastSim(ExperimentConfig),
    /// Sparse channel code error rate over a list of SNRs.
    SccSim(ExperimentConfig),
    /// Analytic rate table.
    Rates(ExperimentConfig),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (sub, flags) = match cli.command {
        Command::CsRecover(c) => (Subcommand::CsRecover, c),
        Command::SdcCompare(c) => (Subcommand::SdcCompare, c),
        Command::MulticastSim(c) => (Subcommand::MulticastSim, c),
        Command::SccSim(c) => (Subcommand::SccSim, c),
        Command::Rates(c) => (Subcommand::Rates, c),
    };
    let file = match &cli.config {
        Some(p) => match ExperimentConfig::read(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => ExperimentConfig::default(),
    };
    let mut cfg = file.overlay(&flags);
    cfg.subcommand = Some(sub);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .expect("thread pool");
    match pool.install(|| run(&cfg)) {
        Ok(out) => {
            print!("{}", out.summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
