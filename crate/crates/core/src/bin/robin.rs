use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use robin_inverse::cli::{self, ExperimentConfig};

#[derive(Parser)]
#[command(name = "robin", about = "Robin coefficient reconstruction from interior data")]
struct Cli {
    /// Worker threads, 0 for one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Write synthetic measurements on the fine mesh.
    Simulate(Common),
    /// Reconstruct the coefficient from a field file.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Error against mesh size.
    Eoc(Common),
    /// Error against mesh size for several noise levels.
    Noise(Common),
    /// Reconstructions in truncated coefficient spaces.
    Subspace(Common),
    /// Jacobian condition numbers over growing coefficient spaces.
    Condition(Common),
}

fn load(common: &Common) -> robin_inverse::Result<ExperimentConfig> {
    match &common.config {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(cli::EXIT_CONFIG as u8);
        }
    }
    let code = cli::run(|| match &cli.command {
        Command::Simulate(c) => cli::cmd_simulate(&load(c)?, &c.out),
        Command::Reconstruct { common, data, trace } => {
            cli::cmd_reconstruct(&load(common)?, data, &common.out, trace.as_deref())
        }
        Command::Eoc(c) => cli::cmd_eoc(&load(c)?, &c.out),
        Command::Noise(c) => cli::cmd_noise(&load(c)?, &c.out),
        Command::Subspace(c) => cli::cmd_subspace(&load(c)?, &c.out),
        Command::Condition(c) => cli::cmd_condition(&load(c)?, &c.out),
    });
    ExitCode::from(code as u8)
}
