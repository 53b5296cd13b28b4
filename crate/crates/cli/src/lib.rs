//! Experiment driver for the swkit library.

pub mod commands;
pub mod config;
pub mod grid;
pub mod manifest;

use clap::Parser;

#[derive(Debug, Parser)]
#[command(name = "swkit", version, about = "Sliced Wasserstein experiments", args_override_self = true)]
pub struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// `key=value` file of flags for the subcommand; explicit flags win.
    #[arg(long, global = true)]
    pub config: Option<std::path::PathBuf>,
    #[command(subcommand)]
    pub command: commands::Command,
}

pub fn main_with_args(args: Vec<String>) -> anyhow::Result<()> {
    let args = config::expand_args(args)?;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                anyhow::bail!("invalid arguments");
            }
            return Ok(());
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            anyhow::bail!("--threads must be >= 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    commands::run(cli.command)
}
