use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser};
use josephus_cli::config::{Command, ExperimentConfig};
use josephus_cli::format::Format;
use josephus_cli::output::write_run;
use josephus_cli::run::execute;
use josephus_cli::{CliError, EXIT_ASSERTION};

#[derive(Debug, Parser)]
#[command(name = "josephus", version, about = "Probabilistic Josephus elimination: exact distributions, simulation and asymptotic checks")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Directory for output files (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

fn real_main() -> Result<i32, CliError> {
    let cli = Cli::parse();
    if let Some(k) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let config = match cli.command {
        Command::Run(args) => {
            let text = std::fs::read_to_string(&args.config)?;
            let mut cfg = ExperimentConfig::from_toml(&text)?;
            if let Some(seed) = cli.global.seed {
                cfg.seed = seed;
            }
            if let Some(format) = cli.global.format {
                cfg.format = format;
            }
            cfg
        }
        command => ExperimentConfig::new(
            command,
            cli.global.seed.unwrap_or(0),
            cli.global.format.unwrap_or_default(),
        ),
    };

    let out = execute(&config)?;
    match &cli.global.out {
        Some(dir) => {
            for path in write_run(dir, &config, &out)? {
                eprintln!("wrote {}", path.display());
            }
            print!("{}", out.stdout);
        }
        None if out.files.len() > 1 => {
            return Err(CliError::Usage(format!(
                "`{}` writes several files; pass --out DIR",
                config.command.name()
            )))
        }
        None => print!("{}", out.stdout),
    }
    for f in &out.failures {
        eprintln!("assertion failed: {f}");
    }
    Ok(if out.failures.is_empty() { 0 } else { EXIT_ASSERTION })
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("josephus: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
