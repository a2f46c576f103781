use clap::{Parser, Subcommand};
use nlfront::config::{parse_config_from_process_env, Config};
use nlfront::runner::{self, CommandReport, EXIT_OK, EXIT_USAGE};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Nonlocal reaction-diffusion fronts: simulation, diagnostics and
/// subsolution certificates.
///
/// Any config key can be overridden from the environment: `run.t_end`
/// is read from `NLFRONT_RUN_T_END`, `kernel.s` from `NLFRONT_KERNEL_S`.
#[derive(Parser, Debug)]
#[command(name = "nlfront", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the evolution and store snapshots, level series and diagnostics.
    Simulate {
        config: PathBuf,
        /// Output directory [default: <config stem>-simulate]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the subsolution and barrier inequalities on sampled points.
    Certify {
        config: PathBuf,
        /// Output directory [default: <config stem>-certify]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute diagnostics from a stored simulate run.
    Analyze {
        config: PathBuf,
        run_dir: PathBuf,
        /// Output directory [default: <run-dir>/analysis]
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &Path) -> Result<Config, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_config_from_process_env(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn default_out(config: &Path, command: &str) -> PathBuf {
    let stem = config.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    PathBuf::from(format!("{stem}-{command}"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let (config, result) = match &cli.command {
        Command::Simulate { config, out } => {
            let out = out.clone().unwrap_or_else(|| default_out(config, "simulate"));
            (config, load(config).map(|c| runner::simulate(&c, &out)))
        }
        Command::Certify { config, out } => {
            let out = out.clone().unwrap_or_else(|| default_out(config, "certify"));
            (config, load(config).map(|c| runner::certify_cmd(&c, &out)))
        }
        Command::Analyze { config, run_dir, out } => {
            let out = out.clone().unwrap_or_else(|| run_dir.join("analysis"));
            (config, load(config).map(|c| runner::analyze(&c, run_dir, &out)))
        }
    };
    let code = match result {
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Ok(Err(e)) => {
            eprintln!("error ({}): {e}", config.display());
            runner::exit_code_for(&e)
        }
        Ok(Ok(CommandReport { outcome, lines, .. })) => {
            for l in lines {
                println!("{l}");
            }
            outcome.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
