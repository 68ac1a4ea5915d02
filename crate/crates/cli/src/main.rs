use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use meanfield_cli::runner::{self, EXIT_CONFIG, EXIT_OK};
use meanfield_cli::{RunConfig, RunError};

/// Lattice mean-field experiments: exact N-boson dynamics against the
/// Hartree flow and the closed-form bounds.
#[derive(Parser)]
#[command(name = "meanfield", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// Check a config file without computing anything.
    Validate { config: PathBuf },
    /// Print the tool version.
    Version,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Version => {
            println!("meanfield {}", env!("CARGO_PKG_VERSION"));
            EXIT_OK
        }
        Command::Validate { config } => validate(&config),
        Command::Run { config } => run(&config),
    };
    ExitCode::from(code as u8)
}

fn validate(path: &Path) -> i32 {
    let cfg = match RunConfig::load(path) {
        Ok((cfg, _)) => cfg,
        Err(v) => return fail(&RunError::Config(vec![v])),
    };
    let violations = cfg.validate();
    println!("{}", serde_json::to_string_pretty(&violations).unwrap_or_default());
    match runner::check(&cfg) {
        Ok(()) => EXIT_OK,
        Err(e) => e.exit_code(),
    }
}

fn run(path: &Path) -> i32 {
    let (cfg, bytes) = match RunConfig::load(path) {
        Ok(loaded) => loaded,
        Err(v) => return fail(&RunError::Config(vec![v])),
    };
    let out_dir = output_dir(&cfg, path);
    match runner::run(&cfg, &bytes, &out_dir) {
        Ok(summary) => {
            let code = summary.exit_code();
            if code != EXIT_OK {
                let report = serde_json::json!({
                    "status": "invariant-violation",
                    "exit_code": code,
                    "errors": summary.manifest.invariant_violations,
                });
                eprintln!("{}", serde_json::to_string(&report).unwrap_or_default());
            }
            println!("{}", summary.directory.join("manifest.json").display());
            code
        }
        Err(e) => fail(&e),
    }
}

/// `OUTPUT_DIR` wins; otherwise the config's directory, relative to the
/// config file.
fn output_dir(cfg: &RunConfig, config_path: &Path) -> PathBuf {
    if let Some(dir) = std::env::var_os("OUTPUT_DIR").filter(|d| !d.is_empty()) {
        return PathBuf::from(dir);
    }
    let dir = Path::new(&cfg.output.directory);
    if dir.is_absolute() {
        dir.to_path_buf()
    } else {
        config_path.parent().unwrap_or(Path::new(".")).join(dir)
    }
}

fn fail(e: &RunError) -> i32 {
    eprintln!("{}", serde_json::to_string(&e.to_json()).unwrap_or_default());
    let code = e.exit_code();
    if code == 0 { EXIT_CONFIG } else { code }
}
