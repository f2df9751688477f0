//! `ricci <command> --config <path> [--out <prefix>] [--sweep <dir>]`
//!
//! Exit status: 0 success, 1 configuration or I/O error, 2 the tensor fails
//! the definiteness gate, 3 numerical failure. Failures print one line
//! `error[<category>]: <reason>` on stderr.

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use rayon::prelude::*;

use commands::{Command, RunError};
use config::ProblemConfig;

#[derive(Debug, Parser)]
#[command(name = "ricci", version, about = "Rotationally symmetric metrics with prescribed Ricci tensor")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Problem file.
    #[arg(long, required_unless_present = "sweep", conflicts_with = "sweep")]
    config: Option<PathBuf>,
    /// Output prefix; with --sweep, an output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run every `*.cfg` file in this directory in parallel.
    #[arg(long)]
    sweep: Option<PathBuf>,
}

/// `--out`, then the `output` key, then the config path without extension.
fn prefix_for(cfg: &ProblemConfig, config_path: &Path, out: Option<&Path>) -> PathBuf {
    out.map(Path::to_path_buf)
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| config_path.with_extension(""))
}

fn run_one(command: Command, config_path: &Path, out: Option<&Path>) -> Result<(), RunError> {
    let cfg = ProblemConfig::load(config_path)?;
    let prefix = prefix_for(&cfg, config_path, out);
    commands::run(command, &cfg, &prefix)
}

fn report_error(label: Option<&Path>, e: &RunError) {
    let reason = e.to_string().replace('\n', " ");
    match label {
        Some(p) => eprintln!("{}: error[{}]: {reason}", p.display(), e.category()),
        None => eprintln!("error[{}]: {reason}", e.category()),
    }
}

fn sweep(command: Command, dir: &Path, out: Option<&Path>) -> u8 {
    let entries = match std::fs::read_dir(dir) {
        Ok(entries) => entries,
        Err(e) => {
            eprintln!("error[config]: cannot read {}: {e}", dir.display());
            return 1;
        }
    };
    let mut configs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "cfg"))
        .collect();
    configs.sort();
    if configs.is_empty() {
        eprintln!("error[config]: no .cfg files in {}", dir.display());
        return 1;
    }
    let results: Vec<Result<(), RunError>> = configs
        .par_iter()
        .map(|path| {
            let stem_out = out.map(|o| o.join(path.file_stem().unwrap_or_default()));
            run_one(command, path, stem_out.as_deref())
        })
        .collect();
    let mut code = 0;
    for (path, result) in configs.iter().zip(&results) {
        match result {
            Ok(()) => println!("{}: ok", path.display()),
            Err(e) => {
                report_error(Some(path), e);
                code = code.max(e.exit_code());
            }
        }
    }
    code
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors are configuration errors; help and version are not
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(dir) = &cli.sweep {
        return ExitCode::from(sweep(cli.command, dir, cli.out.as_deref()));
    }
    let config = cli.config.as_deref().expect("clap requires --config without --sweep");
    match run_one(cli.command, config, cli.out.as_deref()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report_error(None, &e);
            ExitCode::from(e.exit_code())
        }
    }
}
