mod args;
mod output;
mod run;

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::{CommandFactory, Parser};
use thiserror::Error;

use args::{Cli, Command};
use output::{extract_manifest, render, render_lines, Manifest};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Library(#[from] asep_lab::Error),
    #[error("{0} duality checks failed")]
    Verification(usize),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 validation, 3 numerical failure, 4 verification failure.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Library(asep_lab::Error::Numerical { .. } | asep_lab::Error::Internal(_)) => 3,
            CliError::Verification(_) => 4,
            CliError::Io(_) | CliError::Json(_) => 3,
            _ => 2,
        }
    }
}

/// Inserts `--key=value` lines from the config file after the subcommand,
/// skipping keys that are also given explicitly on the command line.
fn merge_config(argv: Vec<String>) -> Result<Vec<String>, CliError> {
    let pos = argv.iter().position(|a| a == "--config" || a.starts_with("--config="));
    let Some(pos) = pos else { return Ok(argv) };
    let path = match argv[pos].strip_prefix("--config=") {
        Some(p) => p.to_string(),
        None => argv.get(pos + 1).cloned().ok_or_else(|| CliError::Usage("--config needs a path".into()))?,
    };
    let text = std::fs::read_to_string(&path)?;
    let mut extra = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let (k, v) = line.split_once('=').ok_or_else(|| CliError::Usage(format!("config line '{line}' is not key=value")))?;
        let flag = format!("--{}", k.trim().replace('_', "-"));
        let explicit = argv.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if !explicit {
            extra.push(format!("{flag}={}", v.trim()));
        }
    }
    let names: Vec<String> = Cli::command().get_subcommands().map(|s| s.get_name().to_string()).collect();
    let sub = argv
        .iter()
        .position(|a| names.contains(a))
        .ok_or_else(|| CliError::Usage("no subcommand given".into()))?;
    let mut merged = argv[..=sub].to_vec();
    merged.extend(extra);
    merged.extend_from_slice(&argv[sub + 1..]);
    Ok(merged)
}

/// Rendered output and the number of failed affirmative checks.
fn execute(command: &Command) -> Result<(String, usize), CliError> {
    let (table, format) = match command {
        Command::Moments(a) => (run::moments(a)?, a.format),
        Command::Simulate(a) => (run::simulate(a)?, a.format),
        Command::Segment(a) => (run::segment(a)?, a.format),
        Command::Kpz(a) => (run::kpz(a)?, a.format),
        Command::Verify(a) => {
            let (records, failures) = run::verify(a)?;
            return Ok((render_lines(&records, &Manifest::new(command.clone(), Vec::new()))?, failures));
        }
        Command::Replay { file } => {
            let text = std::fs::read_to_string(file)?;
            let manifest = extract_manifest(&text)
                .ok_or_else(|| CliError::Usage(format!("no manifest found in {}", file.display())))?;
            return execute(&manifest.params);
        }
    };
    let manifest = Manifest::new(command.clone(), table.nodes.clone());
    Ok((render(&table, &manifest, format)?, 0))
}

fn print_text(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn real_main() -> Result<(), CliError> {
    let argv = merge_config(std::env::args().collect())?;
    let cli = Cli::try_parse_from(argv).unwrap_or_else(|e| e.exit());
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot set up {n} threads: {e}")))?;
    }
    let start = Instant::now();
    let result = execute(&cli.command);
    eprintln!("wall time {:.3}s", start.elapsed().as_secs_f64());
    let (text, failures) = result?;
    print_text(&text, cli.output.as_deref())?;
    if failures > 0 {
        return Err(CliError::Verification(failures));
    }
    Ok(())
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
