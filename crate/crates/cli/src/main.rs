mod check;
mod error;
mod manifest;
mod scan;
mod tsvf;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;
use crate::manifest::RunManifest;

#[derive(Parser, Debug)]
#[command(name = "pathmark", version, about = "Sideband-tagged photon path simulator")]
struct Cli {
    /// More log output; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and validate a netlist.
    Check(check::CheckArgs),
    /// Run a scenario: etalon scan, peak detection and weak-value read-out.
    Scan(scan::ScanArgs),
    /// Two-state analysis of a netlist.
    Tsvf(tsvf::TsvfArgs),
    /// Re-run the command recorded in a manifest and compare digests.
    Replay {
        manifest: PathBuf,
    },
}

/// What a command produced, before it is written anywhere.
pub struct Output {
    pub bytes: Vec<u8>,
    pub inputs: Vec<PathBuf>,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
}

impl Command {
    fn output_path(&self) -> Option<&Path> {
        match self {
            Command::Scan(a) => a.output.as_deref(),
            Command::Tsvf(a) => a.output.as_deref(),
            _ => None,
        }
    }

    fn run(&self) -> Result<Option<Output>, CliError> {
        match self {
            Command::Check(a) => check::run(a).map(|()| None),
            Command::Scan(a) => scan::run(a).map(Some),
            Command::Tsvf(a) => tsvf::run(a).map(Some),
            Command::Replay { manifest } => replay(manifest).map(|()| None),
        }
    }
}

fn replay(path: &Path) -> Result<(), CliError> {
    let m = RunManifest::load(path)?;
    m.check_inputs()?;
    std::env::set_current_dir(&m.working_dir).map_err(|e| CliError::io(&m.working_dir, e))?;
    let argv = std::iter::once("pathmark".to_string()).chain(m.command.iter().cloned());
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Schema(vec![format!("recorded command: {e}")]))?;
    if matches!(cli.command, Command::Replay { .. }) {
        return Err(CliError::Schema(vec!["recorded command is itself a replay".into()]));
    }
    let out = cli.command.run()?.ok_or_else(|| CliError::Schema(vec!["recorded command writes no output".into()]))?;
    let digest = manifest::sha256_hex(&out.bytes);
    if digest != m.output.sha256 {
        return Err(CliError::Validation(vec![format!(
            "error: output differs: recorded {} but replay gives {digest}",
            m.output.sha256
        )]));
    }
    println!("replay ok: {} {digest}", m.output.path);
    Ok(())
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let Some(out) = cli.command.run()? else {
        return Ok(());
    };
    match cli.command.output_path() {
        Some(path) => {
            std::fs::write(path, &out.bytes).map_err(|e| CliError::io(path, e))?;
            let args: Vec<String> = std::env::args().skip(1).collect();
            let m = RunManifest::new(args, path, &out)?;
            m.write_beside(path)?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&out.bytes).map_err(|e| CliError::Io(format!("stdout: {e}")))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            for line in e.lines() {
                eprintln!("{line}");
            }
            ExitCode::from(e.code())
        }
    }
}
