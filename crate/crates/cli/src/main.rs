mod commands;
mod config;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use commands::Failure;
use config::{ConfigFile, ExperimentConfig};

#[derive(Parser)]
#[command(name = "critlab", version, about = "Criticality experiments for model Schrodinger operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Range seminorms by the time and frequency routes.
    Seminorm(Common),
    /// Bracket the endpoint of the criticality interval.
    Scan(Common),
    /// Long-time wave norm and growth model.
    Wave(Common),
    /// Fractional Green kernel of the free operators.
    Green(Common),
    /// Heat semigroup as a Gaussian average of wave propagators.
    Transmute(Common),
    /// Run the acceptance suite.
    Verify(Common),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Operator: free1d, free:N or hardy:N:lambda.
    #[arg(long)]
    op: Option<String>,
    /// Data: gaussian(w), bump(c,w), annulus(r0,r1), shell(c,w), dipole(r0,r1,w).
    #[arg(long)]
    data: Option<String>,
    /// Comma-separated alpha values.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long)]
    grid_m: Option<String>,
    #[arg(long)]
    grid_r: Option<String>,
    #[arg(long)]
    tmax: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// key = value file with optional [subcommand] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<String>,
}

impl Command {
    fn split(&self) -> (&'static str, &Common) {
        match self {
            Command::Seminorm(c) => ("seminorm", c),
            Command::Scan(c) => ("scan", c),
            Command::Wave(c) => ("wave", c),
            Command::Green(c) => ("green", c),
            Command::Transmute(c) => ("transmute", c),
            Command::Verify(c) => ("verify", c),
        }
    }
}

fn effective(name: &str, flags: &Common) -> Result<ExperimentConfig, Failure> {
    let mut map = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            ConfigFile::parse(&text)?.for_command(name)
        }
        None => BTreeMap::new(),
    };
    let pairs = [
        ("op", flags.op.clone()),
        ("data", flags.data.clone()),
        ("alpha", flags.alpha.clone()),
        ("grid_m", flags.grid_m.clone()),
        ("grid_r", flags.grid_r.clone()),
        ("t_max", flags.tmax.clone()),
        ("out", flags.out.as_ref().map(|p| p.display().to_string())),
        ("seed", flags.seed.clone()),
    ];
    for (k, v) in pairs {
        if let Some(v) = v {
            map.insert(k.to_string(), v);
        }
    }
    Ok(ExperimentConfig::from_map(name, &map)?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let (name, flags) = cli.command.split();
    match effective(name, flags).and_then(|cfg| commands::run(&cfg)) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("critlab {name}: {}", f.message().trim_end());
            ExitCode::from(f.code() as u8)
        }
    }
}
