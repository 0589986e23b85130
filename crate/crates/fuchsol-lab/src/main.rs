use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fuchsol_lab::{
    check_system, fit_file, parse_criteria, run_criterion, run_experiment, to_tsv, LabConfig, LabError, SystemKind,
    CRITERIA, SEED_ENV,
};

#[derive(Parser)]
#[command(name = "fuchsol", version, about = "Fuchsian systems near singular times: runs, checks and fits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its outputs and manifest.
    Run {
        #[arg(long, value_enum)]
        system: SystemKind,
        /// JSON configuration; defaults are used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Structural audit on sampled points; prints the JSON report.
    Check {
        #[arg(long, value_enum)]
        system: SystemKind,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Power-law fit of a CSV column over a time window.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        t_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        t_max: f64,
        /// Column to fit; `u2`, then `L2`, then the second column by default.
        #[arg(long)]
        column: Option<String>,
    },
    /// Run the acceptance criteria and print one line per criterion.
    ReproAcceptance {
        /// Write the clause table as TSV to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Subset such as `1,3-5`; all nine by default.
        #[arg(long)]
        criteria: Option<String>,
    },
}

fn load(system: SystemKind, path: Option<&Path>) -> Result<LabConfig, LabError> {
    let cfg = match path {
        Some(p) => LabConfig::parse(&std::fs::read_to_string(p).map_err(|e| LabError::io(p, e))?, system)?,
        None => LabConfig::default_for(system),
    };
    cfg.with_seed_override(std::env::var(SEED_ENV).ok().as_deref())
}

fn execute(cmd: Command) -> Result<bool, LabError> {
    match cmd {
        Command::Run { system, config, out } => {
            let cfg = load(system, config.as_deref())?;
            let summary = run_experiment(&cfg, &out)?;
            println!("{}", summary.summary);
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            Ok(summary.pass)
        }
        Command::Check { system, samples, config } => {
            let cfg = load(system, config.as_deref())?;
            let report = check_system(&cfg, samples)?;
            println!("{}", serde_json::to_string_pretty(&report).map_err(LabError::run)?);
            Ok(report.pass)
        }
        Command::Fit { input, t_min, t_max, column } => {
            let out = fit_file(&input, column.as_deref(), t_min, t_max)?;
            println!("{}", serde_json::to_string_pretty(&out).map_err(LabError::run)?);
            Ok(true)
        }
        Command::ReproAcceptance { out, criteria } => {
            let ids = match criteria {
                Some(c) => parse_criteria(&c)?,
                None => CRITERIA.to_vec(),
            };
            let mut results = Vec::new();
            for id in ids {
                let r = run_criterion(id)?;
                println!("{}", r.line());
                results.push(r);
            }
            if let Some(path) = out {
                std::fs::write(&path, to_tsv(&results)).map_err(|e| LabError::io(&path, e))?;
            }
            Ok(results.iter().all(|r| r.pass))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
