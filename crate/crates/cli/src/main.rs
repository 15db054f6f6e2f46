use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use galoscope::pipeline::{self, InputDocument, Report, RunConfig};
use galoscope::{Error, ErrorKind};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Galois,
    Branch,
    Monodromy,
    Group,
    Orbits,
    Primitivity,
}

/// Galois/monodromy groups of branched covers.
#[derive(Debug, Parser)]
#[command(name = "galoscope", version)]
struct Args {
    command: Command,
    /// Input document (JSON), or a permutation list for `group`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Newton tolerance of the path tracker.
    #[arg(long)]
    tol: Option<f64>,
    /// Fiber power used by `orbits`.
    #[arg(long, default_value_t = 2)]
    s: usize,
    /// Write the report here instead of stdout.
    #[arg(long)]
    json_out: Option<PathBuf>,
    /// Allow inputs marked as extended.
    #[arg(long)]
    extended: bool,
    /// Add wall-clock timings to the report.
    #[arg(long)]
    timing: bool,
}

const EXIT_NUMERIC: u8 = 2;
const EXIT_INPUT: u8 = 3;

fn run(args: &Args) -> Result<Report, Error> {
    let text = fs::read_to_string(&args.input)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", args.input.display())))?;
    if let Command::Group = args.command {
        return pipeline::cmd_group(&text);
    }
    let doc = InputDocument::from_json(&text)?;
    let mut cfg = RunConfig {
        seed: args.seed,
        s: args.s,
        allow_extended: args.extended,
        timing: args.timing,
        ..RunConfig::default()
    };
    if let Some(tol) = args.tol {
        cfg.tracker.newton_tol = tol;
    }
    match args.command {
        Command::Galois => pipeline::cmd_galois(&doc, &cfg),
        Command::Branch => pipeline::cmd_branch(&doc, &cfg),
        Command::Monodromy => pipeline::cmd_monodromy(&doc, &cfg),
        Command::Orbits => pipeline::cmd_orbits(&doc, &cfg),
        Command::Primitivity => pipeline::cmd_primitivity(&doc, &cfg),
        Command::Group => unreachable!(),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(report) => {
            let text = report.to_json();
            if let Some(path) = &args.json_out {
                if let Err(e) = fs::write(path, &text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(EXIT_INPUT);
                }
            } else {
                print!("{text}");
            }
            if report.certified {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: report generated but certification failed");
                ExitCode::from(EXIT_NUMERIC)
            }
        }
        Err(e) => {
            eprintln!("error [{}]: {e}", e.module());
            ExitCode::from(match e.kind() {
                ErrorKind::Input => EXIT_INPUT,
                ErrorKind::Numeric => EXIT_NUMERIC,
            })
        }
    }
}
