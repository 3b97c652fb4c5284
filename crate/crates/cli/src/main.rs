use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hecke_lab_cli::config::{Command, FieldStrategy, RunConfig, Source, DEFAULT_RANK_BOUND, DEFAULT_SEED};
use hecke_lab_cli::run;

/// Verify Hecke symmetries and the identities of their reflection equation algebras.
#[derive(Parser)]
#[command(name = "hecke-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the Yang-Baxter and Hecke relations and closedness.
    Validate(Common),
    /// Detect the rank and check the antisymmetrizer identities.
    Rank(Common),
    /// Compute u, v, C, B and check the trace identities.
    Structure(Common),
    /// Check the q-Newton identities modulo the RE ideal.
    Newton(Common),
    /// Check the q-Cayley-Hamilton identity modulo the RE ideal.
    CayleyHamilton(Common),
    /// Compute the characteristic polynomial and compare its coefficients.
    Charpoly(Common),
}

#[derive(Args)]
struct Common {
    /// R-matrix in JSON format.
    #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
    input: Option<PathBuf>,
    /// Built-in R-matrix: std:N or perm:N with 2 <= N <= 4.
    #[arg(long)]
    builtin: Option<Source>,
    /// symbolic, sampled:K or modular:P; chosen by dimension when omitted.
    #[arg(long)]
    field: Option<FieldStrategy>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_RANK_BOUND)]
    rank_bound: usize,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
    /// Write the report to a file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("HECKE_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize =
        raw.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| format!("HECKE_LAB_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let (command, args) = match cli.command {
        Cmd::Validate(a) => (Command::Validate, a),
        Cmd::Rank(a) => (Command::Rank, a),
        Cmd::Structure(a) => (Command::Structure, a),
        Cmd::Newton(a) => (Command::Newton, a),
        Cmd::CayleyHamilton(a) => (Command::CayleyHamilton, a),
        Cmd::Charpoly(a) => (Command::Charpoly, a),
    };
    let source = match (args.input, args.builtin) {
        (Some(path), _) => Source::File(path),
        (None, Some(b)) => b,
        (None, None) => unreachable!("clap requires one source"),
    };
    let mut cfg = RunConfig::new(command, source).with_seed(args.seed).with_rank_bound(args.rank_bound);
    cfg.field = args.field;
    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let text = if args.json { report.to_json() + "\n" } else { report.render_text() };
    match args.output {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(report.exit_code() as u8)
}
