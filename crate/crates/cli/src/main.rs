use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sigmak_cli::{load_config, run, Command, Failure, Format};

#[derive(Parser)]
#[command(name = "sigmak", version, about = "Boundary invariants, Jacobi spectra and index scans for sigma_k product families")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compare defining formulas with the closed forms (OK/FAIL table).
    Verify(Args),
    /// Morse index report at one parameter.
    Index(Args),
    /// Index samples and jump brackets over a parameter range.
    Scan(Args),
    /// One DtN solve with its Green's identity residual.
    Dtn(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

fn execute(command: Command, args: &Args) -> Result<bool, Failure> {
    let resolved = load_config(&args.config)?;
    let format = match args.format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
    };
    let out = run(command, &resolved, format)?;
    match &args.out {
        Some(path) => std::fs::write(path, &out.text)
            .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{}", out.text),
    }
    Ok(out.mismatch)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match &cli.command {
        Cmd::Verify(a) => (Command::Verify, a),
        Cmd::Index(a) => (Command::Index, a),
        Cmd::Scan(a) => (Command::Scan, a),
        Cmd::Dtn(a) => (Command::Dtn, a),
    };
    match execute(command, args) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("{}", Failure::Mismatch);
            ExitCode::from(Failure::Mismatch.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
