use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qbattery_cli::{audit_command, parse_config, render_report, run_command, CommandError, ConfigError, Mode};

#[derive(Parser)]
#[command(name = "qbattery", version, about = "Quantum battery Lindblad simulation and free-energy audits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate the initial state and write a CSV time series
    Run(CommonArgs),
    /// Eigenstate audit with optional regularization sweep, as a JSON report
    Audit(CommonArgs),
    /// Regularization sweep only, as a JSON report
    Sweep(CommonArgs),
    /// Randomized claim checks, as a JSON report
    Check(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON config file
    #[arg(long)]
    config: PathBuf,
    /// Output path, or `-` for standard output
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Tolerance override, KEY=VALUE (repeatable)
    #[arg(long = "tol", value_parser = parse_tol)]
    tol: Vec<(String, f64)>,
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got {s:?}"))?;
    let v: f64 = v.parse().map_err(|e| format!("bad value for {k}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn open_out(path: &Path) -> io::Result<Box<dyn Write>> {
    if path == Path::new("-") {
        Ok(Box::new(BufWriter::new(io::stdout().lock())))
    } else {
        Ok(Box::new(BufWriter::new(File::create(path)?)))
    }
}

fn execute(mode: Mode, args: &CommonArgs) -> Result<(), CommandError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| ConfigError {
        path: "$".into(),
        message: format!("cannot read {}: {e}", args.config.display()),
    })?;
    let input: serde_json::Value = serde_json::from_str(&text).map_err(|e| ConfigError {
        path: "$".into(),
        message: e.to_string(),
    })?;
    let mut cfg = parse_config(&text)?;
    cfg.apply_overrides(&args.tol)?;
    if let Some(seed) = args.seed {
        cfg.set_seed(seed);
    }

    if mode == Mode::Run {
        let mut out = open_out(&args.out)?;
        return run_command(&cfg, &mut out);
    }
    let body = audit_command(mode, &cfg)?;
    let mut out = open_out(&args.out)?;
    out.write_all(render_report(mode, &input, &cfg, body).as_bytes())?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let (mode, args) = match &cli.command {
        Command::Run(a) => (Mode::Run, a),
        Command::Audit(a) => (Mode::Audit, a),
        Command::Sweep(a) => (Mode::Sweep, a),
        Command::Check(a) => (Mode::Check, a),
    };
    match execute(mode, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qbattery: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
