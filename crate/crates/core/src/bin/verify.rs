//! `verify <suite>`: runs a verification suite and prints its report.
//!
//! Exit status: 0 when every check passes, 1 when any check fails, 2 when the
//! configuration is rejected.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use phigamma::config::RunConfig;
use phigamma::suites::run_suite;
use phigamma::Error;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    JsonLines,
}

#[derive(Debug, Parser)]
#[command(name = "verify", about = "Run a verification suite")]
struct Cli {
    /// series-identities, ind-structure, rho-lattice, yon-consistency,
    /// borel-action, acbormu, heckesurnul, hecke-kernel or all
    suite: String,
    /// Configuration file of `key = value` lines, applied before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Primes, comma separated; sets the window primes too.
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    n: Option<String>,
    /// A single r, or `all`.
    #[arg(long)]
    r: Option<String>,
    /// Values of s, comma separated.
    #[arg(long)]
    s: Option<String>,
    /// `1`, `gen` or power-basis coordinates; several separated by `;`.
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    prec_x: Option<String>,
    #[arg(long)]
    prec_p: Option<String>,
    #[arg(long)]
    y_prec: Option<String>,
    #[arg(long)]
    depth: Option<String>,
    /// Vanishing cases, comma separated.
    #[arg(long)]
    cases: Option<String>,
    /// Sets every trial count.
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Extra `key=value` settings, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

fn build_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
            RunConfig::from_text(&text)?
        }
        None => RunConfig::default(),
    };
    let flags = [
        ("p", &cli.p),
        ("n", &cli.n),
        ("r", &cli.r),
        ("s", &cli.s),
        ("lambda", &cli.lambda),
        ("prec_x", &cli.prec_x),
        ("prec_p", &cli.prec_p),
        ("y_prec", &cli.y_prec),
        ("depth", &cli.depth),
        ("cases", &cli.cases),
        ("trials", &cli.trials),
        ("seed", &cli.seed),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    for kv in &cli.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::Parse(format!("--set {kv:?}: expected KEY=VALUE")))?;
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn is_config_error(e: &Error) -> bool {
    matches!(e, Error::InvalidConfig(_) | Error::Parse(_) | Error::UnknownSuite(_))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("verify: {e}");
            return ExitCode::from(2);
        }
    };
    let reports = match run_suite(&cli.suite, &cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("verify: {e}");
            return ExitCode::from(if is_config_error(&e) { 2 } else { 1 });
        }
    };
    let body: String = reports
        .iter()
        .map(|r| match cli.format {
            Format::Text => r.to_text(),
            Format::JsonLines => r.to_json_lines(),
        })
        .collect();
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &body) {
                eprintln!("verify: {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{body}"),
    }
    if reports.iter().all(|r| r.passed()) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
