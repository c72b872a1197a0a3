use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use clap::Parser;
use ripangle_cli::commands::UsageError;
use ripangle_cli::{run, Cli, Outcome};

fn manifest(cli: &Cli, csv_path: &str) -> String {
    let mut out = String::new();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let command = format!("{:?}", cli.command);
    let name = command.split('(').next().unwrap_or("").to_lowercase();
    let _ = writeln!(out, "command={name}");
    let _ = writeln!(out, "args={}", args.join(" "));
    let _ = writeln!(out, "params={command}");
    let _ = writeln!(out, "version={}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "timestamp={stamp}");
    let _ = writeln!(out, "output={csv_path}");
    out
}

fn emit(cli: &Cli, outcome: &Outcome) -> Result<()> {
    match &cli.out {
        Some(path) => {
            let file =
                fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            outcome.table.write_csv(io::BufWriter::new(file))?;
            let mut side = path.clone().into_os_string();
            side.push(".manifest");
            fs::write(&side, manifest(cli, &path.display().to_string()))
                .with_context(|| format!("writing {}", side.to_string_lossy()))?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            outcome.table.write_csv(&mut lock)?;
            lock.flush()?;
        }
    }
    if let Some(s) = &outcome.summary {
        eprintln!("{s}");
    }
    Ok(())
}

fn is_usage(err: &anyhow::Error) -> bool {
    if err.downcast_ref::<UsageError>().is_some() {
        return true;
    }
    matches!(
        err.downcast_ref::<ripangle::Error>(),
        Some(ripangle::Error::Domain { .. } | ripangle::Error::EnumerationCap { .. })
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).and_then(|o| emit(&cli, &o).map(|_| o)) {
        Ok(o) if o.violations > 0 => ExitCode::from(1),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_usage(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
