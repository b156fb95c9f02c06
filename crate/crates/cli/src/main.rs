//! `renorm`: command-line front end. Reports go to `--out`, progress to stderr.
//!
//! Exit codes: 0 success, 1 solver or I/O error, 2 argument error.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod run;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use log::LevelFilter;

use args::{Cli, Format};
use run::{Report, UsageError};

fn log_level() -> Result<LevelFilter, String> {
    match std::env::var("RENORM_LOG") {
        Err(_) => Ok(LevelFilter::Warn),
        Ok(v) => match v.as_str() {
            "quiet" => Ok(LevelFilter::Off),
            "info" => Ok(LevelFilter::Info),
            "debug" => Ok(LevelFilter::Debug),
            other => Err(format!("RENORM_LOG must be quiet, info or debug, got {other:?}")),
        },
    }
}

fn render(report: &Report, format: Format) -> anyhow::Result<String> {
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(&report.json)? + "\n",
        Format::Csv => report.csv.clone(),
    })
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so the target never holds a partial report.
fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn main() -> ExitCode {
    let level = match log_level() {
        Ok(l) => l,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let common = cli.command.common();
    let result = run::check(&cli.command)
        .and_then(|()| run::run(&cli.command))
        .and_then(|report| render(&report, common.format))
        .and_then(|text| write_atomic(&common.out, &text));
    match result {
        Ok(()) => {
            log::info!("wrote {}", common.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.is::<UsageError>() { 2 } else { 1 })
        }
    }
}
