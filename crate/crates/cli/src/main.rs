mod args;
mod commands;
mod manifest;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Result};
use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::{Ctx, Status};
use manifest::{digest_file, RunManifest};

fn command_name(args: &[String]) -> String {
    let words: Vec<&str> = args.iter().take_while(|a| !a.starts_with('-')).map(String::as_str).take(2).collect();
    match words.first() {
        Some(&"arith") | Some(&"func") => words.join(" "),
        Some(w) => w.to_string(),
        None => String::new(),
    }
}

/// Runs one parsed invocation; writes a manifest per output file when `record`.
fn execute(cli: Cli, args: &[String], record: bool) -> Result<Status> {
    let start = Instant::now();
    let mut ctx = Ctx::default();
    let status = commands::run(cli, &mut ctx)?;
    if record {
        for out in &ctx.outputs {
            let mut outputs = BTreeMap::new();
            outputs.insert(out.display().to_string(), digest_file(out)?);
            let m = RunManifest {
                command: command_name(args),
                args: args.to_vec(),
                seed: ctx.seed,
                backend: ctx.backend.clone().unwrap_or_else(|| "exact".into()),
                version: env!("CARGO_PKG_VERSION").into(),
                wall_time_ms: start.elapsed().as_millis(),
                outputs,
            };
            m.write(out)?;
        }
    }
    Ok(status)
}

fn replay(path: &PathBuf) -> Result<Status> {
    let m = RunManifest::read(path)?;
    if m.version != env!("CARGO_PKG_VERSION") {
        eprintln!("note: manifest written by version {}", m.version);
    }
    let argv = std::iter::once("typical".to_string()).chain(m.args.iter().cloned());
    let cli = Cli::try_parse_from(argv)?;
    if matches!(cli.command, Command::Replay(_)) {
        bail!("a manifest cannot record a replay");
    }
    let status = execute(cli, &m.args, false)?;
    let mut same = true;
    for (out, want) in &m.outputs {
        let got = digest_file(out.as_ref())?;
        if &got == want {
            println!("reproduced {out}");
        } else {
            println!("mismatch {out}: expected {want}, got {got}");
            same = false;
        }
    }
    if !same {
        bail!("replay produced different outputs");
    }
    Ok(status)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match &cli.command {
        Command::Replay(r) => replay(&r.manifest),
        _ => execute(cli, &args, true),
    };
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Violation) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
