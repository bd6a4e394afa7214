//! `gaf-zeros` command-line front end.
//!
//! Exit codes: 0 success, 1 output could not be written, 2 invalid input,
//! 3 numerical failure.

mod args;
mod commands;
mod grid;
mod output;

use args::{resolve_descriptor, resolve_globals, resolve_radii, Cli, Command, ConfigFile, Format};
use clap::Parser;
use commands::{parse_methods, McRequest, Rendered, SweepRequest, DEFAULT_TRIALS};
use gaf_zeros::par::configure_threads;
use gaf_zeros::{Error, Execution};
use std::process::ExitCode;

const EXIT_IO: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    if e.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_NUMERICAL
    }
}

fn run(cli: Cli) -> Result<(Rendered, Format, args::Globals), Error> {
    let cfg = match &cli.global.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let globals = resolve_globals(&cli.global, &cfg);
    let execution = match globals.threads {
        Some(0) => return Err(Error::Domain("--threads must be positive".into())),
        Some(1) => Execution::Sequential,
        Some(k) => {
            if !configure_threads(k) {
                log::warn!("could not set the worker count to {k}");
            }
            Execution::default()
        }
        None => Execution::default(),
    };
    let default_format = match cli.command {
        Command::Asymptotics { .. } => Format::Json,
        _ => Format::Csv,
    };
    let rendered = match &cli.command {
        Command::ExpectedZeros {
            cov,
            radius,
            method,
            trials,
            truncation,
        } => {
            let descriptor = resolve_descriptor(cov, &cfg)?;
            let radii = resolve_radii(radius, &cfg)?;
            let names = method
                .clone()
                .or_else(|| cfg.method.clone())
                .unwrap_or_else(|| vec!["residue".into()]);
            let methods = parse_methods(&names)?;
            commands::expected_zeros_cmd(&SweepRequest {
                descriptor: &descriptor,
                radii: &radii,
                methods: &methods,
                trials: trials.or(cfg.trials).unwrap_or(DEFAULT_TRIALS),
                truncation: truncation.or(cfg.truncation),
                seed: globals.seed,
                execution,
            })?
        }
        Command::Asymptotics { cov, r_grid } => {
            let descriptor = resolve_descriptor(cov, &cfg)?;
            let grid = r_grid.as_deref().or(cfg.r_grid.as_deref());
            commands::asymptotics_cmd(&descriptor, grid)?
        }
        Command::Montecarlo {
            cov,
            radius,
            trials,
            truncation,
            diagnostics,
        } => {
            let descriptor = resolve_descriptor(cov, &cfg)?;
            let radii = resolve_radii(radius, &cfg)?;
            commands::montecarlo_cmd(&McRequest {
                descriptor: &descriptor,
                radii: &radii,
                trials: trials.or(cfg.trials).unwrap_or(DEFAULT_TRIALS),
                truncation: truncation.or(cfg.truncation),
                seed: globals.seed,
                diagnostics: *diagnostics || cfg.diagnostics.unwrap_or(false),
                execution,
            })?
        }
        Command::Puiseux { n, radius } => {
            let n = n.or(cfg.n).ok_or_else(|| Error::Domain("--n is required".into()))?;
            let radii = resolve_radii(radius, &cfg)?;
            commands::puiseux_cmd(n, &radii)?
        }
        Command::Region { a, b } => {
            let a = a.clone().or_else(|| cfg.a.clone()).unwrap_or_else(|| "-1:1:201".into());
            let b = b
                .clone()
                .or_else(|| cfg.b.clone())
                .unwrap_or_else(|| "-0.6:0.6:121".into());
            commands::region_cmd(&a, &b)?
        }
    };
    let format = globals.format.unwrap_or(default_format);
    Ok((rendered, format, globals))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let (rendered, format, globals) = match run(cli) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let written = rendered
        .bytes(format)
        .and_then(|bytes| output::emit(globals.output.as_deref(), &bytes));
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: cannot write output: {e}");
            ExitCode::from(EXIT_IO)
        }
    }
}
