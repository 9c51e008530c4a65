//! Command-line front end for `fading_ic`: argument handling, table output
//! with run manifests, the figure registry and the acceptance checks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod config;
mod error;
pub mod figures;
pub mod output;
pub mod verify;

pub use error::CliError;

use args::{Cli, Command};
use clap::{CommandFactory, FromArgMatches};
use commands::Output;
use output::{render, write_with_manifest, RunHeader};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;

/// Flags that change where or how fast output is produced, not what it is.
const NON_SEMANTIC: &[&str] = &["out", "threads", "config"];

pub struct Prepared {
    pub cli: Cli,
    pub params: BTreeMap<String, String>,
    pub command_name: String,
}

pub enum Parsed {
    Run(Box<Prepared>),
    /// Help or version text to print before exiting successfully.
    Info(String),
}

pub fn parse(argv: Vec<OsString>) -> Result<Parsed, CliError> {
    let mut argv = argv;
    config::load_and_merge(&mut argv)?;
    let matches = match Cli::command().try_get_matches_from(&argv) {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind as K;
            return match e.kind() {
                K::DisplayHelp | K::DisplayVersion | K::DisplayHelpOnMissingArgumentOrSubcommand => {
                    Ok(Parsed::Info(e.render().to_string()))
                }
                _ => Err(CliError::Usage(e.render().to_string().trim_end().to_string())),
            };
        }
    };
    let cli = Cli::from_arg_matches(&matches).map_err(|e| CliError::Usage(e.to_string()))?;
    let (name, sub) = matches.subcommand().ok_or_else(|| CliError::Usage("missing subcommand".into()))?;
    let mut params = BTreeMap::new();
    let root = Cli::command();
    if let Some(cmd) = root.find_subcommand(name) {
        for arg in cmd.get_arguments() {
            let id = arg.get_id().as_str();
            if NON_SEMANTIC.contains(&id) {
                continue;
            }
            if let Ok(Some(vals)) = sub.try_get_raw(id) {
                let joined: Vec<String> = vals.map(|v| v.to_string_lossy().into_owned()).collect();
                params.insert(id.to_string(), joined.join(","));
            }
        }
    }
    params.insert("format".into(), format!("{:?}", cli.format).to_lowercase());
    Ok(Parsed::Run(Box::new(Prepared {
        cli,
        params,
        command_name: name.to_string(),
    })))
}

pub fn execute(command: &Command) -> Result<Output, CliError> {
    match command {
        Command::Dispersion(a) => commands::dispersion(a),
        Command::Bounds(a) => commands::bounds(a),
        Command::Figures(a) => figures::figure(a),
        Command::Exponent(a) => commands::exponent(a),
        Command::Verify(a) => verify::command(a),
    }
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Failed(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn header(p: &Prepared, out: &Output) -> RunHeader {
    RunHeader {
        command: p.command_name.clone(),
        params: p.params.clone(),
        seed: out.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        manifest: p.cli.out.as_ref().map(|o| {
            output::manifest_path(o)
                .file_name()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_default()
        }),
    }
}

/// Runs a command and returns the rendered table without touching the
/// filesystem; any `--out` only shows up as the manifest reference.
pub fn render_command(argv: Vec<OsString>) -> Result<Vec<u8>, CliError> {
    match parse(argv)? {
        Parsed::Info(s) => Ok(s.into_bytes()),
        Parsed::Run(p) => {
            let out = with_threads(p.cli.threads, || execute(&p.cli.command))??;
            let bytes = render(&out.table, &header(&p, &out), p.cli.format);
            match out.failure {
                Some(e) => Err(e),
                None => Ok(bytes),
            }
        }
    }
}

/// Full run: parse, compute, write. Returns the process exit code; errors
/// go to stderr as a JSON body.
pub fn run(argv: Vec<OsString>) -> i32 {
    match try_run(argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

fn try_run(argv: Vec<OsString>) -> Result<(), CliError> {
    let p = match parse(argv)? {
        Parsed::Info(s) => {
            print!("{s}");
            return Ok(());
        }
        Parsed::Run(p) => p,
    };
    let out = with_threads(p.cli.threads, || execute(&p.cli.command))??;
    let head = header(&p, &out);
    let bytes = render(&out.table, &head, p.cli.format);
    match &p.cli.out {
        Some(path) => {
            write_with_manifest(path, &bytes, &head)?;
        }
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(&bytes)
                .and_then(|_| so.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })?;
        }
    }
    match out.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
