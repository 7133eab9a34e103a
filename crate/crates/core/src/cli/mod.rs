//! Batch driver: `levy-spde run <config>` builds the stack from a TOML config,
//! runs the requested suites in order and writes one CSV per table, a
//! `summary.csv` of verdicts and a `manifest.toml` holding the fully
//! resolved config.
//!
//! Exit codes: 0 all suites ran and none failed, 1 some verdict is `fail`,
//! 2 config error (or unknown suite query), 3 suite prerequisite error,
//! 4 I/O error.

pub mod config;
pub mod output;
pub mod suites;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::ExperimentConfig;
pub use output::{Cell, Table};
pub use suites::{find_suite, run_suite, suggest, Outcome, SuiteInfo, SuiteResult, SUITES};

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "levy-spde", version, about = "Verification suites for nonlocal parabolic equations driven by jump noise")]
pub struct Cli {
    /// Artifact directory (default: $LEVY_SPDE_OUT, else ./levy-spde-out).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Replaces the seed of the config (0 ..= 2^63 − 1, the TOML integer range).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(0..=i64::MAX as u64))]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the suites listed in a config file.
    Run { config: PathBuf },
    /// Print the suite catalogue, optionally only the entries matching a query.
    ListSuites { query: Option<String> },
}

/// What a completed run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub verdicts: Vec<(String, Outcome, String)>,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } => 2,
        Error::SuitePrereq { .. } => 3,
        Error::Io(_) => 4,
        _ => 1,
    }
}

/// Runs every suite of `cfg`, writing artifacts into `out`.
pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary> {
    std::fs::create_dir_all(out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
    let base = suites::Stack::build(cfg)?.base;
    output::Manifest {
        package: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        schema: output::SCHEMA_VERSION,
        seed: cfg.seed,
        suites: &cfg.suites,
        resolved_base: Some(base),
        config: cfg,
    }
    .write(out)?;
    let mut summary = Table::new(&["suite", "verdict", "detail"]);
    let mut verdicts = Vec::new();
    let mut first_err = None;
    for id in &cfg.suites {
        match run_suite(id, cfg) {
            Ok(r) => {
                for (name, t) in &r.tables {
                    t.write(out, name)?;
                }
                summary.push(vec![Cell::text(id), Cell::text(r.outcome.as_str()), Cell::Text(r.detail.clone())]);
                verdicts.push((id.clone(), r.outcome, r.detail));
            }
            Err(e) => {
                summary.push(vec![Cell::text(id), Cell::text("error"), Cell::Text(format!("{}: {e}", e.kind()))]);
                first_err.get_or_insert(e);
            }
        }
    }
    summary.write(out, "summary")?;
    match first_err {
        Some(e) => Err(e),
        None => Ok(RunSummary { out_dir: out.to_path_buf(), verdicts }),
    }
}

fn list(query: Option<&str>) -> i32 {
    let hits: Vec<&SuiteInfo> = match query {
        None => SUITES.iter().collect(),
        Some(q) => SUITES.iter().filter(|s| s.id.contains(q)).collect(),
    };
    if hits.is_empty() {
        let q = query.unwrap_or_default();
        eprintln!("unknown suite '{q}'; did you mean: {}", suggest(q).into_iter().take(3).collect::<Vec<_>>().join(", "));
        return 2;
    }
    for s in hits {
        println!("{:<10} {}\n{:<10} anchors: {}", s.id, s.description, "", s.anchors);
    }
    0
}

fn dispatch(cli: Cli) -> i32 {
    match cli.command {
        Command::ListSuites { query } => list(query.as_deref()),
        Command::Run { config } => {
            let result = ExperimentConfig::load(&config).and_then(|mut cfg| {
                if let Some(seed) = cli.seed {
                    cfg.seed = seed;
                }
                run(&cfg, &output::resolve_out_dir(cli.out.as_deref()))
            });
            match result {
                Ok(s) => {
                    let mut code = 0;
                    for (id, o, detail) in &s.verdicts {
                        println!("{id:<10} {:<12} {detail}", o.as_str());
                        if *o == Outcome::Fail {
                            code = 1;
                        }
                    }
                    println!("artifacts in {}", s.out_dir.display());
                    code
                }
                Err(e) => {
                    eprintln!("error [{}]: {e}", e.kind());
                    exit_code(&e)
                }
            }
        }
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match cli.threads {
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build() {
            Ok(pool) => pool.install(|| dispatch(cli)),
            Err(e) => {
                eprintln!("error [IoError]: cannot start {k} workers: {e}");
                4
            }
        },
        None => dispatch(cli),
    }
}

pub fn main() -> i32 {
    main_with_args(std::env::args_os())
}
