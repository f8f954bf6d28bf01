//! Command-line front end: parses arguments and config, runs a campaign,
//! then writes `<command>.csv`, `<command>.json` and `<command>.manifest.json`.

pub mod commands;
pub mod config;

use clap::Parser;
use config::{Config, ConfigError};
use serde_json::{json, Value};
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const SCHEMA: &str = "fppdt-1";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] fppdt::Error),
    #[error("{0}")]
    Output(String),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e.0)
    }
}

impl RunError {
    /// 2 for bad input, 3 for numerical failure during a run.
    pub fn exit_code(&self) -> i32 {
        use fppdt::Error as E;
        match self {
            RunError::Config(_) | RunError::Output(_) => 2,
            RunError::Core(E::Numeric(_) | E::Degenerate(_) | E::Disconnected(..)) => 3,
            RunError::Core(_) => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "fppdt", version, about = "First-passage percolation on Poisson-Delaunay graphs")]
struct Args {
    /// One of: gen, triangulate, fpp, mu, fluct, shape, perc, pcstar, renorm, animals, paths, kappa, truncgap
    command: String,
    /// `key = value` file, or a manifest written by an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides as `key=value`.
    overrides: Vec<String>,
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&args) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("fppdt {}: {e}", args.command);
            e.exit_code()
        }
    }
}

fn load_config(path: &Path, command: &str) -> Result<Config, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
    if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        if let Some(c) = v.get("command").and_then(Value::as_str) {
            if c != command {
                return Err(RunError::Config(format!("manifest is for {c:?}, not {command:?}")));
            }
        }
        let entries = v
            .get("config")
            .and_then(Value::as_object)
            .ok_or_else(|| RunError::Config("manifest has no config object".into()))?;
        let mut config = Config::default();
        for (k, val) in entries {
            let s = match val {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            config.set(k, &s)?;
        }
        Ok(config)
    } else {
        Ok(Config::parse(&text)?)
    }
}

fn thread_count(config: &Config) -> Result<Option<usize>, RunError> {
    let from_env = std::env::var("FPPDT_THREADS").ok();
    let raw = from_env.as_deref().or(config.raw("threads"));
    match raw {
        None => Ok(None),
        Some(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(RunError::Config(format!("threads must be a positive integer, got {s:?}"))),
        },
    }
}

fn execute(args: &Args) -> Result<Vec<PathBuf>, RunError> {
    if !commands::COMMANDS.contains(&args.command.as_str()) {
        return Err(RunError::Config(format!(
            "unknown command {:?}; expected one of {}",
            args.command,
            commands::COMMANDS.join(", ")
        )));
    }
    let mut config = match &args.config {
        Some(p) => load_config(p, &args.command)?,
        None => Config::default(),
    };
    for o in &args.overrides {
        config.apply(o)?;
    }
    if let Some(s) = args.seed {
        config.set("seed", &s.to_string())?;
    }
    let seed: u64 = config.get("seed", 1u64)?;
    config.set("seed", &seed.to_string())?;

    let threads = thread_count(&config)?;
    if let Some(n) = threads {
        // Fails only if a pool already exists in this process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let pool_threads = rayon::current_num_threads();

    let start = Instant::now();
    let out = commands::run(&args.command, &config, seed)?;
    let elapsed = start.elapsed().as_secs_f64();

    std::fs::create_dir_all(&args.out)
        .map_err(|e| RunError::Output(format!("{}: {e}", args.out.display())))?;

    let cmd = &args.command;
    let mut files = Vec::new();
    let mut write = |name: String, contents: &[u8]| -> Result<(), RunError> {
        let path = args.out.join(name);
        std::fs::write(&path, contents).map_err(|e| RunError::Output(format!("{}: {e}", path.display())))?;
        files.push(path);
        Ok(())
    };

    write(format!("{cmd}.csv"), &csv_bytes(&out.csv)?)?;
    let summary = json!({ "schema": SCHEMA, "command": cmd, "seed": seed, "results": out.summary });
    write(format!("{cmd}.json"), pretty(&summary)?.as_bytes())?;
    for (suffix, text) in &out.extra {
        write(format!("{cmd}.{suffix}"), text.as_bytes())?;
    }
    let streams: serde_json::Map<String, Value> = out
        .streams
        .iter()
        .map(|&label| {
            let seeds: Vec<u64> =
                (0..out.replicas as u64).map(|r| fppdt::seed::derive_seed(seed, r, label)).collect();
            (label.to_string(), json!(seeds))
        })
        .collect();
    let manifest = json!({
        "schema": SCHEMA,
        "command": cmd,
        "version": env!("CARGO_PKG_VERSION"),
        "config": config.entries(),
        "seed": seed,
        "replicas": out.replicas,
        "derived_seeds": streams,
        "threads": pool_threads,
        "wall_clock_seconds": elapsed,
    });
    write(format!("{cmd}.manifest.json"), pretty(&manifest)?.as_bytes())?;
    Ok(files)
}

fn pretty(v: &Value) -> Result<String, RunError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| RunError::Output(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_bytes(table: &commands::Table) -> Result<Vec<u8>, RunError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| RunError::Output(e.to_string());
    w.write_record(&table.header).map_err(err)?;
    for row in &table.rows {
        w.write_record(row).map_err(err)?;
    }
    w.into_inner().map_err(|e| RunError::Output(e.to_string()))
}
