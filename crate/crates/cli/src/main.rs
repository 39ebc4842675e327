//! `tvboost` command-line front end.

mod args;
mod commands;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::Parser;
use serde::{Deserialize, Serialize};

use args::{Cli, Command};
use tvboost::error::ErrorKind;

const TOOL: &str = "tvboost";

/// Everything needed to rerun a command.
#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    tool: String,
    version: String,
    command: String,
    /// Arguments after the program name, with config-file values inlined.
    args: Vec<String>,
    seed: Option<u64>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(tvboost::Error::Config(msg.into()))
}

fn flag_value(v: &toml::Value) -> Result<Option<String>> {
    Ok(match v {
        toml::Value::String(s) => Some(s.clone()),
        toml::Value::Integer(i) => Some(i.to_string()),
        toml::Value::Float(f) => Some(f.to_string()),
        toml::Value::Boolean(_) => None,
        toml::Value::Array(items) => Some(
            items
                .iter()
                .map(|i| {
                    flag_value(i)?.ok_or_else(|| usage("arrays of booleans are not flag values"))
                })
                .collect::<Result<Vec<_>>>()?
                .join(","),
        ),
        other => bail!(usage(format!("unsupported config value `{other}`"))),
    })
}

fn push_flags(table: &toml::Table, out: &mut Vec<String>) -> Result<()> {
    for (key, value) in table {
        let flag = format!("--{}", key.replace('_', "-"));
        match (value, flag_value(value)?) {
            (toml::Value::Boolean(true), _) => out.push(flag),
            (toml::Value::Boolean(false), _) => {}
            (_, Some(v)) => out.push(format!("{flag}={v}")),
            (_, None) => {}
        }
    }
    Ok(())
}

const SUBCOMMANDS: [&str; 6] = ["sim", "forecast", "cv", "report", "transform", "replay"];

/// Inserts config-file flags right after the subcommand so later command-line
/// flags override them, and drops the `--config` argument itself.
fn merge_config(argv: &[String]) -> Result<Vec<String>> {
    let mut path = None;
    for (i, a) in argv.iter().enumerate() {
        if a == "--config" {
            path = argv.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else {
        return Ok(argv.to_vec());
    };
    let Some(sub) = argv
        .iter()
        .skip(1)
        .find(|a| SUBCOMMANDS.contains(&a.as_str()))
    else {
        return Ok(argv.to_vec());
    };
    let text = fs::read_to_string(&path).with_context(|| format!("cannot read {path}"))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| usage(format!("config {path}: {e}")))?;
    let mut flags = Vec::new();
    let globals: toml::Table = table
        .iter()
        .filter(|(_, v)| !v.is_table())
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    push_flags(&globals, &mut flags)?;
    if let Some(section) = table.get(sub.as_str()).and_then(toml::Value::as_table) {
        push_flags(section, &mut flags)?;
    }
    let mut out = Vec::with_capacity(argv.len() + flags.len());
    let mut iter = argv.iter();
    let mut inserted = false;
    while let Some(a) = iter.next() {
        if a == "--config" {
            iter.next();
            continue;
        }
        if a.starts_with("--config=") {
            continue;
        }
        out.push(a.clone());
        if !inserted && a == sub && out.len() > 1 {
            out.extend(flags.iter().cloned());
            inserted = true;
        }
    }
    Ok(out)
}

fn manifest_path(cli: &Cli, outcome: &commands::Outcome) -> Option<PathBuf> {
    cli.manifest.clone().or_else(|| {
        outcome.outputs.first().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    })
}

fn write_manifest(path: &Path, m: &Manifest) -> Result<()> {
    let mut text = serde_json::to_string_pretty(m)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn parse(argv: &[String]) -> std::result::Result<Cli, ExitCode> {
    Cli::try_parse_from(argv).map_err(|e| {
        let _ = e.print();
        if e.use_stderr() {
            ExitCode::from(1)
        } else {
            ExitCode::SUCCESS
        }
    })
}

fn execute(
    argv: Vec<String>,
    depth: usize,
) -> std::result::Result<(), (anyhow::Error, Option<ExitCode>)> {
    let argv = merge_config(&argv).map_err(|e| (e, None))?;
    let cli = parse(&argv).map_err(|c| (anyhow!("invalid arguments"), Some(c)))?;
    if depth == 0 {
        init(&cli).map_err(|e| (e, None))?;
    }
    let outcome = match &cli.command {
        Command::Sim(a) => commands::sim(a),
        Command::Forecast(a) => commands::forecast(a),
        Command::Cv(a) => commands::cv(a),
        Command::Report(a) => commands::report(a),
        Command::Transform(a) => commands::transform(a),
        Command::Replay(a) => return replay(&a.manifest, depth),
    }
    .map_err(|e| (e, None))?;
    if let Some(path) = manifest_path(&cli, &outcome) {
        let manifest = Manifest {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: cli.command.name().into(),
            args: argv[1..].to_vec(),
            seed: outcome.seed,
            inputs: outcome.inputs,
            outputs: outcome.outputs,
        };
        write_manifest(&path, &manifest).map_err(|e| (e, None))?;
    }
    Ok(())
}

fn replay(path: &Path, depth: usize) -> std::result::Result<(), (anyhow::Error, Option<ExitCode>)> {
    let load = || -> Result<Manifest> {
        let text =
            fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let m: Manifest = serde_json::from_str(&text)
            .map_err(|e| usage(format!("manifest {}: {e}", path.display())))?;
        if m.tool != TOOL {
            bail!(usage(format!("manifest was written by `{}`", m.tool)));
        }
        if m.command == "replay" || depth > 0 {
            bail!(usage("a manifest cannot replay another manifest"));
        }
        if m.version != env!("CARGO_PKG_VERSION") {
            log::warn!("manifest was written by version {}", m.version);
        }
        Ok(m)
    };
    let m = load().map_err(|e| (e, None))?;
    let mut argv = vec!["tvboost".to_string()];
    argv.extend(m.args);
    execute(argv, depth + 1)
}

fn init(cli: &Cli) -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(&cli.log_level))
        .format_timestamp(None)
        .try_init()
        .ok();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            bail!(usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| usage(format!("cannot start {jobs} workers: {e}")))?;
    }
    Ok(())
}

/// 1 for usage errors, 2 for data errors, 3 for numerical failures.
fn exit_code(e: &anyhow::Error) -> ExitCode {
    for cause in e.chain() {
        if let Some(t) = cause.downcast_ref::<tvboost::Error>() {
            return ExitCode::from(match t.kind() {
                ErrorKind::Usage => 1,
                ErrorKind::Data => 2,
                ErrorKind::Numeric => 3,
            });
        }
        if cause.downcast_ref::<std::io::Error>().is_some()
            || cause.downcast_ref::<csv::Error>().is_some()
        {
            return ExitCode::from(2);
        }
    }
    ExitCode::from(1)
}

fn main() -> ExitCode {
    match execute(std::env::args().collect(), 0) {
        Ok(()) => ExitCode::SUCCESS,
        Err((_, Some(code))) => code,
        Err((e, None)) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}
