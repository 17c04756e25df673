use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use resonance_core::cli::{emit, error_record, run};
use resonance_core::config::{apply_override, config_from_table, parse_table};
use toml::Table;

/// Box-counting, projection and resonance experiments for sums of
/// self-similar sets.
///
/// Settings are `key=value` pairs (or `--key value`) mirroring the config
/// file keys; they override the file. A bare word after `render` selects
/// the target (`product` or `planar`).
#[derive(Parser, Debug)]
#[command(name = "resonance", version)]
struct Args {
    /// TOML config file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Print planned work sizes without computing.
    #[arg(long)]
    dry_run: bool,
    /// Worker threads (also read from RESONANCE_WORKERS).
    #[arg(long, env = "RESONANCE_WORKERS")]
    workers: Option<usize>,
    /// Subcommand (resonance, dim, sumdim, marstrand, tower, homogenize,
    /// drop, project or render) followed by settings. The subcommand may
    /// also come from the config file.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
    settings: Vec<String>,
}

/// Turns `--key value`, `--key=value`, `key=value` and bare render targets
/// into `key=value` assignments.
fn assignments(settings: &[String]) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut it = settings.iter();
    while let Some(s) = it.next() {
        if s.contains('=') {
            out.push(s.clone());
        } else if let Some(key) = s.strip_prefix("--") {
            match key {
                "dry-run" | "dry_run" => out.push("dry_run=true".into()),
                _ => {
                    let v = it
                        .next()
                        .ok_or_else(|| format!("flag --{key} needs a value"))?;
                    out.push(format!("{key}={v}"));
                }
            }
        } else if s == "product" || s == "planar" {
            out.push(format!("target=\"{s}\""));
        } else {
            return Err(format!("unrecognised argument '{s}'"));
        }
    }
    Ok(out)
}

fn fail(kind: &str, messages: Vec<String>, code: u8) -> ExitCode {
    eprintln!("{}", error_record(kind, &messages));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut table = match &args.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => match parse_table(&text) {
                Ok(t) => t,
                Err(e) => return fail("config", e.0.iter().map(|e| e.to_string()).collect(), 2),
            },
            Err(e) => return fail("io", vec![format!("{}: {e}", path.display())], 2),
        },
        None => Table::new(),
    };
    let (command, rest) = match args.settings.split_first() {
        Some((c, rest)) if !c.starts_with('-') && !c.contains('=') => (Some(c), rest),
        _ => (None, &args.settings[..]),
    };
    let mut sets = match assignments(rest) {
        Ok(s) => s,
        Err(m) => return fail("config", vec![m], 2),
    };
    if let Some(c) = command {
        sets.insert(0, format!("command=\"{c}\""));
    }
    if args.dry_run {
        sets.push("dry_run=true".into());
    }
    if let Some(w) = args.workers {
        sets.push(format!("workers={w}"));
    }
    let mut errors = Vec::new();
    for s in &sets {
        if let Err(e) = apply_override(&mut table, s) {
            errors.push(e.to_string());
        }
    }
    if !errors.is_empty() {
        return fail("config", errors, 2);
    }
    let cfg = match config_from_table(&table) {
        Ok(c) => c,
        Err(e) => return fail("config", e.0.iter().map(|e| e.to_string()).collect(), 2),
    };
    #[cfg(feature = "parallel")]
    if let Some(n) = cfg.workers {
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let out = match run(&cfg) {
        Ok(o) => o,
        Err(e) => return fail(e.kind(), vec![e.to_string()], 1),
    };
    if let Err(e) = emit(&cfg, &out, &mut std::io::stdout().lock()) {
        return fail("io", vec![e.to_string()], 1);
    }
    ExitCode::SUCCESS
}
