//! `gabor` — time-frequency analysis experiments from the command line.
//!
//! ```text
//! gabor <subcommand> [--config <path>] [--seed <u64>] [--out <dir>]
//!                    [--set key=value]...
//! ```
//!
//! Subcommands: analyze, synthesize, dual, bounds, norm, approx, sigma,
//! bernstein, direct, inverse, series, all. Configuration is flat key=value
//! text; later sources win (defaults < config file < --set < flags).
//! Exit status: 0 when every pass flag holds, 1 when an experiment ran but
//! failed its check, 2 on configuration or runtime errors (with a
//! machine-readable JSON object on standard error).

mod commands;
mod config;

use std::path::PathBuf;

use config::Config;
use gaborlab::Error;

const USAGE: &str = "usage: gabor <analyze|synthesize|dual|bounds|norm|approx|sigma|bernstein|direct|inverse|series|all> \
[--config <path>] [--seed <u64>] [--out <dir>] [--set key=value]...";

fn main() {
    std::process::exit(run(std::env::args().skip(1).collect()));
}

fn run(args: Vec<String>) -> i32 {
    match execute(args) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let kind = match &e {
                Error::Parse { .. } => "config",
                _ => "run",
            };
            eprintln!(
                "{}",
                serde_json::json!({"error": e.to_string(), "kind": kind})
            );
            2
        }
    }
}

fn execute(args: Vec<String>) -> Result<bool, Error> {
    let mut iter = args.into_iter();
    let command = iter.next().ok_or(Error::Parse {
        what: "subcommand",
        input: USAGE.to_string(),
    })?;
    if command == "--help" || command == "-h" || command == "help" {
        println!("{USAGE}");
        return Ok(true);
    }

    let mut config = Config::defaults();
    let mut config_path: Option<PathBuf> = None;
    let mut sets: Vec<String> = Vec::new();
    let mut seed_flag: Option<String> = None;
    let mut out_flag: Option<String> = None;

    while let Some(arg) = iter.next() {
        let mut value_for = |flag: &'static str| {
            iter.next().ok_or(Error::Parse {
                what: "missing flag value",
                input: flag.to_string(),
            })
        };
        match arg.as_str() {
            "--config" => config_path = Some(PathBuf::from(value_for("--config")?)),
            "--seed" => seed_flag = Some(value_for("--seed")?),
            "--out" => out_flag = Some(value_for("--out")?),
            "--set" => sets.push(value_for("--set")?),
            other => {
                return Err(Error::Parse {
                    what: "argument",
                    input: other.to_string(),
                })
            }
        }
    }

    if let Some(path) = &config_path {
        config.merge_file(path)?;
    }
    for s in &sets {
        config.merge_set(s)?;
    }
    if let Some(seed) = seed_flag {
        config.set("seed", &seed);
    }
    if let Some(out) = out_flag {
        config.set("out", &out);
    }
    // the seed must parse before any experiment runs
    config.seed()?;

    commands::run(&command, &mut config)
}
