//! `key = value` config files, expanded into flags placed ahead of the
//! explicit ones so that later (explicit) occurrences win.

use std::collections::BTreeMap;
use std::path::Path;

use clap::CommandFactory;
use herzkit::Error;

use crate::cli::Cli;

/// Flags of which at most one may be given; an explicit one drops the
/// config value of the others.
const EXCLUSIVE: &[&[&str]] = &[&["builtin", "input"]];

pub fn parse(text: &str) -> Result<BTreeMap<String, String>, Error> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line {}: expected key = value", n + 1)))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(Error::Parse(format!("config line {}: empty key", n + 1)));
        }
        out.insert(key, v.trim().trim_matches('"').to_string());
    }
    Ok(out)
}

fn flag_of(arg: &str) -> Option<&str> {
    let name = arg.strip_prefix("--")?;
    Some(name.split('=').next().unwrap_or(name))
}

/// Splices the config named by `--config` into `argv`.
pub fn merge(argv: Vec<String>) -> Result<Vec<String>, Error> {
    let Some(pos) = argv.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(argv);
    };
    let path = match argv[pos].strip_prefix("--config=") {
        Some(p) => p.to_string(),
        None => argv
            .get(pos + 1)
            .cloned()
            .ok_or_else(|| Error::Parse("--config needs a path".into()))?,
    };
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| Error::Precondition(format!("config {path}: {e}")))?;
    let entries = parse(&text)?;

    let cmd = Cli::command();
    let sub_pos = argv
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, a)| cmd.find_subcommand(a.as_str()).is_some())
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Parse("no subcommand given".into()))?;
    let sub = cmd.find_subcommand(&argv[sub_pos]).expect("found above");

    let explicit: Vec<&str> = argv[sub_pos + 1..].iter().filter_map(|a| flag_of(a)).collect();
    let mut injected = Vec::new();
    for (key, value) in &entries {
        if key == "config" {
            continue;
        }
        let shadowed = EXCLUSIVE
            .iter()
            .any(|group| group.contains(&key.as_str()) && group.iter().any(|g| g != key && explicit.contains(g)));
        if shadowed {
            continue;
        }
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| Error::Parse(format!("config key '{key}' is not a flag of '{}'", sub.get_name())))?;
        if arg.get_action().takes_values() {
            injected.push(format!("--{key}={value}"));
        } else {
            match value.as_str() {
                "true" => injected.push(format!("--{key}")),
                "false" => {}
                _ => return Err(Error::Parse(format!("config key '{key}' expects true or false"))),
            }
        }
    }

    let mut out: Vec<String> = Vec::with_capacity(argv.len() + injected.len());
    let skip_next = !argv[pos].contains('=');
    for (i, a) in argv.into_iter().enumerate() {
        if i == pos || (skip_next && i == pos + 1) {
            continue;
        }
        out.push(a);
        if i == sub_pos {
            out.extend(injected.iter().cloned());
        }
    }
    Ok(out)
}
