//! `--config` files: one `key = value` per line, `#` starts a comment.
//!
//! Entries are spliced into the argument list as `--key=value` directly
//! after the subcommand path, so anything given on the command line comes
//! later and wins (clap is told to let repeated flags override).

use std::ffi::OsString;
use std::path::Path;

use crate::exit::Failure;

pub fn parse_config(text: &str, origin: &Path) -> Result<Vec<(String, String)>, Failure> {
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Failure::usage(format!(
                "{}:{}: expected `key = value`, found `{line}`",
                origin.display(),
                idx + 1
            )));
        };
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(Failure::usage(format!(
                "{}:{}: invalid key `{}`",
                origin.display(),
                idx + 1,
                key
            )));
        }
        entries.push((key, value.trim().to_string()));
    }
    Ok(entries)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut found = None;
    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        let text = arg.to_string_lossy();
        if text == "--" {
            break;
        }
        if text == "--config" {
            found = iter.next().cloned();
        } else if let Some(path) = text.strip_prefix("--config=") {
            found = Some(OsString::from(path));
        }
    }
    found
}

/// Returns `args` with the entries of the referenced config file inserted.
pub fn expand_args(args: Vec<OsString>) -> Result<Vec<OsString>, Failure> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::io(format!("cannot read config {}: {e}", path.display())))?;
    let entries = parse_config(&text, path)?;

    // program name, then subcommand words up to the first flag
    let split = 1 + args
        .iter()
        .skip(1)
        .take_while(|a| !a.to_string_lossy().starts_with('-'))
        .count();
    let mut out: Vec<OsString> = args[..split].to_vec();
    for (key, value) in entries {
        match value.as_str() {
            "true" => out.push(format!("--{key}").into()),
            "false" => {}
            _ => out.push(format!("--{key}={value}").into()),
        }
    }
    out.extend_from_slice(&args[split..]);
    Ok(out)
}
