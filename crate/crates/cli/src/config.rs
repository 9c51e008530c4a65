//! Flat `key = value` config files, merged under the explicit flags.

use crate::error::CliError;
use std::ffi::OsString;
use std::path::Path;

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", i + 1)))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", i + 1)));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

fn flag_given(argv: &[OsString], key: &str) -> bool {
    let flag = format!("--{key}");
    let prefix = format!("{flag}=");
    argv.iter().any(|a| {
        let a = a.to_string_lossy();
        a == flag || a.starts_with(&prefix)
    })
}

/// Path given with `--config`, if any.
pub fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

/// Appends config entries whose flags are absent from `argv`. `true` and
/// `false` stand for presence and absence of a switch.
pub fn merge(argv: &mut Vec<OsString>, entries: &[(String, String)]) {
    for (k, v) in entries {
        if k == "config" || flag_given(argv, k) {
            continue;
        }
        match v.as_str() {
            "false" => {}
            "true" => argv.push(format!("--{k}").into()),
            _ => argv.push(format!("--{k}={v}").into()),
        }
    }
}

pub fn load_and_merge(argv: &mut Vec<OsString>) -> Result<(), CliError> {
    let Some(path) = config_path(argv) else {
        return Ok(());
    };
    let path = Path::new(&path).to_path_buf();
    let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io { path, source })?;
    let entries = parse_config(&text)?;
    merge(argv, &entries);
    Ok(())
}
