//! Flat `key = value` config files.
//!
//! Each key names a long flag of the chosen subcommand or a global flag.
//! Blank lines and lines starting with `#` are skipped. Flags given on the
//! command line win over the file.

use std::ffi::OsString;

use anyhow::{bail, Context, Result};

pub fn parse(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .with_context(|| format!("config line {}: expected key = value", n + 1))?;
        let key = k.trim();
        if key.is_empty() || key.starts_with('-') || key.contains(char::is_whitespace) {
            bail!("config line {}: bad key {key:?}", n + 1);
        }
        out.push((key.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Appends `--key value` for every entry whose flag is absent from `argv`.
pub fn merge(argv: &[OsString], entries: &[(String, String)]) -> Vec<OsString> {
    let given = |key: &str| {
        let flag = format!("--{key}");
        let prefix = format!("--{key}=");
        argv.iter()
            .filter_map(|a| a.to_str())
            .any(|a| a == flag || a.starts_with(&prefix))
    };
    let mut out = argv.to_vec();
    for (k, v) in entries {
        if !given(k) {
            out.push(format!("--{k}").into());
            out.push(v.into());
        }
    }
    out
}

/// Value of `--config` in raw argv, if any.
pub fn find_config_path(argv: &[OsString]) -> Option<String> {
    let mut it = argv.iter().filter_map(|a| a.to_str());
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().map(str::to_string);
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}
