//! Merging of the optional JSON config file into the argument list.
//!
//! The file holds a flat object whose keys are long flag names (`kmax-mult` or
//! `kmax_mult`). Its entries are spliced in right after the subcommand, so flags given
//! on the command line come later and win.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::Value;

/// Finds `--config <path>` or `--config=<path>` in `args`.
pub fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut iter = args.iter();
    while let Some(a) = iter.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            return None;
        }
        if s == "--config" {
            return iter.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(rest.into());
        }
    }
    None
}

/// Converts the config object into `--flag value` tokens.
pub fn config_tokens(path: &Path) -> Result<Vec<OsString>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let value: Value = serde_json::from_str(&text)
        .with_context(|| format!("parsing config {}", path.display()))?;
    let Value::Object(map) = value else {
        bail!("config {} must hold a JSON object", path.display());
    };
    let mut out = Vec::new();
    for (key, v) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        if flag == "--config" {
            continue;
        }
        match v {
            Value::Bool(true) => out.push(flag.into()),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                let parts: Vec<String> = items.iter().map(scalar).collect::<Result<_>>()?;
                out.push(flag.into());
                out.push(parts.join(",").into());
            }
            other => {
                out.push(flag.into());
                out.push(scalar(&other)?.into());
            }
        }
    }
    Ok(out)
}

fn scalar(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        _ => bail!("config values must be scalars or lists of scalars, got {v}"),
    }
}

/// Inserts the config tokens after the subcommand name. Arguments before the
/// subcommand are global and stay in place.
pub fn merge(args: Vec<OsString>, tokens: Vec<OsString>, subcommands: &[&str]) -> Vec<OsString> {
    if tokens.is_empty() {
        return args;
    }
    let pos = args
        .iter()
        .position(|a| subcommands.iter().any(|s| a.to_string_lossy() == *s));
    match pos {
        Some(i) => {
            let mut out = args[..=i].to_vec();
            out.extend(tokens);
            out.extend_from_slice(&args[i + 1..]);
            out
        }
        None => args,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn finds_config_flag() {
        assert_eq!(
            config_path(&os(&["l1l2", "solve", "--config", "c.json"])),
            Some("c.json".into())
        );
        assert_eq!(
            config_path(&os(&["l1l2", "--config=c.json", "solve"])),
            Some("c.json".into())
        );
        assert_eq!(config_path(&os(&["l1l2", "solve"])), None);
    }

    #[test]
    fn tokens_follow_subcommand() {
        let merged = merge(
            os(&["l1l2", "solve", "--beta", "2"]),
            os(&["--beta", "1", "--gamma", "0.1"]),
            &["solve"],
        );
        assert_eq!(
            merged,
            os(&["l1l2", "solve", "--beta", "1", "--gamma", "0.1", "--beta", "2"])
        );
    }

    #[test]
    fn converts_values() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(
            &p,
            r#"{"kmax_mult": 7, "solvers": ["admm", "fb"], "free": true, "x": null}"#,
        )
        .unwrap();
        let t = config_tokens(&p).unwrap();
        assert_eq!(
            t,
            os(&["--free", "--kmax-mult", "7", "--solvers", "admm,fb"])
        );
    }
}
