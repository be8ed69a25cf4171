//! `--config FILE`: a JSON run configuration expanded into command-line tokens.
//!
//! ```json
//! {"command": "check oracle", "args": {"theta": "sine:1,1", "nodes": [6], "point-base": true}, "seed": 7}
//! ```
//! Arrays become repeated flags, `true` becomes a bare flag and `false` is
//! dropped. Tokens given on the real command line are appended afterwards and
//! therefore win.

use std::collections::BTreeMap;
use std::ffi::OsString;

use serde::Deserialize;
use serde_json::Value;

use crate::failure::{Failure, Outcome};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    #[serde(default)]
    pub args: BTreeMap<String, Value>,
    pub seed: Option<u64>,
    pub format: Option<String>,
    pub out: Option<String>,
}

fn scalar(v: &Value) -> Outcome<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(Failure::usage(format!("unsupported config value {v}"))),
    }
}

impl RunConfig {
    pub fn tokens(&self) -> Outcome<Vec<OsString>> {
        let mut out: Vec<OsString> = self.command.split_whitespace().map(OsString::from).collect();
        if out.is_empty() {
            return Err(Failure::usage("config command is empty"));
        }
        let mut push = |flag: &str, value: Option<String>| {
            out.push(format!("--{flag}").into());
            if let Some(v) = value {
                out.push(v.into());
            }
        };
        for (k, v) in &self.args {
            match v {
                Value::Bool(true) => push(k, None),
                Value::Bool(false) | Value::Null => {}
                Value::Array(items) => {
                    for item in items {
                        push(k, Some(scalar(item)?));
                    }
                }
                other => push(k, Some(scalar(other)?)),
            }
        }
        if let Some(s) = self.seed {
            push("seed", Some(s.to_string()));
        }
        if let Some(f) = &self.format {
            push("format", Some(f.clone()));
        }
        if let Some(o) = &self.out {
            push("out", Some(o.clone()));
        }
        Ok(out)
    }
}

/// Removes `--config PATH` (or `--config=PATH`) from `argv` and splices in the
/// expanded configuration right after the program name.
pub fn expand(argv: Vec<OsString>) -> Outcome<Vec<OsString>> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut path = None;
    let mut it = argv.into_iter();
    let program = it.next().unwrap_or_else(|| "starval".into());
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = Some(it.next().ok_or_else(|| Failure::usage("--config needs a path"))?);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(OsString::from(p));
        } else {
            rest.push(a);
        }
    }
    let mut out = vec![program];
    if let Some(p) = path {
        let text = std::fs::read_to_string(&p).map_err(|e| Failure::usage(format!("{}: {e}", p.to_string_lossy())))?;
        let config: RunConfig = serde_json::from_str(&text).map_err(|e| Failure::usage(format!("config: {e}")))?;
        out.extend(config.tokens()?);
    }
    out.extend(rest);
    Ok(out)
}
