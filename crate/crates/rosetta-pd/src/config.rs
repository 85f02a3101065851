//! Flat `key = value` config files. Each key is a long flag name; the entries
//! are spliced into the argument list ahead of the user's own flags, so flags
//! given on the command line win.

use std::ffi::OsString;
use std::path::Path;

use crate::error::{read_file, FormatError};

/// `(key, value)` pairs in file order. `#` starts a comment; blank lines are
/// ignored. A bare `key` is shorthand for `key = true`.
pub fn parse_config(file: &str, text: &str) -> Result<Vec<(String, String)>, FormatError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = match line.split_once('=') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => (line, "true"),
        };
        let k = k.trim_start_matches("--");
        if k.is_empty() || k.contains(char::is_whitespace) {
            return Err(FormatError::syntax(file, n + 1, 1, format!("bad config key `{k}`")));
        }
        out.push((k.to_string(), v.trim_matches('"').to_string()));
    }
    Ok(out)
}

/// Flag tokens for config entries: `true` gives a bare switch, `false` is
/// dropped, anything else is `--key=value`.
pub fn config_args(entries: &[(String, String)]) -> Vec<OsString> {
    entries
        .iter()
        .filter_map(|(k, v)| match v.as_str() {
            "true" => Some(format!("--{k}")),
            "false" => None,
            v => Some(format!("--{k}={v}")),
        })
        .map(OsString::from)
        .collect()
}

/// Finds `--config PATH` / `--config=PATH`, removes it and inserts the file's
/// flags right after the subcommand (or after the program name when no
/// subcommand is recognised).
pub fn expand_argv(argv: Vec<OsString>, subcommands: &[&str]) -> Result<Vec<OsString>, FormatError> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut config = None;
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            match it.next() {
                Some(p) => config = Some(p),
                None => rest.push(a),
            }
        } else if let Some(p) = s.strip_prefix("--config=") {
            config = Some(OsString::from(p));
        } else {
            rest.push(a);
        }
    }
    let Some(path) = config else { return Ok(rest) };
    let path = Path::new(&path);
    let text = read_file(path)?;
    let extra = config_args(&parse_config(&path.display().to_string(), &text)?);
    let at = rest
        .iter()
        .position(|a| subcommands.contains(&a.to_string_lossy().as_ref()))
        .map_or(rest.len().min(1), |i| i + 1);
    rest.splice(at..at, extra);
    Ok(rest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_and_flags() {
        let e = parse_config("c", "# sweep\nsweep = ub\nseeds=50 # per point\nstrict\ncompat = false\n").unwrap();
        assert_eq!(e.len(), 4);
        let args: Vec<String> = config_args(&e).into_iter().map(|a| a.into_string().unwrap()).collect();
        assert_eq!(args, ["--sweep=ub", "--seeds=50", "--strict"]);
    }

    #[test]
    fn spliced_after_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.cfg");
        std::fs::write(&p, "points = 3\n").unwrap();
        let argv: Vec<OsString> = ["rosetta-pd", "--config", p.to_str().unwrap(), "partition", "--points", "5"]
            .iter()
            .map(OsString::from)
            .collect();
        let out: Vec<String> = expand_argv(argv, &["partition"]).unwrap().into_iter().map(|a| a.into_string().unwrap()).collect();
        assert_eq!(out, ["rosetta-pd", "partition", "--points=3", "--points", "5"]);
    }
}
