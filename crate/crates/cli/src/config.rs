//! `--config FILE`: `key=value` lines turned into flags placed before the
//! command-line ones, so that explicit flags win.
//!
//! Blank lines and lines starting with `#` are ignored. A key `k` becomes `--k`;
//! the value `true` makes a bare switch.

use std::ffi::OsString;
use std::fs;

fn config_path(args: &[OsString]) -> Option<Result<OsString, String>> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return Some(it.next().cloned().ok_or_else(|| "--config needs a file".to_string()));
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(Ok(v.into()));
        }
    }
    None
}

pub fn parse_config(text: &str) -> Result<Vec<OsString>, String> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value", n + 1))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || k == "config" {
            return Err(format!("config line {}: bad key `{k}`", n + 1));
        }
        out.push(format!("--{k}").into());
        if v != "true" {
            out.push(v.into());
        }
    }
    Ok(out)
}

/// `args` with the config flags spliced in right after the subcommand name.
pub fn merged_args(args: Vec<OsString>, subcommands: Vec<String>) -> Result<Vec<OsString>, String> {
    let path = match config_path(&args) {
        None => return Ok(args),
        Some(p) => p?,
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.to_string_lossy()))?;
    let extra = parse_config(&text)?;
    let pos = args
        .iter()
        .skip(1)
        .position(|a| subcommands.iter().any(|s| a.to_string_lossy() == *s))
        .map(|p| p + 2)
        .ok_or("no subcommand given")?;
    let mut merged = args[..pos].to_vec();
    merged.extend(extra);
    merged.extend_from_slice(&args[pos..]);
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lines_become_flags() {
        let v = parse_config("# sweep\nt = 0.5\n\nbins=true\n").unwrap();
        assert_eq!(v, vec![OsString::from("--t"), "0.5".into(), "--bins".into()]);
        assert!(parse_config("oops").is_err());
    }
}
