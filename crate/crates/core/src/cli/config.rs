use std::path::{Path, PathBuf};

use super::{CliError, Flags};

/// Reads a `key = value` settings file. `#` starts a comment.
///
/// Keys mirror the long flags: `n`, `boundary`, `rates`, `gamma`, `init`,
/// `tmax`, `dt`, `gamma_grid`, `out`, `tol`, `window`.
pub(crate) fn parse_config_file(path: &Path) -> Result<Flags, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text)
}

pub(crate) fn parse_config_text(text: &str) -> Result<Flags, CliError> {
    let mut flags = Flags::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| CliError::Usage(format!("config line {}: {msg}", lineno + 1));
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let float = || value.parse::<f64>().map_err(|_| err(format!("{key}: bad number {value:?}")));
        let count = || value.parse::<usize>().map_err(|_| err(format!("{key}: bad integer {value:?}")));
        match key.as_str() {
            "n" | "sites" => flags.n = Some(count()?),
            "boundary" => flags.boundary = Some(value.to_string()),
            "rates" => {
                let rates = value
                    .split(',')
                    .map(|r| r.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| err(format!("rates: bad list {value:?}")))?;
                flags.rates = Some(rates);
            }
            "gamma" => flags.gamma = Some(float()?),
            "init" => flags.init = Some(value.to_string()),
            "tmax" | "t_max" => flags.tmax = Some(float()?),
            "dt" => flags.dt = Some(float()?),
            "gamma_grid" => flags.gamma_grid = Some(value.to_string()),
            "out" | "output" => flags.out = Some(PathBuf::from(value)),
            "tol" => flags.tol = Some(float()?),
            "window" => flags.window = Some(count()?),
            other => return Err(err(format!("unknown key {other:?}"))),
        }
    }
    Ok(flags)
}
