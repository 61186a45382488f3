//! Grid files: one scenario per line, either a path to a scenario file
//! (relative to the grid file) or inline `key=value` pairs.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use crate::config::{load_scenario, parse_inline, ConfigError, ScenarioConfig};

pub fn load_grid(path: &Path) -> Result<Vec<ScenarioConfig>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_grid(&text, &base)
}

pub fn parse_grid(text: &str, base: &Path) -> Result<Vec<ScenarioConfig>, ConfigError> {
    let mut out = Vec::new();
    let mut ids = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cfg = if line.contains('=') {
            parse_inline(i + 1, line)?
        } else {
            let p: PathBuf = base.join(line);
            load_scenario(&p)?
        };
        if !ids.insert(cfg.id.clone()) {
            return Err(ConfigError::Invalid {
                line: i + 1,
                key: "id".into(),
                reason: format!("scenario id `{}` already used in this grid", cfg.id),
            });
        }
        out.push(cfg);
    }
    Ok(out)
}
