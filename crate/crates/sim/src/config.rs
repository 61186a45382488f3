//! Line-oriented scenario files.
//!
//! One `key = value` per line; `#` starts a comment. Keys and defaults:
//!
//! | key              | default  | domain                         |
//! |------------------|----------|--------------------------------|
//! | `seed`           | required | u64                            |
//! | `mode`           | `v2vcc`  | `v2vcc`, `ip`                  |
//! | `id`             | derived  | letters, digits, `-_.`         |
//! | `runs`           | 10       | ≥ 1                            |
//! | `suppliers`      | 1        | 1–10                           |
//! | `consumers`      | 3        | 1–21                           |
//! | `ratio_check`    | false    | consumers = 3 × suppliers      |
//! | `discovery`      | 1        | 1, 3                           |
//! | `timeout_ms`     | 30       | 30, 50                         |
//! | `loss`           | 0.0      | 0.0, 0.2                       |
//! | `speed_mph`      | 0        | 0, 10, 30, 50, 70              |
//! | `max_retx`       | 12       | 0–64                           |
//! | `combine_phases` | false    | bool                           |
//! | `packet_bytes`   | 256      | 1–65535                        |
//! | `comm_range_m`   | 300      | > 0                            |
//! | `bandwidth_mbps` | 24       | > 0                            |
//! | `delay_ms`       | 25       | 25, 50, 100 (ip)               |
//! | `error_rate`     | 0.0005   | [0, 1) (ip)                    |
//! | `providers`      | 1        | 1–3 (ip)                       |
//! | `clients`        | 1        | 1–30 (ip)                      |

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;
use v2vcc_core::ip::CloudConfig;
use v2vcc_core::ScenarioParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    V2vcc,
    Ip,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::V2vcc => "v2vcc",
            Mode::Ip => "ip",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub id: String,
    pub mode: Mode,
    pub seed: u64,
    pub runs: usize,
    pub ratio_check: bool,
    pub params: ScenarioParams,
    pub cloud: CloudConfig,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: `{key}`: {reason}")]
    Invalid { line: usize, key: String, reason: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("{reason}")]
    Inconsistent { reason: String },
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl ConfigError {
    fn invalid(line: usize, key: &str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid { line, key: key.into(), reason: reason.into() }
    }
}

const KEYS: &[&str] = &[
    "seed",
    "mode",
    "id",
    "runs",
    "suppliers",
    "consumers",
    "ratio_check",
    "discovery",
    "timeout_ms",
    "loss",
    "speed_mph",
    "max_retx",
    "combine_phases",
    "packet_bytes",
    "comm_range_m",
    "bandwidth_mbps",
    "delay_ms",
    "error_rate",
    "providers",
    "clients",
];

pub fn load_scenario(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
    parse_scenario(&text)
}

/// Parses the text of a scenario file.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let pairs = text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    });
    let mut entries = Vec::new();
    for (line, text) in pairs {
        let Some((k, v)) = text.split_once('=') else {
            return Err(ConfigError::invalid(line, text, "expected `key = value`"));
        };
        entries.push((line, k.trim().to_string(), v.trim().to_string()));
    }
    from_entries(&entries)
}

/// Parses one sweep-grid line of whitespace-separated `key=value` pairs.
/// Errors report `line` as the grid line number.
pub fn parse_inline(line: usize, text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut entries = Vec::new();
    for tok in text.split_whitespace() {
        let Some((k, v)) = tok.split_once('=') else {
            return Err(ConfigError::invalid(line, tok, "expected `key=value`"));
        };
        entries.push((line, k.to_string(), v.to_string()));
    }
    from_entries(&entries)
}

fn parse<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| ConfigError::invalid(line, key, format!("cannot parse `{v}`")))
}

fn ranged<T>(line: usize, key: &str, v: &str, lo: T, hi: T) -> Result<T, ConfigError>
where
    T: std::str::FromStr + PartialOrd + fmt::Display + Copy,
{
    let x: T = parse(line, key, v)?;
    if x < lo || x > hi {
        return Err(ConfigError::invalid(line, key, format!("{x} outside {lo}..={hi}")));
    }
    Ok(x)
}

fn one_of(line: usize, key: &str, v: &str, allowed: &[f64]) -> Result<f64, ConfigError> {
    let x: f64 = parse(line, key, v)?;
    if !allowed.contains(&x) {
        return Err(ConfigError::invalid(line, key, format!("{x} not one of {allowed:?}")));
    }
    Ok(x)
}

fn boolean(line: usize, key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(ConfigError::invalid(line, key, format!("`{v}` is not a boolean"))),
    }
}

fn positive(line: usize, key: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = parse(line, key, v)?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(ConfigError::invalid(line, key, "must be positive"));
    }
    Ok(x)
}

fn from_entries(entries: &[(usize, String, String)]) -> Result<ScenarioConfig, ConfigError> {
    let mut seen = BTreeSet::new();
    let mut seed = None;
    let mut id = None;
    let mut cfg = ScenarioConfig {
        id: String::new(),
        mode: Mode::V2vcc,
        seed: 0,
        runs: 10,
        ratio_check: false,
        params: ScenarioParams::default(),
        cloud: CloudConfig::default(),
    };
    let p = &mut cfg.params;
    for (line, key, v) in entries {
        let (line, key, v) = (*line, key.as_str(), v.as_str());
        if !KEYS.contains(&key) {
            return Err(ConfigError::invalid(line, key, "unknown key"));
        }
        if !seen.insert(key) {
            return Err(ConfigError::invalid(line, key, "given twice"));
        }
        match key {
            "seed" => seed = Some(parse::<u64>(line, key, v)?),
            "mode" => {
                cfg.mode = match v {
                    "v2vcc" => Mode::V2vcc,
                    "ip" => Mode::Ip,
                    _ => return Err(ConfigError::invalid(line, key, format!("unknown mode `{v}`"))),
                }
            }
            "id" => {
                let ok = !v.is_empty() && v.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c));
                if !ok {
                    return Err(ConfigError::invalid(line, key, "use letters, digits, `-`, `_`, `.`"));
                }
                id = Some(v.to_string());
            }
            "runs" => cfg.runs = ranged(line, key, v, 1, 100_000)?,
            "suppliers" => p.n_suppliers = ranged(line, key, v, 1, 10)?,
            "consumers" => p.n_consumers = ranged(line, key, v, 1, 21)?,
            "ratio_check" => cfg.ratio_check = boolean(line, key, v)?,
            "discovery" => p.discovery_target = one_of(line, key, v, &[1.0, 3.0])? as usize,
            "timeout_ms" => p.timeout_ms = one_of(line, key, v, &[30.0, 50.0])?,
            "loss" => p.channel.loss_rate = one_of(line, key, v, &[0.0, 0.2])?,
            "speed_mph" => p.speed_mph = one_of(line, key, v, &[0.0, 10.0, 30.0, 50.0, 70.0])?,
            "max_retx" => p.max_retx = ranged(line, key, v, 0, 64)?,
            "combine_phases" => p.combine_phases = boolean(line, key, v)?,
            "packet_bytes" => p.packet_bytes = ranged(line, key, v, 1, 65_535)?,
            "comm_range_m" => p.channel.comm_range = positive(line, key, v)?,
            "bandwidth_mbps" => {
                let bps = positive(line, key, v)? * 1e6;
                p.channel.bandwidth_bps = bps;
                cfg.cloud.bandwidth_bps = bps;
            }
            "delay_ms" => cfg.cloud.one_way_delay_ms = one_of(line, key, v, &[25.0, 50.0, 100.0])?,
            "error_rate" => {
                let e: f64 = parse(line, key, v)?;
                if !(0.0..1.0).contains(&e) {
                    return Err(ConfigError::invalid(line, key, "must be in [0, 1)"));
                }
                cfg.cloud.error_rate = e;
            }
            "providers" => cfg.cloud.n_providers = ranged(line, key, v, 1, 3)?,
            "clients" => cfg.cloud.n_clients = ranged(line, key, v, 1, 30)?,
            _ => unreachable!("key list and match disagree"),
        }
    }
    cfg.seed = seed.ok_or(ConfigError::Missing("seed"))?;
    if cfg.ratio_check && cfg.params.n_consumers != 3 * cfg.params.n_suppliers {
        return Err(ConfigError::Inconsistent {
            reason: format!(
                "ratio_check: {} consumers need {} suppliers, got {}",
                cfg.params.n_consumers,
                cfg.params.n_consumers.div_ceil(3),
                cfg.params.n_suppliers
            ),
        });
    }
    cfg.id = match (cfg.mode, id) {
        (Mode::Ip, Some(id)) if !id.starts_with("ip-") => format!("ip-{id}"),
        (_, Some(id)) => id,
        (Mode::Ip, None) => format!("ip-d{}-k{}", cfg.cloud.one_way_delay_ms, cfg.cloud.n_clients),
        (Mode::V2vcc, None) => {
            let p = &cfg.params;
            format!(
                "v2vcc-c{}-s{}-d{}-t{}-l{}-v{}",
                p.n_consumers, p.n_suppliers, p.discovery_target, p.timeout_ms, p.channel.loss_rate, p.speed_mph
            )
        }
    };
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_fills_defaults() {
        let cfg = parse_scenario("mode = v2vcc\nconsumers = 21\nseed = 7\n").unwrap();
        assert_eq!(cfg.params.n_consumers, 21);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.runs, 10);
        assert_eq!(cfg.params.timeout_ms, 30.0);
        assert_eq!(cfg.id, "v2vcc-c21-s1-d1-t30-l0-v0");
    }

    #[test]
    fn loss_outside_domain_rejected_with_line() {
        let err = parse_scenario("seed = 1\n\n# comment\nloss = 0.3\n").unwrap_err();
        match err {
            ConfigError::Invalid { line, key, .. } => assert_eq!((line, key.as_str()), (4, "loss")),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn empty_file_needs_seed() {
        assert!(matches!(parse_scenario(""), Err(ConfigError::Missing("seed"))));
    }

    #[test]
    fn unknown_and_duplicate_keys() {
        let e = parse_scenario("seed = 1\nwarp = 9\n").unwrap_err();
        assert!(e.to_string().contains("line 2: `warp`: unknown key"), "{e}");
        let e = parse_scenario("seed = 1\nseed = 2\n").unwrap_err();
        assert!(e.to_string().contains("given twice"));
    }

    #[test]
    fn ratio_check_enforced() {
        assert!(parse_scenario("seed=1\nratio_check=true\nconsumers=21\nsuppliers=7").is_ok());
        assert!(matches!(
            parse_scenario("seed=1\nratio_check=true\nconsumers=21\nsuppliers=6"),
            Err(ConfigError::Inconsistent { .. })
        ));
    }

    #[test]
    fn ip_ids_are_prefixed() {
        let cfg = parse_inline(1, "mode=ip delay_ms=50 seed=3 id=cloud").unwrap();
        assert_eq!(cfg.id, "ip-cloud");
        assert_eq!(cfg.cloud.one_way_delay_ms, 50.0);
        assert_eq!(parse_inline(1, "mode=ip seed=3").unwrap().id, "ip-d25-k1");
    }
}
