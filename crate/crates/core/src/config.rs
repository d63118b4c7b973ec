//! Layered settings: command-line flags, then `OSB_*` environment variables,
//! then a `key = value` config file, then built-in defaults.

use std::collections::BTreeMap;
use std::path::Path;

use crate::corpus::DEFAULT_SEED;
use crate::error::{Error, Result};
use crate::family::DEFAULT_ENUM_CAP;

pub const ENV_PREFIX: &str = "OSB_";

/// Recognized keys, in config-file spelling.
pub const KEYS: &[&str] = &["seed", "enum_cap", "mc_samples", "format", "ell", "p", "family", "corpus"];

/// One layer of raw string settings.
pub type Layer = BTreeMap<String, String>;

/// Parses `key = value` lines; `#` starts a comment, values may be quoted.
pub fn parse_config(text: &str) -> Result<Layer> {
    let mut out = Layer::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() || (line.starts_with('[') && line.ends_with(']')) {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line {}: expected key = value", no + 1)))?;
        let key = k.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::Parse(format!("config line {}: unknown key {key:?}", no + 1)));
        }
        let v = v.trim();
        let v = v
            .strip_prefix('"')
            .and_then(|s| s.strip_suffix('"'))
            .unwrap_or(v);
        out.insert(key, v.to_string());
    }
    Ok(out)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<Layer> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// Collects `OSB_<KEY>` variables through `lookup`.
pub fn env_layer(lookup: impl Fn(&str) -> Option<String>) -> Layer {
    KEYS.iter()
        .filter_map(|k| {
            let var = format!("{ENV_PREFIX}{}", k.to_ascii_uppercase());
            lookup(&var).map(|v| (k.to_string(), v))
        })
        .collect()
}

/// Resolved settings shared by every subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub seed: u64,
    pub enum_cap: u64,
    pub mc_samples: Option<u64>,
    pub format: OutputFormat,
    pub ell: Option<EllRange>,
    pub p: Vec<f64>,
    pub family: Vec<String>,
    pub corpus: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            _ => Err(Error::Parse(format!("format must be json or csv, got {s:?}"))),
        }
    }
}

/// Inclusive `ell` range; `A..B` and `A..=B` both include `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EllRange {
    pub lo: usize,
    pub hi: usize,
}

impl EllRange {
    /// The part of the range valid for `n` rows.
    pub fn clipped(&self, n: usize) -> std::ops::RangeInclusive<usize> {
        self.lo.max(1)..=self.hi.min(n)
    }
}

impl std::str::FromStr for EllRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("ell range must look like A..B or A, got {s:?}"));
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?),
            None => {
                let v = num(s)?;
                (v, v)
            }
        };
        if lo == 0 || hi < lo {
            return Err(bad());
        }
        Ok(Self { lo, hi })
    }
}

pub const DEFAULT_P: &[f64] = &[1.0, 1.5, 2.0, 3.0];

pub fn parse_p_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            let p: f64 = t
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("cannot parse p value {t:?}")))?;
            if !(p >= 1.0) || !p.is_finite() {
                return Err(Error::Parse(format!("p must satisfy 1 <= p < inf, got {p}")));
            }
            Ok(p)
        })
        .collect()
}

fn parse_u64(key: &str, v: &str) -> Result<u64> {
    let t = v.trim().replace('_', "");
    let parsed = match t.strip_prefix("0x") {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => t.parse::<u64>().ok().or_else(|| {
            // accepts 1e5-style counts
            t.parse::<f64>().ok().filter(|x| x.fract() == 0.0 && *x >= 0.0 && *x < 1.9e19).map(|x| x as u64)
        }),
    };
    parsed.ok_or_else(|| Error::Parse(format!("{key}: expected a nonnegative integer, got {v:?}")))
}

impl Settings {
    /// Resolves each key from the first layer that sets it.
    pub fn resolve(layers: &[&Layer]) -> Result<Self> {
        let get = |k: &str| layers.iter().find_map(|l| l.get(k)).map(String::as_str);
        Ok(Self {
            seed: get("seed").map(|v| parse_u64("seed", v)).transpose()?.unwrap_or(DEFAULT_SEED),
            enum_cap: get("enum_cap")
                .map(|v| parse_u64("enum_cap", v))
                .transpose()?
                .unwrap_or(DEFAULT_ENUM_CAP),
            mc_samples: get("mc_samples").map(|v| parse_u64("mc_samples", v)).transpose()?,
            format: get("format").map(str::parse).transpose()?.unwrap_or(OutputFormat::Json),
            ell: get("ell").map(str::parse).transpose()?,
            p: get("p").map(parse_p_list).transpose()?.unwrap_or_else(|| DEFAULT_P.to_vec()),
            family: get("family")
                .map(|v| v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
                .unwrap_or_else(|| vec!["sym".into(), "map".into()]),
            corpus: get("corpus").map(str::to_string),
        })
    }
}

impl Default for Settings {
    fn default() -> Self {
        Self::resolve(&[]).expect("defaults parse")
    }
}
