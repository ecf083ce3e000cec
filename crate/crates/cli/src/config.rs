//! `key = value` run configuration.
//!
//! ```text
//! # comment
//! potential = cos(1)
//! k_list = 64,128,256,512
//! seed = 42
//! T = 0.5
//! n_grid = 2048
//! n_samples = 10000
//! out_dir = out
//! tol.perron = 1e-10
//! tol.lax_oleinik = 1e-9
//! ```
//!
//! `potential`, `k_list` and `seed` are required; everything else has the
//! defaults listed in [`RunConfig`].

use std::collections::BTreeMap;
use std::path::PathBuf;

use thiserror::Error;
use weakkam_core::Potential;

pub const DEFAULT_HORIZON: f64 = 0.5;
pub const DEFAULT_N_GRID: usize = 2048;
pub const DEFAULT_N_SAMPLES: usize = 10_000;
pub const DEFAULT_OUT_DIR: &str = "out";
pub const TOLERANCE_NAMES: [&str; 2] = ["perron", "lax_oleinik"];
const DEFAULT_TOLERANCES: [(&str, f64); 2] = [("perron", 1e-10), ("lax_oleinik", 1e-9)];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("config is missing required key `{0}`")]
    Missing(&'static str),
    #[error("cannot read config {path}: {message}")]
    Read { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Potential in the grammar accepted by [`Potential::parse`].
    pub potential: String,
    /// Strictly increasing lattice sizes.
    pub k_list: Vec<usize>,
    /// Time horizon, default 0.5.
    pub horizon: f64,
    /// Fine grid resolution, default 2048.
    pub n_grid: usize,
    /// Monte Carlo sample count, default 10⁴.
    pub n_samples: usize,
    pub seed: u64,
    /// `tol.perron` (default 1e-10) and `tol.lax_oleinik` (default 1e-9).
    pub tolerances: BTreeMap<String, f64>,
    /// Output directory, default `out`.
    pub out_dir: PathBuf,
}

impl RunConfig {
    pub fn potential(&self) -> Potential<f64> {
        Potential::parse(&self.potential).expect("validated at parse time")
    }

    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances[name]
    }
}

pub fn default_tolerances() -> BTreeMap<String, f64> {
    DEFAULT_TOLERANCES.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn positive_real(value: &str) -> Result<f64, String> {
    match value.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        Ok(x) => Err(format!("expected a positive finite number, got {x}")),
        Err(_) => Err(format!("`{value}` is not a number")),
    }
}

fn count(value: &str, min: usize) -> Result<usize, String> {
    match value.parse::<usize>() {
        Ok(n) if n >= min => Ok(n),
        Ok(n) => Err(format!("expected an integer >= {min}, got {n}")),
        Err(_) => Err(format!("`{value}` is not a nonnegative integer")),
    }
}

/// Comma-separated, strictly increasing lattice sizes, each at least 2.
pub fn parse_k_list(value: &str) -> Result<Vec<usize>, String> {
    let ks = value
        .split(',')
        .map(|s| count(s.trim(), 2))
        .collect::<Result<Vec<_>, _>>()?;
    if ks.is_empty() {
        return Err("k_list is empty".into());
    }
    if let Some(w) = ks.windows(2).find(|w| w[1] <= w[0]) {
        return Err(format!("k_list must be strictly increasing, but {} follows {}", w[1], w[0]));
    }
    Ok(ks)
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut potential = None;
    let mut k_list = None;
    let mut seed = None;
    let mut horizon = DEFAULT_HORIZON;
    let mut n_grid = DEFAULT_N_GRID;
    let mut n_samples = DEFAULT_N_SAMPLES;
    let mut out_dir = PathBuf::from(DEFAULT_OUT_DIR);
    let mut tolerances = default_tolerances();
    let mut seen = std::collections::BTreeSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |message: String| ConfigError::Line { line, message };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(err(format!("empty value for `{key}`")));
        }
        if !seen.insert(key.to_string()) {
            return Err(err(format!("duplicate key `{key}`")));
        }
        match key {
            "potential" => {
                Potential::<f64>::parse(value).map_err(|e| err(e.to_string()))?;
                potential = Some(value.to_string());
            }
            "k_list" => k_list = Some(parse_k_list(value).map_err(err)?),
            "seed" => seed = Some(value.parse::<u64>().map_err(|_| err(format!("`{value}` is not a valid seed")))?),
            "T" => horizon = positive_real(value).map_err(err)?,
            "n_grid" => n_grid = count(value, 16).map_err(err)?,
            "n_samples" => n_samples = count(value, 1).map_err(err)?,
            "out_dir" => out_dir = PathBuf::from(value),
            _ => match key.strip_prefix("tol.") {
                Some(name) if TOLERANCE_NAMES.contains(&name) => {
                    tolerances.insert(name.to_string(), positive_real(value).map_err(err)?);
                }
                _ => return Err(err(format!("unknown key `{key}`"))),
            },
        }
    }

    Ok(RunConfig {
        potential: potential.ok_or(ConfigError::Missing("potential"))?,
        k_list: k_list.ok_or(ConfigError::Missing("k_list"))?,
        horizon,
        n_grid,
        n_samples,
        seed: seed.ok_or(ConfigError::Missing("seed"))?,
        tolerances,
        out_dir,
    })
}

pub fn load_config(path: &std::path::Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config(&text)
}
