//! Configuration resolution: built-in defaults, then the TOML config file,
//! then explicit command-line flags. The resolved values are echoed into
//! every report.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_QUAD_ORDER: usize = 24;
pub const QUAD_ORDER_ENV: &str = "FRAC_LT_QUAD_ORDER";

/// Default quadrature order, overridable through the environment.
pub fn env_quad_order() -> usize {
    std::env::var(QUAD_ORDER_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|n| *n >= 2)
        .unwrap_or(DEFAULT_QUAD_ORDER)
}

/// File-backed settings; sections mirror the subcommand flag names.
#[derive(Debug, Default, Clone, Deserialize, Serialize)]
pub struct FileConfig {
    #[serde(default)]
    pub covering: CoveringSection,
    #[serde(default)]
    pub quotient: QuotientSection,
    #[serde(default)]
    pub verify: VerifySection,
}

#[derive(Debug, Default, Clone, Deserialize, Serialize)]
pub struct CoveringSection {
    pub density: Option<String>,
    pub domain: Option<String>,
    pub lambda: Option<f64>,
    pub k: Option<u32>,
    pub alpha: Option<f64>,
    pub q: Option<f64>,
    pub d: Option<usize>,
    pub max_depth: Option<u32>,
}

#[derive(Debug, Default, Clone, Deserialize, Serialize)]
pub struct QuotientSection {
    pub trial: Option<String>,
    pub d: Option<usize>,
    pub s: Option<f64>,
    pub lambda: Option<f64>,
    pub n: Option<u64>,
    pub r: Option<f64>,
    pub widths: Option<String>,
}

#[derive(Debug, Default, Clone, Deserialize, Serialize)]
pub struct VerifySection {
    pub runs: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub d: Option<usize>,
    pub s: Option<f64>,
}

pub fn load_file(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config file {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))
        }
    }
}

/// `lo:hi:count` linear sweep specification.
pub fn parse_sweep(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        anyhow::bail!("sweep must be lo:hi:count, got `{spec}`");
    }
    let lo: f64 = parts[0].parse().context("bad sweep lower bound")?;
    let hi: f64 = parts[1].parse().context("bad sweep upper bound")?;
    let count: usize = parts[2].parse().context("bad sweep count")?;
    if count < 1 || !(hi >= lo) {
        anyhow::bail!("sweep needs hi >= lo and count >= 1");
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let h = (hi - lo) / (count - 1) as f64;
    Ok((0..count).map(|i| lo + h * i as f64).collect())
}
