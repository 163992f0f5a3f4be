//! Model configuration: key-value config files plus flag overrides.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use dupchan_core::model::{DurationFamily, MarkovSource, NoiseModel};

/// Parsed model description, before the duration parameter is fixed.
#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub source_spec: SourceSpec,
    pub family: DurationFamily,
    pub pd: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceSpec {
    BerHalf,
    MatrixFile(String),
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            source_spec: SourceSpec::BerHalf,
            family: DurationFamily::Bernoulli,
            pd: 0.0,
            p: 0.0,
        }
    }
}

impl ModelConfig {
    /// Parses a `key = value` config file; `#` starts a comment, blank lines
    /// are ignored, unknown keys are rejected.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg = ModelConfig::default();
        let mut kmax: Option<usize> = None;
        let mut geometric = false;
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", ln + 1))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "source" => cfg.source_spec = parse_source(value)?,
                "dup" => match value {
                    "bernoulli" => geometric = false,
                    "geometric" => geometric = true,
                    other => bail!("line {}: unknown dup family `{other}`", ln + 1),
                },
                "pd" => cfg.pd = parse_float(value, "pd")?,
                "kmax" => {
                    kmax = Some(value.parse().with_context(|| format!("bad kmax `{value}`"))?)
                }
                "noise" => {
                    if value != "bsc" {
                        bail!("line {}: unknown noise model `{value}`", ln + 1);
                    }
                }
                "p" => cfg.p = parse_float(value, "p")?,
                other => bail!("line {}: unknown key `{other}`", ln + 1),
            }
        }
        cfg.family = if geometric {
            DurationFamily::Geometric {
                k_max: kmax.unwrap_or(15),
            }
        } else {
            DurationFamily::Bernoulli
        };
        Ok(cfg)
    }

    /// Builds the source chain (with stationary initial distribution for
    /// matrix files) and the noise model.
    pub fn build(&self) -> Result<(MarkovSource, NoiseModel)> {
        let source = match &self.source_spec {
            SourceSpec::BerHalf => MarkovSource::ber_half(),
            SourceSpec::MatrixFile(path) => load_matrix_source(Path::new(path))?,
        };
        let noise = NoiseModel::bsc(self.p).map_err(|e| anyhow!("noise: {e}"))?;
        Ok((source, noise))
    }
}

pub fn parse_source(value: &str) -> Result<SourceSpec> {
    if value == "ber-half" {
        Ok(SourceSpec::BerHalf)
    } else if let Some(path) = value.strip_prefix("matrix-file:") {
        Ok(SourceSpec::MatrixFile(path.to_string()))
    } else {
        bail!("unknown source `{value}` (expected `ber-half` or `matrix-file:<path>`)")
    }
}

fn parse_float(value: &str, name: &str) -> Result<f64> {
    value
        .parse()
        .with_context(|| format!("bad {name} `{value}`"))
}

/// Loads a transition matrix: one whitespace-separated row per line, `#`
/// comments ignored. The initial distribution is the stationary one.
fn load_matrix_source(path: &Path) -> Result<MarkovSource> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read matrix file {}", path.display()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|tok| tok.parse().with_context(|| format!("bad entry `{tok}`")))
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("matrix file {} is empty", path.display());
    }
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        bail!("matrix file {} is not square", path.display());
    }
    let uniform = vec![1.0 / n as f64; n];
    let source = MarkovSource::new(rows, uniform).map_err(|e| anyhow!("matrix: {e}"))?;
    source
        .with_stationary_initial()
        .map_err(|e| anyhow!("matrix: {e}"))
}
