use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Values a JSON config file may supply. Flags take precedence.
#[derive(Clone, Debug, Default, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// Number of legs (1 = chain, 2 = ladder).
    #[arg(long)]
    pub legs: Option<usize>,
    /// Number of rungs.
    #[arg(long = "L", id = "rungs")]
    #[serde(rename = "L")]
    pub rungs: Option<usize>,
    /// Detuning Δ, or an inclusive grid `start:stop:step`.
    #[arg(long)]
    pub delta: Option<String>,
    /// Flip amplitude w.
    #[arg(long)]
    pub w: Option<f64>,
    /// Initial state names, comma separated (Z2, Z2bar, Z3, Z4, vac or a bitstring).
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Output sampling interval.
    #[arg(long)]
    pub stride: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Eigensystem cache directory; falls back to `PXP_CACHE_DIR`.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, Args)]
pub struct Common {
    /// JSON file with default values for any of the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub flags: Overrides,
}

/// Fully resolved parameters shared by every command.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub legs: usize,
    #[serde(rename = "L")]
    pub rungs: usize,
    pub deltas: Vec<f64>,
    pub w: f64,
    pub init: Vec<String>,
    pub tmax: f64,
    pub dt: f64,
    pub stride: f64,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub cache_dir: Option<PathBuf>,
    #[serde(skip)]
    pub threads: Option<usize>,
}

pub struct Defaults {
    pub delta: &'static str,
    pub init: &'static str,
    pub tmax: f64,
}

impl Common {
    pub fn resolve(&self, defaults: &Defaults) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => read_config(path)?,
            None => Overrides::default(),
        };
        let f = &self.flags;
        let legs = f.legs.or(file.legs).unwrap_or(2);
        let rungs = f
            .rungs
            .or(file.rungs)
            .ok_or_else(|| CliError::Config("--L is required".into()))?;
        let delta = f.delta.clone().or(file.delta).unwrap_or_else(|| defaults.delta.into());
        let init = f.init.clone().or(file.init).unwrap_or_else(|| defaults.init.into());
        let cfg = RunConfig {
            legs,
            rungs,
            deltas: parse_grid(&delta)?,
            w: f.w.or(file.w).unwrap_or(1.0),
            init: init.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
            tmax: f.tmax.or(file.tmax).unwrap_or(defaults.tmax),
            dt: f.dt.or(file.dt).unwrap_or(pxp::dynamics::DEFAULT_DT),
            stride: f.stride.or(file.stride).unwrap_or(pxp::dynamics::DEFAULT_STRIDE),
            out: f.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from(".")),
            cache_dir: f
                .cache_dir
                .clone()
                .or(file.cache_dir)
                .or_else(|| std::env::var_os("PXP_CACHE_DIR").map(PathBuf::from)),
            threads: f.threads.or(file.threads),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    fn validate(&self) -> Result<(), CliError> {
        for (name, v) in [("w", self.w), ("tmax", self.tmax), ("dt", self.dt), ("stride", self.stride)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.threads == Some(0) {
            return Err(CliError::Config("threads must be positive".into()));
        }
        if self.init.is_empty() {
            return Err(CliError::Config("no initial state given".into()));
        }
        Ok(())
    }

    pub fn n_sites(&self) -> usize {
        self.legs * self.rungs
    }
}

fn read_config(path: &Path) -> Result<Overrides, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// A single value or an inclusive `start:stop:step` grid. The stop value is
/// included when it lies within half a step of the last grid point.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let num = |x: &str| {
        x.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| CliError::Config(format!("invalid number {x:?} in grid {s:?}")))
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [v] => Ok(vec![num(v)?]),
        [a, b, c] => {
            let (start, stop, step) = (num(a)?, num(b)?, num(c)?);
            if step <= 0.0 || stop < start {
                return Err(CliError::Config(format!("grid {s:?} needs step > 0 and stop >= start")));
            }
            let n = ((stop - start) / step + 0.5).floor() as usize;
            // Round to suppress accumulated binary noise such as 0.30000000000000004.
            Ok((0..=n)
                .map(|k| {
                    let v = start + k as f64 * step;
                    (v * 1e12).round() / 1e12
                })
                .collect())
        }
        _ => Err(CliError::Config(format!("grid {s:?} must be a number or start:stop:step"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0.5").unwrap(), vec![0.5]);
        let g = parse_grid("0:1:0.1").unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g[3], 0.3);
        assert_eq!(g[10], 1.0);
        assert_eq!(parse_grid("0:0.97:0.1").unwrap().len(), 11);
        assert_eq!(parse_grid("0:0.94:0.1").unwrap().len(), 10);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("a").is_err());
        assert!(parse_grid("0:1").is_err());
    }
}
