use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use pxp::hilbert::Basis;
use pxp::operators::{build_hamiltonian, ModelParams};
use pxp::spectra::{diagonalize_with, CacheHeader, DiagOptions, DEFAULT_TOL_DEGENERATE, DEFAULT_TOL_ZERO};
use pxp::Eigen;

use crate::config::RunConfig;
use crate::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Hash of the canonical JSON form of the resolved command and config.
pub fn config_hash(command: &str, cfg: &RunConfig, extra: &Value) -> String {
    let canonical = json!({ "command": command, "config": cfg, "extra": extra });
    sha256_hex(canonical.to_string().as_bytes())
}

pub struct Artifacts {
    dir: PathBuf,
    command: String,
    config: Value,
    extra: Value,
    hash: String,
}

impl Artifacts {
    pub fn new(command: &str, cfg: &RunConfig, extra: Value) -> Result<Self, CliError> {
        fs::create_dir_all(&cfg.out)?;
        Ok(Self {
            dir: cfg.out.clone(),
            command: command.into(),
            config: serde_json::to_value(cfg).expect("config serializes"),
            hash: config_hash(command, cfg, &extra),
            extra,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes `name` through `body`, then a `<name>.json` sidecar.
    pub fn write<F>(&self, name: &str, diagnostics: impl Serialize, body: F) -> Result<PathBuf, CliError>
    where
        F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
    {
        let path = self.path(name);
        let mut w = BufWriter::new(fs::File::create(&path)?);
        body(&mut w)?;
        w.flush()?;
        drop(w);
        let data_hash = sha256_hex(&fs::read(&path)?);
        let sidecar = json!({
            "command": self.command,
            "config": self.config,
            "parameters": self.extra,
            "config_hash": self.hash,
            "data_file": name,
            "data_sha256": data_hash,
            "version": env!("CARGO_PKG_VERSION"),
            "tolerances": {
                "zero_energy": DEFAULT_TOL_ZERO,
                "degenerate": DEFAULT_TOL_DEGENERATE,
                "drift_budget": pxp::dynamics::DRIFT_BUDGET,
            },
            "diagnostics": diagnostics,
        });
        let mut text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
        text.push('\n');
        fs::write(self.path(&format!("{name}.json")), text)?;
        Ok(path)
    }
}

/// Compact, filename-safe rendering of a parameter value.
pub fn tag(x: f64) -> String {
    pxp::format::fmt_g(x, 6)
}

/// Full-basis eigensystem, read from or stored in the cache when one is configured.
pub fn eigensystem(basis: &Basis, delta: f64, w: f64, cache: Option<&Path>) -> Result<Eigen, CliError> {
    let g = basis.geometry();
    let header = CacheHeader {
        legs: g.legs as u32,
        rungs: g.rungs as u32,
        delta,
        w,
        dim: basis.dim() as u64,
        tol_zero: DEFAULT_TOL_ZERO,
        sector: -1,
    };
    let build = || -> Result<Eigen, CliError> {
        let h = build_hamiltonian(basis, &ModelParams { delta, w });
        Ok(diagonalize_with(&h, DiagOptions::default())?)
    };
    let Some(dir) = cache else {
        return build();
    };
    fs::create_dir_all(dir)?;
    let key = sha256_hex(format!("{}:{}:{:e}:{:e}:{}", g.legs, g.rungs, delta, w, header.sector).as_bytes());
    let path = dir.join(format!("{}.eig", &key[..24]));
    if path.exists() {
        if let Ok((found, es)) = Eigen::read_cache(&path) {
            if found == header {
                return Ok(es);
            }
        }
    }
    let es = build()?;
    es.write_cache(&path, &header)?;
    Ok(es)
}
