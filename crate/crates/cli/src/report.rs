//! JSON report envelopes, provenance hashing and deterministic file output.

use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Context, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const TFC_SCHEMA: &str = "freqtc.tfc.v1";
pub const WTFR_SCHEMA: &str = "freqtc.wtfr.v1";
pub const METRICS_SCHEMA: &str = "freqtc.metrics.v1";

/// SHA-256 of the compact JSON encoding of `config`, as lowercase hex.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).expect("config structs serialize");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("report structs serialize");
    out.push(b'\n');
    out
}

/// Fails with a numerical error if any float in the report is not finite.
pub fn check_finite(what: &str, values: impl IntoIterator<Item = f64>) -> Result<()> {
    match values.into_iter().find(|v| !v.is_finite()) {
        Some(v) => Err(CliError::Numerical(format!("{what} produced {v}"))),
        None => Ok(()),
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).context(format!("writing {}", path.display()))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).context(format!("creating {}", dir.display()))
}
