//! CSV and JSON sidecar emission.
//!
//! CSV dialect: comma-separated, LF line endings, `.` decimal point,
//! floats at 17 significant digits so a round-trip through the file is
//! bit-exact. The sidecar (same path with a .json extension) carries the
//! fully resolved scenario, the seed actually used and the SHA-256 of the
//! CSV bytes it describes.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::scenario::ResolvedScenario;

/// 17 significant digits; enough for f64 round-trips.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn fmt_optional(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

/// Joins cells with commas and rows with LF, with a trailing newline.
pub fn csv_text(rows: &[Vec<String>]) -> String {
    let mut text = String::new();
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    text
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize)]
pub struct Sidecar<'a> {
    pub command: &'a str,
    pub preset: Option<&'a str>,
    pub seed: u64,
    pub units_note: &'a str,
    pub csv_sha256: String,
    pub scenario: &'a ResolvedScenario,
}

pub const UNITS_NOTE: &str = "paper-native, C0=1";

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

pub fn write_outputs(
    csv_path: &Path,
    csv: &str,
    command: &str,
    preset: Option<&str>,
    seed: u64,
    scenario: &ResolvedScenario,
) -> Result<(), String> {
    std::fs::write(csv_path, csv.as_bytes())
        .map_err(|e| format!("write {}: {e}", csv_path.display()))?;
    let sidecar = Sidecar {
        command,
        preset,
        seed,
        units_note: UNITS_NOTE,
        csv_sha256: sha256_hex(csv.as_bytes()),
        scenario,
    };
    let json_path = sidecar_path(csv_path);
    let mut text = serde_json::to_string_pretty(&sidecar).map_err(|e| format!("sidecar: {e}"))?;
    text.push('\n');
    std::fs::write(&json_path, text).map_err(|e| format!("write {}: {e}", json_path.display()))
}
