//! Run manifests: every command writes a `manifest.txt` (TOML) next to
//! its outputs recording the tool version, a timestamp, the full
//! configuration with defaults made explicit, and the output paths, so
//! any result can be re-derived from the manifest alone.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::io::write_file;
use crate::CliError;

/// Seeds are 64-bit unsigned and can exceed TOML's signed integer
/// range, so they travel as decimal strings.
mod seed_string {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Common header: which command ran, which build, when, and with what
/// exact arguments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub command: String,
    pub version: String,
    pub timestamp: String,
    /// Canonical argument list with every default filled in: running the
    /// tool again with exactly these arguments reproduces the outputs
    /// byte for byte.
    pub invocation: Vec<String>,
}

impl RunInfo {
    pub fn new(command: &str, invocation: Vec<String>) -> Self {
        RunInfo {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            invocation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub num_vars: usize,
    pub avg_degree: f64,
    pub graph: String,
    pub noise: String,
    pub sample_size: usize,
    #[serde(with = "seed_string")]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateOutputs {
    pub graph: String,
    pub data: String,
    pub shuffle: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateManifest {
    pub run: RunInfo,
    pub config: SimulateConfig,
    pub outputs: SimulateOutputs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfigInfo {
    pub data: String,
    pub penalty_discount: f64,
    pub bes: bool,
    pub num_starts: usize,
    #[serde(with = "seed_string")]
    pub seed: u64,
    pub threads: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gst_node_cap: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutputs {
    pub graph: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub elapsed_seconds: f64,
    pub score: f64,
    pub num_vars: usize,
    pub num_edges: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchManifest {
    pub run: RunInfo,
    pub config: SearchConfigInfo,
    pub outputs: SearchOutputs,
    pub result: SearchResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub true_graph: String,
    pub est_graph: String,
    pub data: String,
    pub penalty_discount: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub shuffle: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub search_manifest: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOutputs {
    pub report: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalManifest {
    pub run: RunInfo,
    pub config: EvalConfig,
    pub outputs: EvalOutputs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub reps: usize,
    pub num_vars: Vec<usize>,
    pub avg_degree: Vec<f64>,
    pub graph: Vec<String>,
    pub noise: Vec<String>,
    pub sample_size: usize,
    #[serde(with = "seed_string")]
    pub seed: u64,
    pub penalty_discount: f64,
    pub bes: bool,
    pub num_starts: usize,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchOutputs {
    pub runs: String,
    pub summary: String,
    pub table: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchManifest {
    /// How every RNG seed in the run derives from the base seed.
    pub seed_derivation: String,
    pub run: RunInfo,
    pub config: BenchConfig,
    pub outputs: BenchOutputs,
}

/// The exact seed-derivation scheme `bench` uses, recorded in its
/// manifest so each repetition can be reproduced in isolation.
pub fn seed_derivation_text() -> String {
    "Cells are numbered 0.. in nested loop order over (graph, num_vars, \
     avg_degree, noise), each axis in the order listed in [config]. \
     cell_seed = mix(seed, cell_index). Repetition r of a cell simulates \
     with mix(cell_seed, 2r) and searches with mix(cell_seed, 2r + 1). \
     mix(base, i) adds (i + 1) * 0x9E3779B97F4A7C15 to base (wrapping) \
     and applies the splitmix64 finalizer: z ^= z >> 30, z *= \
     0xBF58476D1CE4E5B9, z ^= z >> 27, z *= 0x94D049BB133111EB, \
     z ^= z >> 31."
        .to_string()
}

/// Serializes a manifest as pretty TOML.
pub fn write_manifest<T: Serialize>(path: &Path, manifest: &T) -> Result<(), CliError> {
    let text = toml::to_string_pretty(manifest).map_err(|e| {
        CliError::Data(format!("{}: cannot serialize manifest: {e}", path.display()))
    })?;
    write_file(path, &text)
}

pub fn read_manifest<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::Data(format!("{}: not a valid manifest: {e}", path.display())))
}
