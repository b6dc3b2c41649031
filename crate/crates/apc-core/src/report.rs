//! Experiment reports: per-stage certificate records, a top-level report
//! envelope, and content-addressed persistence under a results directory.
//!
//! Reports separate a *payload* (everything that must be bit-for-bit
//! reproducible under a fixed seed) from *timing* (wallclock fields, which
//! vary run to run). Equality of payloads is the determinism check; the
//! content hash that keys the results directory is taken over the payload
//! only, so re-running an identical experiment lands on the same file.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::ApcError;
use crate::Result;

/// Renders an exact rational as `{num, den, float}` for JSON output.
pub fn rat_json(q: &BigRational) -> Value {
    let f = rat_f64(q);
    json!({
        "num": q.numer().to_string(),
        "den": q.denom().to_string(),
        "float": f,
    })
}

/// Nearest-f64 rendering of an exact rational (display only; comparisons in
/// the library stay exact).
pub fn rat_f64(q: &BigRational) -> f64 {
    let digits = 18usize;
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = (q * BigRational::from_integer(scale)).round().to_integer();
    let s = scaled.to_string();
    s.parse::<f64>().map(|v| v / 1e18).unwrap_or(f64::NAN)
}

/// SHA-256 of raw bytes, hex-encoded. Used both for input-file hashes and for
/// keying reports in the results directory.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of a JSON value via its compact serialization.
pub fn hash_json(v: &Value) -> String {
    content_hash(v.to_string().as_bytes())
}

/// One pipeline stage: what ran, on what inputs, what it certified, what it
/// achieved numerically, and the shape of the paper-side bound when that bound
/// has unspecified constants (reported, never asserted).
#[derive(Debug, Clone)]
pub struct StageRecord {
    pub stage: String,
    pub inputs_hash: String,
    pub certificate: Value,
    /// Named achieved quantities (exact strings or floats rendered upstream).
    pub achieved: Vec<(String, Value)>,
    pub bound_shape: String,
    pub wallclock_ms: f64,
}

impl StageRecord {
    pub fn new(stage: impl Into<String>, inputs_hash: impl Into<String>) -> Self {
        StageRecord {
            stage: stage.into(),
            inputs_hash: inputs_hash.into(),
            certificate: Value::Null,
            achieved: Vec::new(),
            bound_shape: String::new(),
            wallclock_ms: 0.0,
        }
    }

    pub fn push_achieved(&mut self, label: impl Into<String>, value: Value) {
        self.achieved.push((label.into(), value));
    }

    /// Full record including timing.
    pub fn to_json(&self) -> Value {
        let mut v = self.payload_json();
        v["wallclock_ms"] = json!(self.wallclock_ms);
        v
    }

    /// Deterministic part only (no wallclock).
    pub fn payload_json(&self) -> Value {
        let achieved: Vec<Value> = self
            .achieved
            .iter()
            .map(|(k, v)| json!({ "label": k, "value": v }))
            .collect();
        json!({
            "stage": self.stage,
            "inputs_hash": self.inputs_hash,
            "certificate": self.certificate,
            "achieved": achieved,
            "bound_shape": self.bound_shape,
        })
    }
}

/// Wallclock helper for filling in `StageRecord::wallclock_ms`.
pub struct StageTimer(Instant);

impl StageTimer {
    pub fn start() -> Self {
        StageTimer(Instant::now())
    }

    pub fn elapsed_ms(&self) -> f64 {
        self.0.elapsed().as_secs_f64() * 1e3
    }
}

impl Default for StageTimer {
    fn default() -> Self {
        Self::start()
    }
}

/// Top-level experiment report: command line, configuration snapshot, root
/// seed, input hashes, the ordered stage records, and the overall verdict.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub command: String,
    pub config: Value,
    pub seed: u64,
    pub input_hashes: Vec<(String, String)>,
    pub stages: Vec<StageRecord>,
    pub passed: bool,
    pub wallclock_ms: f64,
}

impl ExperimentReport {
    pub fn new(command: impl Into<String>, seed: u64) -> Self {
        ExperimentReport {
            command: command.into(),
            config: Value::Null,
            seed,
            input_hashes: Vec::new(),
            stages: Vec::new(),
            passed: true,
            wallclock_ms: 0.0,
        }
    }

    pub fn hash_input(&mut self, name: impl Into<String>, bytes: &[u8]) {
        self.input_hashes.push((name.into(), content_hash(bytes)));
    }

    /// Deterministic payload: excludes every wallclock field.
    pub fn payload_json(&self) -> Value {
        let inputs: Vec<Value> = self
            .input_hashes
            .iter()
            .map(|(n, h)| json!({ "name": n, "sha256": h }))
            .collect();
        json!({
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "inputs": inputs,
            "stages": self.stages.iter().map(|s| s.payload_json()).collect::<Vec<_>>(),
            "passed": self.passed,
        })
    }

    /// Full report with timing fields restored.
    pub fn to_json(&self) -> Value {
        let mut v = self.payload_json();
        v["wallclock_ms"] = json!(self.wallclock_ms);
        if let Some(stages) = v["stages"].as_array_mut() {
            for (slot, rec) in stages.iter_mut().zip(&self.stages) {
                slot["wallclock_ms"] = json!(rec.wallclock_ms);
            }
        }
        v
    }

    /// Content hash of the deterministic payload; the key under the results
    /// directory.
    pub fn key(&self) -> String {
        hash_json(&self.payload_json())
    }

    /// Appends the report under `dir` keyed by content hash. Existing files
    /// are left untouched (append-only store: identical payloads re-use the
    /// same key, so a rerun is a no-op apart from timing).
    pub fn save_into(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.json", self.key()));
        if !path.exists() {
            let body = serde_json::to_string_pretty(&self.to_json())?;
            fs::write(&path, body + "\n")?;
        }
        Ok(path)
    }
}

/// Loads a stored report and checks it is syntactically a report envelope.
pub fn load_report(path: &Path) -> Result<Value> {
    let body = fs::read_to_string(path)?;
    let v: Value = serde_json::from_str(&body)?;
    for field in ["command", "seed", "stages", "passed"] {
        if v.get(field).is_none() {
            return Err(ApcError::Parse {
                path: path.display().to_string(),
                line: 1,
                col: 1,
                msg: format!("report missing `{field}` field"),
            });
        }
    }
    Ok(v)
}
