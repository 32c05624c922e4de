//! Run manifests and the on-disk result cache.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub const CACHE_ENV: &str = "TORELLI_CACHE_DIR";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// What was asked for: enough to decide whether a cached result applies.
#[derive(Debug, Clone)]
pub struct Request {
    pub command: String,
    pub parameters: Value,
    /// Input file path to content digest.
    pub input_hashes: Map<String, Value>,
}

impl Request {
    pub fn new(command: &str, parameters: Value) -> Self {
        Request { command: command.to_string(), parameters, input_hashes: Map::new() }
    }

    pub fn add_input(&mut self, path: &Path, contents: &[u8]) {
        self.input_hashes.insert(path.display().to_string(), Value::String(sha256_hex(contents)));
    }

    fn identity(&self) -> Value {
        // File paths do not affect results, only their contents do.
        let mut inputs: Vec<&Value> = self.input_hashes.values().collect();
        inputs.sort_by_key(|v| v.as_str().unwrap_or_default().to_string());
        json!({
            "command": self.command,
            "parameters": self.parameters,
            "version": env!("CARGO_PKG_VERSION"),
            "inputs": inputs,
        })
    }

    /// Cache key.
    pub fn digest(&self) -> String {
        sha256_hex(self.identity().to_string().as_bytes())
    }
}

#[derive(Debug, Clone)]
pub struct RunManifest {
    pub request: Request,
    pub output_digest: String,
    pub exit_code: i32,
    pub duration: Duration,
    pub cached: bool,
}

impl RunManifest {
    pub fn to_json(&self) -> Value {
        json!({
            "command": self.request.command,
            "parameters": self.request.parameters,
            "version": env!("CARGO_PKG_VERSION"),
            "inputHashes": self.request.input_hashes,
            "requestDigest": self.request.digest(),
            "outputDigest": self.output_digest,
            "exitCode": self.exit_code,
            "durationMs": self.duration.as_secs_f64() * 1000.0,
            "cached": self.cached,
        })
    }
}

/// A stored result: the exact stdout bytes and the exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CachedRun {
    pub stdout: String,
    pub exit_code: i32,
}

#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    /// The cache named by the environment, unless disabled.
    pub fn from_env(disabled: bool) -> Option<Cache> {
        if disabled {
            return None;
        }
        std::env::var_os(CACHE_ENV).filter(|d| !d.is_empty()).map(|d| Cache { dir: PathBuf::from(d) })
    }

    fn paths(&self, key: &str) -> (PathBuf, PathBuf) {
        (self.dir.join(format!("{key}.out")), self.dir.join(format!("{key}.json")))
    }

    pub fn load(&self, request: &Request) -> Option<CachedRun> {
        let (out, meta) = self.paths(&request.digest());
        let stdout = fs::read_to_string(out).ok()?;
        let meta: Value = serde_json::from_str(&fs::read_to_string(meta).ok()?).ok()?;
        if meta["outputDigest"].as_str() != Some(sha256_hex(stdout.as_bytes()).as_str()) {
            return None;
        }
        let exit_code = meta["exitCode"].as_i64()? as i32;
        Some(CachedRun { stdout, exit_code })
    }

    /// Failures to write are ignored; the cache is an optimization.
    pub fn store(&self, manifest: &RunManifest, stdout: &str) {
        if fs::create_dir_all(&self.dir).is_err() {
            return;
        }
        let (out, meta) = self.paths(&manifest.request.digest());
        if fs::write(out, stdout).is_ok() {
            let _ = fs::write(meta, manifest.to_json().to_string());
        }
    }
}
