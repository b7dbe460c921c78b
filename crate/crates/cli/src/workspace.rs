//! Artifact paths, atomic writes and run manifests.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::error::{CliError, Result};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    let ctx = |e| CliError::io(format!("writing {}", path.display()), e);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(ctx)?;
    tmp.write_all(bytes).map_err(ctx)?;
    tmp.as_file().sync_all().map_err(ctx)?;
    tmp.persist(path).map_err(|e| ctx(e.error))?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// What one command read and wrote. Holds no timestamps, so reruns with the
/// same inputs reproduce it byte for byte.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub tool_version: String,
    pub base_seed: u64,
    pub config_sha256: String,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<FileEntry>,
    pub outputs: Vec<FileEntry>,
}

pub struct Workspace {
    pub cfg: PipelineConfig,
    /// Directory relative paths in the config resolve against.
    pub base: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
    pub plot: bool,
    config_sha256: String,
}

/// One command's bookkeeping: files read, files written and seeds used.
pub struct Run<'a> {
    ws: &'a Workspace,
    command: String,
    inputs: BTreeMap<String, FileEntry>,
    outputs: BTreeMap<String, FileEntry>,
    seeds: BTreeMap<String, u64>,
}

impl Workspace {
    pub fn new(cfg: PipelineConfig, base: PathBuf, out_override: Option<PathBuf>, seed_override: Option<u64>, plot: bool) -> Self {
        let mut cfg = cfg;
        if let Some(out) = out_override {
            cfg.paths.out = out;
        }
        if let Some(seed) = seed_override {
            cfg.base_seed = seed;
        }
        let out = base.join(&cfg.paths.out);
        let config_sha256 = sha256_hex(&serde_json::to_vec(&cfg).expect("config serializes"));
        Workspace {
            seed: cfg.base_seed,
            cfg,
            base,
            out,
            plot,
            config_sha256,
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.base.join(p)
    }

    pub fn artifact(&self, rel: &str) -> PathBuf {
        self.out.join(rel)
    }

    /// Path as recorded in manifests: relative to the base directory when
    /// it lies below it.
    pub fn display(&self, p: &Path) -> String {
        p.strip_prefix(&self.base)
            .unwrap_or(p)
            .to_string_lossy()
            .replace('\\', "/")
    }

    pub fn run(&self, command: &str) -> Run<'_> {
        Run {
            ws: self,
            command: command.to_string(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            seeds: BTreeMap::new(),
        }
    }
}

impl Run<'_> {
    /// Reads a declared input, failing with exit code 3 when it is absent.
    pub fn read(&mut self, name: &str, path: &Path, hint: Option<&str>) -> Result<Vec<u8>> {
        if !path.is_file() {
            return Err(CliError::MissingArtifact {
                name: name.to_string(),
                path: path.to_path_buf(),
                hint: hint.map(str::to_string),
            });
        }
        let bytes = std::fs::read(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        let key = self.ws.display(path);
        self.inputs.insert(
            key.clone(),
            FileEntry {
                path: key,
                sha256: sha256_hex(&bytes),
                bytes: bytes.len() as u64,
            },
        );
        Ok(bytes)
    }

    pub fn read_string(&mut self, name: &str, path: &Path, hint: Option<&str>) -> Result<String> {
        String::from_utf8(self.read(name, path, hint)?)
            .map_err(|_| CliError::Data(format!("{} is not valid UTF-8", path.display())))
    }

    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        write_atomic(path, bytes)?;
        let key = self.ws.display(path);
        self.outputs.insert(
            key.clone(),
            FileEntry {
                path: key,
                sha256: sha256_hex(bytes),
                bytes: bytes.len() as u64,
            },
        );
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, path: &Path, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value).expect("report serializes");
        bytes.push(b'\n');
        self.write(path, &bytes)
    }

    pub fn seed(&mut self, name: &str, seed: u64) -> u64 {
        self.seeds.insert(name.to_string(), seed);
        seed
    }

    /// Writes `manifests/<command>.json`. Entries from an earlier run of the
    /// same command stay listed unless this run rewrote the same path.
    pub fn finish(self) -> Result<PathBuf> {
        let path = self.ws.artifact(&format!("manifests/{}.json", self.command));
        let (mut inputs, mut outputs, mut seeds) = (self.inputs, self.outputs, self.seeds);
        if let Some(prev) = std::fs::read(&path)
            .ok()
            .and_then(|b| serde_json::from_slice::<Manifest>(&b).ok())
            .filter(|m| m.config_sha256 == self.ws.config_sha256)
        {
            for e in prev.inputs {
                inputs.entry(e.path.clone()).or_insert(e);
            }
            for e in prev.outputs {
                outputs.entry(e.path.clone()).or_insert(e);
            }
            for (k, v) in prev.seeds {
                seeds.entry(k).or_insert(v);
            }
        }
        let manifest = Manifest {
            command: self.command,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            base_seed: self.ws.seed,
            config_sha256: self.ws.config_sha256.clone(),
            seeds,
            inputs: inputs.into_values().collect(),
            outputs: outputs.into_values().collect(),
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        bytes.push(b'\n');
        write_atomic(&path, &bytes)?;
        Ok(path)
    }
}
