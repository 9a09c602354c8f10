//! Run directory layout:
//!
//! ```text
//! manifest.json            written once, before any record
//! records/c0_f1_r2.json    one document per completed run
//! failed/c0_f1_r2.txt      error text of a failed run, retried on resume
//! reports/*.csv            emitted by `gasvm report`
//! ```

use std::collections::BTreeSet;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use gasvm_core::experiment::{RunKey, RunRecord};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::error::{io_at, Error, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub seed: u64,
    pub fold_seed: u64,
    pub data_path: PathBuf,
    pub data_sha256: String,
    pub created_at: String,
    pub config: Config,
}

impl Manifest {
    /// Same experiment: everything but the creation time and data location.
    pub fn same_experiment(&self, other: &Manifest) -> bool {
        self.tool_version == other.tool_version
            && self.seed == other.seed
            && self.fold_seed == other.fold_seed
            && self.data_sha256 == other.data_sha256
            && self.config == other.config
    }
}

/// On-disk form of a record: the record itself plus the selected feature
/// names, for readers that do not want to decode the mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredRecord {
    pub selected_features: Vec<String>,
    #[serde(flatten)]
    pub record: RunRecord,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Corrupt { path: PathBuf, reason: String },
    Failed { key: RunKey, reason: String },
    Missing(RunKey),
}

impl std::fmt::Display for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Problem::Corrupt { path, reason } => write!(f, "corrupt record {}: {reason}", path.display()),
            Problem::Failed { key, reason } => write!(f, "failed run {}: {reason}", file_stem(*key)),
            Problem::Missing(key) => write!(f, "missing record {}", file_stem(*key)),
        }
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = fs::File::open(path).map_err(io_at(path))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(io_at(path))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

pub fn file_stem(key: RunKey) -> String {
    format!("c{}_f{}_r{}", key.condition, key.fold, key.replication)
}

fn parse_stem(stem: &str) -> Option<RunKey> {
    let mut parts = stem.split('_');
    let mut next = |prefix: char| parts.next()?.strip_prefix(prefix)?.parse::<usize>().ok();
    let key = RunKey {
        condition: next('c')?,
        fold: next('f')?,
        replication: next('r')?,
    };
    parts.next().is_none().then_some(key)
}

fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(io_at(&tmp))?;
    fs::rename(&tmp, path).map_err(io_at(path))
}

#[derive(Debug, Clone)]
pub struct RunStore {
    root: PathBuf,
}

impl RunStore {
    /// Opens `root`, writing `manifest` if the directory is new. An existing
    /// manifest must describe the same experiment.
    pub fn create_or_resume(root: &Path, manifest: &Manifest) -> Result<Self> {
        let store = Self {
            root: root.to_path_buf(),
        };
        for dir in [store.root.clone(), store.records_dir(), store.failed_dir()] {
            fs::create_dir_all(&dir).map_err(io_at(&dir))?;
        }
        let path = store.manifest_path();
        if path.exists() {
            let existing = store.manifest()?;
            if !existing.same_experiment(manifest) {
                return Err(Error::Store(format!(
                    "{} belongs to a different experiment (seed, config, data or tool version differ)",
                    root.display()
                )));
            }
        } else {
            write_atomic(&path, &serde_json::to_vec_pretty(manifest)?)?;
        }
        Ok(store)
    }

    /// Opens an existing run directory for reading.
    pub fn open(root: &Path) -> Result<Self> {
        let store = Self {
            root: root.to_path_buf(),
        };
        if !store.manifest_path().exists() {
            return Err(Error::Store(format!("{} has no manifest.json", root.display())));
        }
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    fn records_dir(&self) -> PathBuf {
        self.root.join("records")
    }

    fn failed_dir(&self) -> PathBuf {
        self.root.join("failed")
    }

    pub fn reports_dir(&self) -> PathBuf {
        self.root.join("reports")
    }

    pub fn record_path(&self, key: RunKey) -> PathBuf {
        self.records_dir().join(format!("{}.json", file_stem(key)))
    }

    fn failure_path(&self, key: RunKey) -> PathBuf {
        self.failed_dir().join(format!("{}.txt", file_stem(key)))
    }

    pub fn manifest(&self) -> Result<Manifest> {
        let path = self.manifest_path();
        let text = fs::read_to_string(&path).map_err(io_at(&path))?;
        serde_json::from_str(&text).map_err(|e| Error::Store(format!("{}: {e}", path.display())))
    }

    /// Keys with a record that parses.
    pub fn completed(&self) -> Result<BTreeSet<RunKey>> {
        Ok(self.load()?.0.into_iter().map(|r| r.key).collect())
    }

    pub fn write_record(&self, record: &RunRecord, feature_names: &[String]) -> Result<()> {
        let stored = StoredRecord {
            selected_features: record
                .evaluation
                .spec
                .selected()
                .map(|i| feature_names[i].clone())
                .collect(),
            record: record.clone(),
        };
        write_atomic(&self.record_path(record.key), &serde_json::to_vec_pretty(&stored)?)?;
        let failure = self.failure_path(record.key);
        if failure.exists() {
            fs::remove_file(&failure).map_err(io_at(&failure))?;
        }
        Ok(())
    }

    pub fn write_failure(&self, key: RunKey, reason: &str) -> Result<()> {
        write_atomic(&self.failure_path(key), reason.as_bytes())
    }

    /// Every readable record in key order, plus the files that could not be read.
    pub fn load(&self) -> Result<(Vec<RunRecord>, Vec<Problem>)> {
        let mut records = Vec::new();
        let mut problems = Vec::new();
        let dir = self.records_dir();
        if !dir.exists() {
            return Ok((records, problems));
        }
        let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
            .map_err(io_at(&dir))?
            .map(|e| e.map(|e| e.path()).map_err(io_at(&dir)))
            .collect::<Result<_>>()?;
        paths.retain(|p| p.extension().is_some_and(|e| e == "json"));
        paths.sort();
        for path in paths {
            let corrupt = |reason: String| Problem::Corrupt {
                path: path.clone(),
                reason,
            };
            let key = path.file_stem().and_then(|s| s.to_str()).and_then(parse_stem);
            let parsed = fs::read_to_string(&path)
                .map_err(|e| e.to_string())
                .and_then(|t| serde_json::from_str::<StoredRecord>(&t).map_err(|e| e.to_string()));
            match (key, parsed) {
                (Some(key), Ok(s)) if s.record.key == key => records.push(s.record),
                (_, Ok(_)) => problems.push(corrupt("file name does not match its run key".into())),
                (_, Err(reason)) => problems.push(corrupt(reason)),
            }
        }
        records.sort_by_key(|r| r.key);
        Ok((records, problems))
    }

    /// Records plus every problem relative to the expected key set: corrupt
    /// files, failed runs and runs never completed.
    pub fn audit(&self, expected: &[RunKey]) -> Result<(Vec<RunRecord>, Vec<Problem>)> {
        let (records, mut problems) = self.load()?;
        let done: BTreeSet<RunKey> = records.iter().map(|r| r.key).collect();
        for &key in expected {
            if done.contains(&key) {
                continue;
            }
            let failure = self.failure_path(key);
            match fs::read_to_string(&failure) {
                Ok(reason) => problems.push(Problem::Failed { key, reason }),
                Err(_) => problems.push(Problem::Missing(key)),
            }
        }
        Ok((records, problems))
    }
}
