//! Output directory access: locking, artifact reads and writes, manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{Config, Constants};
use crate::error::CliError;

pub const LOCK_FILE: &str = ".lock";
pub const MANIFEST: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Serialize, serde::Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub config_sha256: String,
    pub seed: u64,
    pub constants: Constants,
    /// Relative path (with `/` separators) to SHA-256 of the file contents.
    pub artifacts: BTreeMap<String, String>,
}

fn io_err(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

/// The output directory, held under an exclusive lock file for the
/// lifetime of the value.
pub struct Output {
    root: PathBuf,
    lock: PathBuf,
}

impl Output {
    pub fn open(root: &Path) -> Result<Output, CliError> {
        fs::create_dir_all(root).map_err(io_err(format!("create {}", root.display())))?;
        let lock = root.join(LOCK_FILE);
        match fs::OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => return Err(CliError::Locked(lock)),
            Err(e) => return Err(io_err(format!("create {}", lock.display()))(e)),
        }
        Ok(Output {
            root: root.to_path_buf(),
            lock,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    /// Path of an artifact another stage must have produced.
    pub fn require(&self, rel: &str, stage: &'static str) -> Result<PathBuf, CliError> {
        let p = self.path(rel);
        if p.exists() {
            Ok(p)
        } else {
            Err(CliError::MissingArtifact { path: p, stage })
        }
    }

    /// Removes a stage directory so stale files never survive a rerun.
    pub fn reset_dir(&self, rel: &str) -> Result<(), CliError> {
        let p = self.path(rel);
        if p.exists() {
            fs::remove_dir_all(&p).map_err(io_err(format!("remove {}", p.display())))?;
        }
        fs::create_dir_all(&p).map_err(io_err(format!("create {}", p.display())))
    }

    pub fn write(&self, rel: &str, bytes: &[u8]) -> Result<(), CliError> {
        let p = self.path(rel);
        if let Some(dir) = p.parent() {
            fs::create_dir_all(dir).map_err(io_err(format!("create {}", dir.display())))?;
        }
        fs::write(&p, bytes).map_err(io_err(format!("write {}", p.display())))
    }

    pub fn write_json<T: Serialize + ?Sized>(&self, rel: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(CliError::data)?;
        text.push('\n');
        self.write(rel, text.as_bytes())
    }

    /// CSV with a header taken from the record fields.
    pub fn write_records<T: Serialize>(&self, rel: &str, rows: &[T]) -> Result<(), CliError> {
        let mut bytes = Vec::new();
        dialectometry::corpus::io::write_csv(&mut bytes, rows).map_err(CliError::data)?;
        self.write(rel, &bytes)
    }

    pub fn read_json<T: DeserializeOwned>(&self, rel: &str, stage: &'static str) -> Result<T, CliError> {
        let p = self.require(rel, stage)?;
        let f = fs::File::open(&p).map_err(io_err(format!("open {}", p.display())))?;
        serde_json::from_reader(BufReader::new(f)).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))
    }

    /// Files directly inside `rel` with the given extension, sorted by name.
    pub fn list(&self, rel: &str, ext: &str) -> Result<Vec<String>, CliError> {
        let dir = self.path(rel);
        if !dir.is_dir() {
            return Ok(Vec::new());
        }
        let mut names: Vec<String> = fs::read_dir(&dir)
            .map_err(io_err(format!("list {}", dir.display())))?
            .filter_map(|e| e.ok())
            .filter(|e| e.path().is_file())
            .filter_map(|e| e.file_name().into_string().ok())
            .filter(|n| n.ends_with(ext))
            .collect();
        names.sort();
        Ok(names)
    }

    /// Subdirectories of `rel`, sorted by name.
    pub fn subdirs(&self, rel: &str) -> Result<Vec<String>, CliError> {
        let dir = self.path(rel);
        if !dir.is_dir() {
            return Ok(Vec::new());
        }
        let mut names: Vec<String> = fs::read_dir(&dir)
            .map_err(io_err(format!("list {}", dir.display())))?
            .filter_map(|e| e.ok())
            .filter(|e| e.path().is_dir())
            .filter_map(|e| e.file_name().into_string().ok())
            .collect();
        names.sort();
        Ok(names)
    }

    /// Rewrites `manifest.json` with checksums of every artifact present.
    pub fn write_manifest(&self, config: &Config) -> Result<(), CliError> {
        let mut artifacts = BTreeMap::new();
        collect(&self.root, &self.root, &mut artifacts)?;
        let manifest = Manifest {
            version: MANIFEST_VERSION,
            config_sha256: config.config_sha256.clone(),
            seed: config.seed,
            constants: config.constants(),
            artifacts,
        };
        self.write_json(MANIFEST, &manifest)
    }
}

impl Drop for Output {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.lock);
    }
}

fn collect(root: &Path, dir: &Path, out: &mut BTreeMap<String, String>) -> Result<(), CliError> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(format!("list {}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect(root, &p, out)?;
            continue;
        }
        let rel = p.strip_prefix(root).expect("walk stays under root");
        let rel = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
        if rel == MANIFEST || rel == LOCK_FILE {
            continue;
        }
        let bytes = fs::read(&p).map_err(io_err(format!("read {}", p.display())))?;
        out.insert(rel, hex::encode(Sha256::digest(&bytes)));
    }
    Ok(())
}
