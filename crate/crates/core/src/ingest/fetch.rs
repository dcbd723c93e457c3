//! Content-addressed download cache for the source datasets.
//!
//! The manifest is a plain-text file, one dataset per line:
//!
//! ```text
//! # name = url [sha256:<hex>]
//! Substation.csv = https://example.org/grid/Substation.csv sha256:9f86d0...
//! HourlyLoad.csv = file:///srv/mirror/HourlyLoad.csv
//! ```
//!
//! Downloads land in the cache as `<sha256>-<name>`. A cached copy whose
//! name matches the expected hash is reused without touching the network.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("manifest line {line}: {reason}")]
    Manifest { line: usize, reason: String },
    #[error("fetching `{dataset}` failed: {reason}")]
    Network { dataset: String, reason: String },
    #[error("`{dataset}`: expected sha256 {expected}, got {actual}")]
    HashMismatch {
        dataset: String,
        expected: String,
        actual: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl FetchError {
    /// Network failures may succeed on retry; everything else will not.
    pub fn is_retriable(&self) -> bool {
        matches!(self, FetchError::Network { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub name: String,
    pub url: String,
    pub sha256: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FetchManifest {
    pub entries: Vec<ManifestEntry>,
}

impl FetchManifest {
    pub fn parse(text: &str) -> Result<Self, FetchError> {
        let mut entries: Vec<ManifestEntry> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: &str| FetchError::Manifest {
                line: line_no,
                reason: reason.to_string(),
            };
            let (name, rest) = line
                .split_once('=')
                .ok_or_else(|| err("expected `name = url`"))?;
            let name = name.trim();
            if name.is_empty()
                || name.contains('/')
                || name.contains('\\')
                || name == "."
                || name == ".."
            {
                return Err(err("dataset name must be a plain file name"));
            }
            let mut parts = rest.split_whitespace();
            let url = parts.next().ok_or_else(|| err("missing url"))?.to_string();
            let sha256 = match parts.next() {
                None => None,
                Some(tok) => {
                    let hex = tok
                        .strip_prefix("sha256:")
                        .ok_or_else(|| err("hash must be written as sha256:<hex>"))?
                        .to_ascii_lowercase();
                    if hex.len() != 64 || !hex.chars().all(|c| c.is_ascii_hexdigit()) {
                        return Err(err("sha256 must be 64 hex digits"));
                    }
                    Some(hex)
                }
            };
            if parts.next().is_some() {
                return Err(err("trailing tokens after hash"));
            }
            if entries.iter().any(|e| e.name == name) {
                return Err(err("duplicate dataset name"));
            }
            entries.push(ManifestEntry {
                name: name.to_string(),
                url,
                sha256,
            });
        }
        Ok(Self { entries })
    }

    pub fn from_file(path: &Path) -> Result<Self, FetchError> {
        let text = fs::read_to_string(path).map_err(|source| FetchError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }
}

/// Byte source for manifest URLs.
pub trait Transport {
    fn get(&self, url: &str) -> Result<Vec<u8>, String>;
}

/// `http(s)://` via ureq, `file://` from the local filesystem.
#[derive(Clone, Copy, Debug, Default)]
pub struct HttpTransport;

const MAX_DOWNLOAD_BYTES: u64 = 1 << 30;

impl Transport for HttpTransport {
    fn get(&self, url: &str) -> Result<Vec<u8>, String> {
        if let Some(path) = url.strip_prefix("file://") {
            return fs::read(path).map_err(|e| e.to_string());
        }
        let mut resp = ureq::get(url).call().map_err(|e| e.to_string())?;
        resp.body_mut()
            .with_config()
            .limit(MAX_DOWNLOAD_BYTES)
            .read_to_vec()
            .map_err(|e| e.to_string())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FetchError + '_ {
    move |source| FetchError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn verify_cached(path: &Path, dataset: &str, expected: &str) -> Result<(), FetchError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let actual = sha256_hex(&bytes);
    if actual != expected {
        return Err(FetchError::HashMismatch {
            dataset: dataset.to_string(),
            expected: expected.to_string(),
            actual,
        });
    }
    Ok(())
}

/// Downloads every manifest entry into `cache_dir`, returning the cached
/// paths in manifest order.
pub fn fetch_dataset(
    manifest: &FetchManifest,
    cache_dir: &Path,
    transport: &dyn Transport,
) -> Result<Vec<PathBuf>, FetchError> {
    if manifest.entries.is_empty() {
        return Ok(Vec::new());
    }
    fs::create_dir_all(cache_dir).map_err(io_err(cache_dir))?;
    let mut out = Vec::with_capacity(manifest.entries.len());
    for entry in &manifest.entries {
        if let Some(expected) = &entry.sha256 {
            let cached = cache_dir.join(format!("{expected}-{}", entry.name));
            if cached.is_file() {
                verify_cached(&cached, &entry.name, expected)?;
                log::debug!("cache hit for {}", entry.name);
                out.push(cached);
                continue;
            }
        }

        let bytes = transport
            .get(&entry.url)
            .map_err(|reason| FetchError::Network {
                dataset: entry.name.clone(),
                reason,
            })?;
        let actual = sha256_hex(&bytes);
        if let Some(expected) = &entry.sha256 {
            if &actual != expected {
                return Err(FetchError::HashMismatch {
                    dataset: entry.name.clone(),
                    expected: expected.clone(),
                    actual,
                });
            }
        }
        let target = cache_dir.join(format!("{actual}-{}", entry.name));
        if target.is_file() {
            // never replace a cached file whose content disagrees with its name
            verify_cached(&target, &entry.name, &actual)?;
        } else {
            let tmp = cache_dir.join(format!(".{actual}-{}.part", entry.name));
            let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
            f.write_all(&bytes).map_err(io_err(&tmp))?;
            f.sync_all().map_err(io_err(&tmp))?;
            fs::rename(&tmp, &target).map_err(io_err(&target))?;
        }
        out.push(target);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;
    use std::collections::HashMap;

    struct FakeTransport {
        files: HashMap<String, Vec<u8>>,
        calls: Cell<usize>,
    }

    impl FakeTransport {
        fn new(files: &[(&str, &[u8])]) -> Self {
            Self {
                files: files
                    .iter()
                    .map(|(u, b)| (u.to_string(), b.to_vec()))
                    .collect(),
                calls: Cell::new(0),
            }
        }
    }

    impl Transport for FakeTransport {
        fn get(&self, url: &str) -> Result<Vec<u8>, String> {
            self.calls.set(self.calls.get() + 1);
            self.files
                .get(url)
                .cloned()
                .ok_or_else(|| "http status: 404".to_string())
        }
    }

    #[test]
    fn manifest_parsing() {
        let hash = sha256_hex(b"x");
        let text =
            format!("# comment\n\nA.csv = http://h/a.csv sha256:{hash}\nB.csv=file:///tmp/b\n");
        let m = FetchManifest::parse(&text).unwrap();
        assert_eq!(m.entries.len(), 2);
        assert_eq!(m.entries[0].sha256.as_deref(), Some(hash.as_str()));
        assert_eq!(m.entries[1].url, "file:///tmp/b");
        assert!(FetchManifest::parse("noequals").is_err());
        assert!(FetchManifest::parse("../x = http://h").is_err());
        assert!(FetchManifest::parse("a = http://h md5:00").is_err());
    }

    #[test]
    fn empty_manifest_is_empty_list() {
        let dir = tempfile::tempdir().unwrap();
        let t = FakeTransport::new(&[]);
        let out = fetch_dataset(&FetchManifest::default(), dir.path(), &t).unwrap();
        assert!(out.is_empty());
        assert_eq!(t.calls.get(), 0);
    }

    #[test]
    fn cache_hit_skips_network() {
        let dir = tempfile::tempdir().unwrap();
        let body = b"id,name,x,y,voltage_kv\n";
        let hash = sha256_hex(body);
        let manifest =
            FetchManifest::parse(&format!("Substation.csv = http://h/s sha256:{hash}")).unwrap();
        let t = FakeTransport::new(&[("http://h/s", body)]);
        let first = fetch_dataset(&manifest, dir.path(), &t).unwrap();
        assert_eq!(t.calls.get(), 1);
        let second = fetch_dataset(&manifest, dir.path(), &t).unwrap();
        assert_eq!(t.calls.get(), 1);
        assert_eq!(first, second);
        assert_eq!(
            first[0].file_name().unwrap().to_string_lossy(),
            format!("{hash}-Substation.csv")
        );
    }

    #[test]
    fn not_found_names_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = FetchManifest::parse("Line.csv = http://h/missing").unwrap();
        let t = FakeTransport::new(&[]);
        let err = fetch_dataset(&manifest, dir.path(), &t).unwrap_err();
        assert!(err.is_retriable());
        assert!(matches!(err, FetchError::Network { ref dataset, .. } if dataset == "Line.csv"));
    }

    #[test]
    fn wrong_hash_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = FetchManifest::parse(&format!(
            "Line.csv = http://h/l sha256:{}",
            sha256_hex(b"expected")
        ))
        .unwrap();
        let t = FakeTransport::new(&[("http://h/l", b"tampered")]);
        let err = fetch_dataset(&manifest, dir.path(), &t).unwrap_err();
        assert!(matches!(err, FetchError::HashMismatch { .. }));
        assert!(!err.is_retriable());
    }

    #[test]
    fn corrupted_cache_is_not_overwritten() {
        let dir = tempfile::tempdir().unwrap();
        let hash = sha256_hex(b"good");
        let cached = dir.path().join(format!("{hash}-Line.csv"));
        fs::write(&cached, b"corrupt").unwrap();
        let manifest =
            FetchManifest::parse(&format!("Line.csv = http://h/l sha256:{hash}")).unwrap();
        let t = FakeTransport::new(&[("http://h/l", b"good")]);
        assert!(matches!(
            fetch_dataset(&manifest, dir.path(), &t),
            Err(FetchError::HashMismatch { .. })
        ));
        assert_eq!(fs::read(&cached).unwrap(), b"corrupt");
    }
}
