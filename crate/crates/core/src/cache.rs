//! On-disk cache of n-gram profiles.
//!
//! One file per (document set, n-gram range, hash seed). The file is
//! line-oriented:
//!
//! ```text
//! dialect-bench-profiles v1
//! n_low=<n> n_high=<n> hash_seed=<u64> checksum=<sha256 of the documents>
//! <id>\t<n>\t<fp>:<count>,<fp>:<count>,...
//! ```
//!
//! Fingerprints are lowercase hex and sorted. A file whose header does not
//! match the request is ignored and rewritten.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::kernel::{self, CountProfile, DocProfiles, KernelConfig};
use crate::{Error, Result};

pub const CACHE_ENV: &str = "DIALECT_BENCH_CACHE";
const MAGIC: &str = "dialect-bench-profiles v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileCache {
    dir: PathBuf,
}

/// SHA-256 over `id<TAB>text<NEWLINE>` for every document, in order.
pub fn documents_checksum<'a>(docs: impl IntoIterator<Item = (&'a str, &'a str)>) -> String {
    let mut h = Sha256::new();
    for (id, text) in docs {
        h.update(id.as_bytes());
        h.update(b"\t");
        h.update(text.as_bytes());
        h.update(b"\n");
    }
    format!("{:x}", h.finalize())
}

impl ProfileCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// The cache named by `DIALECT_BENCH_CACHE`, if set.
    pub fn from_env() -> Option<Self> {
        std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(Self::new)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, checksum: &str, cfg: &KernelConfig, seed: u64) -> PathBuf {
        self.dir.join(format!("{}-n{}-{}-s{seed:x}.profiles", &checksum[..16], cfg.n_low, cfg.n_high))
    }

    /// Returns cached profiles for `docs`, building and storing them on a miss.
    pub fn get_or_build(&self, docs: &[(&str, &str)], cfg: &KernelConfig, seed: u64) -> Result<Vec<DocProfiles>> {
        let checksum = documents_checksum(docs.iter().copied());
        let path = self.path_for(&checksum, cfg, seed);
        if let Some(hit) = read_profiles(&path, &checksum, cfg, seed)? {
            if hit.len() == docs.len() && hit.iter().zip(docs).all(|(p, (id, _))| p.doc_ref == *id) {
                return Ok(hit);
            }
        }
        let built = kernel::profile_documents(docs.iter().copied(), cfg, seed)?;
        fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        write_profiles(&path, &checksum, cfg, seed, &built)?;
        Ok(built)
    }
}

/// Profiles through the cache when one is given, directly otherwise.
pub fn profiles(cache: Option<&ProfileCache>, docs: &[(&str, &str)], cfg: &KernelConfig, seed: u64) -> Result<Vec<DocProfiles>> {
    match cache {
        Some(c) => c.get_or_build(docs, cfg, seed),
        None => kernel::profile_documents(docs.iter().copied(), cfg, seed),
    }
}

fn header(checksum: &str, cfg: &KernelConfig, seed: u64) -> String {
    format!("n_low={} n_high={} hash_seed={seed} checksum={checksum}", cfg.n_low, cfg.n_high)
}

pub fn write_profiles(path: &Path, checksum: &str, cfg: &KernelConfig, seed: u64, profiles: &[DocProfiles]) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(fs::File::create(path).map_err(io)?);
    writeln!(w, "{MAGIC}").map_err(io)?;
    writeln!(w, "{}", header(checksum, cfg, seed)).map_err(io)?;
    for doc in profiles {
        for c in &doc.counts {
            let body: Vec<String> = c.counts.iter().map(|(fp, n)| format!("{fp:x}:{n}")).collect();
            writeln!(w, "{}\t{}\t{}", doc.doc_ref, c.n, body.join(",")).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

/// Reads a cache file; `Ok(None)` when it is absent or was written for a
/// different request.
pub fn read_profiles(path: &Path, checksum: &str, cfg: &KernelConfig, seed: u64) -> Result<Option<Vec<DocProfiles>>> {
    let Ok(file) = fs::File::open(path) else {
        return Ok(None);
    };
    let mut lines = BufReader::new(file).lines();
    let mut next = || lines.next().transpose().map_err(|e| Error::io(path, e));
    if next()?.as_deref() != Some(MAGIC) || next()?.as_deref() != Some(header(checksum, cfg, seed).as_str()) {
        return Ok(None);
    }
    let bad = |row: usize, m: &str| Error::Row { file: path.display().to_string(), row, message: m.to_string() };
    let per_doc = cfg.n_high - cfg.n_low + 1;
    let mut out: Vec<DocProfiles> = Vec::new();
    let mut pending: Vec<CountProfile> = Vec::new();
    let mut row = 2;
    while let Some(line) = next()? {
        row += 1;
        let mut cols = line.splitn(3, '\t');
        let (Some(id), Some(n), Some(body)) = (cols.next(), cols.next(), cols.next()) else {
            return Err(bad(row, "expected id<TAB>n<TAB>grams"));
        };
        let n: usize = n.parse().map_err(|_| bad(row, "bad n"))?;
        if n != cfg.n_low + pending.len() {
            return Err(bad(row, "profile lengths out of order"));
        }
        let counts = body
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|pair| {
                let (fp, c) = pair.split_once(':')?;
                Some((u64::from_str_radix(fp, 16).ok()?, c.parse().ok()?))
            })
            .collect::<Option<Vec<(u64, u32)>>>()
            .ok_or_else(|| bad(row, "bad fingerprint list"))?;
        pending.push(CountProfile { doc_ref: id.to_string(), n, counts });
        if pending.len() == per_doc {
            let counts = std::mem::take(&mut pending);
            let presence = counts.iter().map(CountProfile::to_presence).collect();
            out.push(DocProfiles { doc_ref: id.to_string(), n_low: cfg.n_low, counts, presence });
        }
    }
    if !pending.is_empty() {
        return Err(bad(row, "truncated profile block"));
    }
    Ok(Some(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::DEFAULT_HASH_SEED;

    #[test]
    fn round_trip_and_invalidation() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ProfileCache::new(dir.path().join("c"));
        let docs = [("a", "salut lume"), ("b", "bună ziua")];
        let cfg = KernelConfig::presence(2).with_range(2, 3);
        let built = cache.get_or_build(&docs, &cfg, DEFAULT_HASH_SEED).unwrap();
        assert_eq!(built, kernel::profile_documents(docs, &cfg, DEFAULT_HASH_SEED).unwrap());
        let files: Vec<_> = fs::read_dir(cache.dir()).unwrap().collect();
        assert_eq!(files.len(), 1);
        let path = files[0].as_ref().unwrap().path();
        let checksum = documents_checksum(docs);
        let hit = read_profiles(&path, &checksum, &cfg, DEFAULT_HASH_SEED).unwrap().unwrap();
        assert_eq!(hit, built);
        // checksum mismatch invalidates
        assert!(read_profiles(&path, "deadbeef", &cfg, DEFAULT_HASH_SEED).unwrap().is_none());
        assert!(read_profiles(&path, &checksum, &cfg, 1).unwrap().is_none());
        // a second call reads the file
        assert_eq!(cache.get_or_build(&docs, &cfg, DEFAULT_HASH_SEED).unwrap(), built);
    }

    #[test]
    fn corrupt_body_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.profiles");
        let cfg = KernelConfig::presence(2);
        fs::write(&path, format!("{MAGIC}\n{}\na\t2\tzz:1\n", header("c", &cfg, 0))).unwrap();
        assert!(read_profiles(&path, "c", &cfg, 0).is_err());
        assert!(read_profiles(&dir.path().join("missing"), "c", &cfg, 0).unwrap().is_none());
    }
}
