//! Character n-gram profiles and the presence-bits / histogram intersection
//! string kernels.
//!
//! A profile stores 64-bit fingerprints of the distinct character windows of
//! a document, sorted, so a kernel value is a linear merge of two lists.
//! Windows are taken over Unicode code points of the raw text: spaces,
//! punctuation and case are all significant.

use std::collections::HashMap;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::{Error, Result};

pub const MAX_NGRAM: usize = 16;
pub const DEFAULT_HASH_SEED: u64 = 0x6d6f_726f_636f_2d6b;

/// Hashes one window of code points. The window length is mixed in, so
/// windows of different lengths never share a fingerprint by construction
/// of the input.
pub fn fingerprint(window: &[char], seed: u64) -> u64 {
    let mut h = seed ^ (window.len() as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    for &c in window {
        h ^= c as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
        h ^= h >> 29;
    }
    // splitmix64 finalizer
    h ^= h >> 30;
    h = h.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h ^= h >> 27;
    h = h.wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}

/// Distinct n-grams of one document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NGramProfile {
    pub doc_ref: String,
    pub n: usize,
    /// Sorted, deduplicated fingerprints.
    pub grams: Vec<u64>,
}

impl NGramProfile {
    pub fn self_value(&self) -> u64 {
        self.grams.len() as u64
    }

    pub fn contains(&self, fp: u64) -> bool {
        self.grams.binary_search(&fp).is_ok()
    }
}

/// N-gram occurrence counts of one document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountProfile {
    pub doc_ref: String,
    pub n: usize,
    /// Sorted by fingerprint; every count is at least 1.
    pub counts: Vec<(u64, u32)>,
}

impl CountProfile {
    pub fn self_value(&self) -> u64 {
        self.counts.iter().map(|&(_, c)| u64::from(c)).sum()
    }

    pub fn to_presence(&self) -> NGramProfile {
        NGramProfile {
            doc_ref: self.doc_ref.clone(),
            n: self.n,
            grams: self.counts.iter().map(|&(fp, _)| fp).collect(),
        }
    }
}

fn windows(text: &str, n: usize) -> impl Iterator<Item = Vec<char>> + '_ {
    let chars: Vec<char> = text.chars().collect();
    let count = (chars.len() + 1).saturating_sub(n);
    (0..count).map(move |i| chars[i..i + n].to_vec())
}

fn fingerprints(text: &str, n: usize, seed: u64) -> Vec<u64> {
    assert!(n >= 1, "n-gram length must be at least 1");
    let chars: Vec<char> = text.chars().collect();
    if chars.len() < n {
        return Vec::new();
    }
    chars.windows(n).map(|w| fingerprint(w, seed)).collect()
}

pub fn extract_profile(text: &str, n: usize) -> NGramProfile {
    extract_profile_seeded(text, n, DEFAULT_HASH_SEED)
}

pub fn extract_profile_seeded(text: &str, n: usize, seed: u64) -> NGramProfile {
    let mut grams = fingerprints(text, n, seed);
    grams.sort_unstable();
    grams.dedup();
    NGramProfile { doc_ref: String::new(), n, grams }
}

pub fn extract_counts(text: &str, n: usize) -> CountProfile {
    extract_counts_seeded(text, n, DEFAULT_HASH_SEED)
}

pub fn extract_counts_seeded(text: &str, n: usize, seed: u64) -> CountProfile {
    let mut fps = fingerprints(text, n, seed);
    fps.sort_unstable();
    let mut counts: Vec<(u64, u32)> = Vec::new();
    for fp in fps {
        match counts.last_mut() {
            Some((last, c)) if *last == fp => *c += 1,
            _ => counts.push((fp, 1)),
        }
    }
    CountProfile { doc_ref: String::new(), n, counts }
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Invalid(format!("n-gram length mismatch: {a} vs {b}")));
    }
    Ok(())
}

fn shared(a: &[u64], b: &[u64]) -> u64 {
    let (mut i, mut j, mut k) = (0, 0, 0u64);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                k += 1;
                i += 1;
                j += 1;
            }
        }
    }
    k
}

fn min_counts(a: &[(u64, u32)], b: &[(u64, u32)]) -> u64 {
    let (mut i, mut j, mut k) = (0, 0, 0u64);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                k += u64::from(a[i].1.min(b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    k
}

/// Number of distinct n-grams shared by both documents.
pub fn presence_kernel(p: &NGramProfile, q: &NGramProfile) -> Result<u64> {
    check_lengths(p.n, q.n)?;
    Ok(shared(&p.grams, &q.grams))
}

/// Sum over shared n-grams of the smaller occurrence count.
pub fn intersection_kernel(p: &CountProfile, q: &CountProfile) -> Result<u64> {
    check_lengths(p.n, q.n)?;
    Ok(min_counts(&p.counts, &q.counts))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Presence,
    Intersection,
}

impl std::str::FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "presence" => Ok(KernelKind::Presence),
            "intersection" => Ok(KernelKind::Intersection),
            other => Err(Error::Invalid(format!("unknown kernel kind {other:?}"))),
        }
    }
}

impl std::fmt::Display for KernelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            KernelKind::Presence => "presence",
            KernelKind::Intersection => "intersection",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KernelConfig {
    pub kind: KernelKind,
    pub n_low: usize,
    pub n_high: usize,
    pub normalize: bool,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self { kind: KernelKind::Presence, n_low: 6, n_high: 6, normalize: true }
    }
}

impl KernelConfig {
    pub fn presence(n: usize) -> Self {
        Self { n_low: n, n_high: n, ..Self::default() }
    }

    pub fn with_range(mut self, n_low: usize, n_high: usize) -> Self {
        self.n_low = n_low;
        self.n_high = n_high;
        self
    }

    pub fn with_normalize(mut self, normalize: bool) -> Self {
        self.normalize = normalize;
        self
    }

    pub fn with_kind(mut self, kind: KernelKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1 <= self.n_low && self.n_low <= self.n_high && self.n_high <= MAX_NGRAM) {
            return Err(Error::Invalid(format!(
                "n-gram range {}..={} must satisfy 1 <= low <= high <= {MAX_NGRAM}",
                self.n_low, self.n_high
            )));
        }
        Ok(())
    }

    pub fn lengths(&self) -> std::ops::RangeInclusive<usize> {
        self.n_low..=self.n_high
    }
}

/// All profiles of one document over an n-gram length range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocProfiles {
    pub doc_ref: String,
    pub n_low: usize,
    /// One count profile per length, `n_low` first.
    pub counts: Vec<CountProfile>,
    /// One presence profile per length, `n_low` first.
    pub presence: Vec<NGramProfile>,
}

impl DocProfiles {
    pub fn build(doc_ref: &str, text: &str, n_low: usize, n_high: usize, seed: u64) -> Self {
        let counts: Vec<CountProfile> = (n_low..=n_high)
            .map(|n| {
                let mut c = extract_counts_seeded(text, n, seed);
                c.doc_ref = doc_ref.to_string();
                c
            })
            .collect();
        let presence = counts.iter().map(CountProfile::to_presence).collect();
        Self { doc_ref: doc_ref.to_string(), n_low, counts, presence }
    }

    pub fn n_high(&self) -> usize {
        self.n_low + self.presence.len() - 1
    }

    pub fn presence_at(&self, n: usize) -> Option<&NGramProfile> {
        n.checked_sub(self.n_low).and_then(|i| self.presence.get(i))
    }

    pub fn counts_at(&self, n: usize) -> Option<&CountProfile> {
        n.checked_sub(self.n_low).and_then(|i| self.counts.get(i))
    }

    fn covers(&self, cfg: &KernelConfig) -> Result<()> {
        if self.presence.is_empty() || cfg.n_low < self.n_low || cfg.n_high > self.n_high() {
            return Err(Error::Invalid(format!(
                "document {} has no profile for some length in {}..={}",
                self.doc_ref, cfg.n_low, cfg.n_high
            )));
        }
        Ok(())
    }

    /// Unnormalized kernel of the document with itself.
    pub fn self_value(&self, cfg: &KernelConfig) -> u64 {
        cfg.lengths()
            .map(|n| match cfg.kind {
                KernelKind::Presence => self.presence_at(n).map_or(0, NGramProfile::self_value),
                KernelKind::Intersection => self.counts_at(n).map_or(0, CountProfile::self_value),
            })
            .sum()
    }
}

/// Unnormalized kernel summed over the configured length range.
pub fn raw_kernel(x: &DocProfiles, y: &DocProfiles, cfg: &KernelConfig) -> Result<u64> {
    x.covers(cfg)?;
    y.covers(cfg)?;
    let mut total = 0;
    for n in cfg.lengths() {
        total += match cfg.kind {
            KernelKind::Presence => shared(&x.presence_at(n).unwrap().grams, &y.presence_at(n).unwrap().grams),
            KernelKind::Intersection => {
                min_counts(&x.counts_at(n).unwrap().counts, &y.counts_at(n).unwrap().counts)
            }
        };
    }
    Ok(total)
}

fn normalized<T: Scalar>(raw: u64, self_x: u64, self_y: u64) -> T {
    if self_x == 0 || self_y == 0 {
        return T::zero();
    }
    if raw == self_x && raw == self_y {
        return T::one();
    }
    T::of_count(raw) / (T::of_count(self_x) * T::of_count(self_y)).sqrt()
}

pub fn kernel_value<T: Scalar>(x: &DocProfiles, y: &DocProfiles, cfg: &KernelConfig) -> Result<T> {
    let raw = raw_kernel(x, y, cfg)?;
    if !cfg.normalize {
        return Ok(T::of_count(raw));
    }
    Ok(normalized(raw, x.self_value(cfg), y.self_value(cfg)))
}

/// Builds profiles for many documents in parallel; output order follows input.
pub fn profile_documents<'a, I>(docs: I, cfg: &KernelConfig, seed: u64) -> Result<Vec<DocProfiles>>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    cfg.validate()?;
    let docs: Vec<(&str, &str)> = docs.into_iter().collect();
    Ok(docs
        .par_iter()
        .map(|(id, text)| DocProfiles::build(id, text, cfg.n_low, cfg.n_high, seed))
        .collect())
}

/// Fingerprint to window dictionary, with collision detection.
#[derive(Debug, Clone, Default)]
pub struct Vocabulary {
    seed: u64,
    windows: HashMap<u64, String>,
    collisions: Vec<(u64, String, String)>,
}

impl Vocabulary {
    pub fn new(seed: u64) -> Self {
        Self { seed, ..Default::default() }
    }

    /// Records every window of `text` for the given lengths.
    pub fn observe(&mut self, text: &str, lengths: std::ops::RangeInclusive<usize>) {
        for n in lengths {
            for w in windows(text, n) {
                let fp = fingerprint(&w, self.seed);
                match self.windows.get(&fp) {
                    Some(known) if known.chars().eq(w.iter().copied()) => {}
                    Some(known) => {
                        let other: String = w.iter().collect();
                        self.collisions.push((fp, known.clone(), other));
                    }
                    None => {
                        self.windows.insert(fp, w.iter().collect());
                    }
                }
            }
        }
    }

    pub fn get(&self, fp: u64) -> Option<&str> {
        self.windows.get(&fp).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn collisions(&self) -> &[(u64, String, String)] {
        &self.collisions
    }

    /// Fails if two distinct windows were seen with one fingerprint.
    pub fn audit(&self) -> Result<()> {
        match self.collisions.first() {
            None => Ok(()),
            Some((fp, a, b)) => Err(Error::Mismatch(format!(
                "fingerprint collision {fp:016x}: {a:?} vs {b:?} ({} total)",
                self.collisions.len()
            ))),
        }
    }
}

/// Pairwise kernel values between two document collections.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix<T> {
    pub row_refs: Vec<String>,
    pub col_refs: Vec<String>,
    pub values: Matrix<T>,
    pub symmetric: bool,
    pub config: KernelConfig,
}

impl<T: Scalar> GramMatrix<T> {
    pub fn rows(&self) -> usize {
        self.values.rows()
    }

    pub fn cols(&self) -> usize {
        self.values.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[(i, j)]
    }

    /// Wraps an explicit matrix, e.g. a precomputed or synthetic kernel.
    pub fn from_matrix(values: Matrix<T>, refs: Option<(Vec<String>, Vec<String>)>) -> Result<Self> {
        let (row_refs, col_refs) = refs.unwrap_or_else(|| {
            ((0..values.rows()).map(|i| i.to_string()).collect(), (0..values.cols()).map(|i| i.to_string()).collect())
        });
        if row_refs.len() != values.rows() || col_refs.len() != values.cols() {
            return Err(Error::Dimension("reference lists do not match matrix shape".into()));
        }
        let symmetric = row_refs == col_refs
            && values.is_square()
            && (0..values.rows()).all(|i| (0..i).all(|j| values[(i, j)] == values[(j, i)]));
        Ok(Self { row_refs, col_refs, values, symmetric, config: KernelConfig::default() })
    }

    pub fn max_diagonal(&self) -> T {
        self.values.diagonal().into_iter().fold(T::zero(), T::max)
    }
}

/// Computes `values[i][j] = kernel_value(rows[i], cols[j], cfg)`.
///
/// Rows are evaluated in parallel; every cell is a pure function of its two
/// profiles, so the result does not depend on the thread count.
pub fn gram_matrix<T: Scalar>(
    rows: &[DocProfiles],
    cols: &[DocProfiles],
    cfg: &KernelConfig,
) -> Result<GramMatrix<T>> {
    cfg.validate()?;
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::Invalid("gram matrix needs non-empty collections".into()));
    }
    for d in rows.iter().chain(cols) {
        d.covers(cfg)?;
    }
    let symmetric = rows.len() == cols.len() && rows.iter().zip(cols).all(|(a, b)| a.doc_ref == b.doc_ref);
    let (m, n) = (rows.len(), cols.len());
    let raw: Vec<Vec<u64>> = rows
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let start = if symmetric { i } else { 0 };
            (start..n).map(|j| raw_kernel(x, &cols[j], cfg).unwrap()).collect()
        })
        .collect();
    let mut full = vec![0u64; m * n];
    for (i, row) in raw.into_iter().enumerate() {
        let start = if symmetric { i } else { 0 };
        for (k, v) in row.into_iter().enumerate() {
            let j = start + k;
            full[i * n + j] = v;
            if symmetric {
                full[j * n + i] = v;
            }
        }
    }
    let values = if cfg.normalize {
        let sx: Vec<u64> = rows.iter().map(|d| d.self_value(cfg)).collect();
        let sy: Vec<u64> = cols.iter().map(|d| d.self_value(cfg)).collect();
        (0..m * n).map(|k| normalized::<T>(full[k], sx[k / n], sy[k % n])).collect()
    } else {
        full.into_iter().map(T::of_count).collect()
    };
    Ok(GramMatrix {
        row_refs: rows.iter().map(|d| d.doc_ref.clone()).collect(),
        col_refs: cols.iter().map(|d| d.doc_ref.clone()).collect(),
        values: Matrix::from_vec(m, n, values)?,
        symmetric,
        config: *cfg,
    })
}

const GRAM_MAGIC: &[u8; 8] = b"DBGRAM01";

#[derive(Serialize, Deserialize)]
struct GramHeader {
    rows: usize,
    cols: usize,
    symmetric: bool,
    config: KernelConfig,
    row_refs: Vec<String>,
    col_refs: Vec<String>,
}

/// Binary export: magic, little-endian u64 header length, JSON header,
/// then `rows * cols` little-endian f64 values in row-major order.
pub fn write_gram_binary<T: Scalar, W: Write>(gram: &GramMatrix<T>, mut out: W) -> std::io::Result<()> {
    let header = GramHeader {
        rows: gram.rows(),
        cols: gram.cols(),
        symmetric: gram.symmetric,
        config: gram.config,
        row_refs: gram.row_refs.clone(),
        col_refs: gram.col_refs.clone(),
    };
    let header = serde_json::to_vec(&header)?;
    out.write_all(GRAM_MAGIC)?;
    out.write_all(&(header.len() as u64).to_le_bytes())?;
    out.write_all(&header)?;
    for &v in gram.values.as_slice() {
        out.write_all(&v.as_f64().to_le_bytes())?;
    }
    out.flush()
}

pub fn read_gram_binary<T: Scalar, R: Read>(mut input: R) -> Result<GramMatrix<T>> {
    let bad = |m: &str| Error::Invalid(format!("gram file: {m}"));
    let io = |e: std::io::Error| bad(&e.to_string());
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic).map_err(io)?;
    if &magic != GRAM_MAGIC {
        return Err(bad("bad magic"));
    }
    let mut len = [0u8; 8];
    input.read_exact(&mut len).map_err(io)?;
    let mut header = vec![0u8; u64::from_le_bytes(len) as usize];
    input.read_exact(&mut header).map_err(io)?;
    let h: GramHeader = serde_json::from_slice(&header).map_err(|e| bad(&e.to_string()))?;
    let mut values = Vec::with_capacity(h.rows * h.cols);
    let mut buf = [0u8; 8];
    for _ in 0..h.rows * h.cols {
        input.read_exact(&mut buf).map_err(io)?;
        values.push(T::of(f64::from_le_bytes(buf)));
    }
    Ok(GramMatrix {
        values: Matrix::from_vec(h.rows, h.cols, values)?,
        row_refs: h.row_refs,
        col_refs: h.col_refs,
        symmetric: h.symmetric,
        config: h.config,
    })
}

/// Debug export: one `row_ref<TAB>col_ref<TAB>value` line per non-zero cell.
pub fn write_gram_triplets<T: Scalar, W: Write>(gram: &GramMatrix<T>, mut out: W) -> std::io::Result<()> {
    for i in 0..gram.rows() {
        for j in 0..gram.cols() {
            let v = gram.get(i, j);
            if v != T::zero() {
                writeln!(out, "{}\t{}\t{}", gram.row_refs[i], gram.col_refs[j], v)?;
            }
        }
    }
    out.flush()
}
