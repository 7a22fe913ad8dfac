//! Labelled news samples: loading, validation, entity masking, stratified
//! splitting and summary statistics.
//!
//! The canonical on-disk format is one UTF-8 file per subset
//! (`train.tsv`, `validation.tsv`, `test.tsv`) with the columns
//! `id<TAB>dialect<TAB>topic<TAB>text` and no header. Backslash, tab and
//! newline inside `text` are escaped as `\\`, `\t` and `\n`. Other layouts are
//! read through a [`LayoutConfig`].

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

/// Placeholder that replaces every named entity in masked text.
pub const NE_TOKEN: &str = "$NE$";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Dialect {
    MD,
    RO,
}

impl Dialect {
    pub const ALL: [Dialect; 2] = [Dialect::MD, Dialect::RO];

    pub fn as_str(self) -> &'static str {
        match self {
            Dialect::MD => "MD",
            Dialect::RO => "RO",
        }
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dialect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "MD" => Ok(Dialect::MD),
            "RO" => Ok(Dialect::RO),
            other => Err(Error::Invalid(format!("unknown dialect label {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topic {
    Culture,
    Finance,
    Politics,
    Science,
    Sports,
    Tech,
}

impl Topic {
    pub const ALL: [Topic; 6] = [
        Topic::Culture,
        Topic::Finance,
        Topic::Politics,
        Topic::Science,
        Topic::Sports,
        Topic::Tech,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Topic::Culture => "culture",
            Topic::Finance => "finance",
            Topic::Politics => "politics",
            Topic::Science => "science",
            Topic::Sports => "sports",
            Topic::Tech => "tech",
        }
    }
}

impl fmt::Display for Topic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Topic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Topic::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown topic label {s:?}")))
    }
}

/// Collapses every run of whitespace into one space and trims both ends.
pub fn normalize_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// One news document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub dialect: Dialect,
    pub topic: Topic,
    pub text: String,
}

impl Sample {
    /// Builds a sample, normalizing whitespace in `text`.
    pub fn new(
        id: impl Into<String>,
        dialect: Dialect,
        topic: Topic,
        text: &str,
    ) -> Result<Self> {
        let id = id.into();
        if id.is_empty() || id.contains(['\t', '\n']) {
            return Err(Error::Invalid(format!("bad sample id {id:?}")));
        }
        let text = normalize_whitespace(text);
        if text.is_empty() {
            return Err(Error::Invalid(format!("sample {id} has empty text")));
        }
        Ok(Self { id, dialect, topic, text })
    }

    /// Number of space-separated tokens.
    pub fn tokens(&self) -> usize {
        self.text.split(' ').filter(|t| !t.is_empty()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subset {
    Train,
    Validation,
    Test,
}

impl Subset {
    pub const ALL: [Subset; 3] = [Subset::Train, Subset::Validation, Subset::Test];

    pub fn name(self) -> &'static str {
        match self {
            Subset::Train => "train",
            Subset::Validation => "validation",
            Subset::Test => "test",
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.tsv", self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CorpusSplit {
    pub train: Vec<Sample>,
    pub validation: Vec<Sample>,
    pub test: Vec<Sample>,
    pub ner_masked: bool,
}

impl CorpusSplit {
    pub fn subset(&self, which: Subset) -> &[Sample] {
        match which {
            Subset::Train => &self.train,
            Subset::Validation => &self.validation,
            Subset::Test => &self.test,
        }
    }

    fn subset_mut(&mut self, which: Subset) -> &mut Vec<Sample> {
        match which {
            Subset::Train => &mut self.train,
            Subset::Validation => &mut self.validation,
            Subset::Test => &mut self.test,
        }
    }

    pub fn len(&self) -> usize {
        self.train.len() + self.validation.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &Sample> {
        self.train.iter().chain(&self.validation).chain(&self.test)
    }

    /// Checks that ids are unique across the whole split and, for masked
    /// corpora, that no mangled placeholder variants slipped in.
    pub fn validate(&self) -> Result<()> {
        let mut seen: HashMap<&str, Subset> = HashMap::new();
        for which in Subset::ALL {
            for (row, s) in self.subset(which).iter().enumerate() {
                if let Some(prev) = seen.insert(&s.id, which) {
                    return Err(Error::Row {
                        file: which.file_name(),
                        row: row + 1,
                        message: format!("duplicate id {} (also in {})", s.id, prev.name()),
                    });
                }
                if s.text.is_empty() {
                    return Err(Error::Row {
                        file: which.file_name(),
                        row: row + 1,
                        message: "empty text".into(),
                    });
                }
            }
        }
        Ok(())
    }

    /// SHA-256 over the canonical serialization of all three subsets.
    pub fn checksum(&self) -> String {
        let mut hasher = Sha256::new();
        for which in Subset::ALL {
            hasher.update(which.name().as_bytes());
            hasher.update(b"\n");
            for s in self.subset(which) {
                hasher.update(canonical_line(s).as_bytes());
            }
        }
        format!("{:x}", hasher.finalize())
    }
}

pub fn escape_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out
}

pub fn unescape_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('\\') => out.push('\\'),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

fn canonical_line(s: &Sample) -> String {
    format!("{}\t{}\t{}\t{}\n", s.id, s.dialect, s.topic, escape_text(&s.text))
}

/// Writes the three canonical subset files into `dir`.
pub fn write_corpus(split: &CorpusSplit, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for which in Subset::ALL {
        let path = dir.join(which.file_name());
        let body: String = split.subset(which).iter().map(canonical_line).collect();
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// How subset files are laid out on disk.
#[derive(Debug, Clone, Default)]
pub enum Layout {
    #[default]
    Canonical,
    Config(LayoutConfig),
}

/// Flat `key = value` description of a non-canonical corpus release.
///
/// Two modes are supported:
///
/// * `mode = joined`: per subset a samples file (`id<TAB>text`) plus dialect
///   and topic label files (`id<TAB>label`), joined on id. Keys:
///   `<subset>.samples`, `<subset>.dialect`, `<subset>.topic`.
/// * `mode = columns`: per subset one delimited file (`<subset>.file`) with
///   column indices `column.id`, `column.dialect`, `column.topic`,
///   `column.text`, optional `delimiter` (default tab) and `header = true`.
///
/// In both modes `dialect.<raw> = MD|RO` and `topic.<raw> = <topic>` map raw
/// label values, and `masked = true|false` states whether the text is
/// already entity-masked (default: detected from the placeholder token).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LayoutConfig {
    entries: BTreeMap<String, String>,
}

impl LayoutConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let entries = parse_key_values(text)?;
        let cfg = Self { entries };
        match cfg.get("mode").unwrap_or("joined") {
            "joined" | "columns" => Ok(cfg),
            other => Err(Error::Invalid(format!("unknown layout mode {other:?}"))),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Invalid(format!("layout config lacks key {key:?}")))
    }

    fn column(&self, name: &str) -> Result<usize> {
        let key = format!("column.{name}");
        self.require(&key)?
            .parse()
            .map_err(|_| Error::Invalid(format!("layout key {key:?} is not a column index")))
    }

    fn dialect(&self, raw: &str) -> Result<Dialect> {
        let raw = raw.trim();
        match self.get(&format!("dialect.{raw}")) {
            Some(mapped) => mapped.parse(),
            None => raw.parse(),
        }
    }

    fn topic(&self, raw: &str) -> Result<Topic> {
        let raw = raw.trim();
        match self.get(&format!("topic.{raw}")) {
            Some(mapped) => mapped.parse(),
            None => raw.to_lowercase().parse(),
        }
    }

    fn masked(&self) -> Result<Option<bool>> {
        match self.get("masked") {
            None => Ok(None),
            Some("true") => Ok(Some(true)),
            Some("false") => Ok(Some(false)),
            Some(other) => Err(Error::Invalid(format!("masked must be true|false, got {other:?}"))),
        }
    }
}

/// Parses `key = value` lines; `#` starts a comment line.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut entries = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Row {
            file: "config".into(),
            row: i + 1,
            message: format!("expected key = value, got {line:?}"),
        })?;
        entries.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(entries)
}

fn read_file(path: &Path) -> Result<String> {
    if !path.is_file() {
        return Err(Error::MissingSubset(path.display().to_string()));
    }
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn row_err(path: &Path, row: usize, message: impl Into<String>) -> Error {
    Error::Row { file: path.display().to_string(), row, message: message.into() }
}

fn with_row<T>(path: &Path, row: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Invalid(m) => row_err(path, row, m),
        other => other,
    })
}

fn parse_canonical(path: &Path) -> Result<Vec<Sample>> {
    let body = read_file(path)?;
    let mut out = Vec::new();
    for (i, line) in body.lines().enumerate() {
        let row = i + 1;
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.splitn(4, '\t').collect();
        if cols.len() != 4 {
            return Err(row_err(path, row, format!("expected 4 columns, found {}", cols.len())));
        }
        let dialect = with_row(path, row, cols[1].parse())?;
        let topic = with_row(path, row, cols[2].parse())?;
        let sample = with_row(path, row, Sample::new(cols[0], dialect, topic, &unescape_text(cols[3])))?;
        out.push(sample);
    }
    Ok(out)
}

fn read_id_map(path: &Path) -> Result<HashMap<String, String>> {
    let body = read_file(path)?;
    let mut map = HashMap::new();
    for (i, line) in body.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let (id, value) = line
            .split_once('\t')
            .ok_or_else(|| row_err(path, i + 1, "expected id<TAB>value"))?;
        if map.insert(id.to_string(), value.to_string()).is_some() {
            return Err(row_err(path, i + 1, format!("duplicate id {id}")));
        }
    }
    Ok(map)
}

fn parse_joined(root: &Path, cfg: &LayoutConfig, which: Subset) -> Result<Vec<Sample>> {
    let name = which.name();
    let samples_path = root.join(cfg.require(&format!("{name}.samples"))?);
    let dialects = read_id_map(&root.join(cfg.require(&format!("{name}.dialect"))?))?;
    let topics = read_id_map(&root.join(cfg.require(&format!("{name}.topic"))?))?;
    let body = read_file(&samples_path)?;
    let mut out = Vec::new();
    for (i, line) in body.lines().enumerate() {
        let row = i + 1;
        if line.is_empty() {
            continue;
        }
        let (id, text) = line
            .split_once('\t')
            .ok_or_else(|| row_err(&samples_path, row, "expected id<TAB>text"))?;
        let d = dialects
            .get(id)
            .ok_or_else(|| row_err(&samples_path, row, format!("no dialect label for {id}")))?;
        let t = topics
            .get(id)
            .ok_or_else(|| row_err(&samples_path, row, format!("no topic label for {id}")))?;
        let dialect = with_row(&samples_path, row, cfg.dialect(d))?;
        let topic = with_row(&samples_path, row, cfg.topic(t))?;
        out.push(with_row(&samples_path, row, Sample::new(id, dialect, topic, text))?);
    }
    Ok(out)
}

fn parse_columns(root: &Path, cfg: &LayoutConfig, which: Subset) -> Result<Vec<Sample>> {
    let path = root.join(cfg.require(&format!("{}.file", which.name()))?);
    let delimiter = match cfg.get("delimiter").unwrap_or("\\t") {
        "\\t" | "tab" => b'\t',
        d if d.len() == 1 => d.as_bytes()[0],
        d => return Err(Error::Invalid(format!("delimiter must be one byte, got {d:?}"))),
    };
    let has_header = cfg.get("header") == Some("true");
    let (ci, cd, ct, cx) =
        (cfg.column("id")?, cfg.column("dialect")?, cfg.column("topic")?, cfg.column("text")?);
    if !path.is_file() {
        return Err(Error::MissingSubset(path.display().to_string()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(has_header)
        .flexible(true)
        .from_path(&path)
        .map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1 + usize::from(has_header);
        let record = record.map_err(|e| row_err(&path, row, e.to_string()))?;
        let field = |c: usize| {
            record.get(c).ok_or_else(|| row_err(&path, row, format!("missing column {c}")))
        };
        let dialect = with_row(&path, row, cfg.dialect(field(cd)?))?;
        let topic = with_row(&path, row, cfg.topic(field(ct)?))?;
        out.push(with_row(&path, row, Sample::new(field(ci)?, dialect, topic, field(cx)?))?);
    }
    Ok(out)
}

fn looks_masked(split: &CorpusSplit) -> bool {
    split.iter().any(|s| s.text.contains(NE_TOKEN))
}

/// Loads all three subsets from `root`.
pub fn load_corpus(root: &Path, layout: &Layout) -> Result<CorpusSplit> {
    if !root.is_dir() {
        return Err(Error::MissingSubset(format!("{} (not a directory)", root.display())));
    }
    let mut split = CorpusSplit::default();
    let mut masked = None;
    for which in Subset::ALL {
        let samples = match layout {
            Layout::Canonical => parse_canonical(&root.join(which.file_name()))?,
            Layout::Config(cfg) => {
                masked = cfg.masked()?;
                match cfg.get("mode").unwrap_or("joined") {
                    "columns" => parse_columns(root, cfg, which)?,
                    _ => parse_joined(root, cfg, which)?,
                }
            }
        };
        *split.subset_mut(which) = samples;
    }
    split.ner_masked = masked.unwrap_or_else(|| looks_masked(&split));
    split.validate()?;
    Ok(split)
}

/// Supplies byte ranges of named-entity spans in a text.
pub trait EntityMasker {
    fn spans(&self, text: &str) -> Vec<std::ops::Range<usize>>;
}

/// Masks a fixed list of entity strings wherever they occur as whole words.
#[derive(Debug, Clone, Default)]
pub struct GazetteerMasker {
    // longest first so multi-word entities win over their prefixes
    entities: Vec<String>,
}

impl GazetteerMasker {
    pub fn new<I, S>(entities: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut entities: Vec<String> = entities
            .into_iter()
            .map(Into::into)
            .map(|e| normalize_whitespace(&e))
            .filter(|e| !e.is_empty())
            .collect();
        entities.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        entities.dedup();
        Self { entities }
    }
}

fn is_word_char(c: Option<char>) -> bool {
    c.is_some_and(|c| c.is_alphanumeric())
}

impl EntityMasker for GazetteerMasker {
    fn spans(&self, text: &str) -> Vec<std::ops::Range<usize>> {
        let mut spans = Vec::new();
        for entity in &self.entities {
            for (start, m) in text.match_indices(entity.as_str()) {
                let end = start + m.len();
                let before = text[..start].chars().next_back();
                let after = text[end..].chars().next();
                if !is_word_char(before) && !is_word_char(after) {
                    spans.push(start..end);
                }
            }
        }
        spans
    }
}

/// Replaces each span by [`NE_TOKEN`]. Overlapping spans are merged and spans
/// touching an existing placeholder are ignored, so masking is idempotent.
pub fn mask_text(text: &str, spans: &[std::ops::Range<usize>]) -> String {
    let existing: Vec<std::ops::Range<usize>> =
        text.match_indices(NE_TOKEN).map(|(i, m)| i..i + m.len()).collect();
    let mut spans: Vec<_> = spans
        .iter()
        .filter(|s| s.start < s.end && s.end <= text.len())
        .filter(|s| text.is_char_boundary(s.start) && text.is_char_boundary(s.end))
        .filter(|s| !existing.iter().any(|e| s.start < e.end && e.start < s.end))
        .cloned()
        .collect();
    spans.sort_by_key(|s| (s.start, s.end));
    let mut merged: Vec<std::ops::Range<usize>> = Vec::new();
    for s in spans {
        match merged.last_mut() {
            Some(last) if s.start < last.end => last.end = last.end.max(s.end),
            _ => merged.push(s),
        }
    }
    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    for s in merged {
        out.push_str(&text[cursor..s.start]);
        out.push_str(NE_TOKEN);
        cursor = s.end;
    }
    out.push_str(&text[cursor..]);
    normalize_whitespace(&out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NePolicy {
    Keep,
    Mask,
}

impl NePolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            NePolicy::Keep => "keep",
            NePolicy::Mask => "mask",
        }
    }
}

impl fmt::Display for NePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "keep" => Ok(NePolicy::Keep),
            "mask" => Ok(NePolicy::Mask),
            other => Err(Error::Invalid(format!("ner policy must be keep|mask, got {other:?}"))),
        }
    }
}

/// Produces the requested entity variant of `split`.
///
/// `keep` needs a raw corpus. `mask` is the identity on an already masked
/// corpus and otherwise requires a masker.
pub fn apply_ne_policy(
    split: CorpusSplit,
    policy: NePolicy,
    masker: Option<&dyn EntityMasker>,
) -> Result<CorpusSplit> {
    match policy {
        NePolicy::Keep if split.ner_masked => Err(Error::Unsupported(
            "named entities cannot be restored: only the masked corpus variant is available".into(),
        )),
        NePolicy::Keep => Ok(split),
        NePolicy::Mask if split.ner_masked => Ok(split),
        NePolicy::Mask => {
            let masker = masker.ok_or_else(|| {
                Error::Unsupported("masking a raw corpus requires an entity masker".into())
            })?;
            let mask_all = |samples: Vec<Sample>| -> Vec<Sample> {
                samples
                    .into_iter()
                    .map(|mut s| {
                        s.text = mask_text(&s.text, &masker.spans(&s.text));
                        s
                    })
                    .collect()
            };
            Ok(CorpusSplit {
                train: mask_all(split.train),
                validation: mask_all(split.validation),
                test: mask_all(split.test),
                ner_masked: true,
            })
        }
    }
}

fn strata(samples: &[Sample]) -> BTreeMap<(Dialect, Topic), Vec<usize>> {
    let mut strata: BTreeMap<(Dialect, Topic), Vec<usize>> = BTreeMap::new();
    for (i, s) in samples.iter().enumerate() {
        strata.entry((s.dialect, s.topic)).or_default().push(i);
    }
    strata
}

/// Largest-remainder apportionment of `n` items over `ratios`.
fn apportion(n: usize, ratios: &[f64]) -> Vec<usize> {
    let quotas: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut left = n.saturating_sub(counts.iter().sum());
    let mut order: Vec<usize> = (0..ratios.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.partial_cmp(&fa).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    counts
}

/// Splits `samples` into train/validation/test so that every
/// (dialect, topic) stratum follows `ratios` to within one sample.
///
/// Subsets keep the input order of their members.
pub fn stratified_split(samples: &[Sample], ratios: [f64; 3], seed: u64) -> Result<CorpusSplit> {
    if ratios.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::Invalid(format!("ratios must be positive: {ratios:?}")));
    }
    let total: f64 = ratios.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Invalid(format!("ratios sum to {total}, expected 1")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![Subset::Train; samples.len()];
    for ((dialect, topic), mut members) in strata(samples) {
        if members.len() < 3 {
            return Err(Error::Invalid(format!(
                "stratum {dialect}/{topic} has {} samples, need at least 3",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        let counts = apportion(members.len(), &ratios);
        let mut it = members.into_iter();
        for (which, count) in Subset::ALL.into_iter().zip(counts) {
            for i in it.by_ref().take(count) {
                assignment[i] = which;
            }
        }
    }
    let mut split = CorpusSplit {
        ner_masked: samples.iter().any(|s| s.text.contains(NE_TOKEN)),
        ..Default::default()
    };
    for (s, which) in samples.iter().zip(assignment) {
        split.subset_mut(which).push(s.clone());
    }
    split.validate()?;
    Ok(split)
}

/// Draws `per_dialect` samples of each dialect, proportionally across topics.
/// Dialects with fewer samples are kept whole. Output keeps input order.
pub fn subsample_per_dialect(samples: &[Sample], per_dialect: usize, seed: u64) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = vec![false; samples.len()];
    for dialect in Dialect::ALL {
        let groups: Vec<Vec<usize>> = strata(samples)
            .into_iter()
            .filter(|((d, _), _)| *d == dialect)
            .map(|(_, m)| m)
            .collect();
        let available: usize = groups.iter().map(Vec::len).sum();
        if available == 0 {
            continue;
        }
        let take = per_dialect.min(available);
        let ratios: Vec<f64> = groups.iter().map(|g| g.len() as f64 / available as f64).collect();
        let counts = apportion(take, &ratios);
        for (mut members, count) in groups.into_iter().zip(counts) {
            members.shuffle(&mut rng);
            for i in members.into_iter().take(count) {
                keep[i] = true;
            }
        }
    }
    samples.iter().zip(keep).filter(|(_, k)| *k).map(|(s, _)| s.clone()).collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SubsetStats {
    pub samples: usize,
    pub tokens: usize,
    pub per_dialect: BTreeMap<Dialect, usize>,
    pub per_topic: BTreeMap<Topic, usize>,
}

impl SubsetStats {
    fn of(samples: &[Sample]) -> Self {
        let mut stats = SubsetStats { samples: samples.len(), ..Default::default() };
        for s in samples {
            stats.tokens += s.tokens();
            *stats.per_dialect.entry(s.dialect).or_default() += 1;
            *stats.per_topic.entry(s.topic).or_default() += 1;
        }
        stats
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub train: SubsetStats,
    pub validation: SubsetStats,
    pub test: SubsetStats,
    pub total: SubsetStats,
    /// Keyed `"<dialect>/<topic>"` over the whole corpus.
    pub per_dialect_topic: BTreeMap<String, usize>,
    pub mean_tokens_per_sample: f64,
}

pub fn corpus_stats(split: &CorpusSplit) -> CorpusStats {
    let all: Vec<Sample> = split.iter().cloned().collect();
    let total = SubsetStats::of(&all);
    let mut per_dialect_topic = BTreeMap::new();
    for s in &all {
        *per_dialect_topic.entry(format!("{}/{}", s.dialect, s.topic)).or_default() += 1;
    }
    let mean = if total.samples == 0 { 0.0 } else { total.tokens as f64 / total.samples as f64 };
    CorpusStats {
        train: SubsetStats::of(&split.train),
        validation: SubsetStats::of(&split.validation),
        test: SubsetStats::of(&split.test),
        total,
        per_dialect_topic,
        mean_tokens_per_sample: mean,
    }
}

/// Ids of all samples in `samples`.
pub fn id_set(samples: &[Sample]) -> HashSet<&str> {
    samples.iter().map(|s| s.id.as_str()).collect()
}

/// Canonical corpus directory under `root`, for callers that only hold a path.
pub fn canonical_paths(root: &Path) -> [PathBuf; 3] {
    Subset::ALL.map(|w| root.join(w.file_name()))
}
