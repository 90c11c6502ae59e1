//! Raw story ingestion: sentence splitting, leading-context extraction,
//! name delexicalization and train/dev/test partitioning into JSONL.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::text::{normalize_token, tokenize_cased, SentenceSplitter};

const BUNDLED_NAMES: &str = include_str!("../data/names.tsv");

/// ROC stories keep the leading context plus exactly this many sentences.
pub const ROC_STORY_SENTENCES: usize = 4;
/// WP stories are cut to the leading context plus at most this many.
pub const WP_MAX_STORY_SENTENCES: usize = 10;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("input not found: {0}")]
    MissingInput(PathBuf),
    #[error("malformed line {line} in {path}: {message}")]
    Json {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("invalid name lexicon line {line}: {message}")]
    Lexicon { line: usize, message: String },
    #[error("unknown dataset '{0}' (expected roc or wp)")]
    UnknownDataset(String),
    #[error("record {id} violates invariant: {message}")]
    Invariant { id: String, message: String },
}

impl CorpusError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CorpusError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Why a single raw story did not produce a record.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecordError {
    #[error("story {0} has no body after the leading context")]
    EmptyStory(String),
    #[error("story {id} is malformed: {reason}")]
    Malformed { id: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dataset {
    Roc,
    Wp,
}

impl Dataset {
    pub fn name(self) -> &'static str {
        match self {
            Dataset::Roc => "roc",
            Dataset::Wp => "wp",
        }
    }

    /// Published split sizes (train, dev, test).
    pub fn expected_counts(self) -> [(Split, usize); 3] {
        match self {
            Dataset::Roc => [(Split::Train, 88344), (Split::Dev, 4908), (Split::Test, 4909)],
            Dataset::Wp => [(Split::Train, 26758), (Split::Dev, 2000), (Split::Test, 2000)],
        }
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dataset {
    type Err = CorpusError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "roc" | "rocstories" => Ok(Dataset::Roc),
            "wp" | "writingprompts" => Ok(Dataset::Wp),
            other => Err(CorpusError::UnknownDataset(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Dev, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }

    /// Infer the split from a file name such as `train.csv` or `roc.valid.txt`.
    pub fn from_file_name(name: &str) -> Option<Split> {
        let lower = name.to_ascii_lowercase();
        if lower.contains("train") {
            Some(Split::Train)
        } else if lower.contains("dev") || lower.contains("valid") || lower.contains("val.") {
            Some(Split::Dev)
        } else if lower.contains("test") {
            Some(Split::Test)
        } else {
            None
        }
    }

    /// Deterministic 90/5/5 assignment from the story id.
    pub fn from_id_hash(id: &str) -> Split {
        let digest = Sha256::digest(id.as_bytes());
        let mut bytes = [0u8; 8];
        bytes.copy_from_slice(&digest[..8]);
        match u64::from_le_bytes(bytes) % 100 {
            0..=89 => Split::Train,
            90..=94 => Split::Dev,
            _ => Split::Test,
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One preprocessed story.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoryRecord {
    pub id: String,
    pub dataset: Dataset,
    pub leading_context: Vec<String>,
    pub sentences: Vec<Vec<String>>,
    pub split: Split,
}

impl StoryRecord {
    /// Check the per-dataset record invariants.
    pub fn validate(&self) -> Result<(), CorpusError> {
        let fail = |message: String| CorpusError::Invariant {
            id: self.id.clone(),
            message,
        };
        if self.leading_context.is_empty() {
            return Err(fail("empty leading context".into()));
        }
        if self.sentences.iter().any(|s| s.is_empty()) {
            return Err(fail("empty story sentence".into()));
        }
        match self.dataset {
            Dataset::Roc if self.sentences.len() != ROC_STORY_SENTENCES => Err(fail(format!(
                "ROC story has {} sentences, expected {ROC_STORY_SENTENCES}",
                self.sentences.len()
            ))),
            Dataset::Wp if self.sentences.len() > WP_MAX_STORY_SENTENCES || self.sentences.is_empty() => {
                Err(fail(format!("WP story has {} sentences", self.sentences.len())))
            }
            _ => Ok(()),
        }
    }

    pub fn context_text(&self) -> String {
        self.leading_context.join(" ")
    }

    pub fn sentence_texts(&self) -> Vec<String> {
        self.sentences.iter().map(|s| s.join(" ")).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GenderClass {
    Male,
    Female,
    Neutral,
}

impl GenderClass {
    pub fn placeholder(self) -> &'static str {
        match self {
            GenderClass::Male => "[MALE]",
            GenderClass::Female => "[FEMALE]",
            GenderClass::Neutral => "[NEUTRAL]",
        }
    }
}

impl FromStr for GenderClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "MALE" | "M" => Ok(GenderClass::Male),
            "FEMALE" | "F" => Ok(GenderClass::Female),
            "NEUTRAL" | "N" => Ok(GenderClass::Neutral),
            other => Err(format!("unknown gender class '{other}'")),
        }
    }
}

/// Surface name to gender class. Matching is case-sensitive so that common
/// words ("bill", "rose") are never masked.
#[derive(Debug, Clone, Default)]
pub struct NameLexicon {
    names: HashMap<String, GenderClass>,
    source: String,
}

impl NameLexicon {
    pub fn new(source: impl Into<String>) -> Self {
        NameLexicon {
            names: HashMap::new(),
            source: source.into(),
        }
    }

    /// The lexicon shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_NAMES, "bundled:names.tsv").expect("bundled lexicon is well formed")
    }

    /// Parse `name<TAB>CLASS` lines; `#` starts a comment.
    pub fn parse(text: &str, source: &str) -> Result<Self, CorpusError> {
        let mut lex = NameLexicon::new(source);
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split(['\t', ',']).map(str::trim);
            let (Some(name), Some(class)) = (parts.next(), parts.next()) else {
                return Err(CorpusError::Lexicon {
                    line: i + 1,
                    message: "expected name and class".into(),
                });
            };
            let class = class.parse().map_err(|message| CorpusError::Lexicon {
                line: i + 1,
                message,
            })?;
            lex.insert(name, class);
        }
        Ok(lex)
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        if !path.exists() {
            return Err(CorpusError::MissingInput(path.to_path_buf()));
        }
        let text = fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn insert(&mut self, name: &str, class: GenderClass) {
        self.names.insert(name.to_string(), class);
    }

    pub fn get(&self, name: &str) -> Option<GenderClass> {
        self.names.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

/// Replace every lexicon name with its placeholder. Length is preserved and
/// the operation is idempotent.
pub fn delexicalize(tokens: &[String], lexicon: &NameLexicon) -> Vec<String> {
    tokens
        .iter()
        .map(|t| match lexicon.get(t) {
            Some(class) => class.placeholder().to_string(),
            None => t.clone(),
        })
        .collect()
}

/// Capitalized, non-initial alphabetic tokens not covered by the lexicon.
fn unknown_name_candidates(tokens: &[String], lexicon: &NameLexicon) -> usize {
    tokens
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, t)| {
            let mut chars = t.chars();
            let first_upper = chars.next().is_some_and(|c| c.is_uppercase());
            first_upper
                && t.chars().all(|c| c.is_alphabetic())
                && t.as_str() != "I"
                && lexicon.get(t).is_none()
        })
        .count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessOptions {
    pub delexicalize: bool,
    pub max_story_sentences: usize,
    /// Required number of story sentences (ROC), if any.
    pub exact_story_sentences: Option<usize>,
    pub lexicon_source: String,
    pub splitter: String,
}

impl PreprocessOptions {
    pub fn for_dataset(dataset: Dataset) -> Self {
        match dataset {
            Dataset::Roc => PreprocessOptions {
                delexicalize: true,
                max_story_sentences: ROC_STORY_SENTENCES,
                exact_story_sentences: Some(ROC_STORY_SENTENCES),
                lexicon_source: "bundled:names.tsv".into(),
                splitter: "rule-splitter".into(),
            },
            Dataset::Wp => PreprocessOptions {
                delexicalize: false,
                max_story_sentences: WP_MAX_STORY_SENTENCES,
                exact_story_sentences: None,
                lexicon_source: "none".into(),
                splitter: "rule-splitter".into(),
            },
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessStats {
    pub raw_stories: usize,
    pub malformed_skipped: usize,
    pub empty_rejected: usize,
    pub truncated: usize,
    pub names_replaced: usize,
    pub unknown_name_candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub dataset: Dataset,
    pub counts: BTreeMap<Split, usize>,
    pub sources: Vec<String>,
    pub options: PreprocessOptions,
    pub stats: PreprocessStats,
}

impl DatasetManifest {
    pub fn empty(dataset: Dataset) -> Self {
        DatasetManifest {
            dataset,
            counts: Split::ALL.iter().map(|s| (*s, 0)).collect(),
            sources: Vec::new(),
            options: PreprocessOptions::for_dataset(dataset),
            stats: PreprocessStats::default(),
        }
    }

    pub fn count(&self, split: Split) -> usize {
        self.counts.get(&split).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCheck {
    pub split: Split,
    pub expected: usize,
    pub actual: usize,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitValidation {
    pub dataset: Dataset,
    pub checks: Vec<SplitCheck>,
}

impl SplitValidation {
    pub fn all_match(&self) -> bool {
        self.checks.iter().all(|c| c.matches)
    }

    pub fn mismatches(&self) -> impl Iterator<Item = &SplitCheck> {
        self.checks.iter().filter(|c| !c.matches)
    }
}

/// Compare manifest counts with the published split sizes. Mismatches are
/// reported, never raised.
pub fn validate_splits(manifest: &DatasetManifest) -> SplitValidation {
    let checks = manifest
        .dataset
        .expected_counts()
        .iter()
        .map(|&(split, expected)| {
            let actual = manifest.count(split);
            SplitCheck {
                split,
                expected,
                actual,
                matches: expected == actual,
            }
        })
        .collect();
    SplitValidation {
        dataset: manifest.dataset,
        checks,
    }
}

/// One story as found in the raw files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawStory {
    pub id: String,
    pub split: Split,
    pub body: RawBody,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawBody {
    /// Already sentence-segmented (ROC CSV columns, JSON arrays).
    Sentences(Vec<String>),
    /// Free text to be split.
    Text(String),
}

#[derive(Debug, Default)]
pub struct RawRead {
    pub stories: Vec<RawStory>,
    pub malformed: Vec<String>,
    pub sources: Vec<String>,
}

/// Read raw stories from a file or from a directory of per-split files.
///
/// Files inside a directory are assigned to splits by name (`train`,
/// `dev`/`valid`, `test`); a single file is partitioned by id hash.
/// Supported layouts: ROCStories CSV (`storyid`, `sentence1..5`), JSON lines
/// with `text`/`story` or `sentences`, and plain text with one story per line.
pub fn read_raw(path: &Path) -> Result<RawRead, CorpusError> {
    if !path.exists() {
        return Err(CorpusError::MissingInput(path.to_path_buf()));
    }
    let mut read = RawRead::default();
    if path.is_dir() {
        let mut entries: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| CorpusError::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        entries.sort();
        for file in entries {
            let name = file.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            match Split::from_file_name(name) {
                Some(split) => read_file(&file, Some(split), &mut read)?,
                None => log::warn!("skipping {}: no split in file name", file.display()),
            }
        }
    } else {
        read_file(path, None, &mut read)?;
    }
    Ok(read)
}

fn read_file(path: &Path, split: Option<Split>, read: &mut RawRead) -> Result<(), CorpusError> {
    read.sources.push(path.display().to_string());
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("story")
        .to_string();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or_default()
        .to_ascii_lowercase();
    let assign = |id: &str| split.unwrap_or_else(|| Split::from_id_hash(id));
    match ext.as_str() {
        "csv" => {
            let mut reader = csv::ReaderBuilder::new()
                .flexible(true)
                .from_path(path)
                .map_err(|e| CorpusError::Json {
                    path: path.to_path_buf(),
                    line: 0,
                    message: e.to_string(),
                })?;
            let headers = reader
                .headers()
                .map_err(|e| CorpusError::Json {
                    path: path.to_path_buf(),
                    line: 1,
                    message: e.to_string(),
                })?
                .clone();
            let col = |name: &str| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name));
            let id_col = col("storyid").or_else(|| col("id"));
            let sentence_cols: Vec<usize> = (1..=20).map_while(|i| col(&format!("sentence{i}"))).collect();
            let text_col = col("text").or_else(|| col("story"));
            for (row_no, row) in reader.records().enumerate() {
                let fallback = format!("{stem}-{}", row_no + 1);
                let row = match row {
                    Ok(r) => r,
                    Err(e) => {
                        read.malformed.push(format!("{fallback}: {e}"));
                        continue;
                    }
                };
                let id = id_col
                    .and_then(|c| row.get(c))
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| s.trim().to_string())
                    .unwrap_or(fallback);
                let body = if !sentence_cols.is_empty() {
                    let sents: Option<Vec<String>> = sentence_cols
                        .iter()
                        .map(|&c| row.get(c).map(|s| s.trim().to_string()))
                        .collect();
                    match sents {
                        Some(s) => RawBody::Sentences(s.into_iter().filter(|s| !s.is_empty()).collect()),
                        None => {
                            read.malformed.push(format!("{id}: missing sentence columns"));
                            continue;
                        }
                    }
                } else if let Some(c) = text_col {
                    RawBody::Text(row.get(c).unwrap_or_default().to_string())
                } else {
                    read.malformed.push(format!("{id}: no story columns"));
                    continue;
                };
                read.stories.push(RawStory {
                    split: assign(&id),
                    id,
                    body,
                });
            }
        }
        "jsonl" | "json" => {
            let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| CorpusError::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let fallback = format!("{stem}-{}", i + 1);
                let value: serde_json::Value = match serde_json::from_str(&line) {
                    Ok(v) => v,
                    Err(e) => {
                        read.malformed.push(format!("{fallback}: {e}"));
                        continue;
                    }
                };
                let id = value
                    .get("id")
                    .or_else(|| value.get("story_id"))
                    .and_then(|v| v.as_str())
                    .map(str::to_string)
                    .unwrap_or(fallback);
                let body = if let Some(arr) = value.get("sentences").and_then(|v| v.as_array()) {
                    RawBody::Sentences(arr.iter().filter_map(|s| s.as_str().map(str::to_string)).collect())
                } else if let Some(t) = value.get("text").or_else(|| value.get("story")).and_then(|v| v.as_str()) {
                    RawBody::Text(t.to_string())
                } else {
                    read.malformed.push(format!("{id}: no text or sentences field"));
                    continue;
                };
                read.stories.push(RawStory {
                    split: assign(&id),
                    id,
                    body,
                });
            }
        }
        _ => {
            let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| CorpusError::io(path, e))?;
                let id = format!("{stem}-{}", i + 1);
                if line.trim().is_empty() {
                    read.malformed.push(format!("{id}: blank line"));
                    continue;
                }
                read.stories.push(RawStory {
                    split: assign(&id),
                    id,
                    body: RawBody::Text(line),
                });
            }
        }
    }
    Ok(())
}

/// Turns raw stories into [`StoryRecord`]s.
pub struct Preprocessor<'a> {
    pub dataset: Dataset,
    pub options: PreprocessOptions,
    pub lexicon: &'a NameLexicon,
    pub splitter: &'a dyn SentenceSplitter,
}

/// Per-story side statistics.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct StoryStats {
    pub names_replaced: usize,
    pub unknown_name_candidates: usize,
    pub truncated: bool,
}

impl<'a> Preprocessor<'a> {
    pub fn new(dataset: Dataset, lexicon: &'a NameLexicon, splitter: &'a dyn SentenceSplitter) -> Self {
        let mut options = PreprocessOptions::for_dataset(dataset);
        if options.delexicalize {
            options.lexicon_source = lexicon.source().to_string();
        }
        Preprocessor {
            dataset,
            options,
            lexicon,
            splitter,
        }
    }

    fn sentence_tokens(&self, sentence: &str, stats: &mut StoryStats) -> Vec<String> {
        let cased = tokenize_cased(sentence);
        let cased = if self.options.delexicalize {
            let masked = delexicalize(&cased, self.lexicon);
            stats.names_replaced += cased.iter().zip(&masked).filter(|(a, b)| a != b).count();
            stats.unknown_name_candidates += unknown_name_candidates(&masked, self.lexicon);
            masked
        } else {
            cased
        };
        cased.iter().map(|t| normalize_token(t)).collect()
    }

    /// Process one raw story. The first sentence becomes the leading
    /// context and the rest the story body.
    pub fn process(&self, raw: &RawStory) -> Result<(StoryRecord, StoryStats), RecordError> {
        let sentences: Vec<String> = match &raw.body {
            RawBody::Sentences(s) => s.clone(),
            RawBody::Text(t) => self.splitter.split(t),
        };
        let mut stats = StoryStats::default();
        let mut tokenized: Vec<Vec<String>> = sentences
            .iter()
            .map(|s| self.sentence_tokens(s, &mut stats))
            .filter(|t| !t.is_empty())
            .collect();
        if tokenized.len() < 2 {
            return Err(RecordError::EmptyStory(raw.id.clone()));
        }
        if let Some(exact) = self.options.exact_story_sentences {
            if tokenized.len() != exact + 1 {
                return Err(RecordError::Malformed {
                    id: raw.id.clone(),
                    reason: format!("expected {} sentences, found {}", exact + 1, tokenized.len()),
                });
            }
        }
        let keep = self.options.max_story_sentences + 1;
        if tokenized.len() > keep {
            tokenized.truncate(keep);
            stats.truncated = true;
        }
        let mut iter = tokenized.into_iter();
        let leading_context = iter.next().unwrap_or_default();
        let record = StoryRecord {
            id: raw.id.clone(),
            dataset: self.dataset,
            leading_context,
            sentences: iter.collect(),
            split: raw.split,
        };
        record.validate().map_err(|e| RecordError::Malformed {
            id: raw.id.clone(),
            reason: e.to_string(),
        })?;
        Ok((record, stats))
    }
}

#[derive(Debug, Clone)]
pub struct PreprocessOutput {
    pub records: Vec<StoryRecord>,
    pub manifest: DatasetManifest,
}

impl PreprocessOutput {
    pub fn split(&self, split: Split) -> impl Iterator<Item = &StoryRecord> {
        self.records.iter().filter(move |r| r.split == split)
    }
}

/// Read and preprocess a raw dataset. Malformed stories are skipped with a
/// warning; empty stories are rejected. Both are counted in the manifest.
pub fn preprocess_corpus(
    raw_path: &Path,
    dataset: Dataset,
    lexicon: &NameLexicon,
    splitter: &dyn SentenceSplitter,
) -> Result<PreprocessOutput, CorpusError> {
    let raw = read_raw(raw_path)?;
    let pre = Preprocessor::new(dataset, lexicon, splitter);
    let mut manifest = DatasetManifest::empty(dataset);
    manifest.options = pre.options.clone();
    manifest.sources = raw.sources.clone();
    manifest.stats.raw_stories = raw.stories.len() + raw.malformed.len();
    manifest.stats.malformed_skipped = raw.malformed.len();
    for m in &raw.malformed {
        log::warn!("skipping malformed record {m}");
    }
    let mut records = Vec::with_capacity(raw.stories.len());
    for story in &raw.stories {
        match pre.process(story) {
            Ok((record, stats)) => {
                manifest.stats.names_replaced += stats.names_replaced;
                manifest.stats.unknown_name_candidates += stats.unknown_name_candidates;
                manifest.stats.truncated += usize::from(stats.truncated);
                *manifest.counts.entry(record.split).or_default() += 1;
                records.push(record);
            }
            Err(e @ RecordError::EmptyStory(_)) => {
                log::warn!("rejected: {e}");
                manifest.stats.empty_rejected += 1;
            }
            Err(e) => {
                log::warn!("skipping: {e}");
                manifest.stats.malformed_skipped += 1;
            }
        }
    }
    Ok(PreprocessOutput { records, manifest })
}

pub fn split_file_name(dataset: Dataset, split: Split) -> String {
    format!("{dataset}.{split}.jsonl")
}

pub fn manifest_file_name(dataset: Dataset) -> String {
    format!("{dataset}.manifest.json")
}

/// Write `{dataset}.{split}.jsonl` for every split plus the manifest.
/// Returns the written paths.
pub fn write_preprocessed(out_dir: &Path, output: &PreprocessOutput) -> Result<Vec<PathBuf>, CorpusError> {
    fs::create_dir_all(out_dir).map_err(|e| CorpusError::io(out_dir, e))?;
    let dataset = output.manifest.dataset;
    let mut written = Vec::new();
    for split in Split::ALL {
        let path = out_dir.join(split_file_name(dataset, split));
        write_jsonl(&path, output.split(split))?;
        written.push(path);
    }
    let path = out_dir.join(manifest_file_name(dataset));
    write_json(&path, &output.manifest)?;
    written.push(path);
    Ok(written)
}

pub fn write_jsonl<'a, T, I>(path: &Path, items: I) -> Result<(), CorpusError>
where
    T: Serialize + 'a,
    I: IntoIterator<Item = &'a T>,
{
    let file = File::create(path).map_err(|e| CorpusError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        let line = serde_json::to_string(item).expect("serializable record");
        writeln!(w, "{line}").map_err(|e| CorpusError::io(path, e))?;
    }
    w.flush().map_err(|e| CorpusError::io(path, e))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CorpusError> {
    if !path.exists() {
        return Err(CorpusError::MissingInput(path.to_path_buf()));
    }
    let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CorpusError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| CorpusError::Json {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(item);
    }
    Ok(out)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CorpusError> {
    let text = serde_json::to_string_pretty(value).expect("serializable value");
    fs::write(path, text + "\n").map_err(|e| CorpusError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CorpusError> {
    if !path.exists() {
        return Err(CorpusError::MissingInput(path.to_path_buf()));
    }
    let text = fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CorpusError::Json {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::RuleSplitter;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    fn lexicon() -> NameLexicon {
        let mut lex = NameLexicon::new("test");
        lex.insert("Ken", GenderClass::Male);
        lex.insert("Anna", GenderClass::Female);
        lex.insert("Sam", GenderClass::Neutral);
        lex
    }

    #[test]
    fn delexicalize_replaces_names() {
        let lex = lexicon();
        assert_eq!(
            delexicalize(&toks("Ken drove his car"), &lex),
            toks("[MALE] drove his car")
        );
        assert_eq!(delexicalize(&toks("the cat sat"), &lex), toks("the cat sat"));
        assert_eq!(
            delexicalize(&toks("Anna met Anna"), &lex),
            toks("[FEMALE] met [FEMALE]")
        );
    }

    #[test]
    fn bundled_lexicon_loads() {
        let lex = NameLexicon::bundled();
        assert!(lex.len() > 300);
        assert_eq!(lex.get("Ken"), Some(GenderClass::Male));
        assert_eq!(lex.get("ken"), None);
    }

    fn raw(id: &str, text: &str) -> RawStory {
        RawStory {
            id: id.into(),
            split: Split::Train,
            body: RawBody::Text(text.into()),
        }
    }

    #[test]
    fn roc_story_splits_leading_context() {
        let lex = lexicon();
        let pre = Preprocessor::new(Dataset::Roc, &lex, &RuleSplitter);
        let (rec, stats) = pre
            .process(&raw(
                "s1",
                "Ken had a car. It was old. He drove it. It broke. Ken was sad.",
            ))
            .unwrap();
        assert_eq!(rec.leading_context, toks("[MALE] had a car ."));
        assert_eq!(rec.sentences.len(), 4);
        assert_eq!(rec.sentences[3], toks("[MALE] was sad ."));
        assert_eq!(stats.names_replaced, 2);
    }

    #[test]
    fn one_sentence_story_is_rejected() {
        let lex = lexicon();
        let pre = Preprocessor::new(Dataset::Roc, &lex, &RuleSplitter);
        assert_eq!(
            pre.process(&raw("s2", "Only one sentence here.")),
            Err(RecordError::EmptyStory("s2".into()))
        );
    }

    #[test]
    fn roc_wrong_length_is_malformed() {
        let lex = lexicon();
        let pre = Preprocessor::new(Dataset::Roc, &lex, &RuleSplitter);
        let err = pre.process(&raw("s3", "We ran. They sat. He ate.")).unwrap_err();
        assert!(matches!(err, RecordError::Malformed { .. }));
    }

    #[test]
    fn wp_story_truncated_to_eleven_sentences() {
        let lex = NameLexicon::default();
        let pre = Preprocessor::new(Dataset::Wp, &lex, &RuleSplitter);
        let text: Vec<String> = (1..=14).map(|i| format!("Sentence number {i} is here.")).collect();
        let (rec, stats) = pre.process(&raw("w", &text.join(" "))).unwrap();
        assert_eq!(rec.sentences.len(), 10);
        assert_eq!(rec.leading_context, toks("sentence number 1 is here ."));
        assert!(stats.truncated);
        // WP is not delexicalized
        assert_eq!(pre.options.delexicalize, false);
    }

    #[test]
    fn split_validation() {
        let mut m = DatasetManifest::empty(Dataset::Roc);
        assert!(validate_splits(&m).checks.iter().all(|c| !c.matches));
        m.counts = [(Split::Train, 88344), (Split::Dev, 4908), (Split::Test, 4909)].into();
        assert!(validate_splits(&m).all_match());

        let mut wp = DatasetManifest::empty(Dataset::Wp);
        wp.counts = [(Split::Train, 26758), (Split::Dev, 2000), (Split::Test, 1999)].into();
        let report = validate_splits(&wp);
        let bad: Vec<_> = report.mismatches().map(|c| c.split).collect();
        assert_eq!(bad, vec![Split::Test]);
    }

    #[test]
    fn hash_split_is_stable_and_roughly_proportional() {
        assert_eq!(Split::from_id_hash("abc"), Split::from_id_hash("abc"));
        let train = (0..2000)
            .filter(|i| Split::from_id_hash(&format!("story-{i}")) == Split::Train)
            .count();
        assert!((1700..1900).contains(&train), "train={train}");
    }

    #[test]
    fn split_from_file_names() {
        assert_eq!(Split::from_file_name("train.csv"), Some(Split::Train));
        assert_eq!(Split::from_file_name("roc.valid.txt"), Some(Split::Dev));
        assert_eq!(Split::from_file_name("test.wp_target"), Some(Split::Test));
        assert_eq!(Split::from_file_name("readme.md"), None);
    }
}
