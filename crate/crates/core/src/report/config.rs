//! Pipeline run configuration.
//!
//! A plain-text key/value file with one section per stage, parsed as TOML.
//! The format is versioned via the top-level `version` key (currently 1).
//! Minimal example:
//!
//! ```toml
//! version = 1
//! seed = 42
//!
//! [corpus]
//! path = "posts.jsonl"
//! format = "jsonl"
//!
//! [lda]
//! topics = [7, 20]
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::InputFormat;
use crate::preprocess::PreprocessConfig;
use crate::topicnet::DEFAULT_SIMILARITY_THRESHOLD;
use crate::{Error, Result};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    #[serde(default)]
    pub seed: u64,
    pub corpus: CorpusSection,
    #[serde(default)]
    pub preprocess: PreprocessSection,
    pub lda: LdaSection,
    #[serde(default)]
    pub graph: GraphSection,
    #[serde(default)]
    pub community: CommunitySection,
    #[serde(default)]
    pub report: ReportSection,
}

fn default_version() -> u32 {
    CONFIG_VERSION
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSection {
    pub path: PathBuf,
    pub format: InputFormat,
    #[serde(default)]
    pub filter_english: bool,
    #[serde(default = "default_english_ratio")]
    pub english_ratio: f64,
}

fn default_english_ratio() -> f64 {
    0.2
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct PreprocessSection {
    pub stopword_list: Option<String>,
    pub min_token_length: Option<usize>,
    pub keep_numerals: Option<bool>,
}

impl PreprocessSection {
    pub fn to_config(&self) -> PreprocessConfig {
        let base = PreprocessConfig::default();
        PreprocessConfig {
            stopword_list: self.stopword_list.clone().unwrap_or(base.stopword_list),
            min_token_length: self.min_token_length.unwrap_or(base.min_token_length),
            keep_numerals: self.keep_numerals.unwrap_or(base.keep_numerals),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LdaSection {
    /// One model is trained per entry (e.g. [7, 20]).
    pub topics: Vec<usize>,
    /// Defaults to 50/K per model when unset.
    pub alpha: Option<f64>,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    /// Use the final sweep instead of averaged estimates.
    #[serde(default)]
    pub last_sample: bool,
}

fn default_beta() -> f64 {
    0.01
}

fn default_iterations() -> usize {
    1000
}

fn default_burn_in() -> usize {
    200
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GraphMode {
    /// Word-based for K <= 10, document-based above.
    #[default]
    Auto,
    Word,
    Document,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GraphSection {
    pub mode: GraphMode,
    pub threshold: f64,
}

impl Default for GraphSection {
    fn default() -> Self {
        GraphSection {
            mode: GraphMode::Auto,
            threshold: DEFAULT_SIMILARITY_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CommunitySection {
    pub resolution: f64,
}

impl Default for CommunitySection {
    fn default() -> Self {
        CommunitySection { resolution: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportSection {
    /// Terms per topic in the exported tables.
    pub top_words: usize,
    /// Per-K annotation files: topic id -> human label.
    pub labels: BTreeMap<String, PathBuf>,
}

impl Default for ReportSection {
    fn default() -> Self {
        ReportSection {
            top_words: 50,
            labels: BTreeMap::new(),
        }
    }
}

impl RunConfig {
    pub fn from_str(raw: &str) -> Result<Self> {
        let config: RunConfig =
            toml::from_str(raw).map_err(|e| Error::Config(format!("bad run config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_str(&raw)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        if self.lda.topics.is_empty() {
            return Err(Error::Config("lda.topics must list at least one K".into()));
        }
        if self.lda.topics.iter().any(|&k| k < 1) {
            return Err(Error::Config("every K must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.corpus.english_ratio) {
            return Err(Error::Config("english_ratio must be in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.graph.threshold) {
            return Err(Error::Config("graph.threshold must be in [0, 1]".into()));
        }
        if !(self.community.resolution > 0.0) {
            return Err(Error::Config("community.resolution must be positive".into()));
        }
        if self.report.top_words < 1 {
            return Err(Error::Config("report.top_words must be >= 1".into()));
        }
        if self.lda.burn_in >= self.lda.iterations {
            return Err(Error::Config("lda.burn_in must be below lda.iterations".into()));
        }
        self.preprocess.to_config().validate()?;
        for key in self.report.labels.keys() {
            let k: usize = key
                .parse()
                .map_err(|_| Error::Config(format!("labels key `{key}` is not a K value")))?;
            if !self.lda.topics.contains(&k) {
                return Err(Error::Config(format!(
                    "labels given for K={k}, which is not in lda.topics"
                )));
            }
        }
        Ok(())
    }

    /// Digest of the canonical serialized config (seed included).
    pub fn digest(&self) -> String {
        let canonical = toml::to_string(self).unwrap_or_default();
        crate::preprocess::hex_sha256(canonical.as_bytes())
    }
}
