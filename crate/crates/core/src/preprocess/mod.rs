//! Text normalization, stemming, stopword removal, and corpus encoding.
//!
//! Per document the pipeline is: lowercase and split on non-letter
//! characters, drop short tokens, remove stopwords (exact match, before
//! stemming), stem with Snowball English, then map terms to dense
//! vocabulary ids assigned in first-occurrence order over the whole corpus.
//! Documents left empty are excluded and counted.

pub mod stemmer;
pub mod stopwords;

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::Corpus;
use crate::{Error, Result};

const ENCODED_CORPUS_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub stopword_list: String,
    pub min_token_length: usize,
    pub keep_numerals: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            stopword_list: stopwords::DEFAULT_LIST_ID.to_string(),
            min_token_length: 2,
            keep_numerals: false,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_token_length < 1 {
            return Err(Error::Config("min_token_length must be >= 1".into()));
        }
        stopwords::get(&self.stopword_list)?;
        Ok(())
    }

    /// Canonical digest over the config and the stopword list checksum.
    pub fn digest(&self) -> String {
        let checksum = stopwords::get(&self.stopword_list)
            .map(|l| l.checksum().to_string())
            .unwrap_or_default();
        let canonical = format!(
            "stopword_list={}:{checksum};min_token_length={};keep_numerals={}",
            self.stopword_list, self.min_token_length, self.keep_numerals
        );
        hex_sha256(canonical.as_bytes())
    }
}

pub(crate) fn hex_sha256(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Lowercase and split `text` into tokens.
///
/// Splits on every character that is not a letter (nor a digit, when
/// `keep_numerals` is set) and drops tokens shorter than
/// `min_token_length`. Stopwords are *not* removed here.
pub fn normalize(text: &str, config: &PreprocessConfig) -> Vec<String> {
    let lowered = text.to_lowercase();
    lowered
        .split(|c: char| {
            !(c.is_alphabetic() || (config.keep_numerals && c.is_ascii_digit()))
        })
        .filter(|t| t.chars().count() >= config.min_token_length)
        .map(str::to_string)
        .collect()
}

/// Dense term <-> id bijection, ids contiguous from zero in
/// first-occurrence order.
#[derive(Debug, Clone, Default)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn id(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    pub fn term(&self, id: u32) -> &str {
        &self.terms[id as usize]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    fn intern(&mut self, term: &str) -> u32 {
        if let Some(&id) = self.index.get(term) {
            return id;
        }
        let id = self.terms.len() as u32;
        self.terms.push(term.to_string());
        self.index.insert(term.to_string(), id);
        id
    }

    fn from_terms(terms: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if index.insert(t.clone(), i as u32).is_some() {
                return Err(Error::Internal(format!("duplicate vocabulary term `{t}`")));
            }
        }
        Ok(Vocabulary { terms, index })
    }
}

impl Serialize for Vocabulary {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.terms.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vocabulary {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let terms = Vec::<String>::deserialize(d)?;
        Vocabulary::from_terms(terms).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EncodedDoc {
    pub id: String,
    pub tokens: Vec<u32>,
}

/// A preprocessed corpus: documents as vocabulary-id sequences.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EncodedCorpus {
    pub version: u32,
    pub vocabulary: Vocabulary,
    pub docs: Vec<EncodedDoc>,
    pub total_tokens: usize,
    /// Documents excluded because nothing survived preprocessing.
    pub dropped_docs: usize,
    pub config_digest: String,
    pub stopword_checksum: String,
}

impl EncodedCorpus {
    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn doc_count(&self) -> usize {
        self.docs.len()
    }

    /// Decode a document back to its stemmed token stream.
    pub fn decode_doc(&self, doc: usize) -> Vec<&str> {
        self.docs[doc]
            .tokens
            .iter()
            .map(|&id| self.vocabulary.term(id))
            .collect()
    }

    /// Stable content digest: hashes dimensions, vocabulary, and token ids.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.vocab_size().to_le_bytes());
        hasher.update(self.doc_count().to_le_bytes());
        hasher.update(self.total_tokens.to_le_bytes());
        for term in self.vocabulary.terms() {
            hasher.update(term.as_bytes());
            hasher.update([0u8]);
        }
        for doc in &self.docs {
            hasher.update(doc.id.as_bytes());
            hasher.update([0u8]);
            for &t in &doc.tokens {
                hasher.update(t.to_le_bytes());
            }
            hasher.update([0xff]);
        }
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    fn check(&self) -> Result<()> {
        let v = self.vocab_size() as u32;
        let mut total = 0usize;
        for doc in &self.docs {
            total += doc.tokens.len();
            if let Some(&bad) = doc.tokens.iter().find(|&&t| t >= v) {
                return Err(Error::Internal(format!(
                    "token id {bad} out of range (V={v}) in document `{}`",
                    doc.id
                )));
            }
            if doc.tokens.is_empty() {
                return Err(Error::Internal(format!("empty encoded document `{}`", doc.id)));
            }
        }
        if total != self.total_tokens {
            return Err(Error::Internal(format!(
                "total_tokens {} does not match sum of lengths {total}",
                self.total_tokens
            )));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string(self)
            .map_err(|e| Error::Internal(format!("encode failed: {e}")))?;
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let corpus: EncodedCorpus = serde_json::from_str(&raw).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            line: 0,
            message: format!("invalid encoded corpus: {e}"),
        })?;
        if corpus.version != ENCODED_CORPUS_VERSION {
            return Err(Error::Malformed {
                path: path.to_path_buf(),
                line: 0,
                message: format!("unsupported encoded corpus version {}", corpus.version),
            });
        }
        corpus.check()?;
        Ok(corpus)
    }
}

/// Run the full preprocessing pipeline over a corpus.
pub fn preprocess_corpus(corpus: &Corpus, config: &PreprocessConfig) -> Result<EncodedCorpus> {
    config.validate()?;
    if corpus.documents.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let list = stopwords::get(&config.stopword_list)?;

    let mut vocabulary = Vocabulary::default();
    let mut stem_cache: HashMap<String, u32> = HashMap::new();
    let mut docs = Vec::new();
    let mut dropped = 0usize;
    let mut total_tokens = 0usize;

    for doc in &corpus.documents {
        let mut tokens = Vec::new();
        for tok in normalize(&doc.text, config) {
            if list.contains(&tok) {
                continue;
            }
            let id = match stem_cache.get(&tok) {
                Some(&id) => id,
                None => {
                    let id = vocabulary.intern(&stemmer::stem(&tok));
                    stem_cache.insert(tok, id);
                    id
                }
            };
            tokens.push(id);
        }
        if tokens.is_empty() {
            dropped += 1;
            continue;
        }
        total_tokens += tokens.len();
        docs.push(EncodedDoc {
            id: doc.id.clone(),
            tokens,
        });
    }

    if docs.is_empty() {
        return Err(Error::EmptyAfterPreprocess);
    }

    Ok(EncodedCorpus {
        version: ENCODED_CORPUS_VERSION,
        vocabulary,
        docs,
        total_tokens,
        dropped_docs: dropped,
        config_digest: config.digest(),
        stopword_checksum: list.checksum().to_string(),
    })
}
