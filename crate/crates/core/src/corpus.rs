//! Raw document ingestion and corpus-level statistics.
//!
//! Two input formats: JSONL (one object per line, required `"text"` field,
//! optional `"id"`, unknown fields ignored) and a directory of plain-text
//! files (one file per document, enumerated in lexicographic filename
//! order). Documents are never mutated here; all text transformation lives
//! in [`crate::preprocess`].

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::preprocess::stopwords;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceFormat {
    Jsonl,
    Plaintext,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputFormat {
    Jsonl,
    PlaintextDir,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawDocument {
    pub id: String,
    pub text: String,
    pub source: SourceFormat,
}

/// Where a corpus came from and what filtering it has been through.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub path: PathBuf,
    pub format: InputFormat,
    /// Ratio used by the English filter, when it ran.
    pub english_filter_ratio: Option<f64>,
    /// Documents removed by filters since ingestion.
    pub dropped: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Corpus {
    pub documents: Vec<RawDocument>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub doc_count: usize,
    /// Whitespace-delimited words before any normalization.
    pub token_count: usize,
    pub dropped_count: usize,
}

/// Read a corpus from disk, preserving input order.
///
/// Missing JSONL ids are synthesized as zero-based ordinals; plain-text
/// document ids are the file stems.
pub fn ingest(path: &Path, format: InputFormat) -> Result<Corpus> {
    let documents = match format {
        InputFormat::Jsonl => ingest_jsonl(path)?,
        InputFormat::PlaintextDir => ingest_plaintext_dir(path)?,
    };
    if documents.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut seen = HashSet::new();
    for doc in &documents {
        if !seen.insert(doc.id.as_str()) {
            return Err(Error::Malformed {
                path: path.to_path_buf(),
                line: 0,
                message: format!("duplicate document id `{}`", doc.id),
            });
        }
    }
    Ok(Corpus {
        documents,
        provenance: Provenance {
            path: path.to_path_buf(),
            format,
            english_filter_ratio: None,
            dropped: 0,
        },
    })
}

fn ingest_jsonl(path: &Path) -> Result<Vec<RawDocument>> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut documents = Vec::new();
    for (lineno, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(line).map_err(|e| Error::Malformed {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!("invalid JSON: {e}"),
            })?;
        let text = value
            .get("text")
            .and_then(|t| t.as_str())
            .ok_or_else(|| Error::Malformed {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: "missing string field `text`".into(),
            })?;
        let id = match value.get("id") {
            Some(serde_json::Value::String(s)) => s.clone(),
            None => documents.len().to_string(),
            Some(other) => {
                return Err(Error::Malformed {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    message: format!("field `id` must be a string, got {other}"),
                })
            }
        };
        documents.push(RawDocument {
            id,
            text: text.to_string(),
            source: SourceFormat::Jsonl,
        });
    }
    Ok(documents)
}

fn ingest_plaintext_dir(path: &Path) -> Result<Vec<RawDocument>> {
    let entries = fs::read_dir(path).map_err(|e| Error::io(path, e))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_file())
        .collect();
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));

    let mut documents = Vec::new();
    for file in files {
        let text = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
        let id = file
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        documents.push(RawDocument {
            id,
            text,
            source: SourceFormat::Plaintext,
        });
    }
    Ok(documents)
}

/// Fraction of lowercased whitespace tokens found in the bundled English
/// stopword list. Zero-token documents score 0.
pub fn english_hit_ratio(text: &str) -> f64 {
    let list = stopwords::english();
    let mut tokens = 0usize;
    let mut hits = 0usize;
    for tok in text.split_whitespace() {
        tokens += 1;
        if list.contains(tok.to_lowercase().as_str()) {
            hits += 1;
        }
    }
    if tokens == 0 {
        return 0.0;
    }
    hits as f64 / tokens as f64
}

/// Keep documents whose stopword hit ratio is at least `ratio`. A crude but
/// dependency-free stand-in for language identification; empty documents are
/// always dropped. Never reorders survivors.
pub fn filter_english(corpus: Corpus, ratio: f64) -> Corpus {
    let before = corpus.documents.len();
    let mut provenance = corpus.provenance;
    let documents: Vec<RawDocument> = corpus
        .documents
        .into_iter()
        .filter(|d| {
            let tokens = d.text.split_whitespace().count();
            tokens > 0 && english_hit_ratio(&d.text) >= ratio
        })
        .collect();
    provenance.dropped += before - documents.len();
    provenance.english_filter_ratio = Some(ratio);
    Corpus {
        documents,
        provenance,
    }
}

pub fn stats(corpus: &Corpus) -> CorpusStats {
    CorpusStats {
        doc_count: corpus.documents.len(),
        token_count: corpus
            .documents
            .iter()
            .map(|d| d.text.split_whitespace().count())
            .sum(),
        dropped_count: corpus.provenance.dropped,
    }
}

/// Serialize a corpus to a JSON file.
pub fn save(corpus: &Corpus, path: &Path) -> Result<()> {
    let json = serde_json::to_string(corpus)
        .map_err(|e| Error::Internal(format!("corpus serialization failed: {e}")))?;
    fs::write(path, json).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<Corpus> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&raw).map_err(|e| Error::Malformed {
        path: path.to_path_buf(),
        line: 0,
        message: format!("invalid corpus file: {e}"),
    })
}

/// The three-sentence example corpus used across the test suites.
#[doc(hidden)]
pub fn toy_corpus() -> Corpus {
    const TOY: [&str; 3] = [
        "I like to eat kippers for breakfast.",
        "I love all animals, but kittens are the cutest.",
        "My kitten eats kippers too.",
    ];
    Corpus {
        documents: TOY
            .iter()
            .enumerate()
            .map(|(i, text)| RawDocument {
                id: i.to_string(),
                text: text.to_string(),
                source: SourceFormat::Jsonl,
            })
            .collect(),
        provenance: Provenance {
            path: PathBuf::from("toy"),
            format: InputFormat::Jsonl,
            english_filter_ratio: None,
            dropped: 0,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn jsonl_corpus(lines: &[&str]) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("posts.jsonl");
        let mut f = fs::File::create(&path).unwrap();
        for line in lines {
            writeln!(f, "{line}").unwrap();
        }
        (dir, path)
    }

    #[test]
    fn jsonl_preserves_order_and_ids() {
        let (_dir, path) = jsonl_corpus(&[
            r#"{"id":"a","text":"one"}"#,
            r#"{"id":"b","text":"two"}"#,
            r#"{"id":"c","text":"three"}"#,
        ]);
        let corpus = ingest(&path, InputFormat::Jsonl).unwrap();
        let ids: Vec<&str> = corpus.documents.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
    }

    #[test]
    fn jsonl_synthesizes_ordinal_ids() {
        let (_dir, path) = jsonl_corpus(&[r#"{"text":"one"}"#, r#"{"text":"two"}"#]);
        let corpus = ingest(&path, InputFormat::Jsonl).unwrap();
        let ids: Vec<&str> = corpus.documents.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(ids, ["0", "1"]);
    }

    #[test]
    fn jsonl_missing_text_names_line() {
        let (_dir, path) = jsonl_corpus(&[r#"{"id":"a","text":"fine"}"#, r#"{"id":"b"}"#]);
        let err = ingest(&path, InputFormat::Jsonl).unwrap_err();
        match err {
            Error::Malformed { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn jsonl_bad_json_names_line() {
        let (_dir, path) = jsonl_corpus(&[r#"{"text":"ok"}"#, "{not json"]);
        let err = ingest(&path, InputFormat::Jsonl).unwrap_err();
        match err {
            Error::Malformed { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn jsonl_duplicate_ids_rejected() {
        let (_dir, path) = jsonl_corpus(&[r#"{"id":"a","text":"x"}"#, r#"{"id":"a","text":"y"}"#]);
        assert!(ingest(&path, InputFormat::Jsonl).is_err());
    }

    #[test]
    fn empty_input_rejected() {
        let (_dir, path) = jsonl_corpus(&[]);
        assert!(matches!(
            ingest(&path, InputFormat::Jsonl),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn plaintext_dir_lexicographic() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("02.txt"), "second doc").unwrap();
        fs::write(dir.path().join("01.txt"), "first doc").unwrap();
        let corpus = ingest(dir.path(), InputFormat::PlaintextDir).unwrap();
        let ids: Vec<&str> = corpus.documents.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(ids, ["01", "02"]);
        assert_eq!(corpus.documents[0].text, "first doc");
    }

    #[test]
    fn ingest_is_deterministic() {
        let (_dir, path) = jsonl_corpus(&[r#"{"id":"a","text":"one two"}"#, r#"{"text":"three"}"#]);
        let a = ingest(&path, InputFormat::Jsonl).unwrap();
        let b = ingest(&path, InputFormat::Jsonl).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn english_filter_keeps_english_drops_spanish() {
        // Hits against the bundled list: i, like, to, for -> 4/7.
        let english = "I like to eat kippers for breakfast.";
        let ratio = english_hit_ratio(english);
        assert!((ratio - 4.0 / 7.0).abs() < 1e-12, "got {ratio}");

        // Hits: me -> 1/7.
        let spanish = "El hombre me siguió por la calle";
        let ratio = english_hit_ratio(spanish);
        assert!((ratio - 1.0 / 7.0).abs() < 1e-12, "got {ratio}");

        let mut corpus = toy_corpus();
        corpus.documents[1].text = spanish.to_string();
        let filtered = filter_english(corpus, 0.2);
        assert_eq!(filtered.documents.len(), 2);
        assert_eq!(filtered.provenance.dropped, 1);
        // Survivors keep their order.
        assert_eq!(filtered.documents[0].id, "0");
        assert_eq!(filtered.documents[1].id, "2");
    }

    #[test]
    fn english_filter_drops_empty_text() {
        let mut corpus = toy_corpus();
        corpus.documents[2].text = String::new();
        let filtered = filter_english(corpus, 0.0);
        assert_eq!(filtered.documents.len(), 2);
        assert_eq!(filtered.provenance.dropped, 1);
    }

    #[test]
    fn stats_counts_whitespace_tokens() {
        let corpus = toy_corpus();
        let s = stats(&corpus);
        assert_eq!(s.doc_count, 3);
        assert_eq!(s.token_count, 21);
        assert_eq!(s.dropped_count, 0);
    }

    #[test]
    fn stats_empty_corpus() {
        let corpus = Corpus {
            documents: vec![],
            provenance: toy_corpus().provenance,
        };
        let s = stats(&corpus);
        assert_eq!((s.doc_count, s.token_count, s.dropped_count), (0, 0, 0));
    }

    #[test]
    fn stats_tracks_dropped() {
        let mut corpus = toy_corpus();
        corpus.documents[1].text = "El hombre me siguió por la calle".into();
        let filtered = filter_english(corpus, 0.2);
        let s = stats(&filtered);
        assert_eq!(s.doc_count, 2);
        assert_eq!(s.dropped_count, 1);
        assert_eq!(s.doc_count + s.dropped_count, 3);
    }

    #[test]
    fn corpus_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.json");
        let corpus = toy_corpus();
        save(&corpus, &path).unwrap();
        let loaded = load(&path).unwrap();
        assert_eq!(loaded.documents.len(), 3);
        assert_eq!(loaded.documents[2].text, "My kitten eats kippers too.");
    }

    #[test]
    fn token_count_matches_per_doc_sum() {
        let corpus = toy_corpus();
        let brute: usize = corpus
            .documents
            .iter()
            .map(|d| d.text.split_whitespace().count())
            .sum();
        assert_eq!(stats(&corpus).token_count, brute);
    }
}
