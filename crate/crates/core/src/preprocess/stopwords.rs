//! Bundled stopword lists.
//!
//! Lists are compiled into the binary, matched exactly against lowercased
//! tokens, and identified by a short id plus a SHA-256 checksum of the raw
//! list file. The checksum travels with every encoded corpus so results can
//! be traced to the exact list that produced them. See
//! `data/stopwords/README.md` for provenance.

use std::collections::HashSet;
use std::sync::OnceLock;

use sha2::{Digest, Sha256};

use crate::{Error, Result};

const ENGLISH_RAW: &str = include_str!("../../data/stopwords/english.txt");

pub struct StopwordList {
    id: &'static str,
    words: HashSet<&'static str>,
    checksum: String,
}

impl StopwordList {
    pub fn id(&self) -> &'static str {
        self.id
    }

    /// Hex SHA-256 of the raw bundled list file.
    pub fn checksum(&self) -> &str {
        &self.checksum
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

fn build(id: &'static str, raw: &'static str) -> StopwordList {
    let digest = Sha256::digest(raw.as_bytes());
    let checksum = digest.iter().map(|b| format!("{b:02x}")).collect();
    StopwordList {
        id,
        words: raw.lines().map(str::trim).filter(|w| !w.is_empty()).collect(),
        checksum,
    }
}

/// The default English list.
pub fn english() -> &'static StopwordList {
    static LIST: OnceLock<StopwordList> = OnceLock::new();
    LIST.get_or_init(|| build("english", ENGLISH_RAW))
}

/// Look up a bundled list by id.
pub fn get(id: &str) -> Result<&'static StopwordList> {
    match id {
        "english" => Ok(english()),
        other => Err(Error::UnknownStopwordList(other.to_string())),
    }
}

pub const DEFAULT_LIST_ID: &str = "english";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership() {
        let list = english();
        for w in ["i", "me", "my", "to", "too", "for", "all", "but", "are", "the", "like"] {
            assert!(list.contains(w), "{w} should be a stopword");
        }
        // These survive so their stems can appear as topic terms.
        for w in ["any", "because", "only", "very", "why", "eat", "kippers"] {
            assert!(!list.contains(w), "{w} should not be a stopword");
        }
    }

    #[test]
    fn checksum_is_frozen() {
        assert_eq!(
            english().checksum(),
            "45c3c0861a5cbdd36597ff74cd1d62421cd8b2c97eec11490f64d5f4b2fc5989"
        );
        assert_eq!(english().len(), 194);
    }

    #[test]
    fn unknown_list_rejected() {
        assert!(matches!(get("klingon"), Err(Error::UnknownStopwordList(_))));
    }
}
