//! Snowball English (Porter2) stemmer.
//!
//! A faithful implementation of the published Snowball English algorithm:
//! region-based suffix stripping over R1/R2 with the standard exception
//! lists. Conformance is pinned by the bundled Snowball test vocabulary
//! (29,417 word/stem pairs) — see `data/snowball/`.
//!
//! Input is expected to be a lowercase token (the preprocessing pipeline
//! lowercases first); uppercase `Y` is reserved internally to mark
//! consonant-y.

/// Words rewritten (or frozen) before the algorithm proper runs.
const EXCEPTIONS: &[(&str, &str)] = &[
    ("skis", "ski"),
    ("skies", "sky"),
    ("dying", "die"),
    ("lying", "lie"),
    ("tying", "tie"),
    ("idly", "idl"),
    ("gently", "gentl"),
    ("ugly", "ugli"),
    ("early", "earli"),
    ("only", "onli"),
    ("singly", "singl"),
    ("sky", "sky"),
    ("news", "news"),
    ("howe", "howe"),
    ("atlas", "atlas"),
    ("cosmos", "cosmos"),
    ("bias", "bias"),
    ("andes", "andes"),
];

/// Words left alone once step 1a has run.
const EXCEPTIONS_POST_1A: &[&str] = &[
    "inning", "outing", "canning", "herring", "earring", "proceed", "exceed", "succeed",
];

/// Prefixes whose R1 starts right after them regardless of vowel structure.
const R1_PREFIX_EXCEPTIONS: &[&str] = &["gener", "commun", "arsen"];

const VALID_LI_ENDINGS: &[char] = &['c', 'd', 'e', 'g', 'h', 'k', 'm', 'n', 'r', 't'];

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

fn is_double(a: char, b: char) -> bool {
    a == b && matches!(a, 'b' | 'd' | 'f' | 'g' | 'm' | 'n' | 'p' | 'r' | 't')
}

struct Word {
    chars: Vec<char>,
    p1: usize,
    p2: usize,
}

impl Word {
    fn len(&self) -> usize {
        self.chars.len()
    }

    fn ends_with(&self, suffix: &str) -> bool {
        let n = suffix.chars().count();
        self.len() >= n && self.chars[self.len() - n..].iter().copied().eq(suffix.chars())
    }

    /// Longest suffix from `candidates` (listed longest-first) that the word
    /// ends with; returns its index.
    fn longest_suffix(&self, candidates: &[&str]) -> Option<usize> {
        candidates.iter().position(|s| self.ends_with(s))
    }

    fn truncate(&mut self, keep: usize) {
        self.chars.truncate(keep);
    }

    fn replace_suffix(&mut self, suffix_len: usize, replacement: &str) {
        let keep = self.len() - suffix_len;
        self.chars.truncate(keep);
        self.chars.extend(replacement.chars());
    }

    /// Suffix of `n` chars starts inside R1.
    fn suffix_in_r1(&self, n: usize) -> bool {
        self.len() - n >= self.p1
    }

    fn suffix_in_r2(&self, n: usize) -> bool {
        self.len() - n >= self.p2
    }

    fn has_vowel_before(&self, end: usize) -> bool {
        self.chars[..end].iter().any(|&c| is_vowel(c))
    }

    /// The word ends with a short syllable: either vowel + non-vowel at the
    /// very start, or non-vowel + vowel + non-vowel(not w/x/Y) at the end.
    fn ends_short_syllable(&self) -> bool {
        let n = self.len();
        if n == 2 {
            return is_vowel(self.chars[0]) && !is_vowel(self.chars[1]);
        }
        if n < 3 {
            return false;
        }
        let (a, b, c) = (self.chars[n - 3], self.chars[n - 2], self.chars[n - 1]);
        !is_vowel(a) && is_vowel(b) && !is_vowel(c) && !matches!(c, 'w' | 'x' | 'Y')
    }
}

/// Mark consonant-y as `Y` and locate R1/R2 on the marked word.
fn prepare(raw: &[char]) -> Word {
    let mut chars: Vec<char> = raw.to_vec();
    if chars.first() == Some(&'\'') {
        chars.remove(0);
    }
    if chars.first() == Some(&'y') {
        chars[0] = 'Y';
    }
    for i in 1..chars.len() {
        if chars[i] == 'y' && is_vowel(chars[i - 1]) {
            chars[i] = 'Y';
        }
    }

    let n = chars.len();
    let mut p1 = n;
    let prefix = R1_PREFIX_EXCEPTIONS
        .iter()
        .find(|p| n >= p.len() && chars[..p.len()].iter().copied().eq(p.chars()));
    if let Some(p) = prefix {
        p1 = p.len();
    } else if let Some(start) = region_after_vc(&chars, 0) {
        p1 = start;
    }
    let p2 = region_after_vc(&chars, p1).unwrap_or(n);

    Word { chars, p1, p2 }
}

/// Position just past the first non-vowel that follows a vowel, scanning
/// from `from`; `None` when no such pattern exists.
fn region_after_vc(chars: &[char], from: usize) -> Option<usize> {
    let mut seen_vowel = false;
    for (i, &c) in chars.iter().enumerate().skip(from) {
        if is_vowel(c) {
            seen_vowel = true;
        } else if seen_vowel {
            return Some(i + 1);
        }
    }
    None
}

fn step_0(w: &mut Word) {
    for s in ["'s'", "'s", "'"] {
        if w.ends_with(s) {
            let keep = w.len() - s.len();
            w.truncate(keep);
            return;
        }
    }
}

fn step_1a(w: &mut Word) {
    if w.ends_with("sses") {
        w.replace_suffix(4, "ss");
    } else if w.ends_with("ied") || w.ends_with("ies") {
        if w.len() > 4 {
            w.replace_suffix(3, "i");
        } else {
            w.replace_suffix(3, "ie");
        }
    } else if w.ends_with("us") || w.ends_with("ss") {
        // leave alone
    } else if w.ends_with("s") {
        // Delete only if a vowel occurs before the char immediately
        // preceding the s.
        if w.len() >= 2 && w.has_vowel_before(w.len() - 2) {
            let keep = w.len() - 1;
            w.truncate(keep);
        }
    }
}

fn step_1b(w: &mut Word) {
    if let Some(idx) = w.longest_suffix(&["eedly", "eed"]) {
        let n = ["eedly", "eed"][idx].len();
        if w.suffix_in_r1(n) {
            w.replace_suffix(n, "ee");
        }
        return;
    }
    let Some(idx) = w.longest_suffix(&["ingly", "edly", "ing", "ed"]) else {
        return;
    };
    let n = ["ingly", "edly", "ing", "ed"][idx].len();
    if !w.has_vowel_before(w.len() - n) {
        return;
    }
    let keep = w.len() - n;
    w.truncate(keep);

    if w.ends_with("at") || w.ends_with("bl") || w.ends_with("iz") {
        w.chars.push('e');
    } else if w.len() >= 2 && is_double(w.chars[w.len() - 2], w.chars[w.len() - 1]) {
        let keep = w.len() - 1;
        w.truncate(keep);
    } else if w.p1 >= w.len() && w.ends_short_syllable() {
        w.chars.push('e');
    }
}

fn step_1c(w: &mut Word) {
    let n = w.len();
    if n >= 3
        && matches!(w.chars[n - 1], 'y' | 'Y')
        && !is_vowel(w.chars[n - 2])
    {
        w.chars[n - 1] = 'i';
    }
}

fn step_2(w: &mut Word) {
    const RULES: &[(&str, &str)] = &[
        ("ization", "ize"),
        ("ational", "ate"),
        ("fulness", "ful"),
        ("ousness", "ous"),
        ("iveness", "ive"),
        ("tional", "tion"),
        ("biliti", "ble"),
        ("lessli", "less"),
        ("entli", "ent"),
        ("ation", "ate"),
        ("alism", "al"),
        ("aliti", "al"),
        ("ousli", "ous"),
        ("iviti", "ive"),
        ("fulli", "ful"),
        ("enci", "ence"),
        ("anci", "ance"),
        ("abli", "able"),
        ("izer", "ize"),
        ("ator", "ate"),
        ("alli", "al"),
        ("bli", "ble"),
        ("ogi", "og"),
        ("li", ""),
    ];
    let Some(idx) = w.longest_suffix(&RULES.iter().map(|r| r.0).collect::<Vec<_>>()) else {
        return;
    };
    let (suffix, replacement) = RULES[idx];
    let n = suffix.len();
    if !w.suffix_in_r1(n) {
        return;
    }
    match suffix {
        "ogi" => {
            if w.len() > n && w.chars[w.len() - n - 1] == 'l' {
                w.replace_suffix(n, replacement);
            }
        }
        "li" => {
            if w.len() > n && VALID_LI_ENDINGS.contains(&w.chars[w.len() - n - 1]) {
                w.replace_suffix(n, replacement);
            }
        }
        _ => w.replace_suffix(n, replacement),
    }
}

fn step_3(w: &mut Word) {
    const RULES: &[(&str, &str)] = &[
        ("ational", "ate"),
        ("tional", "tion"),
        ("alize", "al"),
        ("icate", "ic"),
        ("iciti", "ic"),
        ("ative", ""),
        ("ical", "ic"),
        ("ness", ""),
        ("ful", ""),
    ];
    let Some(idx) = w.longest_suffix(&RULES.iter().map(|r| r.0).collect::<Vec<_>>()) else {
        return;
    };
    let (suffix, replacement) = RULES[idx];
    let n = suffix.len();
    if !w.suffix_in_r1(n) {
        return;
    }
    if suffix == "ative" {
        if w.suffix_in_r2(n) {
            w.replace_suffix(n, replacement);
        }
        return;
    }
    w.replace_suffix(n, replacement);
}

fn step_4(w: &mut Word) {
    const SUFFIXES: &[&str] = &[
        "ement", "ance", "ence", "able", "ible", "ment", "ant", "ent", "ism", "ate", "iti",
        "ous", "ive", "ize", "ion", "al", "er", "ic",
    ];
    let Some(idx) = w.longest_suffix(SUFFIXES) else {
        return;
    };
    let suffix = SUFFIXES[idx];
    let n = suffix.len();
    if !w.suffix_in_r2(n) {
        return;
    }
    if suffix == "ion" {
        if w.len() > n && matches!(w.chars[w.len() - n - 1], 's' | 't') {
            let keep = w.len() - n;
            w.truncate(keep);
        }
        return;
    }
    let keep = w.len() - n;
    w.truncate(keep);
}

fn step_5(w: &mut Word) {
    if w.ends_with("e") {
        let in_r2 = w.suffix_in_r2(1);
        let in_r1 = w.suffix_in_r1(1);
        if in_r2 {
            let keep = w.len() - 1;
            w.truncate(keep);
        } else if in_r1 {
            // Only drop the e when the stem does not end in a short syllable.
            let keep = w.len() - 1;
            let tail = Word {
                chars: w.chars[..keep].to_vec(),
                p1: w.p1,
                p2: w.p2,
            };
            if !tail.ends_short_syllable() {
                w.truncate(keep);
            }
        }
    } else if w.ends_with("l") && w.suffix_in_r2(1) && w.len() >= 2 && w.chars[w.len() - 2] == 'l'
    {
        let keep = w.len() - 1;
        w.truncate(keep);
    }
}

/// Stem one lowercase token with the Snowball English algorithm.
pub fn stem(word: &str) -> String {
    let chars: Vec<char> = word.chars().collect();
    if chars.len() <= 2 {
        return word.to_string();
    }
    if let Some(&(_, out)) = EXCEPTIONS.iter().find(|(k, _)| *k == word) {
        return out.to_string();
    }

    let mut w = prepare(&chars);
    step_0(&mut w);
    step_1a(&mut w);

    let current: String = w.chars.iter().collect();
    if EXCEPTIONS_POST_1A.contains(&current.as_str()) {
        return current;
    }

    step_1b(&mut w);
    step_1c(&mut w);
    step_2(&mut w);
    step_3(&mut w);
    step_4(&mut w);
    step_5(&mut w);

    w.chars
        .iter()
        .map(|&c| if c == 'Y' { 'y' } else { c })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    #[test]
    fn table_stems() {
        for (word, expected) in [
            ("because", "becaus"),
            ("colleague", "colleagu"),
            ("only", "onli"),
            ("work", "work"),
            ("why", "whi"),
            ("very", "veri"),
            ("female", "femal"),
            ("really", "realli"),
            ("manager", "manag"),
            ("harass", "harass"),
        ] {
            assert_eq!(stem(word), expected, "stem({word})");
        }
    }

    #[test]
    fn toy_corpus_stems() {
        assert_eq!(stem("kippers"), "kipper");
        assert_eq!(stem("kittens"), "kitten");
        assert_eq!(stem("eats"), "eat");
        assert_eq!(stem("animals"), "anim");
        assert_eq!(stem("cutest"), "cutest");
        assert_eq!(stem("love"), "love");
        assert_eq!(stem("breakfast"), "breakfast");
    }

    #[test]
    fn short_words_and_exceptions() {
        assert_eq!(stem("a"), "a");
        assert_eq!(stem("by"), "by");
        assert_eq!(stem("sky"), "sky");
        assert_eq!(stem("news"), "news");
        assert_eq!(stem("dying"), "die");
        assert_eq!(stem("proceed"), "proceed");
        assert_eq!(stem("cry"), "cri");
        assert_eq!(stem("say"), "say");
    }

    /// Full agreement with the bundled Snowball reference vocabulary.
    #[test]
    fn reference_vocabulary_conformance() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/snowball");
        let voc = std::fs::read_to_string(dir.join("voc_en.txt")).unwrap();
        let res = std::fs::read_to_string(dir.join("res_en.txt")).unwrap();
        let words: Vec<&str> = voc.lines().collect();
        let stems: Vec<&str> = res.lines().collect();
        assert_eq!(words.len(), stems.len());
        assert!(words.len() >= 10_000);

        let mut mismatches = Vec::new();
        for (w, expected) in words.iter().zip(&stems) {
            let got = stem(w);
            if got != **expected {
                mismatches.push(format!("{w} -> {got} (want {expected})"));
            }
        }
        assert!(
            mismatches.is_empty(),
            "{} mismatches, first 20:\n{}",
            mismatches.len(),
            mismatches.iter().take(20).cloned().collect::<Vec<_>>().join("\n")
        );
    }
}
