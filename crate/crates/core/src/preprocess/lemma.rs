use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

const STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");
const EXCEPTIONS: &str = include_str!("../../data/lemma_exceptions_en.txt");

fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| data_lines(STOPWORDS).collect())
}

fn data_lines(src: &'static str) -> impl Iterator<Item = &'static str> {
    src.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

pub fn is_stopword(token: &str) -> bool {
    stopwords().contains(token)
}

/// Maps a lowercase token to its lemma.
///
/// Implementations must be deterministic and idempotent
/// (`lemma(lemma(t)) == lemma(t)`).
pub trait Lemmatizer: Send + Sync {
    fn lemma(&self, token: &str) -> String;
}

/// Suffix-stripping lemmatizer with an exception table.
///
/// Rules, in priority order: exception table; `-ies`/`-ied` to `-y`;
/// `-sses`, `-ches`, `-shes`, `-xes`, `-zzes` drop `-es`; plural `-s`;
/// `-ing` and `-ed` with consonant undoubling and silent-`e` restoration.
/// Rules are re-applied until the token stops changing.
#[derive(Debug, Clone)]
pub struct RuleLemmatizer {
    exceptions: &'static HashMap<&'static str, &'static str>,
}

impl Default for RuleLemmatizer {
    fn default() -> Self {
        static MAP: OnceLock<HashMap<&'static str, &'static str>> = OnceLock::new();
        let exceptions = MAP.get_or_init(|| {
            data_lines(EXCEPTIONS)
                .filter_map(|l| {
                    let mut parts = l.split_whitespace();
                    Some((parts.next()?, parts.next()?))
                })
                .collect()
        });
        Self { exceptions }
    }
}

impl Lemmatizer for RuleLemmatizer {
    fn lemma(&self, token: &str) -> String {
        let mut current = token.to_string();
        for _ in 0..8 {
            let next = self.step(&current);
            if next == current {
                break;
            }
            current = next;
        }
        current
    }
}

impl RuleLemmatizer {
    fn step(&self, word: &str) -> String {
        if let Some(lemma) = self.exceptions.get(word) {
            return (*lemma).to_string();
        }
        if word.len() <= 3 || !word.bytes().all(|b| b.is_ascii_lowercase()) {
            return word.to_string();
        }
        if let Some(stem) = word.strip_suffix("ies").filter(|s| s.len() >= 2) {
            return format!("{stem}y");
        }
        if let Some(stem) = word.strip_suffix("ied").filter(|s| s.len() >= 2) {
            return format!("{stem}y");
        }
        for suffix in ["sses", "ches", "shes", "xes", "zzes"] {
            if word.ends_with(suffix) {
                return word[..word.len() - 2].to_string();
            }
        }
        if word.ends_with('s') && !["ss", "us", "is", "ous"].iter().any(|s| word.ends_with(s)) {
            return word[..word.len() - 1].to_string();
        }
        if let Some(stem) = word.strip_suffix("ing") {
            if stem.len() >= 3 && has_vowel(stem) {
                return restore_stem(stem);
            }
        }
        if !word.ends_with("eed") {
            if let Some(stem) = word.strip_suffix("ed") {
                if stem.len() >= 3 && has_vowel(stem) {
                    return restore_stem(stem);
                }
            }
        }
        word.to_string()
    }
}

fn is_vowel(b: u8) -> bool {
    matches!(b, b'a' | b'e' | b'i' | b'o' | b'u')
}

fn has_vowel(s: &str) -> bool {
    s.bytes().any(|b| is_vowel(b) || b == b'y')
}

fn restore_stem(stem: &str) -> String {
    let b = stem.as_bytes();
    let n = b.len();
    let last = b[n - 1];
    if n >= 2 && b[n - 2] == last && !is_vowel(last) && !matches!(last, b'l' | b's' | b'z') {
        return stem[..n - 1].to_string();
    }
    let cvc = n == 3
        && !is_vowel(b[0])
        && is_vowel(b[1])
        && !is_vowel(b[2])
        && !matches!(b[2], b'w' | b'x' | b'y');
    if cvc || matches!(last, b'v' | b'c' | b'u') {
        return format!("{stem}e");
    }
    stem.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lemma(t: &str) -> String {
        RuleLemmatizer::default().lemma(t)
    }

    #[test]
    fn suffix_rules() {
        let cases = [
            ("cars", "car"),
            ("running", "run"),
            ("cities", "city"),
            ("classes", "class"),
            ("watches", "watch"),
            ("boxes", "box"),
            ("tried", "try"),
            ("stopped", "stop"),
            ("played", "play"),
            ("liked", "like"),
            ("making", "make"),
            ("loved", "love"),
            ("dancing", "dance"),
            ("bus", "bus"),
            ("need", "need"),
            ("headache", "headache"),
            ("string", "string"),
            ("thing", "thing"),
        ];
        for (word, expected) in cases {
            assert_eq!(lemma(word), expected, "{word}");
        }
    }

    #[test]
    fn exceptions_win() {
        assert_eq!(lemma("went"), "go");
        assert_eq!(lemma("children"), "child");
        assert_eq!(lemma("morning"), "morning");
        assert_eq!(lemma("news"), "news");
    }

    #[test]
    fn exception_targets_are_fixpoints() {
        let lm = RuleLemmatizer::default();
        for target in lm.exceptions.values() {
            assert_eq!(&lm.lemma(target), target, "exception target {target} is not stable");
        }
    }

    #[test]
    fn stopwords_cover_sample_sentence() {
        for w in ["is", "too", "much", "for", "my"] {
            assert!(is_stopword(w), "{w}");
        }
        assert!(!is_stopword("car"));
    }
}
