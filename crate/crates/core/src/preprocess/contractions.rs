use std::collections::HashMap;
use std::sync::OnceLock;

use regex::{Captures, Regex};

const DICTIONARY: &str = include_str!("../../data/contractions_en.txt");

fn dictionary() -> &'static HashMap<String, &'static str> {
    static MAP: OnceLock<HashMap<String, &'static str>> = OnceLock::new();
    MAP.get_or_init(|| {
        DICTIONARY
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
            .filter_map(|l| l.split_once('\t'))
            .map(|(from, to)| (from.to_lowercase(), to))
            .collect()
    })
}

fn token_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"['’]?\p{L}+(?:['’]\p{L}+)*").expect("static regex"))
}

/// Replaces dictionary contractions by their expansion.
///
/// Matching ignores case; a leading capital on the contraction is carried over
/// to the expansion. Words ending in `'s` that are not in the dictionary are
/// read as `<word> is` (so `"Amanda's car"` becomes `"Amanda is car"`). Other
/// apostrophe forms such as `James'` or `rock'n'roll` are left alone.
pub fn expand_contractions(text: &str) -> String {
    token_pattern()
        .replace_all(text, |caps: &Captures<'_>| {
            let token = &caps[0];
            if !token.contains(['\'', '’']) {
                return token.to_string();
            }
            let key = token.replace('’', "'").to_lowercase();
            let expansion = match dictionary().get(&key) {
                Some(exp) => exp.to_string(),
                None => match key.strip_suffix("'s") {
                    Some(stem) if !stem.is_empty() && !stem.contains('\'') => {
                        // Keep the stem exactly as written.
                        let stem_len = token.chars().count() - 2;
                        let stem: String = token.chars().take(stem_len).collect();
                        return format!("{stem} is");
                    }
                    _ => return token.to_string(),
                },
            };
            match token.chars().next() {
                Some(first) if first.is_uppercase() => capitalize(&expansion),
                _ => expansion,
            }
        })
        .into_owned()
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(expand_contractions("it's"), "it is");
        assert_eq!(expand_contractions("Amanda's car"), "Amanda is car");
        assert_eq!(expand_contractions("hello"), "hello");
    }

    #[test]
    fn capitalization_and_case() {
        assert_eq!(expand_contractions("It's late"), "It is late");
        assert_eq!(expand_contractions("IT'S late"), "It is late");
        assert_eq!(expand_contractions("i'm here"), "I am here");
        assert_eq!(expand_contractions("Don't go"), "Do not go");
        assert_eq!(expand_contractions("can’t stop"), "cannot stop");
    }

    #[test]
    fn unknown_forms_untouched() {
        assert_eq!(expand_contractions("James' hat"), "James' hat");
        assert_eq!(expand_contractions("rock'n'roll"), "rock'n'roll");
        assert_eq!(expand_contractions("'hello'"), "'hello'");
    }

    #[test]
    fn leading_apostrophe_entries() {
        assert_eq!(expand_contractions("'tis fine"), "it is fine");
        assert_eq!(expand_contractions("y'all're late"), "you all are late");
    }

    #[test]
    fn dictionary_size() {
        assert!(dictionary().len() >= 120, "{}", dictionary().len());
    }
}
