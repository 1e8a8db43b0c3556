use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub position: usize,
}

/// Emoticons the tokenizer keeps whole. Matched case-insensitively.
pub const EMOTICONS: &[&str] = &[
    ":)", ":-)", ":(", ":-(", ":d", ":-d", ";)", ";-)", ":p", ":-p", ":'(", "<3", ":/", ":-/",
    ":o", "xd", ":]", ":[", "=)", "=(", ":|",
];

const TRAILING_PUNCT: &[char] = &['.', ',', '!', '?', ';'];

pub fn is_emoticon(s: &str) -> bool {
    EMOTICONS.iter().any(|e| e.eq_ignore_ascii_case(s))
}

/// True for a token made only of sentence punctuation (`.,!?;`).
pub fn is_sentence_punct(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| TRAILING_PUNCT.contains(&c))
}

/// Digits with at most one inner `.` or `:` separator, e.g. `2`, `3.5`, `8:30`.
pub fn is_numeric_token(s: &str) -> bool {
    let bytes = s.as_bytes();
    if bytes.is_empty() || !bytes[0].is_ascii_digit() || !bytes[bytes.len() - 1].is_ascii_digit() {
        return false;
    }
    let mut separators = 0;
    for &b in bytes {
        match b {
            b'0'..=b'9' => {}
            b'.' | b':' => separators += 1,
            _ => return false,
        }
    }
    separators <= 1
}

fn dehyphenate(core: &str) -> String {
    let alpha_hyphen = core.chars().all(|c| c.is_ascii_alphabetic() || c == '-');
    let starts = core.chars().next().is_some_and(|c| c.is_ascii_alphabetic());
    let ends = core.chars().last().is_some_and(|c| c.is_ascii_alphabetic());
    if alpha_hyphen && starts && ends && core.contains('-') {
        core.replace('-', "")
    } else {
        core.to_string()
    }
}

/// Splits normalized text into tokens.
///
/// Whitespace separates chunks. Trailing `.,!?;` characters become their own
/// tokens, a leading `$` is split off, hyphens between letters are dropped
/// (`back-up` becomes `backup`) and emoticons stay whole.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut surfaces: Vec<String> = Vec::new();
    for chunk in text.split_whitespace() {
        if is_emoticon(chunk) {
            surfaces.push(chunk.to_string());
            continue;
        }
        let mut rest = chunk;
        while rest.len() > 1 && rest.starts_with('$') {
            surfaces.push("$".to_string());
            rest = &rest[1..];
        }
        if is_emoticon(rest) {
            surfaces.push(rest.to_string());
            continue;
        }
        let core = rest.trim_end_matches(TRAILING_PUNCT);
        let trailing = &rest[core.len()..];
        if !core.is_empty() {
            surfaces.push(dehyphenate(core));
        }
        surfaces.extend(trailing.chars().map(String::from));
    }
    surfaces
        .into_iter()
        .enumerate()
        .map(|(position, surface)| Token { surface, position })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn surfaces(text: &str) -> Vec<String> {
        tokenize(text).into_iter().map(|t| t.surface).collect()
    }

    #[test]
    fn clock_time_and_units_stay_intact() {
        assert_eq!(
            surfaces("8:30 am meetings are the best"),
            ["8:30", "am", "meetings", "are", "the", "best"]
        );
    }

    #[test]
    fn punctuation_is_split() {
        assert_eq!(surfaces("fun!"), ["fun", "!"]);
        assert_eq!(surfaces("really?!"), ["really", "?", "!"]);
        assert_eq!(surfaces("3.5."), ["3.5", "."]);
    }

    #[test]
    fn empty_text_has_no_tokens() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("   ").is_empty());
    }

    #[test]
    fn emoticons_and_currency() {
        assert_eq!(surfaces("great :( really"), ["great", ":(", "really"]);
        assert_eq!(surfaces("$34.04 for"), ["$", "34.04", "for"]);
        assert_eq!(surfaces("<3"), ["<3"]);
    }

    #[test]
    fn hyphen_inside_words_is_removed() {
        assert_eq!(surfaces("battery back-up of"), ["battery", "backup", "of"]);
        assert_eq!(surfaces("10-minute"), ["10-minute"]);
    }

    #[test]
    fn positions_increase() {
        let toks = tokenize("a b, c!");
        let pos: Vec<usize> = toks.iter().map(|t| t.position).collect();
        assert_eq!(pos, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn numeric_pattern() {
        for s in ["2", "545", "3.5", "8:30", "34.04"] {
            assert!(is_numeric_token(s), "{s}");
        }
        for s in ["model34d", "4s", "<3", "1.2.3", "8:30:00", ".5", "5.", "", "1:2.3"] {
            assert!(!is_numeric_token(s), "{s}");
        }
    }

    proptest! {
        #[test]
        fn retokenizing_joined_tokens_is_stable(text in "[a-z0-9 .,!?;:$()<3'-]{0,40}") {
            let first = surfaces(&text);
            let joined = first.join(" ");
            prop_assert_eq!(surfaces(&joined), first);
        }
    }
}
