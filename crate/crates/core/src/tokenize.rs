use serde::{Deserialize, Serialize};

/// A lowercased token with the character span it came from.
///
/// `start` and `end` count Unicode scalar values (not bytes) into the raw
/// text, `end` exclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

/// Lowercases and splits on every maximal run of non-alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut start = 0;

    for (pos, ch) in text.chars().enumerate() {
        if ch.is_alphanumeric() {
            if current.is_empty() {
                start = pos;
            }
            current.push(ch);
        } else if !current.is_empty() {
            tokens.push(Token {
                text: std::mem::take(&mut current).to_lowercase(),
                start,
                end: pos,
            });
        }
    }
    if !current.is_empty() {
        tokens.push(Token {
            text: current.to_lowercase(),
            start,
            end: text.chars().count(),
        });
    }
    tokens
}

/// Just the token strings.
pub fn terms(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(|t| t.text).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(terms("What is BM25?"), ["what", "is", "bm25"]);
        assert!(terms("").is_empty());
        assert_eq!(terms("state-of-the-art"), ["state", "of", "the", "art"]);
        assert!(terms(" -- ?! ").is_empty());
    }

    #[test]
    fn offsets_count_characters() {
        let toks = tokenize("Café au lait");
        assert_eq!(toks[0], Token { text: "café".into(), start: 0, end: 4 });
        assert_eq!(toks[1].start, 5);
        assert_eq!(toks[2], Token { text: "lait".into(), start: 8, end: 12 });
    }

    proptest! {
        #[test]
        fn offsets_reproduce_tokens(text in "\\PC{0,60}") {
            let chars: Vec<char> = text.chars().collect();
            let toks = tokenize(&text);
            prop_assert_eq!(&toks, &tokenize(&text));
            for tok in toks {
                prop_assert!(tok.start < tok.end);
                let span: String = chars[tok.start..tok.end].iter().collect();
                prop_assert_eq!(span.to_lowercase(), tok.text);
            }
        }
    }
}
