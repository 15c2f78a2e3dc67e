//! Rule tokenizer and a small suffix stemmer.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::lexicons::CategoryId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TokenKind {
    Word,
    Number,
    Punct,
}

/// One token. `start`/`end` are char offsets into the sentence text,
/// end-exclusive. Category and content flags are filled by annotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lower: String,
    pub stem: String,
    pub start: usize,
    pub end: usize,
    pub kind: TokenKind,
    #[serde(default)]
    pub is_content: bool,
    #[serde(default)]
    pub is_noun_candidate: bool,
    #[serde(default)]
    pub categories: BTreeSet<CategoryId>,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Numbers look like `\d[\d.,]*%?`: digits with internal dots/commas and an
/// optional trailing percent sign.
fn is_number_surface(s: &str) -> bool {
    let mut chars = s.chars();
    let Some(first) = chars.next() else {
        return false;
    };
    if !first.is_ascii_digit() {
        return false;
    }
    let rest: Vec<char> = chars.collect();
    for (i, c) in rest.iter().enumerate() {
        let ok = c.is_ascii_digit()
            || *c == '.'
            || *c == ','
            || (*c == '%' && i == rest.len() - 1);
        if !ok {
            return false;
        }
    }
    true
}

/// Split one sentence into Word, Number, and Punct tokens.
///
/// Hyphens and apostrophes stay inside a token when flanked by word
/// characters; dots and commas stay inside when flanked by digits. Every
/// non-whitespace char lands in exactly one token.
pub fn tokenize(sentence: &str) -> Vec<Token> {
    let chars: Vec<char> = sentence.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0usize;

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if is_word_char(c) {
            let start = i;
            i += 1;
            loop {
                let Some(&next) = chars.get(i) else { break };
                if is_word_char(next) {
                    i += 1;
                    continue;
                }
                let joins_words = (next == '-' || next == '\'' || next == '\u{2019}')
                    && chars.get(i + 1).copied().is_some_and(is_word_char);
                let joins_digits = (next == '.' || next == ',')
                    && chars[i - 1].is_ascii_digit()
                    && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit());
                if joins_words || joins_digits {
                    i += 2;
                    continue;
                }
                break;
            }
            let mut surface: String = chars[start..i].iter().collect();
            if chars.get(i) == Some(&'%') && is_number_surface(&surface) {
                surface.push('%');
                i += 1;
            }
            let end = i;
            let kind = if is_number_surface(&surface) {
                TokenKind::Number
            } else {
                TokenKind::Word
            };
            let lower = surface.to_lowercase();
            let stem = match kind {
                TokenKind::Word => stem(&lower),
                _ => lower.clone(),
            };
            tokens.push(Token {
                surface,
                lower,
                stem,
                start,
                end,
                kind,
                is_content: false,
                is_noun_candidate: false,
                categories: BTreeSet::new(),
            });
        } else {
            let surface: String = chars[i..i + 1].iter().collect();
            tokens.push(Token {
                lower: surface.clone(),
                stem: String::new(),
                surface,
                start: i,
                end: i + 1,
                kind: TokenKind::Punct,
                is_content: false,
                is_noun_candidate: false,
                categories: BTreeSet::new(),
            });
            i += 1;
        }
    }
    tokens
}

const VOWELS: &[char] = &['a', 'e', 'i', 'o', 'u'];

fn undouble(base: &str) -> String {
    let chars: Vec<char> = base.chars().collect();
    let n = chars.len();
    if n >= 2 && chars[n - 1] == chars[n - 2] {
        let c = chars[n - 1];
        if c.is_alphabetic() && !VOWELS.contains(&c) && !matches!(c, 'l' | 's' | 'z') {
            return chars[..n - 1].iter().collect();
        }
    }
    base.to_string()
}

/// First-match suffix stripper over lowercased words. Rules in order:
/// `ies -> y`; `es -> ()` after s, x, z, ch, sh; `s -> ()` unless `ss`;
/// `ed -> ()` and `ing -> ()` with doubled-consonant repair. A candidate
/// shorter than three chars is discarded and the input returned unchanged.
pub fn stem(word: &str) -> String {
    let candidate = if let Some(base) = word.strip_suffix("ies") {
        format!("{base}y")
    } else if let Some(base) = word.strip_suffix("es").filter(|b| {
        b.ends_with('s') || b.ends_with('x') || b.ends_with('z') || b.ends_with("ch") || b.ends_with("sh")
    }) {
        base.to_string()
    } else if word.ends_with('s') && !word.ends_with("ss") {
        word[..word.len() - 1].to_string()
    } else if let Some(base) = word.strip_suffix("ed") {
        undouble(base)
    } else if let Some(base) = word.strip_suffix("ing") {
        undouble(base)
    } else {
        return word.to_string();
    };
    if candidate.chars().count() >= 3 {
        candidate
    } else {
        word.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surfaces(s: &str) -> Vec<String> {
        tokenize(s).into_iter().map(|t| t.surface).collect()
    }

    #[test]
    fn splits_words_numbers_punct() {
        let toks = tokenize("Rates rose 3.5% by 2020, notably.");
        let kinds: Vec<TokenKind> = toks.iter().map(|t| t.kind).collect();
        assert_eq!(
            surfaces("Rates rose 3.5% by 2020, notably."),
            vec!["Rates", "rose", "3.5%", "by", "2020", ",", "notably", "."]
        );
        assert_eq!(
            kinds,
            vec![
                TokenKind::Word,
                TokenKind::Word,
                TokenKind::Number,
                TokenKind::Word,
                TokenKind::Number,
                TokenKind::Punct,
                TokenKind::Word,
                TokenKind::Punct,
            ]
        );
    }

    #[test]
    fn internal_hyphen_and_apostrophe_join() {
        assert_eq!(surfaces("well-known don't"), vec!["well-known", "don't"]);
        assert_eq!(surfaces("trailing- end"), vec!["trailing", "-", "end"]);
    }

    #[test]
    fn offsets_cover_every_non_space_char() {
        let text = "A 3.5% rise, e.g. well-known cases!";
        let chars: Vec<char> = text.chars().collect();
        let toks = tokenize(text);
        let mut covered = vec![false; chars.len()];
        for t in &toks {
            assert_eq!(
                t.surface,
                chars[t.start..t.end].iter().collect::<String>()
            );
            for slot in &mut covered[t.start..t.end] {
                assert!(!*slot, "tokens overlap");
                *slot = true;
            }
        }
        for (i, c) in chars.iter().enumerate() {
            assert_eq!(covered[i], !c.is_whitespace(), "char {i} `{c}`");
        }
    }

    #[test]
    fn stem_examples() {
        assert_eq!(stem("studies"), "study");
        assert_eq!(stem("boxes"), "box");
        assert_eq!(stem("classes"), "class");
        assert_eq!(stem("cats"), "cat");
        assert_eq!(stem("running"), "run");
        assert_eq!(stem("stopped"), "stop");
        assert_eq!(stem("treated"), "treat");
        assert_eq!(stem("falling"), "fall");
        assert_eq!(stem("is"), "is");
        assert_eq!(stem("as"), "as");
        assert_eq!(stem("glass"), "glass");
        assert_eq!(stem("buzzing"), "buzz");
    }

    #[test]
    fn stem_is_idempotent_on_common_words() {
        for w in ["study", "box", "run", "virus", "analysis", "care"] {
            assert_eq!(stem(&stem(w)), stem(w));
        }
    }

    #[test]
    fn number_with_trailing_percent_only() {
        assert_eq!(surfaces("50% x% 3,200"), vec!["50%", "x", "%", "3,200"]);
        let toks = tokenize("50% 3,200");
        assert!(toks.iter().all(|t| t.kind == TokenKind::Number));
    }
}
