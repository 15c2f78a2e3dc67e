//! Sentence segmentation over cleaned (single-line) text.

/// Lowercased abbreviations whose trailing period never ends a sentence.
const ABBREVIATIONS: &[&str] = &[
    "al.", "approx.", "ca.", "cf.", "dr.", "e.g.", "eq.", "eqs.", "etc.", "fig.", "figs.", "i.e.",
    "no.", "ref.", "refs.", "resp.", "vol.", "vs.",
];

fn is_abbreviation(word: &str) -> bool {
    let lower = word.to_ascii_lowercase();
    ABBREVIATIONS.contains(&lower.as_str())
}

/// Split on `.`, `?`, `!` followed by whitespace and an uppercase letter (or
/// end of text). A period is kept inside the sentence when it sits between
/// digits (decimals) or closes a known abbreviation.
pub fn segment(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;

    for i in 0..chars.len() {
        let c = chars[i];
        if c != '.' && c != '?' && c != '!' {
            continue;
        }

        if c == '.' {
            let prev_digit = i > 0 && chars[i - 1].is_ascii_digit();
            let next_digit = chars.get(i + 1).is_some_and(|n| n.is_ascii_digit());
            if prev_digit && next_digit {
                continue;
            }
            // The whitespace-delimited word this period closes.
            let word_start = chars[start..i]
                .iter()
                .rposition(|ch| ch.is_whitespace())
                .map(|p| start + p + 1)
                .unwrap_or(start);
            let word: String = chars[word_start..=i].iter().collect();
            if is_abbreviation(&word) {
                continue;
            }
        }

        let mut j = i + 1;
        while j < chars.len() && chars[j].is_whitespace() {
            j += 1;
        }
        let at_end = j == chars.len();
        let next_upper = !at_end && j > i + 1 && chars[j].is_uppercase();
        if at_end || next_upper {
            let sentence: String = chars[start..=i].iter().collect();
            let trimmed = sentence.trim();
            if !trimmed.is_empty() {
                sentences.push(trimmed.to_string());
            }
            start = j;
        }
    }

    if start < chars.len() {
        let tail: String = chars[start..].iter().collect();
        let trimmed = tail.trim();
        if !trimmed.is_empty() {
            sentences.push(trimmed.to_string());
        }
    }
    sentences
}
