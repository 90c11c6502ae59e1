//! Shared corpus tokenizer and sentence splitting.
//!
//! Every n-gram metric, the event extractor and the model vocabulary go
//! through [`tokenize`], so changing it changes all of them together.

/// Name placeholders produced by delexicalization. They are kept verbatim
/// (never lowercased or split) by the tokenizer.
pub const NAME_PLACEHOLDERS: [&str; 3] = ["[MALE]", "[FEMALE]", "[NEUTRAL]"];

const LEADING_PUNCT: &[char] = &['"', '\'', '(', '[', '{', '`', '\u{201c}', '\u{2018}'];
const TRAILING_PUNCT: &[char] = &[
    '.', ',', '!', '?', ';', ':', '"', '\'', ')', ']', '}', '`', '\u{201d}', '\u{2019}',
];
const CLITICS: &[&str] = &["n't", "'s", "'re", "'ve", "'ll", "'d", "'m"];

/// True for tokens that must pass through tokenization untouched:
/// name placeholders, event markers (`<e_s>`) and sentence separators
/// (`[sep_3]`).
pub fn is_protected_token(tok: &str) -> bool {
    if NAME_PLACEHOLDERS.contains(&tok) {
        return true;
    }
    let angle = tok.len() > 2 && tok.starts_with('<') && tok.ends_with('>');
    let sep = tok.starts_with("[sep_") && tok.ends_with(']');
    angle || sep
}

fn normalize_quotes(s: &str) -> String {
    s.replace(['\u{2019}', '\u{2018}'], "'")
        .replace(['\u{201c}', '\u{201d}'], "\"")
}

/// Split one whitespace-delimited chunk into word and punctuation tokens,
/// keeping case.
fn split_chunk(chunk: &str, out: &mut Vec<String>) {
    if is_protected_token(chunk) || CLITICS.contains(&chunk.to_lowercase().as_str()) {
        out.push(chunk.to_string());
        return;
    }
    let mut rest = chunk;
    while let Some(c) = rest.chars().next() {
        let at_placeholder = NAME_PLACEHOLDERS.iter().any(|ph| rest.starts_with(ph));
        if LEADING_PUNCT.contains(&c) && rest.len() > c.len_utf8() && !at_placeholder {
            out.push(c.to_string());
            rest = &rest[c.len_utf8()..];
        } else {
            break;
        }
    }
    // a placeholder may be glued to punctuation, e.g. "[MALE]'s" or "[MALE]."
    for ph in NAME_PLACEHOLDERS {
        if let Some(tail) = rest.strip_prefix(ph) {
            out.push(ph.to_string());
            if !tail.is_empty() {
                split_chunk(tail, out);
            }
            return;
        }
    }

    let mut trailing = Vec::new();
    loop {
        if rest.ends_with("...") && rest.len() > 3 {
            trailing.push("...".to_string());
            rest = &rest[..rest.len() - 3];
            continue;
        }
        match rest.chars().last() {
            Some(c) if TRAILING_PUNCT.contains(&c) && rest.len() > c.len_utf8() => {
                trailing.push(c.to_string());
                rest = &rest[..rest.len() - c.len_utf8()];
            }
            _ => break,
        }
    }

    let lower = rest.to_lowercase();
    let mut clitic = None;
    for cl in CLITICS {
        if lower.len() > cl.len() && lower.ends_with(cl) {
            clitic = Some(cl.len());
            break;
        }
    }
    match clitic {
        Some(len) => {
            let cut = rest.len() - len;
            out.push(rest[..cut].to_string());
            out.push(rest[cut..].to_string());
        }
        None => {
            if !rest.is_empty() {
                out.push(rest.to_string());
            }
        }
    }
    out.extend(trailing.into_iter().rev());
}

/// Tokenize text keeping the original casing. Used before delexicalization,
/// which matches capitalized names.
pub fn tokenize_cased(text: &str) -> Vec<String> {
    let text = normalize_quotes(&text.replace("<newline>", " "));
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        split_chunk(chunk, &mut out);
    }
    out
}

/// Lowercase a token unless it is protected.
pub fn normalize_token(tok: &str) -> String {
    if is_protected_token(tok) {
        tok.to_string()
    } else {
        tok.to_lowercase()
    }
}

/// The shared corpus tokenizer: PTB-style punctuation and clitic splitting,
/// lowercased, placeholders and special tokens kept as single tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_cased(text)
        .iter()
        .map(|t| normalize_token(t))
        .collect()
}

/// Join tokens back into display text.
pub fn detokenize(tokens: &[String]) -> String {
    tokens.join(" ")
}

/// Pluggable sentence splitter.
pub trait SentenceSplitter: Send + Sync {
    fn split(&self, text: &str) -> Vec<String>;
}

/// Punctuation-driven splitter with an abbreviation list.
///
/// A boundary is a `.`, `!` or `?` (optionally followed by closing quotes or
/// brackets) followed by whitespace and a token that starts with an
/// uppercase letter, a digit, an opening quote or a placeholder bracket.
#[derive(Debug, Clone, Default)]
pub struct RuleSplitter;

const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "st", "jr", "sr", "vs", "etc", "e.g", "i.e", "a.m", "p.m", "u.s",
    "mt", "prof", "inc", "ltd", "co",
];

fn is_abbreviation(word: &str) -> bool {
    let w = word
        .trim_start_matches(LEADING_PUNCT)
        .trim_end_matches('.')
        .to_lowercase();
    if ABBREVIATIONS.contains(&w.as_str()) {
        return true;
    }
    // single initial like "J."
    w.chars().count() == 1 && w.chars().all(|c| c.is_alphabetic())
}

impl SentenceSplitter for RuleSplitter {
    fn split(&self, text: &str) -> Vec<String> {
        let text = text.replace("<newline>", " ");
        let chunks: Vec<&str> = text.split_whitespace().collect();
        let mut sentences = Vec::new();
        let mut current: Vec<&str> = Vec::new();
        for (i, chunk) in chunks.iter().enumerate() {
            current.push(chunk);
            let stripped = chunk.trim_end_matches(['"', '\'', ')', ']', '\u{201d}', '\u{2019}']);
            let ends = stripped.ends_with(['.', '!', '?']);
            if !ends {
                continue;
            }
            let is_abbrev = stripped.ends_with('.')
                && !stripped.ends_with("..")
                && is_abbreviation(stripped);
            let next_starts = match chunks.get(i + 1) {
                None => true,
                Some(next) => {
                    let c = next.chars().next().unwrap_or(' ');
                    c.is_uppercase()
                        || c.is_ascii_digit()
                        || matches!(c, '"' | '\'' | '(' | '[' | '\u{201c}' | '\u{2018}')
                }
            };
            if next_starts && !is_abbrev {
                sentences.push(current.join(" "));
                current.clear();
            }
        }
        if !current.is_empty() {
            sentences.push(current.join(" "));
        }
        sentences
    }
}

/// Contiguous n-grams of a token sequence.
pub fn ngrams(tokens: &[String], n: usize) -> impl Iterator<Item = &[String]> {
    let count = if n == 0 || tokens.len() < n {
        0
    } else {
        tokens.len() - n + 1
    };
    (0..count).map(move |i| &tokens[i..i + n])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        tokenize(s)
    }

    #[test]
    fn splits_punctuation_and_clitics() {
        assert_eq!(
            toks("Ken didn't drive his car."),
            vec!["ken", "did", "n't", "drive", "his", "car", "."]
        );
        assert_eq!(toks("\"Wow!\" she said"), vec!["\"", "wow", "!", "\"", "she", "said"]);
        assert_eq!(toks("[MALE]'s dog"), vec!["[MALE]", "'s", "dog"]);
    }

    #[test]
    fn keeps_special_tokens() {
        assert_eq!(
            toks("<e_s> ran <e_sep> fell <e_e> [sep_1]"),
            vec!["<e_s>", "ran", "<e_sep>", "fell", "<e_e>", "[sep_1]"]
        );
        assert_eq!(toks("[FEMALE] met [NEUTRAL]."), vec!["[FEMALE]", "met", "[NEUTRAL]", "."]);
    }

    #[test]
    fn splitter_handles_abbreviations() {
        let s = RuleSplitter.split("Mr. Smith went home. He slept! Then? no more");
        assert_eq!(s, vec!["Mr. Smith went home.", "He slept!", "Then? no more"]);
    }

    #[test]
    fn splitter_respects_quotes_and_placeholders() {
        let s = RuleSplitter.split("She yelled. \"Stop!\" [MALE] stopped.");
        assert_eq!(s, vec!["She yelled.", "\"Stop!\"", "[MALE] stopped."]);
    }

    #[test]
    fn ngram_windows() {
        let t = toks("a b c d");
        assert_eq!(ngrams(&t, 2).count(), 3);
        assert_eq!(ngrams(&t, 5).count(), 0);
        assert_eq!(ngrams(&t, 0).count(), 0);
    }
}
