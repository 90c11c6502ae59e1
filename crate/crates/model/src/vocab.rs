//! Word-level vocabulary with the reserved special tokens.

use std::collections::{BTreeMap, HashMap};

use eventstory_core::events::{EVENT_END, EVENT_NONE, EVENT_SEP, EVENT_START};
use eventstory_core::text::NAME_PLACEHOLDERS;
use serde::{Deserialize, Serialize};

use crate::ModelError;

pub const PAD: &str = "<pad>";
pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

/// Sentence separators `[sep_1]` .. `[sep_N]`.
pub const MAX_SENTENCE_SEPARATORS: usize = 10;

pub const PAD_ID: u32 = 0;
pub const BOS_ID: u32 = 1;
pub const EOS_ID: u32 = 2;
pub const UNK_ID: u32 = 3;

pub fn sentence_separator(index: usize) -> String {
    format!("[sep_{index}]")
}

/// Every reserved token, in id order.
pub fn special_tokens() -> Vec<String> {
    let mut out: Vec<String> = [PAD, BOS, EOS, UNK, EVENT_START, EVENT_SEP, EVENT_END, EVENT_NONE]
        .iter()
        .map(|s| s.to_string())
        .collect();
    out.extend((1..=MAX_SENTENCE_SEPARATORS).map(sentence_separator));
    out.extend(NAME_PLACEHOLDERS.iter().map(|s| s.to_string()));
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "Vec<String>", try_from = "Vec<String>")]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocab {
    /// Specials first, then words by descending frequency (ties broken
    /// alphabetically) so the ids do not depend on input order.
    pub fn build<'a, I>(tokens: I, min_count: usize) -> Vocab
    where
        I: IntoIterator<Item = &'a String>,
    {
        let specials = special_tokens();
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for t in tokens {
            *counts.entry(t.as_str()).or_insert(0) += 1;
        }
        let mut words: Vec<(&str, usize)> = counts
            .into_iter()
            .filter(|(w, c)| *c >= min_count.max(1) && !specials.iter().any(|s| s == w))
            .collect();
        words.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let mut all = specials;
        all.extend(words.into_iter().map(|(w, _)| w.to_string()));
        Vocab::from_tokens(all).expect("specials are unique")
    }

    pub fn from_tokens(tokens: Vec<String>) -> Result<Vocab, ModelError> {
        let specials = special_tokens();
        if tokens.len() < specials.len() || tokens[..specials.len()] != specials[..] {
            return Err(ModelError::Vocab("special tokens missing or out of order".into()));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i as u32).is_some() {
                return Err(ModelError::Vocab(format!("duplicate token '{t}'")));
            }
        }
        Ok(Vocab { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn get(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<u32> {
        tokens.iter().map(|t| self.id(t.as_ref())).collect()
    }

    pub fn decode(&self, ids: &[u32]) -> Vec<String> {
        ids.iter()
            .map(|&i| self.token(i).unwrap_or(UNK).to_string())
            .collect()
    }

    pub fn separator_id(&self, index: usize) -> u32 {
        self.id(&sentence_separator(index.clamp(1, MAX_SENTENCE_SEPARATORS)))
    }

    /// Reserved tokens that never appear in returned story text. Name
    /// placeholders are story content and are not included.
    pub fn is_control(&self, id: u32) -> bool {
        let n_control = special_tokens().len() - NAME_PLACEHOLDERS.len();
        (id as usize) < n_control
    }

    pub fn is_separator(&self, id: u32) -> bool {
        self.token(id).is_some_and(|t| t.starts_with("[sep_"))
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

impl From<Vocab> for Vec<String> {
    fn from(v: Vocab) -> Vec<String> {
        v.tokens
    }
}

impl TryFrom<Vec<String>> for Vocab {
    type Error = ModelError;
    fn try_from(tokens: Vec<String>) -> Result<Self, Self::Error> {
        Vocab::from_tokens(tokens)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_stable_and_specials_reserved() {
        let words: Vec<String> = "b a b c [MALE] a b".split(' ').map(String::from).collect();
        let v = Vocab::build(&words, 1);
        let n = special_tokens().len();
        assert_eq!(v.token(PAD_ID), Some(PAD));
        assert_eq!(v.token(EOS_ID), Some(EOS));
        assert_eq!(v.token(n as u32), Some("b"));
        assert_eq!(v.token(n as u32 + 1), Some("a"));
        assert_eq!(v.len(), n + 3);
        assert_eq!(v.id("zzz"), UNK_ID);
        assert!(v.is_control(v.id("[sep_3]")));
        assert!(!v.is_control(v.id("[MALE]")));
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(serde_json::from_str::<Vocab>(&json).unwrap(), v);
    }
}
