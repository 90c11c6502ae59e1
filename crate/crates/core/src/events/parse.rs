//! Dependency parses and the parser-provider interface.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::CorpusError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("cannot parse an empty sentence")]
    EmptySentence,
    #[error("parser provider failed: {0}")]
    Provider(String),
    #[error("no parse available for sentence: {0}")]
    Missing(String),
    #[error("invalid dependency tree: {0}")]
    InvalidTree(String),
}

/// Coarse part of speech (Universal POS tags).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Pos {
    Noun,
    Propn,
    Pron,
    Verb,
    Aux,
    Adj,
    Adv,
    Adp,
    Det,
    Part,
    Cconj,
    Sconj,
    Num,
    Punct,
    Intj,
    X,
}

impl Pos {
    pub fn from_upos(tag: &str) -> Pos {
        match tag {
            "NOUN" => Pos::Noun,
            "PROPN" => Pos::Propn,
            "PRON" => Pos::Pron,
            "VERB" => Pos::Verb,
            "AUX" => Pos::Aux,
            "ADJ" => Pos::Adj,
            "ADV" => Pos::Adv,
            "ADP" => Pos::Adp,
            "DET" => Pos::Det,
            "PART" => Pos::Part,
            "CCONJ" | "CONJ" => Pos::Cconj,
            "SCONJ" => Pos::Sconj,
            "NUM" => Pos::Num,
            "PUNCT" => Pos::Punct,
            "INTJ" => Pos::Intj,
            _ => Pos::X,
        }
    }

    pub fn is_verbal(self) -> bool {
        matches!(self, Pos::Verb | Pos::Aux)
    }
}

/// A token as seen from one end of an arc.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenRef {
    pub surface: String,
    pub lemma: String,
    /// 0-based position in the sentence.
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedToken {
    pub surface: String,
    pub lemma: String,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyArc {
    pub head: TokenRef,
    pub tail: TokenRef,
    pub label: String,
}

/// A rooted dependency tree over one sentence. `arcs` holds every non-root
/// attachment; the root has no incoming arc.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyParse {
    pub tokens: Vec<ParsedToken>,
    pub root: usize,
    pub arcs: Vec<DependencyArc>,
}

impl DependencyParse {
    /// Build from per-token heads (`None` for the root) and labels.
    pub fn from_heads(
        tokens: Vec<ParsedToken>,
        heads: &[Option<usize>],
        labels: &[String],
    ) -> Result<Self, ParseError> {
        if tokens.is_empty() {
            return Err(ParseError::EmptySentence);
        }
        if heads.len() != tokens.len() || labels.len() != tokens.len() {
            return Err(ParseError::InvalidTree("heads/labels length mismatch".into()));
        }
        let roots: Vec<usize> = heads
            .iter()
            .enumerate()
            .filter(|(_, h)| h.is_none())
            .map(|(i, _)| i)
            .collect();
        let [root] = roots[..] else {
            return Err(ParseError::InvalidTree(format!("expected one root, found {}", roots.len())));
        };
        let token_ref = |i: usize| TokenRef {
            surface: tokens[i].surface.clone(),
            lemma: tokens[i].lemma.clone(),
            index: i,
        };
        let mut arcs = Vec::with_capacity(tokens.len() - 1);
        for (tail, head) in heads.iter().enumerate() {
            if let Some(head) = *head {
                arcs.push(DependencyArc {
                    head: token_ref(head),
                    tail: token_ref(tail),
                    label: labels[tail].clone(),
                });
            }
        }
        let parse = DependencyParse { tokens, root, arcs };
        parse.validate()?;
        Ok(parse)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Head index of every token (`None` for the root).
    pub fn heads(&self) -> Vec<Option<usize>> {
        let mut heads = vec![None; self.tokens.len()];
        for arc in &self.arcs {
            heads[arc.tail.index] = Some(arc.head.index);
        }
        heads
    }

    /// Arcs whose head is `index`.
    pub fn children(&self, index: usize) -> impl Iterator<Item = &DependencyArc> {
        self.arcs.iter().filter(move |a| a.head.index == index)
    }

    /// Check the tree invariants: indices in bounds, no self loops, exactly
    /// one head per non-root token, and every token reaches the root.
    pub fn validate(&self) -> Result<(), ParseError> {
        let n = self.tokens.len();
        if self.root >= n {
            return Err(ParseError::InvalidTree("root out of bounds".into()));
        }
        let mut heads = vec![None; n];
        for arc in &self.arcs {
            let (h, t) = (arc.head.index, arc.tail.index);
            if h >= n || t >= n {
                return Err(ParseError::InvalidTree(format!("arc {h}->{t} out of bounds")));
            }
            if h == t {
                return Err(ParseError::InvalidTree(format!("self loop at {h}")));
            }
            if t == self.root {
                return Err(ParseError::InvalidTree("root has a head".into()));
            }
            if heads[t].replace(h).is_some() {
                return Err(ParseError::InvalidTree(format!("token {t} has two heads")));
            }
        }
        for (t, head) in heads.iter().enumerate() {
            if t != self.root && head.is_none() {
                return Err(ParseError::InvalidTree(format!("token {t} has no head")));
            }
        }
        for start in 0..n {
            let mut cur = start;
            let mut steps = 0;
            while cur != self.root {
                cur = heads[cur].expect("checked above");
                steps += 1;
                if steps > n {
                    return Err(ParseError::InvalidTree(format!("cycle through token {start}")));
                }
            }
        }
        Ok(())
    }
}

/// A dependency parser provider. Implementations must be deterministic.
pub trait DependencyParser: Send + Sync {
    /// Provider name and pinned version, recorded in manifests.
    fn version(&self) -> String;

    fn parse(&self, tokens: &[String]) -> Result<DependencyParse, ParseError>;
}

/// Map dependency labels from other annotation schemes onto the
/// ClearNLP/Stanford names used by the event schema.
pub fn canonical_label(label: &str) -> &str {
    match label {
        "compound:prt" => "prt",
        "obj" => "dobj",
        "obl:agent" => "agent",
        other => other,
    }
}

/// Looks up pre-computed parses read from a CoNLL-U file, keyed by the
/// lowercased, space-joined token sequence.
#[derive(Debug, Clone, Default)]
pub struct ConlluParser {
    parses: HashMap<String, DependencyParse>,
    source: String,
}

fn sentence_key<S: AsRef<str>>(tokens: &[S]) -> String {
    tokens
        .iter()
        .map(|t| crate::text::normalize_token(t.as_ref()))
        .collect::<Vec<_>>()
        .join(" ")
}

/// One sentence block of a CoNLL-U file with its `#` comment lines.
#[derive(Debug, Clone)]
pub struct ConlluSentence {
    pub comments: Vec<(String, String)>,
    pub parse: DependencyParse,
}

impl ConlluSentence {
    pub fn comment(&self, key: &str) -> Option<&str> {
        self.comments
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

/// Parse CoNLL-U text. Multiword-token and empty-node lines are skipped.
/// Comments of the form `# key = value` are kept.
pub fn read_conllu(text: &str) -> Result<Vec<ConlluSentence>, ParseError> {
    let mut out = Vec::new();
    let mut comments = Vec::new();
    let mut tokens = Vec::new();
    let mut heads = Vec::new();
    let mut labels = Vec::new();
    let mut flush = |comments: &mut Vec<(String, String)>,
                     tokens: &mut Vec<ParsedToken>,
                     heads: &mut Vec<Option<usize>>,
                     labels: &mut Vec<String>|
     -> Result<(), ParseError> {
        if tokens.is_empty() {
            comments.clear();
            return Ok(());
        }
        let parse = DependencyParse::from_heads(std::mem::take(tokens), heads, labels)?;
        heads.clear();
        labels.clear();
        out.push(ConlluSentence {
            comments: std::mem::take(comments),
            parse,
        });
        Ok(())
    };
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() {
            flush(&mut comments, &mut tokens, &mut heads, &mut labels)?;
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            if let Some((k, v)) = c.split_once('=') {
                comments.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 8 {
            return Err(ParseError::Provider(format!(
                "line {}: expected 10 tab-separated columns",
                lineno + 1
            )));
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let bad = |what: &str| ParseError::Provider(format!("line {}: bad {what}", lineno + 1));
        let id: usize = cols[0].parse().map_err(|_| bad("id"))?;
        if id != tokens.len() + 1 {
            return Err(bad("token order"));
        }
        let head: usize = cols[6].parse().map_err(|_| bad("head"))?;
        let surface = crate::text::normalize_token(cols[1]);
        let lemma = if cols[2] == "_" { surface.clone() } else { crate::text::normalize_token(cols[2]) };
        tokens.push(ParsedToken {
            surface,
            lemma,
            pos: Pos::from_upos(cols[3]),
        });
        heads.push(head.checked_sub(1));
        labels.push(canonical_label(&cols[7].to_lowercase()).to_string());
    }
    flush(&mut comments, &mut tokens, &mut heads, &mut labels)?;
    Ok(out)
}

impl ConlluParser {
    pub fn from_text(text: &str, source: &str) -> Result<Self, ParseError> {
        let mut parser = ConlluParser {
            parses: HashMap::new(),
            source: source.to_string(),
        };
        for sentence in read_conllu(text)? {
            let surfaces: Vec<&str> = sentence.parse.tokens.iter().map(|t| t.surface.as_str()).collect();
            parser.parses.insert(sentence_key(&surfaces), sentence.parse);
        }
        Ok(parser)
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        if !path.exists() {
            return Err(CorpusError::MissingInput(path.to_path_buf()));
        }
        let text = fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
        Self::from_text(&text, &path.display().to_string()).map_err(|e| CorpusError::Json {
            path: path.to_path_buf(),
            line: 0,
            message: e.to_string(),
        })
    }

    pub fn len(&self) -> usize {
        self.parses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parses.is_empty()
    }
}

impl DependencyParser for ConlluParser {
    fn version(&self) -> String {
        format!("conllu:{}", self.source)
    }

    fn parse(&self, tokens: &[String]) -> Result<DependencyParse, ParseError> {
        if tokens.is_empty() {
            return Err(ParseError::EmptySentence);
        }
        let key = sentence_key(tokens);
        self.parses.get(&key).cloned().ok_or(ParseError::Missing(key))
    }
}

/// Tries each provider in turn, returning the first successful parse.
pub struct FallbackParser {
    pub providers: Vec<Box<dyn DependencyParser>>,
}

impl DependencyParser for FallbackParser {
    fn version(&self) -> String {
        self.providers
            .iter()
            .map(|p| p.version())
            .collect::<Vec<_>>()
            .join("+")
    }

    fn parse(&self, tokens: &[String]) -> Result<DependencyParse, ParseError> {
        let mut last = ParseError::Provider("no providers configured".into());
        for p in &self.providers {
            match p.parse(tokens) {
                Ok(parse) => return Ok(parse),
                Err(e) => last = e,
            }
        }
        Err(last)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "# text = Bill does not drive\n\
1\tBill\tBill\tPROPN\t_\t_\t4\tnsubj\t_\t_\n\
2\tdoes\tdo\tAUX\t_\t_\t4\taux\t_\t_\n\
3\tnot\tnot\tPART\t_\t_\t4\tneg\t_\t_\n\
4\tdrive\tdrive\tVERB\t_\t_\t0\tROOT\t_\t_\n\n";

    #[test]
    fn reads_conllu_block() {
        let sents = read_conllu(SAMPLE).unwrap();
        assert_eq!(sents.len(), 1);
        let p = &sents[0].parse;
        assert_eq!(p.root, 3);
        assert_eq!(p.arcs.len(), 3);
        assert_eq!(sents[0].comment("text"), Some("Bill does not drive"));
        let neg = p.arcs.iter().find(|a| a.label == "neg").unwrap();
        assert_eq!((neg.head.surface.as_str(), neg.tail.surface.as_str()), ("drive", "not"));
    }

    #[test]
    fn conllu_provider_looks_up_by_tokens() {
        let parser = ConlluParser::from_text(SAMPLE, "test").unwrap();
        let toks: Vec<String> = ["bill", "does", "not", "drive"].iter().map(|s| s.to_string()).collect();
        assert!(parser.parse(&toks).is_ok());
        assert!(matches!(parser.parse(&toks[..2]), Err(ParseError::Missing(_))));
    }

    #[test]
    fn rejects_cycles_and_double_roots() {
        let tok = |s: &str| ParsedToken {
            surface: s.into(),
            lemma: s.into(),
            pos: Pos::X,
        };
        let labels = vec!["dep".to_string(); 3];
        let cyc = DependencyParse::from_heads(vec![tok("a"), tok("b"), tok("c")], &[None, Some(2), Some(1)], &labels);
        assert!(matches!(cyc, Err(ParseError::InvalidTree(_))));
        let two = DependencyParse::from_heads(vec![tok("a"), tok("b"), tok("c")], &[None, None, Some(1)], &labels);
        assert!(matches!(two, Err(ParseError::InvalidTree(_))));
    }

    #[test]
    fn maps_universal_labels() {
        assert_eq!(canonical_label("compound:prt"), "prt");
        assert_eq!(canonical_label("obj"), "dobj");
        assert_eq!(canonical_label("xcomp"), "xcomp");
    }
}
