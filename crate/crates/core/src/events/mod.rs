//! Verb-phrase events: one per sentence, taken from the dependency parse.
//!
//! An event is the root verb plus its direct dependents under seven
//! labels, grouped into modifiers (`prt`, `neg`), agents (`agent`, `dobj`)
//! and complements (`acomp`, `ccomp`, `xcomp`).

pub mod graph;
pub mod heuristic;
pub mod lexicon;
pub mod parse;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::StoryRecord;
pub use graph::{build_event_graph, EventGraph, Triple, TEMPORAL_NEXT};
pub use heuristic::{HeuristicParser, HEURISTIC_PARSER_VERSION};
pub use parse::{
    canonical_label, read_conllu, ConlluParser, ConlluSentence, DependencyArc, DependencyParse,
    DependencyParser, FallbackParser, ParseError, ParsedToken, Pos, TokenRef,
};

pub const EVENT_START: &str = "<e_s>";
pub const EVENT_SEP: &str = "<e_sep>";
pub const EVENT_END: &str = "<e_e>";
pub const EVENT_NONE: &str = "<e_none>";

pub const MODIFIER_LABELS: [&str; 2] = ["prt", "neg"];
pub const AGENT_LABELS: [&str; 2] = ["agent", "dobj"];
pub const COMPLEMENT_LABELS: [&str; 3] = ["acomp", "ccomp", "xcomp"];

/// True for the seven labels that carry event arguments.
pub fn is_schema_label(label: &str) -> bool {
    MODIFIER_LABELS.contains(&label)
        || AGENT_LABELS.contains(&label)
        || COMPLEMENT_LABELS.contains(&label)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trigger {
    pub surface: String,
    pub lemma: String,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Argument {
    pub surface: String,
    pub position: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    /// `None` for the placeholder emitted when a sentence has no verb root.
    pub trigger: Option<Trigger>,
    pub modifiers: Vec<Argument>,
    pub agents: Vec<Argument>,
    pub complements: Vec<Argument>,
    pub string_form: String,
}

impl Event {
    pub fn placeholder() -> Self {
        Event {
            trigger: None,
            modifiers: Vec::new(),
            agents: Vec::new(),
            complements: Vec::new(),
            string_form: EVENT_NONE.to_string(),
        }
    }

    pub fn is_placeholder(&self) -> bool {
        self.trigger.is_none()
    }

    pub fn arguments(&self) -> impl Iterator<Item = &Argument> {
        self.modifiers
            .iter()
            .chain(self.agents.iter())
            .chain(self.complements.iter())
    }

    /// Trigger and argument surfaces with their positions, ascending.
    pub fn ordered_surfaces(&self) -> Vec<(usize, &str)> {
        let mut parts: Vec<(usize, &str)> = self
            .arguments()
            .map(|a| (a.position, a.surface.as_str()))
            .collect();
        if let Some(t) = &self.trigger {
            parts.push((t.position, t.surface.as_str()));
        }
        parts.sort_by_key(|(p, _)| *p);
        parts
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.string_form)
    }
}

/// Result of extracting from one parse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    pub event: Event,
    /// Set when the root was not a verb and a placeholder was emitted.
    pub placeholder: bool,
}

/// Build an event from a parse: the root is the trigger, and its direct
/// children under schema labels fill the role buckets.
pub fn extract_event(parse: &DependencyParse) -> Extraction {
    let root = &parse.tokens[parse.root];
    if !root.pos.is_verbal() {
        return Extraction {
            event: Event::placeholder(),
            placeholder: true,
        };
    }
    let mut event = Event {
        trigger: Some(Trigger {
            surface: root.surface.clone(),
            lemma: root.lemma.clone(),
            position: parse.root,
        }),
        modifiers: Vec::new(),
        agents: Vec::new(),
        complements: Vec::new(),
        string_form: String::new(),
    };
    let mut children: Vec<&DependencyArc> = parse.children(parse.root).collect();
    children.sort_by_key(|a| a.tail.index);
    for arc in children {
        let label = canonical_label(&arc.label);
        let arg = Argument {
            surface: arc.tail.surface.clone(),
            position: arc.tail.index,
            label: label.to_string(),
        };
        if MODIFIER_LABELS.contains(&label) {
            event.modifiers.push(arg);
        } else if AGENT_LABELS.contains(&label) {
            event.agents.push(arg);
        } else if COMPLEMENT_LABELS.contains(&label) {
            event.complements.push(arg);
        }
    }
    event.string_form = event
        .ordered_surfaces()
        .iter()
        .map(|(_, s)| *s)
        .collect::<Vec<_>>()
        .join(" ");
    Extraction {
        event,
        placeholder: false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventSequence {
    pub story_id: String,
    pub events: Vec<Event>,
}

impl EventSequence {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn string_forms(&self) -> Vec<String> {
        self.events.iter().map(|e| e.string_form.clone()).collect()
    }

    pub fn serialize(&self) -> String {
        serialize_events(&self.string_forms())
    }
}

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("story {story_id}, sentence {}: {source}", sentence.map_or("context".to_string(), |i| i.to_string()))]
    Parse {
        story_id: String,
        /// 0-based index into the story sentences; `None` for the context.
        sentence: Option<usize>,
        source: ParseError,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionStats {
    pub sentences: usize,
    pub placeholders: usize,
}

impl ExtractionStats {
    pub fn merge(&mut self, other: &ExtractionStats) {
        self.sentences += other.sentences;
        self.placeholders += other.placeholders;
    }
}

/// One line of `{dataset}.{split}.events.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub story_id: String,
    pub events: Vec<Event>,
    pub serialized: String,
    /// Events of the leading context, kept apart from the storyline.
    pub context_events: Vec<Event>,
}

impl EventRecord {
    pub fn sequence(&self) -> EventSequence {
        EventSequence {
            story_id: self.story_id.clone(),
            events: self.events.clone(),
        }
    }
}

/// Sentence-level event extraction over a parser provider.
pub struct EventExtractor {
    parser: Box<dyn DependencyParser>,
}

impl Default for EventExtractor {
    fn default() -> Self {
        EventExtractor::new(Box::new(HeuristicParser))
    }
}

impl EventExtractor {
    pub fn new(parser: Box<dyn DependencyParser>) -> Self {
        EventExtractor { parser }
    }

    pub fn parser_version(&self) -> String {
        self.parser.version()
    }

    /// Normalize and parse a sentence, then extract its event.
    pub fn extract_sentence(&self, tokens: &[String]) -> Result<Extraction, ParseError> {
        let normalized: Vec<String> = tokens
            .iter()
            .map(|t| crate::text::normalize_token(t.trim()))
            .filter(|t| !t.is_empty())
            .collect();
        let parse = self.parser.parse(&normalized)?;
        Ok(extract_event(&parse))
    }

    /// One event per story sentence, in order. The context is not included.
    pub fn extract_sequence(
        &self,
        story: &StoryRecord,
    ) -> Result<(EventSequence, ExtractionStats), ExtractError> {
        let mut stats = ExtractionStats::default();
        let mut events = Vec::with_capacity(story.sentences.len());
        for (i, sentence) in story.sentences.iter().enumerate() {
            let ex = self
                .extract_sentence(sentence)
                .map_err(|source| ExtractError::Parse {
                    story_id: story.id.clone(),
                    sentence: Some(i),
                    source,
                })?;
            stats.sentences += 1;
            stats.placeholders += usize::from(ex.placeholder);
            events.push(ex.event);
        }
        Ok((
            EventSequence {
                story_id: story.id.clone(),
                events,
            },
            stats,
        ))
    }

    /// Storyline events plus the leading-context event, as written to disk.
    pub fn extract_record(&self, story: &StoryRecord) -> Result<(EventRecord, ExtractionStats), ExtractError> {
        let (seq, mut stats) = self.extract_sequence(story)?;
        let ctx = self
            .extract_sentence(&story.leading_context)
            .map_err(|source| ExtractError::Parse {
                story_id: story.id.clone(),
                sentence: None,
                source,
            })?;
        stats.sentences += 1;
        stats.placeholders += usize::from(ctx.placeholder);
        let serialized = seq.serialize();
        Ok((
            EventRecord {
                story_id: seq.story_id,
                events: seq.events,
                serialized,
                context_events: vec![ctx.event],
            },
            stats,
        ))
    }
}

/// `<e_s> e1 <e_sep> e2 ... <e_e>`.
pub fn serialize_events<S: AsRef<str>>(forms: &[S]) -> String {
    let body = forms
        .iter()
        .map(|f| f.as_ref())
        .collect::<Vec<_>>()
        .join(&format!(" {EVENT_SEP} "));
    if body.is_empty() {
        format!("{EVENT_START} {EVENT_END}")
    } else {
        format!("{EVENT_START} {body} {EVENT_END}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EventFormatError {
    #[error("serialized events must start with {EVENT_START} and end with {EVENT_END}")]
    Delimiters,
}

/// Inverse of [`serialize_events`].
pub fn deserialize_events(text: &str) -> Result<Vec<String>, EventFormatError> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let (Some(&EVENT_START), Some(&EVENT_END)) = (tokens.first(), tokens.last()) else {
        return Err(EventFormatError::Delimiters);
    };
    if tokens.len() < 2 {
        return Err(EventFormatError::Delimiters);
    }
    let inner = &tokens[1..tokens.len() - 1];
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    Ok(inner
        .split(|t| *t == EVENT_SEP)
        .map(|chunk| chunk.join(" "))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;

    fn form(s: &str) -> String {
        EventExtractor::default()
            .extract_sentence(&tokenize(s))
            .unwrap()
            .event
            .string_form
    }

    #[test]
    fn lost_dog_storyline() {
        assert_eq!(form("He missed his dog badly."), "missed dog");
        assert_eq!(form("He notices something strange on the curb."), "notices something");
        assert_eq!(form("He sees the dog outside."), "sees dog");
        assert_eq!(form("It turns out to be a stray dog."), "turns out be");
    }

    #[test]
    fn trigger_keeps_lemma() {
        let ex = EventExtractor::default()
            .extract_sentence(&tokenize("[MALE] needed to get a new car."))
            .unwrap();
        let t = ex.event.trigger.unwrap();
        assert_eq!((t.surface.as_str(), t.lemma.as_str()), ("needed", "need"));
        assert_eq!(ex.event.string_form, "needed get");
    }

    #[test]
    fn verbless_sentence_gives_placeholder() {
        let ex = EventExtractor::default()
            .extract_sentence(&tokenize("What a day!"))
            .unwrap();
        assert!(ex.placeholder);
        assert_eq!(ex.event.string_form, EVENT_NONE);
    }

    #[test]
    fn serialization_format() {
        assert_eq!(
            serialize_events(&["needed get", "visited dealership"]),
            "<e_s> needed get <e_sep> visited dealership <e_e>"
        );
        assert_eq!(serialize_events(&["ran"]), "<e_s> ran <e_e>");
        let s = serialize_events(&["missed dog", "notices something", "sees dog", "turns out be"]);
        assert_eq!(s.matches(EVENT_SEP).count(), 3);
        assert_eq!(
            deserialize_events(&s).unwrap(),
            vec!["missed dog", "notices something", "sees dog", "turns out be"]
        );
        assert!(deserialize_events("ran <e_e>").is_err());
    }
}
