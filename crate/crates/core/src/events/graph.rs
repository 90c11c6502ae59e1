//! Temporal event graph: adjacent events become weighted triples.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::EventSequence;

pub const TEMPORAL_NEXT: &str = "temporal_next";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triple {
    pub head: String,
    pub relation: String,
    pub tail: String,
    pub count: usize,
}

/// Multiset of `(head, temporal_next, tail)` triples.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventGraph {
    counts: BTreeMap<(String, String), usize>,
}

impl EventGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_sequence(&mut self, seq: &EventSequence) {
        for pair in seq.events.windows(2) {
            let key = (pair[0].string_form.clone(), pair[1].string_form.clone());
            *self.counts.entry(key).or_insert(0) += 1;
        }
    }

    /// Merge a partial graph (e.g. one built by another worker).
    pub fn merge(&mut self, other: EventGraph) {
        for (k, c) in other.counts {
            *self.counts.entry(k).or_insert(0) += c;
        }
    }

    pub fn count(&self, head: &str, tail: &str) -> usize {
        self.counts
            .get(&(head.to_string(), tail.to_string()))
            .copied()
            .unwrap_or(0)
    }

    /// Number of distinct triples.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Sum of multiplicities over all triples.
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn triples(&self) -> Vec<Triple> {
        self.counts
            .iter()
            .map(|((h, t), c)| Triple {
                head: h.clone(),
                relation: TEMPORAL_NEXT.to_string(),
                tail: t.clone(),
                count: *c,
            })
            .collect()
    }

    pub fn from_triples(triples: &[Triple]) -> Self {
        let mut g = EventGraph::new();
        for t in triples {
            *g.counts.entry((t.head.clone(), t.tail.clone())).or_insert(0) += t.count;
        }
        g
    }
}

impl Serialize for EventGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out {
            relation: &'static str,
            total: usize,
            triples: Vec<Triple>,
        }
        Out {
            relation: TEMPORAL_NEXT,
            total: self.total(),
            triples: self.triples(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EventGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct In {
            triples: Vec<Triple>,
        }
        let parsed = In::deserialize(d)?;
        Ok(EventGraph::from_triples(&parsed.triples))
    }
}

pub fn build_event_graph<'a, I>(sequences: I) -> EventGraph
where
    I: IntoIterator<Item = &'a EventSequence>,
{
    let mut g = EventGraph::new();
    for seq in sequences {
        g.add_sequence(seq);
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{Event, Trigger};

    fn seq(forms: &[&str]) -> EventSequence {
        let events = forms
            .iter()
            .enumerate()
            .map(|(i, f)| Event {
                trigger: Some(Trigger {
                    surface: f.to_string(),
                    lemma: f.to_string(),
                    position: i,
                }),
                modifiers: vec![],
                agents: vec![],
                complements: vec![],
                string_form: f.to_string(),
            })
            .collect();
        EventSequence {
            story_id: "s".into(),
            events,
        }
    }

    #[test]
    fn counts_adjacent_pairs() {
        let g = build_event_graph(&[seq(&["a", "b", "c", "d"])]);
        assert_eq!(g.len(), 3);
        let g = build_event_graph(&[seq(&["a", "b", "c"]), seq(&["x", "a", "b"])]);
        assert_eq!(g.count("a", "b"), 2);
        assert_eq!(g.total(), 4);
        assert!(build_event_graph(&[]).is_empty());
    }

    #[test]
    fn json_round_trip() {
        let g = build_event_graph(&[seq(&["a", "b", "a", "b"])]);
        let json = serde_json::to_string(&g).unwrap();
        let back: EventGraph = serde_json::from_str(&json).unwrap();
        assert_eq!(g, back);
    }
}
