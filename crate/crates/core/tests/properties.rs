use eventstory_core::corpus::{delexicalize, NameLexicon};
use eventstory_core::events::{
    build_event_graph, deserialize_events, serialize_events, DependencyParser, Event, EventGraph, EventSequence,
    HeuristicParser, Trigger,
};
use eventstory_core::metrics::{distinct_n, Curve};
use proptest::prelude::*;

fn word() -> impl Strategy<Value = String> {
    prop::sample::select(vec![
        "he", "she", "the", "dog", "ran", "was", "not", "to", "home", "up", "a", "big", "and", "by", "happy",
        "gave", "her", "book", "that", "when", ",", ".", "!", "[MALE]", "Ken", "Sue", "quickly", "been",
        "eaten", "decided", "stay", "out", "turned", "of", "with", "never", "could", "have",
    ])
    .prop_map(String::from)
}

fn sentence() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(word(), 1..14)
}

fn sequence(forms: &[String]) -> EventSequence {
    EventSequence {
        story_id: "s".into(),
        events: forms
            .iter()
            .enumerate()
            .map(|(i, f)| Event {
                trigger: Some(Trigger { surface: f.clone(), lemma: f.clone(), position: i }),
                modifiers: vec![],
                agents: vec![],
                complements: vec![],
                string_form: f.clone(),
            })
            .collect(),
    }
}

fn event_form() -> impl Strategy<Value = String> {
    prop::collection::vec("[a-z]{1,6}", 1..4).prop_map(|w| w.join(" "))
}

proptest! {
    #[test]
    fn delexicalize_is_idempotent_and_length_preserving(tokens in sentence()) {
        let lex = NameLexicon::bundled();
        let once = delexicalize(&tokens, &lex);
        prop_assert_eq!(once.len(), tokens.len());
        prop_assert_eq!(delexicalize(&once, &lex), once);
    }

    #[test]
    fn event_serialization_round_trips(forms in prop::collection::vec(event_form(), 0..8)) {
        let text = serialize_events(&forms);
        prop_assert_eq!(deserialize_events(&text).unwrap(), forms);
    }

    #[test]
    fn graph_total_counts_adjacent_pairs(stories in prop::collection::vec(prop::collection::vec(event_form(), 1..7), 1..6)) {
        let seqs: Vec<EventSequence> = stories.iter().map(|s| sequence(s)).collect();
        let g = build_event_graph(&seqs);
        let expected: usize = stories.iter().map(|s| s.len() - 1).sum();
        prop_assert_eq!(g.total(), expected);
        // merging halves gives the same graph
        let (a, b) = seqs.split_at(seqs.len() / 2);
        let mut merged = build_event_graph(a);
        merged.merge(build_event_graph(b));
        prop_assert_eq!(&merged, &g);
        let back: EventGraph = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn heuristic_parse_is_a_tree(tokens in sentence()) {
        let parse = HeuristicParser::default().parse(&tokens).unwrap();
        prop_assert_eq!(parse.len(), tokens.len());
        prop_assert!(parse.validate().is_ok());
    }

    #[test]
    fn repeating_the_corpus_halves_distinct(stories in prop::collection::vec(prop::collection::vec(word(), 4..12), 1..5), n in 1usize..4) {
        let once = distinct_n(&stories, n).unwrap();
        let twice: Vec<Vec<String>> = stories.iter().chain(stories.iter()).cloned().collect();
        let d = distinct_n(&twice, n).unwrap();
        prop_assert!((d - once / 2.0).abs() < 1e-12);
    }

    #[test]
    fn curve_aggregate_is_mean_of_curve(rows in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 0..6), 1..6)) {
        let c = Curve::from_rows(&rows, 0);
        if c.per_index.is_empty() {
            prop_assert_eq!(c.aggregate, 0.0);
        } else {
            let m = c.per_index.iter().sum::<f64>() / c.per_index.len() as f64;
            prop_assert!((c.aggregate - m).abs() < 1e-12);
        }
        prop_assert_eq!(c.counts.iter().sum::<usize>(), rows.iter().map(Vec::len).sum::<usize>());
    }
}
