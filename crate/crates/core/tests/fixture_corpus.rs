use std::path::PathBuf;

use eventstory_core::corpus::{
    preprocess_corpus, read_jsonl, write_preprocessed, Dataset, NameLexicon, Split, StoryRecord,
};
use eventstory_core::events::{build_event_graph, EventExtractor};
use eventstory_core::text::{RuleSplitter, NAME_PLACEHOLDERS};

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/roc")
}

#[test]
fn fixture_preprocesses_into_expected_splits() {
    let out = preprocess_corpus(&fixture_dir(), Dataset::Roc, &NameLexicon::bundled(), &RuleSplitter).unwrap();
    assert_eq!(out.manifest.count(Split::Train), 32);
    assert_eq!(out.manifest.count(Split::Dev), 4);
    assert_eq!(out.manifest.count(Split::Test), 4);
    for r in &out.records {
        assert_eq!(r.sentences.len(), 4);
        for tok in r.leading_context.iter().chain(r.sentences.iter().flatten()) {
            // raw names never survive; placeholders stay uppercase
            assert!(tok.chars().all(|c| !c.is_uppercase()) || NAME_PLACEHOLDERS.contains(&tok.as_str()), "{tok}");
        }
    }
    let first = &out.records.iter().find(|r| r.id == "train-001").unwrap();
    assert_eq!(first.leading_context[0], "[MALE]");
}

#[test]
fn preprocessing_output_is_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = preprocess_corpus(&fixture_dir(), Dataset::Roc, &NameLexicon::bundled(), &RuleSplitter).unwrap();
        write_preprocessed(dir.path(), &out).unwrap();
    }
    for split in Split::ALL {
        let name = format!("roc.{split}.jsonl");
        let x = std::fs::read(a.path().join(&name)).unwrap();
        let y = std::fs::read(b.path().join(&name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
    let back: Vec<StoryRecord> = read_jsonl(&a.path().join("roc.train.jsonl")).unwrap();
    assert_eq!(back.len(), 32);
}

#[test]
fn every_story_gets_one_event_per_sentence() {
    let out = preprocess_corpus(&fixture_dir(), Dataset::Roc, &NameLexicon::bundled(), &RuleSplitter).unwrap();
    let extractor = EventExtractor::default();
    let mut seqs = Vec::new();
    for r in &out.records {
        let (seq, stats) = extractor.extract_sequence(r).unwrap();
        assert_eq!(seq.len(), r.sentences.len());
        assert_eq!(stats.sentences, r.sentences.len());
        seqs.push(seq);
    }
    let lost_dog = seqs.iter().find(|s| s.story_id == "train-001").unwrap();
    assert_eq!(
        lost_dog.string_forms(),
        vec!["missed dog", "notices something", "sees dog", "turns out be"]
    );
    let graph = build_event_graph(&seqs);
    let expected: usize = seqs.iter().map(|s| s.len() - 1).sum();
    assert_eq!(graph.total(), expected);
    if std::env::var("SHOW_EVENTS").is_ok() {
        for s in &seqs {
            eprintln!("{}: {:?}", s.story_id, s.string_forms());
        }
    }
}
