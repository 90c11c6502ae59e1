use std::path::PathBuf;

use eventstory_core::events::{
    extract_event, is_schema_label, read_conllu, DependencyParser, HeuristicParser,
};

fn fixture() -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/events/annotated.conllu");
    std::fs::read_to_string(path).expect("annotated fixture")
}

#[test]
fn gold_parses_give_annotated_events() {
    let sentences = read_conllu(&fixture()).unwrap();
    assert_eq!(sentences.len(), 25);
    for s in &sentences {
        let expected = s.comment("expected_event").unwrap();
        assert_eq!(extract_event(&s.parse).event.string_form, expected, "{:?}", s.comment("text"));
    }
}

#[test]
fn fixture_covers_every_schema_label() {
    let sentences = read_conllu(&fixture()).unwrap();
    for label in ["prt", "neg", "agent", "dobj", "acomp", "ccomp", "xcomp"] {
        let used = sentences
            .iter()
            .any(|s| s.parse.children(s.parse.root).any(|a| a.label == label));
        assert!(used, "no root-level {label} arc in the fixture");
    }
}

#[test]
fn heuristic_parser_matches_annotations() {
    let mut failures = Vec::new();
    for s in read_conllu(&fixture()).unwrap() {
        let tokens: Vec<String> = s.parse.tokens.iter().map(|t| t.surface.clone()).collect();
        let parse = HeuristicParser.parse(&tokens).unwrap();
        let got = extract_event(&parse).event.string_form;
        let expected = s.comment("expected_event").unwrap();
        if got != expected {
            failures.push(format!("{}: got '{got}', expected '{expected}'", tokens.join(" ")));
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn extracted_arguments_hang_off_the_trigger() {
    for s in read_conllu(&fixture()).unwrap() {
        let tokens: Vec<String> = s.parse.tokens.iter().map(|t| t.surface.clone()).collect();
        for parse in [s.parse.clone(), HeuristicParser.parse(&tokens).unwrap()] {
            let event = extract_event(&parse).event;
            let heads = parse.heads();
            for arg in event.arguments() {
                assert!(is_schema_label(&arg.label));
                assert_eq!(heads[arg.position], Some(parse.root));
            }
        }
    }
}
