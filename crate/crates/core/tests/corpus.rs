use std::collections::BTreeMap;

use lava_core::corpus::{
    generate_corpus, interpret, load_corpus, parse_all, save_corpus, AmbiguityClass, Grammar, Lexicon, Tree,
};

#[test]
fn class_counts_and_interpretation_split() {
    let corpus = generate_corpus().unwrap();
    assert_eq!(corpus.len(), 237);
    let mut counts: BTreeMap<AmbiguityClass, usize> = BTreeMap::new();
    for r in &corpus {
        *counts.entry(r.ambiguity_class).or_default() += 1;
    }
    let expected = [48, 60, 40, 35, 36, 18];
    for (class, n) in AmbiguityClass::ALL.iter().zip(expected) {
        assert_eq!(counts[class], n, "{class}");
    }
    let two = corpus.iter().filter(|r| r.interpretations.len() == 2).count();
    let three = corpus.iter().filter(|r| r.interpretations.len() == 3).count();
    assert_eq!((two, three), (213, 24));
}

#[test]
fn syntactic_records_match_their_parses() {
    let (grammar, lexicon) = (Grammar::default_grammar(), Lexicon::default_lexicon());
    for r in generate_corpus().unwrap() {
        if r.ambiguity_class.family() != "syntax" {
            continue;
        }
        let trees = parse_all(&r.text, &grammar, &lexicon).unwrap();
        assert_eq!(trees.len(), r.interpretations.len(), "{}", r.text);
        for (tree, interp) in trees.iter().zip(&r.interpretations) {
            let stored = Tree::parse_bracketed(interp.parse.as_ref().unwrap()).unwrap();
            assert_eq!(&stored, tree);
            assert_eq!(interpret(tree, &lexicon).unwrap(), interp.formula);
        }
    }
}

#[test]
fn ids_are_unique_and_records_check() {
    let corpus = generate_corpus().unwrap();
    let mut ids: Vec<&str> = corpus.iter().map(|r| r.id.as_str()).collect();
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), corpus.len());
    for r in &corpus {
        r.check().unwrap();
    }
}

#[test]
fn corpus_file_round_trips() {
    let corpus = generate_corpus().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corpus.jsonl");
    save_corpus(&corpus, &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 237);
    assert_eq!(load_corpus(&path).unwrap(), corpus);
}

#[test]
fn canonical_examples_appear_in_the_corpus() {
    let corpus = generate_corpus().unwrap();
    let texts: Vec<&str> = corpus.iter().map(|r| r.text.as_str()).collect();
    for s in [
        "Claire left the green chair with a yellow bag.",
        "Claire looked at Bill picking up a chair.",
        "Claire held a green bag and chair.",
        "Claire held the chair or the bag and the telescope.",
        "Claire and Bill moved a chair.",
        "Someone moved the chairs.",
        "Claire held the bag and the chair. It is yellow.",
        "Claire looked at Bill. Also Sam.",
    ] {
        assert!(texts.contains(&s), "missing {s}");
    }
}
