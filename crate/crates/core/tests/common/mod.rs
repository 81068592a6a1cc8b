#![allow(dead_code)]

use std::fs;
use std::path::Path;

use ngdb::kg::{Dictionary, GraphStack, Triple};
use ngdb::query::{NodeKind, QueryAtom, QueryGraph};

pub const AWARD_TRAIN: &str = "TuringAward\twin\tHinton\nDeepLearning\tfield\tHinton\nHinton\tuniversity\tUofT\n";
pub const AWARD_TEST: &str = "TuringAward\twin\tBengio\nTuringAward\twin\tLeCun\nDeepLearning\tfield\tBengio\n\
DeepLearning\tfield\tLeCun\nBengio\tuniversity\tUdeM\nLeCun\tuniversity\tNYU\n";

/// Writes the toy award graph as train/valid/test TSV files; valid adds nothing.
pub fn write_award(dir: &Path) {
    fs::write(dir.join("train.tsv"), AWARD_TRAIN).unwrap();
    fs::write(dir.join("valid.tsv"), "").unwrap();
    fs::write(dir.join("test.tsv"), AWARD_TEST).unwrap();
}

pub fn award_stack() -> GraphStack {
    let dir = tempfile::tempdir().unwrap();
    write_award(dir.path());
    let p = |f: &str| dir.path().join(f);
    ngdb::kg::ingest_triples(&p("train.tsv"), Some(&p("valid.tsv")), Some(&p("test.tsv")))
        .unwrap()
        .stack
}

pub fn entity(stack: &GraphStack, name: &str) -> u32 {
    stack.entity_id(name).unwrap()
}

pub fn relation(stack: &GraphStack, name: &str) -> u32 {
    stack.relation_id(name).unwrap()
}

pub fn entities(stack: &GraphStack, names: &[&str]) -> Vec<u32> {
    let mut ids: Vec<u32> = names.iter().map(|n| entity(stack, n)).collect();
    ids.sort_unstable();
    ids
}

/// Universities of Turing Award winners working on deep learning.
pub fn award_query(stack: &GraphStack) -> QueryGraph {
    QueryGraph::new(
        vec![
            NodeKind::Anchor(Some(entity(stack, "TuringAward"))),
            NodeKind::Anchor(Some(entity(stack, "DeepLearning"))),
            NodeKind::Variable,
            NodeKind::Target,
        ],
        vec![
            QueryAtom::new(0, relation(stack, "win"), 2),
            QueryAtom::new(1, relation(stack, "field"), 2),
            QueryAtom::new(2, relation(stack, "university"), 3),
        ],
        vec![],
    )
}

/// Stack whose three layers are identical.
pub fn frozen_stack(stack: &GraphStack) -> GraphStack {
    let names = |d: &Dictionary| Dictionary::from_names(d.names().iter().cloned()).unwrap();
    let triples: Vec<Triple> = stack.test.triples().to_vec();
    GraphStack::from_splits(names(&stack.entities), names(&stack.relations), triples, vec![], vec![]).unwrap()
}
