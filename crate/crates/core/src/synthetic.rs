//! Generated graphs for tests, benchmarks and demos.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kg::{Dictionary, GraphStack, Triple};
use crate::rng;

fn vocabulary(prefix: &str, n: usize) -> Result<Dictionary> {
    Dictionary::from_names((0..n).map(|i| format!("{prefix}{i}")))
}

/// Shuffles unique triples into train/valid/test by the given fractions.
fn split_stack(
    entities: Dictionary,
    relations: Dictionary,
    mut triples: Vec<Triple>,
    valid_fraction: f64,
    test_fraction: f64,
    rng: &mut rng::Rng,
) -> Result<GraphStack> {
    if !(0.0..1.0).contains(&(valid_fraction + test_fraction)) || valid_fraction < 0.0 || test_fraction < 0.0 {
        return Err(Error::InvalidInput("held-out fractions must be non-negative and sum below 1".into()));
    }
    triples.shuffle(rng);
    let n = triples.len();
    let n_valid = (n as f64 * valid_fraction).round() as usize;
    let n_test = (n as f64 * test_fraction).round() as usize;
    let test = triples.split_off(n - n_test);
    let valid = triples.split_off(n - n_test - n_valid);
    GraphStack::from_splits(entities, relations, triples, valid, test)
}

/// Uniformly random multi-relational graph.
pub fn random_stack(
    num_entities: usize,
    num_relations: usize,
    num_triples: usize,
    held_out: f64,
    seed: u64,
) -> Result<GraphStack> {
    if num_entities == 0 || num_relations == 0 {
        return Err(Error::InvalidInput("vocabulary must be non-empty".into()));
    }
    let mut rng = rng::substream(seed, "random-graph");
    let mut seen = HashSet::new();
    let mut triples = Vec::with_capacity(num_triples);
    for _ in 0..num_triples {
        let t = Triple::new(
            rng.gen_range(0..num_entities as u32),
            rng.gen_range(0..num_relations as u32),
            rng.gen_range(0..num_entities as u32),
        );
        if seen.insert(t) {
            triples.push(t);
        }
    }
    split_stack(
        vocabulary("e", num_entities)?,
        vocabulary("r", num_relations)?,
        triples,
        held_out / 2.0,
        held_out / 2.0,
        &mut rng,
    )
}

/// Entities fall into equal-size groups; each relation maps every group to
/// one other group, so multi-hop answers are predictable at group level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantedConfig {
    pub groups: usize,
    pub group_size: usize,
    pub relations: usize,
    pub edges_per_entity: usize,
    pub valid_fraction: f64,
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            groups: 20,
            group_size: 10,
            relations: 6,
            edges_per_entity: 3,
            valid_fraction: 0.05,
            test_fraction: 0.05,
            seed: 0,
        }
    }
}

impl PlantedConfig {
    pub fn num_entities(&self) -> usize {
        self.groups * self.group_size
    }

    /// Group of entity `e`.
    pub fn group_of(&self, e: u32) -> usize {
        e as usize / self.group_size
    }
}

/// Graph with planted group-level compositional structure.
///
/// Returns the stack and, per relation, the group permutation it follows.
pub fn planted_stack(cfg: &PlantedConfig) -> Result<(GraphStack, Vec<Vec<usize>>)> {
    if cfg.groups == 0 || cfg.group_size == 0 || cfg.relations == 0 || cfg.edges_per_entity == 0 {
        return Err(Error::InvalidInput("planted graph sizes must be positive".into()));
    }
    if cfg.edges_per_entity > cfg.group_size {
        return Err(Error::InvalidInput("edges_per_entity cannot exceed group_size".into()));
    }
    let mut rng = rng::substream(cfg.seed, "planted-graph");
    let mut permutations = Vec::with_capacity(cfg.relations);
    let mut triples = Vec::new();
    for r in 0..cfg.relations {
        let mut perm: Vec<usize> = (0..cfg.groups).collect();
        perm.shuffle(&mut rng);
        for e in 0..cfg.num_entities() {
            let to = perm[e / cfg.group_size];
            let members: Vec<usize> = (0..cfg.group_size).collect();
            for &m in members.choose_multiple(&mut rng, cfg.edges_per_entity) {
                triples.push(Triple::new(e as u32, r as u32, (to * cfg.group_size + m) as u32));
            }
        }
        permutations.push(perm);
    }
    let stack = split_stack(
        vocabulary("e", cfg.num_entities())?,
        vocabulary("r", cfg.relations)?,
        triples,
        cfg.valid_fraction,
        cfg.test_fraction,
        &mut rng,
    )?;
    Ok((stack, permutations))
}

fn tsv(stack: &GraphStack, triples: &[Triple]) -> Result<String> {
    let mut out = String::new();
    for t in triples {
        writeln!(
            out,
            "{}\t{}\t{}",
            stack.entity_name(t.head)?,
            stack.relation_name(t.relation)?,
            stack.entity_name(t.tail)?
        )
        .expect("writing to a String cannot fail");
    }
    Ok(out)
}

/// Writes `train.tsv`, `valid.tsv` and `test.tsv`, each holding only the triples its split adds.
pub fn write_tsv_splits(stack: &GraphStack, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let added = |small: &[Triple], big: &[Triple]| -> Vec<Triple> {
        big.iter().filter(|t| small.binary_search(t).is_err()).copied().collect()
    };
    fs::write(dir.join("train.tsv"), tsv(stack, stack.train.triples())?)?;
    fs::write(dir.join("valid.tsv"), tsv(stack, &added(stack.train.triples(), stack.valid.triples()))?)?;
    fs::write(dir.join("test.tsv"), tsv(stack, &added(stack.valid.triples(), stack.test.triples()))?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::ingest_triples;

    #[test]
    fn planted_edges_follow_group_permutations() {
        let cfg = PlantedConfig::default();
        let (stack, perms) = planted_stack(&cfg).unwrap();
        assert_eq!(stack.num_entities(), 200);
        assert_eq!(stack.test.len(), 200 * 6 * 3);
        for t in stack.test.triples() {
            assert_eq!(cfg.group_of(t.tail), perms[t.relation as usize][cfg.group_of(t.head)]);
        }
        let held = stack.test.len() - stack.train.len();
        assert_eq!(held, 360);
    }

    #[test]
    fn tsv_round_trip_preserves_layers() {
        let stack = random_stack(30, 3, 120, 0.2, 4).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_tsv_splits(&stack, dir.path()).unwrap();
        let p = |f: &str| dir.path().join(f);
        let back = ingest_triples(&p("train.tsv"), Some(&p("valid.tsv")), Some(&p("test.tsv"))).unwrap().stack;
        for layer in crate::kg::Layer::ALL {
            let names = |s: &GraphStack| -> Vec<(String, String, String)> {
                let mut v: Vec<_> = s
                    .layer(layer)
                    .triples()
                    .iter()
                    .map(|t| {
                        (
                            s.entity_name(t.head).unwrap().to_string(),
                            s.relation_name(t.relation).unwrap().to_string(),
                            s.entity_name(t.tail).unwrap().to_string(),
                        )
                    })
                    .collect();
                v.sort();
                v
            };
            assert_eq!(names(&stack), names(&back));
        }
    }

    #[test]
    fn same_seed_same_graph() {
        assert_eq!(random_stack(20, 2, 50, 0.1, 9).unwrap(), random_stack(20, 2, 50, 0.1, 9).unwrap());
    }
}
