//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use ngdb::embed::{batch_objective, train, CalibratedScorer, Example, Gradient, LogSigmoidLoss, Params, TrainConfig};
use ngdb::engine::{ContinuousEngine, EngineSettings, QueryEngine, SymbolicEngine};
use ngdb::eval::{cardinality_metrics, evaluate, faithfulness_auc, filtered_rank};
use ngdb::fuzzy::{BeamExecutor, BooleanScorer, ContinuousExecutor, DenseScorer, Logic, Scorer, UnionStrategy};
use ngdb::kg::{ingest_triples, GraphStack, KnowledgeGraph, Layer, Triple};
use ngdb::query::{demorgan_union, to_dnf, NodeKind, Pattern, QueryAtom, QueryGraph, QueryInstance};
use ngdb::rng::{seeded, substream, Rng};
use ngdb::sampler::{generate_dataset, sample_query, SampleConfig};
use ngdb::symbolic::{answers, execute_bgq, execute_tree, label_answers};
use ngdb::synthetic::{planted_stack, random_stack, write_tsv_splits, PlantedConfig};
use rand::seq::SliceRandom;
use rand::Rng as _;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! check {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn within(elapsed: Duration, budget_secs: u64) -> Outcome {
    check!(elapsed.as_secs_f64() < budget_secs as f64, "took {:.1}s, budget {budget_secs}s", elapsed.as_secs_f64());
    Ok(format!("{:.2}s", elapsed.as_secs_f64()))
}

/// Sampled queries that need not have hard answers.
fn permissive(num_entities: usize) -> SampleConfig {
    SampleConfig { require_hard: false, max_answers: num_entities, ..SampleConfig::empty() }
}

fn sample_on(stack: &GraphStack, pattern: Pattern, rng: &mut Rng) -> Option<QueryGraph> {
    let cfg = permissive(stack.num_entities());
    sample_query(pattern, Layer::Test, stack, &cfg, rng).ok().map(|inst| inst.query)
}

// 1. t-norm axioms and De Morgan duality.
fn fuzzy_algebra() -> Outcome {
    let start = Instant::now();
    let mut rng = seeded(101);
    for logic in Logic::ALL {
        for _ in 0..100_000 {
            let (x, y, z): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
            check!(logic.tnorm(x, y) == logic.tnorm(y, x), "{logic}: t-norm not commutative at ({x}, {y})");
            check!(logic.tconorm(x, y) == logic.tconorm(y, x), "{logic}: t-conorm not commutative at ({x}, {y})");
            let l = logic.tnorm(logic.tnorm(x, y), z);
            let r = logic.tnorm(x, logic.tnorm(y, z));
            check!((l - r).abs() <= 1e-12, "{logic}: associativity off by {:e}", (l - r).abs());
            let (lo, hi) = if x <= z { (x, z) } else { (z, x) };
            check!(logic.tnorm(lo, y) <= logic.tnorm(hi, y), "{logic}: not monotone at ({lo}, {hi}, {y})");
            check!(logic.tnorm(x, 1.0) == x, "{logic}: identity fails at {x}");
            let dual = 1.0 - logic.tnorm(1.0 - x, 1.0 - y);
            check!((logic.tconorm(x, y) - dual).abs() <= 1e-12, "{logic}: De Morgan off at ({x}, {y})");
        }
        for x in [0.0, 0.37, 1.0] {
            check!(logic.tnorm(x, 1.0) == x, "{logic}: identity fails at {x}");
        }
    }
    within(start.elapsed(), 5).map(|t| format!("3 logics x 1e5 pairs, {t}"))
}

fn random_test_stack(rng: &mut Rng, seed: u64) -> GraphStack {
    let ne = rng.gen_range(40..=200);
    let nr = rng.gen_range(2..=10);
    random_stack(ne, nr, ne * 5, 0.2, seed).unwrap()
}

// 2. Boolean-scorer continuous execution equals the symbolic tree engine.
fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = seeded(202);
    let mut checked = 0;
    for g in 0..20u64 {
        let stack = random_test_stack(&mut rng, g);
        let scorer: Arc<dyn Scorer> = Arc::new(BooleanScorer::new(stack.test.clone()));
        let executors: Vec<ContinuousExecutor> =
            Logic::ALL.iter().map(|&l| ContinuousExecutor::new(scorer.clone(), l)).collect();
        let mut made = 0;
        let mut i = 0;
        while made < 50 {
            let pattern = Pattern::ALL[i % Pattern::ALL.len()];
            i += 1;
            check!(i < 5000, "graph {g}: could not sample 50 queries");
            let Some(q) = sample_on(&stack, pattern, &mut rng) else { continue };
            let expected = execute_tree(&q, &stack.test).map_err(|e| e.to_string())?;
            for ex in &executors {
                let got = ex.execute(&q).map_err(|e| e.to_string())?.support(0.5);
                check!(got == expected, "graph {g} {pattern} {}: {got:?} != {expected:?}", ex.logic());
            }
            made += 1;
        }
        checked += made;
    }
    check!(checked == 1000, "checked {checked} queries");
    within(start.elapsed(), 60).map(|t| format!("1000 queries x 3 logics on 20 graphs, {t}"))
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

// 3. Union rewriting invariance.
fn rewriting_invariance() -> Outcome {
    let mut rng = seeded(303);
    let stacks: Vec<GraphStack> = (0..10u64).map(|s| random_test_stack(&mut rng, 300 + s)).collect();
    let mut product_dnf_gap: f64 = 0.0;
    for i in 0..500 {
        let stack = &stacks[i % stacks.len()];
        let pattern = if i % 2 == 0 { Pattern::U2 } else { Pattern::Up };
        let Some(q) = sample_on(stack, pattern, &mut rng) else {
            return Err(format!("could not sample {pattern}"));
        };
        let g = &stack.test;
        let direct = answers(&q, g).map_err(|e| e.to_string())?;
        let mut via_dnf: Vec<u32> = Vec::new();
        for branch in to_dnf(&q) {
            via_dnf.extend(answers(&branch, g).map_err(|e| e.to_string())?);
        }
        via_dnf.sort_unstable();
        via_dnf.dedup();
        let dm = answers(&demorgan_union(&q), g).map_err(|e| e.to_string())?;
        check!(direct == via_dnf && direct == dm, "symbolic forms differ on instance {i}");

        let n = g.num_entities();
        let boolean: Arc<dyn Scorer> = Arc::new(BooleanScorer::new(g.clone()));
        let fuzzy: Arc<dyn Scorer> = {
            let mut r = substream(i as u64, "fuzzy-rows");
            Arc::new(DenseScorer::from_fn(n, g.num_relations(), |_, _, _| r.gen()))
        };
        for logic in [Logic::Product, Logic::Godel] {
            for (kind, scorer) in [("boolean", &boolean), ("fuzzy", &fuzzy)] {
                let run = |union, query: &QueryGraph| {
                    ContinuousExecutor::new(scorer.clone(), logic)
                        .with_union(union)
                        .execute(query)
                        .map(|s| s.into_vec())
                        .map_err(|e| e.to_string())
                };
                let d = run(UnionStrategy::Conorm, &q)?;
                let m = run(UnionStrategy::Conorm, &demorgan_union(&q))?;
                let x = run(UnionStrategy::DnfMax, &q)?;
                check!(max_abs_diff(&d, &m) <= 1e-12, "{logic} {kind}: direct vs De Morgan differ on instance {i}");
                if logic == Logic::Product && kind == "fuzzy" {
                    product_dnf_gap = product_dnf_gap.max(max_abs_diff(&d, &x));
                } else {
                    check!(max_abs_diff(&d, &x) <= 1e-12, "{logic} {kind}: direct vs DNF differ on instance {i}");
                }
            }
        }
    }
    Ok(format!(
        "500 instances; note: product DNF-max departs from the product t-conorm on fractional rows (max gap {product_dnf_gap:.3})"
    ))
}

/// Chain a -r1-> V, then V -r2-> T and V -r3-> T (DAG), and its unfolded tree sibling.
fn dag_and_tree(a: u32, r1: u32, r2: u32, r3: u32) -> (QueryGraph, QueryGraph) {
    let dag = QueryGraph::new(
        vec![NodeKind::Anchor(Some(a)), NodeKind::Variable, NodeKind::Target],
        vec![QueryAtom::new(0, r1, 1), QueryAtom::new(1, r2, 2), QueryAtom::new(1, r3, 2)],
        vec![],
    );
    let tree = QueryGraph::new(
        vec![NodeKind::Anchor(Some(a)), NodeKind::Variable, NodeKind::Anchor(Some(a)), NodeKind::Variable, NodeKind::Target],
        vec![QueryAtom::new(0, r1, 1), QueryAtom::new(1, r2, 4), QueryAtom::new(2, r1, 3), QueryAtom::new(3, r3, 4)],
        vec![],
    );
    (dag, tree)
}

// 4. Homomorphism search agrees with tree execution; DAG answers are contained in tree answers.
fn bgq_agreement() -> Outcome {
    let mut rng = seeded(404);
    let conjunctive: Vec<Pattern> = Pattern::ALL.into_iter().filter(|p| !p.has_union()).collect();
    let mut checked = 0;
    let mut divergent = 0;
    let mut g = 0u64;
    while checked < 1000 {
        let stack = random_test_stack(&mut rng, 400 + g);
        g += 1;
        for _ in 0..50 {
            let pattern = *conjunctive.choose(&mut rng).unwrap();
            let Some(q) = sample_on(&stack, pattern, &mut rng) else { continue };
            let tree = execute_tree(&q, &stack.test).map_err(|e| e.to_string())?;
            // A negated atom leaving a variable is set complement in the tree engine
            // but atomic negation under homomorphism search.
            let atomic = q.atoms.iter().filter(|a| a.negated).all(|a| matches!(q.nodes[a.head], NodeKind::Anchor(_)));
            let target = q.target();
            let mut projected: Vec<u32> = execute_bgq(&q, &stack.test)
                .map_err(|e| e.to_string())?
                .iter()
                .map(|m| m[&target])
                .collect();
            projected.sort_unstable();
            projected.dedup();
            if !atomic {
                divergent += usize::from(projected != tree);
                continue;
            }
            check!(projected == tree, "{pattern}: projected mappings differ from tree answers");
            checked += 1;
        }
    }

    let mut strict = 0;
    for i in 0..100u64 {
        let stack = random_stack(30, 3, 150, 0.0, 4000 + i).unwrap();
        let g = &stack.test;
        let t = g.triples()[(i as usize * 7) % g.len()];
        let (dag, tree) = dag_and_tree(t.head, t.relation, rng.gen_range(0..3), rng.gen_range(0..3));
        let d = answers(&dag, g).map_err(|e| e.to_string())?;
        let tr = answers(&tree, g).map_err(|e| e.to_string())?;
        check!(d.iter().all(|x| tr.binary_search(x).is_ok()), "pair {i}: DAG answer outside tree answers");
        if d.len() < tr.len() {
            strict += 1;
        }
    }
    check!(strict > 0, "no strict-subset witness among 100 pairs");
    Ok(format!(
        "{checked} tree instances; 100 DAG/tree pairs, {strict} strict; note: {divergent} pni instances differ (variable-headed negation)"
    ))
}

// 5. Award graph golden scenario.
fn golden_scenario() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    common::write_award(dir.path());
    let p = |f: &str| dir.path().join(f);
    let stack = ingest_triples(&p("train.tsv"), Some(&p("valid.tsv")), Some(&p("test.tsv")))
        .map_err(|e| e.to_string())?
        .stack;
    let sizes = (stack.num_entities(), stack.num_relations(), stack.train.len(), stack.valid.len(), stack.test.len());
    check!(sizes == (8, 3, 3, 3, 9), "ingest counts {sizes:?}");

    let q = common::award_query(&stack);
    let labels = label_answers(&q, &stack.train, &stack.test).map_err(|e| e.to_string())?;
    check!(labels.easy == common::entities(&stack, &["UofT"]), "easy {:?}", labels.easy);
    check!(labels.hard == common::entities(&stack, &["UdeM", "NYU"]), "hard {:?}", labels.hard);
    check!(labels.false_positive.is_empty(), "false positives {:?}", labels.false_positive);

    let engine = ContinuousEngine::new(Arc::new(BooleanScorer::new(stack.test.clone())), &EngineSettings::default());
    let top = engine.top(&q, 3).map_err(|e| e.to_string())?;
    let mut ids: Vec<u32> = top.iter().map(|t| t.0).collect();
    ids.sort_unstable();
    check!(ids == common::entities(&stack, &["UofT", "UdeM", "NYU"]), "top-3 {top:?}");
    check!(top.iter().all(|t| t.1 == 1.0), "scores {top:?}");
    check!(engine.top(&q, 10).map_err(|e| e.to_string())?.len() == 3, "extra positive scores");

    let symbolic = SymbolicEngine::new(stack.train.clone());
    let found: Vec<u32> = symbolic.top(&q, 10).map_err(|e| e.to_string())?.iter().map(|t| t.0).collect();
    check!(found == common::entities(&stack, &["UofT"]), "symbolic {found:?}");
    Ok("8 entities, 3 relations, 3/3/9 triples; easy {UofT}, hard {UdeM, NYU}".into())
}

fn file_hash(bytes: &[u8]) -> u64 {
    let mut h = DefaultHasher::new();
    bytes.hash(&mut h);
    h.finish()
}

// 6. Gradient check, determinism, early loss decrease.
fn link_predictor() -> Outcome {
    let mut rng = seeded(606);
    let triples: Vec<Triple> =
        (0..12).map(|_| Triple::new(rng.gen_range(0..5), rng.gen_range(0..3), rng.gen_range(0..5))).collect();
    let g = KnowledgeGraph::new(5, 3, triples).map_err(|e| e.to_string())?;
    let mut p = Params::zeros(5, 3, 8);
    for x in p.entities.iter_mut().chain(p.relations.iter_mut()) {
        *x = rng.gen_range(-1.0..1.0);
    }
    let examples: Vec<Example> = g
        .triples()
        .iter()
        .map(|&t| Example {
            positive: t,
            negatives: (0..4).map(|_| Triple::new(t.head, t.relation, rng.gen_range(0..5))).collect(),
        })
        .collect();
    let (margin, l2) = (0.5, 0.01);
    let mut grad = Gradient::zeros_like(&p);
    batch_objective(&p, &examples, &LogSigmoidLoss, margin, l2, Some(&mut grad));
    let n_ent = p.entities.len();
    let mut indices: Vec<usize> = (0..n_ent + p.relations.len()).collect();
    indices.shuffle(&mut rng);
    let step = 1e-5;
    let mut worst: f64 = 0.0;
    for &i in &indices[..100] {
        let analytic = if i < n_ent { grad.entities[i] } else { grad.relations[i - n_ent] };
        let eval = |delta: f64| {
            let mut q = p.clone();
            if i < n_ent {
                q.entities[i] += delta;
            } else {
                q.relations[i - n_ent] += delta;
            }
            batch_objective(&q, &examples, &LogSigmoidLoss, margin, l2, None)
        };
        let numeric = (eval(step) - eval(-step)) / (2.0 * step);
        let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-12);
        worst = worst.max(rel);
    }
    check!(worst <= 1e-4, "worst relative gradient error {worst:e}");

    let planted = PlantedConfig { groups: 10, ..Default::default() };
    let (stack, _) = planted_stack(&planted).map_err(|e| e.to_string())?;
    let cfg = TrainConfig { epochs: 10, ..Default::default() };
    let (a, report) = train(&stack.train, &cfg).map_err(|e| e.to_string())?;
    let (b, _) = train(&stack.train, &cfg).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    a.save(&dir.path().join("a.bin")).map_err(|e| e.to_string())?;
    b.save(&dir.path().join("b.bin")).map_err(|e| e.to_string())?;
    let ha = file_hash(&std::fs::read(dir.path().join("a.bin")).map_err(|e| e.to_string())?);
    let hb = file_hash(&std::fs::read(dir.path().join("b.bin")).map_err(|e| e.to_string())?);
    check!(ha == hb, "embedding files differ across identical runs");
    let (first, tenth) = (report.epoch_losses[0], report.epoch_losses[9]);
    check!(tenth < first, "epoch-10 loss {tenth} not below epoch-1 loss {first}");
    Ok(format!(
        "worst FD rel. error {worst:.1e} over 100 params; file hash {ha:016x} x2; loss epoch 1 {first:.6} -> epoch 10 {tenth:.6}"
    ))
}

/// Expected filtered MRR of uniformly random scores.
fn random_baseline(records: &[QueryInstance], num_entities: usize) -> f64 {
    let per_query: Vec<f64> = records
        .iter()
        .map(|r| {
            let m = num_entities - r.answers().len() + 1;
            (1..=m).map(|k| 1.0 / k as f64).sum::<f64>() / m as f64
        })
        .collect();
    per_query.iter().sum::<f64>() / per_query.len() as f64
}

// 7. End-to-end generalization on a planted graph.
fn generalization() -> Outcome {
    let start = Instant::now();
    let (planted, _) = planted_stack(&PlantedConfig::default()).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    write_tsv_splits(&planted, dir.path()).map_err(|e| e.to_string())?;
    let p = |f: &str| dir.path().join(f);
    let stack = ingest_triples(&p("train.tsv"), Some(&p("valid.tsv")), Some(&p("test.tsv")))
        .map_err(|e| e.to_string())?
        .stack;
    let mut cfg = SampleConfig::empty();
    for pattern in ["1p", "2p", "2i"] {
        cfg.test_counts.insert(pattern.into(), 50);
    }
    let data = generate_dataset(&cfg, &stack).map_err(|e| e.to_string())?;
    let (table, _) = train(&stack.train, &TrainConfig { epochs: 50, ..Default::default() }).map_err(|e| e.to_string())?;
    let scorer = CalibratedScorer::new(Arc::new(table), stack.train.clone(), 1.0).map_err(|e| e.to_string())?;
    let dense: Arc<dyn Scorer> = Arc::new(DenseScorer::materialize(&scorer).map_err(|e| e.to_string())?);
    let model = evaluate(&data.test, &ContinuousEngine::new(dense, &EngineSettings::default())).map_err(|e| e.to_string())?;
    let baseline = evaluate(&data.test, &SymbolicEngine::new(stack.train.clone())).map_err(|e| e.to_string())?;
    let n = stack.num_entities();
    let mut parts = Vec::new();
    for pattern in ["1p", "2p", "2i"] {
        let records: Vec<QueryInstance> = data.test.iter().filter(|r| r.pattern == pattern).cloned().collect();
        let random = random_baseline(&records, n);
        let got = model.pattern(pattern).map(|m| m.mrr).unwrap_or(0.0);
        let sym = baseline.pattern(pattern).map(|m| m.mrr).unwrap_or(0.0);
        check!(got >= 5.0 * random, "{pattern}: MRR {got:.4} < 5 x random {random:.4}");
        check!(got >= 5.0 / n as f64, "{pattern}: MRR {got:.4} < 5/|E|");
        check!(got > sym, "{pattern}: MRR {got:.4} <= symbolic {sym:.4}");
        parts.push(format!("{pattern} {got:.3} (random {random:.3}, symbolic {sym:.3})"));
    }
    let t = within(start.elapsed(), 300)?;
    Ok(format!("{}; {t}", parts.join(", ")))
}

// 8. Ranking, cardinality and faithfulness metrics.
fn metric_correctness() -> Outcome {
    let mut rng = seeded(808);
    for trial in 0..1000 {
        let n = rng.gen_range(2..80);
        let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(0..8) as f64 / 7.0).collect();
        let target = rng.gen_range(0..n as u32);
        let filter: Vec<u32> = (0..n as u32).filter(|&e| e != target && rng.gen_bool(0.25)).collect();
        let mut rest: Vec<f64> =
            (0..n as u32).filter(|e| *e != target && !filter.contains(e)).map(|e| scores[e as usize]).collect();
        rest.sort_by(|a, b| b.total_cmp(a));
        let s = scores[target as usize];
        let oracle = 1 + rest.iter().filter(|&&v| v > s).count() + rest.iter().filter(|&&v| v == s).count() / 2;
        let got = filtered_rank(&scores, target, &filter).map_err(|e| e.to_string())?;
        check!(got == oracle, "trial {trial}: rank {got} != oracle {oracle}");
    }

    let stack = random_stack(120, 5, 700, 0.2, 8).map_err(|e| e.to_string())?;
    let mut cfg = SampleConfig::empty();
    for p in Pattern::ALL {
        cfg.test_counts.insert(p.name().into(), 5);
    }
    let data = generate_dataset(&cfg, &stack).map_err(|e| e.to_string())?;
    let oracle = ContinuousEngine::new(Arc::new(BooleanScorer::new(stack.test.clone())), &EngineSettings::default());
    let card = cardinality_metrics(&data.test, &oracle, 0.5).map_err(|e| e.to_string())?;
    check!(card.spearman == Some(1.0) && card.mape == Some(0.0), "cardinality {card:?}");

    let award = common::award_stack();
    let q = common::award_query(&award);
    let labels = label_answers(&q, &award.train, &award.test).map_err(|e| e.to_string())?;
    let record = QueryInstance { id: "award".into(), pattern: "ip".into(), query: q, easy: labels.easy, hard: labels.hard };
    let (table, _) = train(&award.train, &TrainConfig { epochs: 20, ..Default::default() }).map_err(|e| e.to_string())?;
    let scorer = CalibratedScorer::new(Arc::new(table), award.train.clone(), 1.0).map_err(|e| e.to_string())?;
    let engine = ContinuousEngine::new(Arc::new(scorer), &EngineSettings::default());
    let auc = faithfulness_auc(std::slice::from_ref(&record), &engine).map_err(|e| e.to_string())?;
    check!(auc == 1.0, "faithfulness AUC {auc}");
    Ok(format!("1000 rank trials; cardinality rho 1.0, MAPE 0% over {} queries; AUC {auc}", card.included))
}

// 9. Beam executor soundness.
fn beam_soundness() -> Outcome {
    let mut rng = seeded(909);
    let epfo: Vec<Pattern> = Pattern::ALL.into_iter().filter(|p| !p.has_negation()).collect();
    let mut checked = 0;
    let mut g = 0u64;
    while checked < 500 {
        let stack = random_test_stack(&mut rng, 900 + g);
        g += 1;
        let n = stack.num_entities();
        let boolean: Arc<dyn Scorer> = Arc::new(BooleanScorer::new(stack.test.clone()));
        let fuzzy: Arc<dyn Scorer> = {
            let mut r = substream(g, "beam-rows");
            Arc::new(DenseScorer::from_fn(n, stack.num_relations(), |_, _, _| r.gen::<f64>().powi(4)))
        };
        for _ in 0..50 {
            let pattern = *epfo.choose(&mut rng).unwrap();
            let Some(q) = sample_on(&stack, pattern, &mut rng) else { continue };
            let beam = BeamExecutor::new(boolean.clone(), Logic::Product, n).map_err(|e| e.to_string())?;
            let mut support: Vec<u32> = beam.execute_beam(&q).map_err(|e| e.to_string())?.iter().map(|c| c.0).collect();
            support.sort_unstable();
            let expected = answers(&q, &stack.test).map_err(|e| e.to_string())?;
            check!(support == expected, "{pattern}: beam support differs from symbolic answers");
            for logic in Logic::ALL {
                let full = ContinuousExecutor::new(fuzzy.clone(), logic).execute(&q).map_err(|e| e.to_string())?;
                let narrow = BeamExecutor::new(fuzzy.clone(), logic, 8).map_err(|e| e.to_string())?;
                for (e, s) in narrow.execute_beam(&q).map_err(|e| e.to_string())? {
                    check!(s <= full.get(e) + 1e-12, "{pattern} {logic}: beam {s} above continuous {}", full.get(e));
                }
            }
            checked += 1;
        }
    }

    // 2p with a trained, calibrated scorer.
    let (planted, _) = planted_stack(&PlantedConfig { groups: 8, ..Default::default() }).map_err(|e| e.to_string())?;
    let (table, _) = train(&planted.train, &TrainConfig { epochs: 25, ..Default::default() }).map_err(|e| e.to_string())?;
    let calibrated: Arc<dyn Scorer> =
        Arc::new(CalibratedScorer::new(Arc::new(table), planted.train.clone(), 1.0).map_err(|e| e.to_string())?);
    let exact = ContinuousExecutor::new(calibrated.clone(), Logic::Product);
    let beam = BeamExecutor::new(calibrated, Logic::Product, 8).map_err(|e| e.to_string())?;
    for _ in 0..20 {
        let Some(q) = sample_on(&planted, Pattern::P2, &mut rng) else { continue };
        let full = exact.execute(&q).map_err(|e| e.to_string())?;
        for (e, s) in beam.execute_beam(&q).map_err(|e| e.to_string())? {
            check!(s <= full.get(e) + 1e-12, "calibrated 2p: beam {s} above continuous {}", full.get(e));
        }
    }
    Ok(format!("{checked} EPFO queries; beam <= continuous for all logics and a calibrated 2p run"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("fuzzy algebra suite", fuzzy_algebra),
        ("oracle equivalence", oracle_equivalence),
        ("rewriting invariance", rewriting_invariance),
        ("tree/BGQ agreement and DAG containment", bgq_agreement),
        ("award-graph golden scenario", golden_scenario),
        ("link-predictor properties", link_predictor),
        ("end-to-end generalization", generalization),
        ("metric correctness", metric_correctness),
        ("beam soundness", beam_soundness),
    ];
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if filter.as_deref().is_some_and(|f| !name.contains(f)) {
            continue;
        }
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("criterion {} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
