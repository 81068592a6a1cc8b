use std::fs;
use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use ngdb::embed::{train_with_progress, CalibratedScorer, EmbeddingTable};
use ngdb::engine::{answer_all, EngineContext, EngineRegistry, EngineSettings, QueryEngine};
use ngdb::eval::{cardinality_metrics, evaluate, faithfulness_auc};
use ngdb::fuzzy::{BooleanScorer, CachedScorer, Scorer};
use ngdb::kg::{ingest_triples, load_stack, save_stack, GraphStack};
use ngdb::query::{read_jsonl, write_jsonl, QueryGraph};
use ngdb::sampler::sample_dataset;
use ngdb::symbolic::label_answers;
use ngdb::synthetic::{planted_stack, random_stack, write_tsv_splits, PlantedConfig};
use ngdb::{Error, Result};

use crate::config::RunConfig;
use crate::{AnswerArgs, Common, EngineArgs, EvalArgs, GenerateArgs, GraphKind, IngestArgs, OracleArgs, SampleArgs, TrainArgs};

pub const GRAPH_FILE: &str = "graph.bin";
pub const EMBEDDINGS_FILE: &str = "embeddings.bin";
pub const LOSS_FILE: &str = "loss.csv";
const OUTPUT_FORMAT_VERSION: u32 = 1;

fn base_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(common.config.as_deref())?;
    if let Some(dir) = &common.graph_dir {
        cfg.graph_dir = Some(dir.clone());
    }
    if common.seed.is_some() {
        cfg.seed = common.seed;
    }
    Ok(cfg)
}

fn load_graph(cfg: &RunConfig) -> Result<GraphStack> {
    load_stack(&cfg.graph_dir()?.join(GRAPH_FILE))
}

fn summary(stack: &GraphStack) -> String {
    format!(
        "entities {} relations {} triples train {} valid {} test {}",
        stack.num_entities(),
        stack.num_relations(),
        stack.train.len(),
        stack.valid.len(),
        stack.test.len()
    )
}

pub fn ingest(args: IngestArgs) -> Result<()> {
    let ingested = ingest_triples(&args.train, args.valid.as_deref(), args.test.as_deref())?;
    fs::create_dir_all(&args.out)?;
    save_stack(&ingested.stack, &args.out.join(GRAPH_FILE))?;
    println!("{}", summary(&ingested.stack));
    Ok(())
}

pub fn sample(args: SampleArgs) -> Result<()> {
    let mut cfg = base_config(&args.common)?;
    if let Some(out) = args.out {
        cfg.out_dir = Some(out);
    }
    let cfg = cfg.finish()?;
    let stack = load_graph(&cfg)?;
    let stats = sample_dataset(&cfg.sampler, &stack, cfg.out_dir()?)?;
    for split in &stats.splits {
        let n: usize = split.patterns.iter().map(|p| p.count).sum();
        println!("{} {n} queries", split.split);
    }
    Ok(())
}

pub fn train(args: TrainArgs) -> Result<()> {
    let mut cfg = base_config(&args.common)?;
    let t = &mut cfg.train;
    if let Some(v) = args.dim {
        t.dim = v;
    }
    if let Some(v) = args.epochs {
        t.epochs = v;
    }
    if let Some(v) = args.lr {
        t.learning_rate = v;
    }
    if let Some(v) = args.negatives {
        t.negatives = v;
    }
    if let Some(v) = args.gamma {
        t.margin = v;
    }
    if let Some(v) = args.batch_size {
        t.batch_size = v;
    }
    if let Some(v) = args.l2 {
        t.l2 = v;
    }
    if let Some(v) = args.loss {
        t.loss = v;
    }
    if let Some(out) = args.out {
        cfg.out_dir = Some(out);
    }
    let cfg = cfg.finish()?;
    let stack = load_graph(&cfg)?;
    let out = cfg.out_dir()?;
    let (table, report) = train_with_progress(&stack.train, &cfg.train, |epoch, loss| {
        log::info!("epoch {epoch} loss {loss:.6}");
    })?;
    println!("epoch 0 loss {:.6}", report.initial_loss);
    if let Some(last) = report.epoch_losses.last() {
        println!("epoch {} loss {last:.6}", report.epoch_losses.len());
    }
    fs::create_dir_all(out)?;
    table.save(&out.join(EMBEDDINGS_FILE))?;
    let mut csv = String::from("epoch,loss\n");
    for (epoch, loss) in std::iter::once(report.initial_loss).chain(report.epoch_losses.iter().copied()).enumerate() {
        csv += &format!("{epoch},{loss}\n");
    }
    fs::write(out.join(LOSS_FILE), csv)?;
    Ok(())
}

fn apply_engine_flags(cfg: &mut RunConfig, args: &EngineArgs) {
    if let Some(e) = &args.engine {
        cfg.engine = e.clone();
    }
    if let Some(l) = args.logic {
        cfg.logic = l;
    }
    if args.k.is_some() {
        cfg.beam_width = args.k;
    }
    if let Some(v) = args.epsilon {
        cfg.epsilon = v;
    }
    if let Some(v) = args.beta {
        cfg.beta = v;
    }
    if let Some(v) = args.cache_size {
        cfg.cache_size = v;
    }
}

fn build_engine(cfg: &RunConfig, args: &EngineArgs, stack: &GraphStack) -> Result<Box<dyn QueryEngine>> {
    let observed = stack.layer(args.layer).clone();
    let scorer: Arc<dyn Scorer> = match &args.embeddings {
        Some(path) => {
            let table = EmbeddingTable::load(path)?;
            let calibrated = CalibratedScorer::new(Arc::new(table), stack.train.clone(), cfg.beta)?;
            Arc::new(CachedScorer::new(Arc::new(calibrated), cfg.cache_size)?)
        }
        None => Arc::new(BooleanScorer::new(observed.clone())),
    };
    let ctx = EngineContext {
        observed,
        scorer: Some(scorer),
        settings: EngineSettings {
            logic: cfg.logic,
            beam_width: cfg.beam_width,
            epsilon: cfg.epsilon,
            union: cfg.union,
        },
    };
    EngineRegistry::with_builtins().create(&cfg.engine, &ctx)
}

#[derive(Serialize)]
struct Scored<'a> {
    entity: &'a str,
    id: u32,
    score: f64,
}

#[derive(Serialize)]
struct AnswerRecord<'a> {
    format_version: u32,
    id: &'a str,
    pattern: &'a str,
    answers: Vec<Scored<'a>>,
}

pub fn answer(args: AnswerArgs) -> Result<()> {
    let mut cfg = base_config(&args.common)?;
    apply_engine_flags(&mut cfg, &args.engine);
    let cfg = cfg.finish()?;
    let stack = load_graph(&cfg)?;
    let engine = build_engine(&cfg, &args.engine, &stack)?;
    let records = read_jsonl(&args.queries, &stack)?;
    let queries: Vec<&QueryGraph> = records.iter().map(|r| &r.query).collect();
    let results = answer_all(engine.as_ref(), &queries, args.top)?;
    let mut out = String::new();
    for (record, top) in records.iter().zip(&results) {
        let answers = top
            .iter()
            .map(|&(id, score)| Ok(Scored { entity: stack.entity_name(id)?, id, score }))
            .collect::<Result<Vec<_>>>()?;
        let line = AnswerRecord { format_version: OUTPUT_FORMAT_VERSION, id: &record.id, pattern: &record.pattern, answers };
        out += &serde_json::to_string(&line)?;
        out.push('\n');
    }
    match &args.out {
        Some(path) => fs::write(path, out)?,
        None => std::io::stdout().write_all(out.as_bytes())?,
    }
    Ok(())
}

pub fn eval(args: EvalArgs) -> Result<()> {
    let mut cfg = base_config(&args.common)?;
    apply_engine_flags(&mut cfg, &args.engine);
    if let Some(t) = args.threshold {
        cfg.threshold = t;
    }
    let cfg = cfg.finish()?;
    let stack = load_graph(&cfg)?;
    let engine = build_engine(&cfg, &args.engine, &stack)?;
    let records = read_jsonl(&args.queries, &stack)?;
    let mut report = evaluate(&records, engine.as_ref())?;
    if args.faithfulness {
        report.faithfulness = Some(faithfulness_auc(&records, engine.as_ref())?);
    }
    if args.cardinality {
        report.cardinality = Some(cardinality_metrics(&records, engine.as_ref(), cfg.threshold)?);
    }
    if let Some(parent) = args.report.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    report.save(&args.report)?;
    print!("{}", report.to_table());
    Ok(())
}

pub fn oracle(args: OracleArgs) -> Result<()> {
    let cfg = base_config(&args.common)?.finish()?;
    let stack = load_graph(&cfg)?;
    let mut records = read_jsonl(&args.queries, &stack)?;
    let big = stack.layer(args.layer);
    for r in &mut records {
        let labels = label_answers(&r.query, &stack.train, big)?;
        if !labels.false_positive.is_empty() {
            log::info!("{}: {} answers hold only on the training layer", r.id, labels.false_positive.len());
        }
        r.easy = labels.easy;
        r.hard = labels.hard;
    }
    write_jsonl(&args.out, &records, &stack)?;
    println!("labeled {} queries against the {} layer", records.len(), args.layer);
    Ok(())
}

pub fn generate(args: GenerateArgs) -> Result<()> {
    let stack = match args.kind {
        GraphKind::Planted => {
            let groups = args.entities / 10;
            if groups == 0 || !args.entities.is_multiple_of(10) {
                return Err(Error::Validation("planted graphs need a multiple of 10 entities".into()));
            }
            let cfg = PlantedConfig { groups, relations: args.relations, seed: args.seed, ..Default::default() };
            planted_stack(&cfg)?.0
        }
        GraphKind::Random => random_stack(args.entities, args.relations, args.triples, 0.1, args.seed)?,
    };
    write_tsv_splits(&stack, &args.out)?;
    println!("{}", summary(&stack));
    Ok(())
}

