use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kg::{EntityId, KnowledgeGraph, Triple};
use crate::rng::{substream, Rng};

use super::loss::{loss_by_name, Loss};
use super::table::EmbeddingTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Init {
    /// Uniform in `[-0.5/d, 0.5/d]` per real and imaginary component.
    #[default]
    Uniform,
    /// All zeros; every score starts at 0.
    Zeros,
}

/// Hyperparameters of link-predictor training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub dim: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Negatives per positive.
    pub negatives: usize,
    /// Margin γ.
    pub margin: f64,
    pub batch_size: usize,
    pub seed: u64,
    /// L2 weight on the embeddings of each positive triple.
    pub l2: f64,
    pub loss: String,
    pub init: Init,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 16,
            epochs: 50,
            learning_rate: 1.0,
            negatives: 16,
            margin: 0.0,
            batch_size: 4,
            seed: 0,
            l2: 1e-4,
            loss: "logsigmoid".into(),
            init: Init::Uniform,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(format!("train config: {m}")));
        if self.dim == 0 {
            return bad("dim must be at least 1");
        }
        if self.negatives == 0 {
            return bad("negatives must be at least 1");
        }
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            return bad("margin must be a finite value >= 0");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return bad("l2 must be >= 0");
        }
        loss_by_name(&self.loss).map(|_| ())
    }
}

/// Training parameters in double precision. Row `e` of `entities` holds the
/// `dim` real parts followed by the `dim` imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub dim: usize,
    pub entities: Vec<f64>,
    pub relations: Vec<f64>,
}

impl Params {
    pub fn zeros(num_entities: usize, num_relations: usize, dim: usize) -> Self {
        Params {
            dim,
            entities: vec![0.0; num_entities * 2 * dim],
            relations: vec![0.0; num_relations * 2 * dim],
        }
    }

    fn uniform(num_entities: usize, num_relations: usize, dim: usize, rng: &mut Rng) -> Self {
        let bound = 0.5 / dim as f64;
        let mut p = Params::zeros(num_entities, num_relations, dim);
        for x in p.entities.iter_mut().chain(p.relations.iter_mut()) {
            *x = rng.gen_range(-bound..=bound);
        }
        p
    }

    fn ent(&self, e: EntityId) -> &[f64] {
        &self.entities[e as usize * 2 * self.dim..(e as usize + 1) * 2 * self.dim]
    }

    fn rel(&self, r: u32) -> &[f64] {
        &self.relations[r as usize * 2 * self.dim..(r as usize + 1) * 2 * self.dim]
    }

    pub fn score(&self, t: &Triple) -> f64 {
        let d = self.dim;
        let (h, r, tl) = (self.ent(t.head), self.rel(t.relation), self.ent(t.tail));
        (0..d)
            .map(|k| {
                let (hr, hi, rr, ri, tr, ti) = (h[k], h[d + k], r[k], r[d + k], tl[k], tl[d + k]);
                (hr * rr - hi * ri) * tr + (hr * ri + hi * rr) * ti
            })
            .sum()
    }

    fn to_table(&self, num_entities: usize, num_relations: usize) -> Result<EmbeddingTable> {
        let d = self.dim;
        let split = |rows: &[f64], n: usize| {
            let mut re = Vec::with_capacity(n * d);
            let mut im = Vec::with_capacity(n * d);
            for row in rows.chunks_exact(2 * d) {
                re.extend(row[..d].iter().map(|&x| x as f32));
                im.extend(row[d..].iter().map(|&x| x as f32));
            }
            (re, im)
        };
        let (er, ei) = split(&self.entities, num_entities);
        let (rr, ri) = split(&self.relations, num_relations);
        EmbeddingTable::from_parts(num_entities, num_relations, d, er, ei, rr, ri, vec![0.0; num_relations])
    }

    pub fn from_table(table: &EmbeddingTable) -> Self {
        let d = table.dim();
        let mut p = Params::zeros(table.num_entities(), table.num_relations(), d);
        for e in 0..table.num_entities() {
            let (re, im) = table.entity(e as u32);
            let row = &mut p.entities[e * 2 * d..(e + 1) * 2 * d];
            row[..d].iter_mut().zip(re).for_each(|(a, &b)| *a = b as f64);
            row[d..].iter_mut().zip(im).for_each(|(a, &b)| *a = b as f64);
        }
        for r in 0..table.num_relations() {
            let (re, im) = table.relation(r as u32);
            let row = &mut p.relations[r * 2 * d..(r + 1) * 2 * d];
            row[..d].iter_mut().zip(re).for_each(|(a, &b)| *a = b as f64);
            row[d..].iter_mut().zip(im).for_each(|(a, &b)| *a = b as f64);
        }
        p
    }
}

/// One positive triple with its corrupted negatives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub positive: Triple,
    pub negatives: Vec<Triple>,
}

/// Dense gradient buffer that remembers which rows were written.
#[derive(Debug, Clone)]
pub struct Gradient {
    pub entities: Vec<f64>,
    pub relations: Vec<f64>,
    touched_entities: Vec<EntityId>,
    touched_relations: Vec<u32>,
}

impl Gradient {
    pub fn zeros_like(p: &Params) -> Self {
        Gradient {
            entities: vec![0.0; p.entities.len()],
            relations: vec![0.0; p.relations.len()],
            touched_entities: Vec::new(),
            touched_relations: Vec::new(),
        }
    }

    fn clear(&mut self, dim: usize) {
        for &e in &self.touched_entities {
            self.entities[e as usize * 2 * dim..(e as usize + 1) * 2 * dim].fill(0.0);
        }
        for &r in &self.touched_relations {
            self.relations[r as usize * 2 * dim..(r as usize + 1) * 2 * dim].fill(0.0);
        }
        self.touched_entities.clear();
        self.touched_relations.clear();
    }

    fn touch(&mut self, t: &Triple) {
        self.touched_entities.push(t.head);
        self.touched_entities.push(t.tail);
        self.touched_relations.push(t.relation);
    }

    /// Adds `coeff · ∂score/∂θ` for triple `t`.
    fn add_score(&mut self, p: &Params, t: &Triple, coeff: f64) {
        let d = p.dim;
        let (h, r, tl) = (p.ent(t.head), p.rel(t.relation), p.ent(t.tail));
        let (ho, ro, to) = (
            t.head as usize * 2 * d,
            t.relation as usize * 2 * d,
            t.tail as usize * 2 * d,
        );
        for k in 0..d {
            let (hr, hi, rr, ri, tr, ti) = (h[k], h[d + k], r[k], r[d + k], tl[k], tl[d + k]);
            self.entities[ho + k] += coeff * (rr * tr + ri * ti);
            self.entities[ho + d + k] += coeff * (-ri * tr + rr * ti);
            self.relations[ro + k] += coeff * (hr * tr + hi * ti);
            self.relations[ro + d + k] += coeff * (-hi * tr + hr * ti);
            self.entities[to + k] += coeff * (hr * rr - hi * ri);
            self.entities[to + d + k] += coeff * (hr * ri + hi * rr);
        }
        self.touch(t);
    }

    fn add_l2(&mut self, p: &Params, t: &Triple, weight: f64) {
        let d = 2 * p.dim;
        for (e, buf_off) in [(t.head, t.head as usize * d), (t.tail, t.tail as usize * d)] {
            for (g, &x) in self.entities[buf_off..buf_off + d].iter_mut().zip(p.ent(e)) {
                *g += weight * x;
            }
        }
        let off = t.relation as usize * d;
        for (g, &x) in self.relations[off..off + d].iter_mut().zip(p.rel(t.relation)) {
            *g += weight * x;
        }
    }
}

fn l2_term(p: &Params, t: &Triple) -> f64 {
    let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    sq(p.ent(t.head)) + sq(p.rel(t.relation)) + sq(p.ent(t.tail))
}

/// Mean per-example objective over `examples`; accumulates its gradient into
/// `grad` when given.
pub fn batch_objective(
    p: &Params,
    examples: &[Example],
    loss: &dyn Loss,
    margin: f64,
    l2: f64,
    mut grad: Option<&mut Gradient>,
) -> f64 {
    if examples.is_empty() {
        return 0.0;
    }
    let scale = 1.0 / examples.len() as f64;
    let mut total = 0.0;
    let mut neg_scores = Vec::new();
    for ex in examples {
        let pos = p.score(&ex.positive);
        neg_scores.clear();
        neg_scores.extend(ex.negatives.iter().map(|t| p.score(t)));
        let eval = loss.eval(pos, &neg_scores, margin);
        total += eval.value + 0.5 * l2 * l2_term(p, &ex.positive);
        if let Some(g) = grad.as_deref_mut() {
            g.add_score(p, &ex.positive, scale * eval.d_positive);
            for (t, &dn) in ex.negatives.iter().zip(&eval.d_negatives) {
                if dn != 0.0 {
                    g.add_score(p, t, scale * dn);
                }
            }
            if l2 > 0.0 {
                g.add_l2(p, &ex.positive, scale * l2);
            }
        }
    }
    total * scale
}

/// Uniform head or tail corruption, avoiding triples of `train` when possible.
fn corrupt(train: &KnowledgeGraph, pos: &Triple, rng: &mut Rng) -> Triple {
    let n = train.num_entities() as EntityId;
    let mut candidate = *pos;
    for _ in 0..32 {
        candidate = *pos;
        if rng.gen_bool(0.5) {
            candidate.head = rng.gen_range(0..n);
        } else {
            candidate.tail = rng.gen_range(0..n);
        }
        if !train.contains(&candidate) {
            break;
        }
    }
    candidate
}

fn make_examples(train: &KnowledgeGraph, positives: &[Triple], k: usize, rng: &mut Rng) -> Vec<Example> {
    positives
        .iter()
        .map(|pos| Example {
            positive: *pos,
            negatives: (0..k).map(|_| corrupt(train, pos, rng)).collect(),
        })
        .collect()
}

/// Per-epoch progress of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean batch objective at initialization.
    pub initial_loss: f64,
    /// Mean batch objective of each epoch, in order.
    pub epoch_losses: Vec<f64>,
}

/// Trains ComplEx embeddings on `train` with mini-batch SGD. Single-threaded
/// and deterministic for a given config.
pub fn train(graph: &KnowledgeGraph, cfg: &TrainConfig) -> Result<(EmbeddingTable, TrainReport)> {
    train_with_progress(graph, cfg, |_, _| {})
}

pub fn train_with_progress(
    graph: &KnowledgeGraph,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<(EmbeddingTable, TrainReport)> {
    cfg.validate()?;
    if graph.is_empty() {
        return Err(Error::InvalidInput("training graph has no triples".into()));
    }
    let loss = loss_by_name(&cfg.loss)?;
    let (ne, nr) = (graph.num_entities(), graph.num_relations());
    let mut params = match cfg.init {
        Init::Uniform => Params::uniform(ne, nr, cfg.dim, &mut substream(cfg.seed, "init")),
        Init::Zeros => Params::zeros(ne, nr, cfg.dim),
    };
    let positives = graph.triples();

    let mut probe_rng = substream(cfg.seed, "initial-negatives");
    let mut initial = 0.0;
    let mut batches = 0usize;
    for chunk in positives.chunks(cfg.batch_size) {
        let examples = make_examples(graph, chunk, cfg.negatives, &mut probe_rng);
        initial += batch_objective(&params, &examples, loss.as_ref(), cfg.margin, cfg.l2, None);
        batches += 1;
    }
    let initial_loss = initial / batches as f64;
    on_epoch(0, initial_loss);

    let mut order: Vec<usize> = (0..positives.len()).collect();
    let mut shuffle_rng = substream(cfg.seed, "shuffle");
    let mut neg_rng = substream(cfg.seed, "negatives");
    let mut grad = Gradient::zeros_like(&params);
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    let mut batch_pos = Vec::with_capacity(cfg.batch_size);
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut sum = 0.0;
        let mut count = 0usize;
        for (b, chunk) in order.chunks(cfg.batch_size).enumerate() {
            batch_pos.clear();
            batch_pos.extend(chunk.iter().map(|&i| positives[i]));
            let examples = make_examples(graph, &batch_pos, cfg.negatives, &mut neg_rng);
            grad.clear(cfg.dim);
            let value =
                batch_objective(&params, &examples, loss.as_ref(), cfg.margin, cfg.l2, Some(&mut grad));
            if !value.is_finite() {
                return Err(Error::TrainingDiverged { epoch, batch: b });
            }
            if !apply_sgd(&mut params, &mut grad, cfg.learning_rate) {
                return Err(Error::TrainingDiverged { epoch, batch: b });
            }
            sum += value;
            count += 1;
        }
        let mean = sum / count as f64;
        log::debug!("epoch {epoch}: mean loss {mean:.6}");
        on_epoch(epoch, mean);
        epoch_losses.push(mean);
    }

    let mut table = params.to_table(ne, nr)?;
    if !table.is_finite() {
        return Err(Error::TrainingDiverged {
            epoch: cfg.epochs,
            batch: 0,
        });
    }
    table.fit_relation_medians(graph)?;
    Ok((
        table,
        TrainReport {
            initial_loss,
            epoch_losses,
        },
    ))
}

/// Applies one step on the touched rows; returns false if any parameter became non-finite.
fn apply_sgd(p: &mut Params, g: &mut Gradient, lr: f64) -> bool {
    let w = 2 * p.dim;
    g.touched_entities.sort_unstable();
    g.touched_entities.dedup();
    g.touched_relations.sort_unstable();
    g.touched_relations.dedup();
    let mut finite = true;
    for &e in &g.touched_entities {
        let range = e as usize * w..(e as usize + 1) * w;
        for (x, dx) in p.entities[range.clone()].iter_mut().zip(&g.entities[range]) {
            *x -= lr * dx;
            finite &= x.is_finite();
        }
    }
    for &r in &g.touched_relations {
        let range = r as usize * w..(r as usize + 1) * w;
        for (x, dx) in p.relations[range.clone()].iter_mut().zip(&g.relations[range]) {
            *x -= lr * dx;
            finite &= x.is_finite();
        }
    }
    finite
}
