//! Query engines behind one trait, selected by name at runtime.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzy::{BeamExecutor, ContinuousExecutor, FuzzySet, Logic, Scorer, UnionStrategy, DEFAULT_EPSILON};
use crate::kg::{EntityId, KnowledgeGraph};
use crate::query::QueryGraph;
use crate::symbolic;

pub trait QueryEngine: Send + Sync {
    fn name(&self) -> &str;

    /// One score in `[0, 1]` per entity.
    fn scores(&self, q: &QueryGraph) -> Result<Vec<f64>>;

    /// Best `n` entities with positive score, ties broken by ascending id.
    fn top(&self, q: &QueryGraph, n: usize) -> Result<Vec<(EntityId, f64)>> {
        let mut ranked: Vec<(EntityId, f64)> = self
            .scores(q)?
            .into_iter()
            .enumerate()
            .filter(|&(_, s)| s > 0.0)
            .map(|(e, s)| (e as EntityId, s))
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked.truncate(n);
        Ok(ranked)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineSettings {
    pub logic: Logic,
    pub beam_width: Option<usize>,
    pub epsilon: f64,
    pub union: UnionStrategy,
}

impl Default for EngineSettings {
    fn default() -> Self {
        EngineSettings { logic: Logic::Product, beam_width: None, epsilon: DEFAULT_EPSILON, union: UnionStrategy::Conorm }
    }
}

/// Inputs shared by every engine constructor.
#[derive(Clone)]
pub struct EngineContext {
    /// Layer the symbolic engine traverses.
    pub observed: Arc<KnowledgeGraph>,
    /// Row source for fuzzy engines.
    pub scorer: Option<Arc<dyn Scorer>>,
    pub settings: EngineSettings,
}

impl EngineContext {
    fn require_scorer(&self, engine: &str) -> Result<Arc<dyn Scorer>> {
        self.scorer
            .clone()
            .ok_or_else(|| Error::InvalidInput(format!("engine `{engine}` needs a scorer")))
    }
}

/// Exact answers over the observed layer as a 0/1 vector.
pub struct SymbolicEngine {
    graph: Arc<KnowledgeGraph>,
}

impl SymbolicEngine {
    pub fn new(graph: Arc<KnowledgeGraph>) -> Self {
        SymbolicEngine { graph }
    }
}

impl QueryEngine for SymbolicEngine {
    fn name(&self) -> &str {
        "symbolic"
    }

    fn scores(&self, q: &QueryGraph) -> Result<Vec<f64>> {
        let found = symbolic::answers(q, &self.graph)?;
        Ok(FuzzySet::indicator(self.graph.num_entities(), found).into_vec())
    }
}

pub struct ContinuousEngine {
    executor: ContinuousExecutor,
}

impl ContinuousEngine {
    pub fn new(scorer: Arc<dyn Scorer>, settings: &EngineSettings) -> Self {
        let executor = ContinuousExecutor::new(scorer, settings.logic)
            .with_epsilon(settings.epsilon)
            .with_union(settings.union);
        ContinuousEngine { executor }
    }

    pub fn executor(&self) -> &ContinuousExecutor {
        &self.executor
    }
}

impl QueryEngine for ContinuousEngine {
    fn name(&self) -> &str {
        "continuous"
    }

    fn scores(&self, q: &QueryGraph) -> Result<Vec<f64>> {
        Ok(self.executor.execute(q)?.into_vec())
    }
}

/// Entities outside the final beam score 0.
pub struct BeamEngine {
    executor: BeamExecutor,
    num_entities: usize,
}

impl BeamEngine {
    pub fn new(scorer: Arc<dyn Scorer>, settings: &EngineSettings) -> Result<Self> {
        let width = settings
            .beam_width
            .ok_or_else(|| Error::InvalidInput("beam engine needs a beam width".into()))?;
        let num_entities = scorer.num_entities();
        let executor = BeamExecutor::new(scorer, settings.logic, width)?.with_epsilon(settings.epsilon);
        Ok(BeamEngine { executor, num_entities })
    }
}

impl QueryEngine for BeamEngine {
    fn name(&self) -> &str {
        "beam"
    }

    fn scores(&self, q: &QueryGraph) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.num_entities];
        for (e, s) in self.executor.execute_beam(q)? {
            out[e as usize] = s;
        }
        Ok(out)
    }

    fn top(&self, q: &QueryGraph, n: usize) -> Result<Vec<(EntityId, f64)>> {
        let mut ranked = self.executor.execute_beam(q)?;
        ranked.truncate(n);
        Ok(ranked)
    }
}

/// Top `n` of every query, in input order.
pub fn answer_all(engine: &dyn QueryEngine, queries: &[&QueryGraph], n: usize) -> Result<Vec<Vec<(EntityId, f64)>>> {
    use rayon::prelude::*;
    queries.par_iter().map(|q| engine.top(q, n)).collect()
}

pub type EngineFactory = Box<dyn Fn(&EngineContext) -> Result<Box<dyn QueryEngine>> + Send + Sync>;

pub struct EngineRegistry {
    factories: BTreeMap<String, EngineFactory>,
}

impl EngineRegistry {
    pub fn empty() -> Self {
        EngineRegistry { factories: BTreeMap::new() }
    }

    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.register("symbolic", |ctx| Ok(Box::new(SymbolicEngine::new(ctx.observed.clone()))));
        reg.register("continuous", |ctx| {
            Ok(Box::new(ContinuousEngine::new(ctx.require_scorer("continuous")?, &ctx.settings)))
        });
        reg.register("beam", |ctx| Ok(Box::new(BeamEngine::new(ctx.require_scorer("beam")?, &ctx.settings)?)));
        reg
    }

    /// Replaces any engine already registered under `name`.
    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn(&EngineContext) -> Result<Box<dyn QueryEngine>> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_string(), Box::new(factory));
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    pub fn create(&self, name: &str, ctx: &EngineContext) -> Result<Box<dyn QueryEngine>> {
        let factory = self.factories.get(name).ok_or_else(|| Error::UnknownName {
            kind: "engine",
            name: name.to_string(),
            known: self.names().join(", "),
        })?;
        factory(ctx)
    }
}

impl Default for EngineRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::BooleanScorer;
    use crate::kg::Triple;
    use crate::query::template;

    fn context() -> EngineContext {
        let g = Arc::new(
            KnowledgeGraph::new(4, 1, vec![Triple::new(0, 0, 1), Triple::new(0, 0, 2), Triple::new(3, 0, 2)]).unwrap(),
        );
        EngineContext {
            observed: g.clone(),
            scorer: Some(Arc::new(BooleanScorer::new(g))),
            settings: EngineSettings { beam_width: Some(4), ..Default::default() },
        }
    }

    fn one_hop() -> QueryGraph {
        let mut q = template("1p").unwrap();
        q.nodes[0] = crate::query::NodeKind::Anchor(Some(0));
        q.atoms[0].relation = Some(0);
        q
    }

    #[test]
    fn builtins_agree_on_boolean_rows() {
        let reg = EngineRegistry::with_builtins();
        assert_eq!(reg.names(), ["beam", "continuous", "symbolic"]);
        let ctx = context();
        for name in reg.names() {
            let engine = reg.create(name, &ctx).unwrap();
            assert_eq!(engine.name(), name);
            assert_eq!(engine.scores(&one_hop()).unwrap(), vec![0.0, 1.0, 1.0, 0.0]);
            assert_eq!(engine.top(&one_hop(), 10).unwrap(), vec![(1, 1.0), (2, 1.0)]);
            assert_eq!(engine.top(&one_hop(), 1).unwrap(), vec![(1, 1.0)]);
        }
    }

    #[test]
    fn batch_answers_keep_input_order() {
        let engine = SymbolicEngine::new(context().observed);
        let mut other = one_hop();
        other.nodes[0] = crate::query::NodeKind::Anchor(Some(3));
        let got = answer_all(&engine, &[&one_hop(), &other], 5).unwrap();
        assert_eq!(got, vec![vec![(1, 1.0), (2, 1.0)], vec![(2, 1.0)]]);
    }

    #[test]
    fn unknown_engine_lists_known_names() {
        let err = EngineRegistry::with_builtins().create("gnn", &context()).err().unwrap();
        assert!(err.to_string().contains("continuous"), "{err}");
    }

    #[test]
    fn missing_scorer_or_width_is_rejected() {
        let reg = EngineRegistry::with_builtins();
        let mut ctx = context();
        ctx.settings.beam_width = None;
        assert!(reg.create("beam", &ctx).is_err());
        ctx.scorer = None;
        assert!(reg.create("continuous", &ctx).is_err());
        assert!(reg.create("symbolic", &ctx).is_ok());
    }

    #[test]
    fn custom_engines_can_be_registered() {
        struct Flat(usize);
        impl QueryEngine for Flat {
            fn name(&self) -> &str {
                "flat"
            }
            fn scores(&self, _: &QueryGraph) -> Result<Vec<f64>> {
                Ok(vec![0.5; self.0])
            }
        }
        let mut reg = EngineRegistry::with_builtins();
        reg.register("flat", |ctx| Ok(Box::new(Flat(ctx.observed.num_entities()))));
        let top = reg.create("flat", &context()).unwrap().top(&one_hop(), 2).unwrap();
        assert_eq!(top, vec![(0, 0.5), (1, 0.5)]);
    }
}
