//! Fuzzy-set execution of queries.

mod beam;
mod continuous;
mod logic;
mod scorer;
mod set;

pub use beam::BeamExecutor;
pub use continuous::{execute, project, ContinuousExecutor, ProjectionCounter, UnionStrategy, DEFAULT_EPSILON};
pub use logic::{checked_fnot, fnot, Logic};
pub use scorer::{BooleanScorer, CachedScorer, DenseScorer, Scorer};
pub use set::{check_unit, FuzzySet, DOMAIN_TOLERANCE};
