//! Cutting-plane resolution, conflict analysis and the learned-constraint database.

mod analyze;
mod db;
mod resolve;

pub use analyze::{analyze_conflict, backjump_level, is_asserting_at, Analysis, LearnPath, Learned};
pub use db::{is_locked, Activity, LearnedDb, DEFAULT_LENGTH_BOUND, DEFAULT_RELEVANCE_BOUND};
pub use resolve::{irrelevance, pb_resolve, weaken_to_cardinality, InferError, Resolvent};
