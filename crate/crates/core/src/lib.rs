//! Pseudo-Boolean satisfiability: normal-form constraints, unit propagation, cutting-plane
//! conflict learning, constraint strengthening and benchmark generators.

pub mod families;
pub mod infer;
pub mod io;
pub mod model;
pub mod oracle;
pub mod preprocess;
pub mod propagate;
pub mod search;

pub use model::{
    normalize, Instance, InstanceMeta, LinearConstraint, Lit, Model, ModelError, RawConstraint,
    Term, Var,
};
pub use propagate::EngineKind;
pub use search::{solve, Heuristic, Limit, SolveResult, SolverConfig, Stats, Status};
