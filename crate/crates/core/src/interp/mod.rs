//! Reference semantics of MiGo processes.
//!
//! States are kept in the normal form of [`RuntimeState`]. Calls unfold as
//! part of the step that consumes them. Conditionals report their mark and
//! branch. Exploration, oracles and the conditional classifier work on
//! bounded graphs only.

mod classify;
mod eval;
mod explore;
mod oracle;
mod run;
mod state;
mod step;

pub use classify::{
    classify_conditionals, classify_graph, marks, star_transform, ConditionalReport, MarkClass,
    StarError,
};
pub use eval::{eval_closed, eval_expr, Env, EvalError};
pub use explore::{
    explore, explore_state, explore_with_budget, initial, state_hash, ExploreError, ProcGraph,
    DEFAULT_PROCESS_BUDGET,
};
pub use oracle::{
    liveness_on, oracle_liveness, oracle_safety, safety_on, OracleVerdict, OracleWitness,
};
pub use run::{run, Trace, TraceStep};
pub use state::{normalize, RuntimeState};
pub use step::{barbs, step, transitions, ActionLabel, Rule, Side, Transition};
