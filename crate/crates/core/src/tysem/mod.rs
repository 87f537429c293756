//! Transition semantics of behavioural types: the concrete LTS, its bounded
//! symbolic variant, normal forms and barbs.
//!
//! A state is a list of restricted names in creation order followed by a
//! multiset of threads. Under bound `k` the oldest `k` live names are
//! tracked; a call unfolds only if it mentions a tracked name or has no
//! arguments. Synchronisations stay visible as `[a]` even on restricted
//! names, and count as reductions alongside τ.

mod barbs;
mod graph;
mod state;
mod step;

pub(crate) use barbs::barbs_of_atoms;
pub use barbs::{type_barbs, Barb};
pub use graph::{
    explore_from, initial_state, reachable, reachable_with_budget, Graph, ReachError,
    DEFAULT_STATE_BUDGET,
};
pub use state::{canonicalize, normalize, CanonicalTerm, SymState};
pub use step::{successors, sym_step, type_step, Label};
