use super::explore::initial;
use super::step::{transitions, ActionLabel, Rule};
use crate::name::Name;
use crate::syntax::Program;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct TraceStep {
    pub label: ActionLabel,
    pub rule: Rule,
    pub channel: Option<Name>,
    pub state: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Trace {
    pub initial: String,
    pub steps: Vec<TraceStep>,
    pub terminated: bool,
    /// No step applies but the state is not inaction.
    pub stuck: bool,
}

/// Executes up to `max_steps` reductions, picking uniformly at random.
pub fn run(p: &Program, max_steps: usize, seed: u64) -> Trace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = initial(p);
    let mut trace = Trace {
        initial: s.to_string(),
        steps: Vec::new(),
        terminated: false,
        stuck: false,
    };
    for _ in 0..max_steps {
        let ts = transitions(&s, p);
        let Some(t) = ts.choose(&mut rng) else { break };
        trace.steps.push(TraceStep {
            label: t.label,
            rule: t.rule,
            channel: t.channel,
            state: t.state.to_string(),
        });
        s = t.state.clone();
    }
    if transitions(&s, p).is_empty() {
        trace.terminated = s.is_nil();
        trace.stuck = !s.is_nil();
    }
    trace
}
