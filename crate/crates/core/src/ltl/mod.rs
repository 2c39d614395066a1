//! Co-safe LTL: parsing, DFA compilation and pruning.

mod dfa;
mod formula;
mod guard;
mod parser;
mod prune;

pub use dfa::{compile_to_dfa, compile_to_dfa_with_cap, Dfa, StateId, Transition, DEFAULT_STATE_CAP};
pub use formula::Formula;
pub use guard::{AtomSet, Cube, Guard, Literal};
pub use parser::{parse_cosafe_ltl, parse_cosafe_ltl_with_atoms};
pub use prune::{cube_is_infeasible, prune_dfa, unpruned_index, AtomBinding, AtomMeta, PrunedDfaIndex, PrunedEdge};

pub use crate::error::LtlError;

/// `δ(q, σ)`; `None` signals a violation.
pub fn next_state(d: &Dfa, q: StateId, sigma: &AtomSet) -> Option<StateId> {
    d.next_state(q, sigma)
}

/// Pruned hop distance; `Ok(None)` is infinity.
pub fn dfa_distance(idx: &PrunedDfaIndex, q: StateId, q2: StateId) -> Result<Option<u32>, LtlError> {
    idx.distance(q, q2)
}
