//! Transition pruning and hop distances on the pruned graph.

use std::collections::VecDeque;

use super::dfa::{Dfa, StateId};
use super::guard::{AtomSet, Cube, Guard};
use super::LtlError;

/// What an atom pins its robot to, as far as pruning is concerned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AtomBinding {
    /// Near a specific landmark.
    Landmark(usize),
    /// Inside a fixed region of the workspace.
    Region(usize),
    /// Near some landmark of a given class.
    Class(usize),
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AtomMeta {
    pub robot: Option<usize>,
    pub binding: AtomBinding,
}

impl AtomMeta {
    pub fn unbound() -> Self {
        Self { robot: None, binding: AtomBinding::None }
    }
}

/// True when the positive literals of `cube` put one robot at two places.
pub fn cube_is_infeasible(cube: &Cube, meta: &[AtomMeta]) -> bool {
    let mut places: Vec<(usize, AtomBinding)> = Vec::new();
    for a in cube.positives() {
        let Some(m) = meta.get(a) else { continue };
        let Some(robot) = m.robot else { continue };
        if m.binding == AtomBinding::None {
            continue;
        }
        for &(r, b) in &places {
            if r != robot || b == m.binding {
                continue;
            }
            let location = |b: AtomBinding| matches!(b, AtomBinding::Landmark(_) | AtomBinding::Region(_));
            let class = |b: AtomBinding| matches!(b, AtomBinding::Class(_));
            if (location(b) && location(m.binding)) || (class(b) && class(m.binding)) {
                return true;
            }
        }
        places.push((robot, m.binding));
    }
    false
}

#[derive(Clone, Debug)]
pub struct PrunedEdge {
    pub guard: Guard,
    pub target: StateId,
}

#[derive(Clone, Debug)]
pub struct PrunedDfaIndex {
    dfa: Dfa,
    edges: Vec<Vec<PrunedEdge>>,
    to_accept: Vec<Option<u32>>,
    all_pairs: Option<Vec<Vec<Option<u32>>>>,
    infeasible_warning: bool,
    removed: usize,
}

const ALL_PAIRS_LIMIT: usize = 4096;

/// Prunes transitions whose every enabling cube is infeasible. If no path from
/// the initial state to the accepting state survives, the warning flag is set
/// and the unpruned automaton is used instead.
pub fn prune_dfa(dfa: &Dfa, meta: &[AtomMeta]) -> PrunedDfaIndex {
    let mut removed = 0;
    let mut edges: Vec<Vec<PrunedEdge>> = (0..dfa.num_states())
        .map(|q| {
            dfa.transitions(q)
                .iter()
                .filter_map(|t| {
                    let g = t.guard.filter_cubes(|c| !cube_is_infeasible(c, meta));
                    if g.is_false() {
                        removed += 1;
                        None
                    } else {
                        Some(PrunedEdge { guard: g, target: t.target })
                    }
                })
                .collect()
        })
        .collect();
    let mut to_accept = distances_to(&edges, dfa.accepting());
    let mut infeasible_warning = false;
    if to_accept[dfa.initial()].is_none() {
        infeasible_warning = true;
        removed = 0;
        edges = unpruned(dfa);
        to_accept = distances_to(&edges, dfa.accepting());
    }
    build(dfa.clone(), edges, to_accept, infeasible_warning, removed)
}

/// Index over the automaton without removing anything.
pub fn unpruned_index(dfa: &Dfa) -> PrunedDfaIndex {
    let edges = unpruned(dfa);
    let to_accept = distances_to(&edges, dfa.accepting());
    build(dfa.clone(), edges, to_accept, false, 0)
}

fn unpruned(dfa: &Dfa) -> Vec<Vec<PrunedEdge>> {
    (0..dfa.num_states())
        .map(|q| dfa.transitions(q).iter().map(|t| PrunedEdge { guard: t.guard.clone(), target: t.target }).collect())
        .collect()
}

fn build(
    dfa: Dfa,
    edges: Vec<Vec<PrunedEdge>>,
    to_accept: Vec<Option<u32>>,
    infeasible_warning: bool,
    removed: usize,
) -> PrunedDfaIndex {
    let all_pairs = (edges.len() <= ALL_PAIRS_LIMIT).then(|| (0..edges.len()).map(|q| bfs_from(&edges, q)).collect());
    PrunedDfaIndex { dfa, edges, to_accept, all_pairs, infeasible_warning, removed }
}

fn bfs_from(edges: &[Vec<PrunedEdge>], src: StateId) -> Vec<Option<u32>> {
    let mut dist = vec![None; edges.len()];
    dist[src] = Some(0);
    let mut queue = VecDeque::from([src]);
    while let Some(q) = queue.pop_front() {
        let d = dist[q].unwrap_or(0) + 1;
        for e in &edges[q] {
            if dist[e.target].is_none() {
                dist[e.target] = Some(d);
                queue.push_back(e.target);
            }
        }
    }
    dist
}

fn distances_to(edges: &[Vec<PrunedEdge>], target: Option<StateId>) -> Vec<Option<u32>> {
    let n = edges.len();
    let mut dist = vec![None; n];
    let Some(target) = target else { return dist };
    let mut rev: Vec<Vec<StateId>> = vec![Vec::new(); n];
    for (q, outs) in edges.iter().enumerate() {
        for e in outs {
            rev[e.target].push(q);
        }
    }
    dist[target] = Some(0);
    let mut queue = VecDeque::from([target]);
    while let Some(q) = queue.pop_front() {
        let d = dist[q].unwrap_or(0) + 1;
        for &p in &rev[q] {
            if dist[p].is_none() {
                dist[p] = Some(d);
                queue.push_back(p);
            }
        }
    }
    dist
}

impl PrunedDfaIndex {
    pub fn dfa(&self) -> &Dfa {
        &self.dfa
    }

    pub fn num_states(&self) -> usize {
        self.edges.len()
    }

    /// Set when pruning disconnected the initial state from the accepting
    /// state; the index then holds the unpruned automaton.
    pub fn infeasible_warning(&self) -> bool {
        self.infeasible_warning
    }

    pub fn removed_transitions(&self) -> usize {
        self.removed
    }

    pub fn edges(&self, q: StateId) -> &[PrunedEdge] {
        &self.edges[q]
    }

    pub fn pruned_guard(&self, from: StateId, to: StateId) -> Option<&Guard> {
        self.edges.get(from)?.iter().find(|e| e.target == to).map(|e| &e.guard)
    }

    fn check(&self, q: StateId) -> Result<(), LtlError> {
        if q < self.edges.len() {
            Ok(())
        } else {
            Err(LtlError::UnknownState(q))
        }
    }

    /// Hop count of the shortest pruned path from `q` to `q2`, `None` if no
    /// such path exists.
    pub fn distance(&self, q: StateId, q2: StateId) -> Result<Option<u32>, LtlError> {
        self.check(q)?;
        self.check(q2)?;
        Ok(match &self.all_pairs {
            Some(table) => table[q][q2],
            None => bfs_from(&self.edges, q)[q2],
        })
    }

    /// Hops from `q` to the accepting state.
    pub fn distance_to_accept(&self, q: StateId) -> Option<u32> {
        self.to_accept.get(q).copied().flatten()
    }

    /// One-hop pruned successors of `q_next` (self-loop included) with the
    /// smallest distance to the accepting state.
    pub fn reachable_min_set(&self, q_next: StateId) -> Vec<StateId> {
        let Some(outs) = self.edges.get(q_next) else { return Vec::new() };
        let best = outs.iter().filter_map(|e| self.to_accept[e.target]).min();
        let Some(best) = best else { return Vec::new() };
        let mut set: Vec<StateId> = outs.iter().filter(|e| self.to_accept[e.target] == Some(best)).map(|e| e.target).collect();
        set.sort_unstable();
        set.dedup();
        set
    }

    /// Deterministic enabling symbol for `q_next → q_min`: the pruned cube with
    /// the fewest positive atoms, ties broken by the sorted atom names.
    pub fn select_transition_symbol(&self, q_next: StateId, q_min: StateId) -> Result<AtomSet, LtlError> {
        self.check(q_next)?;
        self.check(q_min)?;
        let guard = self.pruned_guard(q_next, q_min).ok_or(LtlError::NoEnablingSymbol { from: q_next, to: q_min })?;
        let names = self.dfa.atoms();
        guard
            .cubes()
            .iter()
            .map(|c| {
                let mut pos: Vec<&str> = c.positives().map(|a| names[a].as_str()).collect();
                pos.sort_unstable();
                (pos.len(), pos, c)
            })
            .min_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)))
            .map(|(_, _, c)| c.minimal_symbol())
            .ok_or(LtlError::NoEnablingSymbol { from: q_next, to: q_min })
    }

    /// Lines describing the pruning outcome, for reports.
    pub fn report(&self) -> String {
        let mut out = format!(
            "states\t{}\nremoved_transitions\t{}\ninfeasible_warning\t{}\n",
            self.num_states(),
            self.removed,
            self.infeasible_warning
        );
        for q in 0..self.num_states() {
            let d = self.distance_to_accept(q).map_or("inf".to_string(), |d| d.to_string());
            out.push_str(&format!("dist_to_accept\t{q}\t{d}\n"));
        }
        out
    }
}
