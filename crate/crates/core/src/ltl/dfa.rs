//! DFA construction by formula progression.
//!
//! A state is the residual obligation left after reading a prefix, kept as a
//! normalized DNF over atom literals and interned `U` subformulas. Atom
//! literals can only appear in the initial state: progression replaces every
//! atom by a constant. Successor guards come from a Shannon expansion of the
//! progressed residual over the atoms it mentions.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use super::guard::{AtomSet, Cube, Guard, Literal};
use super::{Formula, LtlError};

pub type StateId = usize;

pub const DEFAULT_STATE_CAP: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub guard: Guard,
    pub target: StateId,
}

/// Deterministic finite automaton over symbols `2^AP`, with partial
/// transitions. A missing transition means the formula is violated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    atoms: Vec<String>,
    initial: StateId,
    accepting: Option<StateId>,
    transitions: Vec<Vec<Transition>>,
}

impl Dfa {
    /// Assembles an automaton from raw parts. Guards leaving one state must
    /// be pairwise disjoint.
    pub fn from_parts(
        atoms: Vec<String>,
        initial: StateId,
        accepting: Option<StateId>,
        transitions: Vec<Vec<Transition>>,
    ) -> Result<Self, LtlError> {
        let n = transitions.len();
        if initial >= n || accepting.is_some_and(|a| a >= n) {
            return Err(LtlError::InvalidDfa("initial or accepting state out of range".into()));
        }
        for (q, outs) in transitions.iter().enumerate() {
            for t in outs {
                if t.target >= n {
                    return Err(LtlError::InvalidDfa(format!("state {q} has a transition to unknown state {}", t.target)));
                }
                if t.guard.cubes().iter().flat_map(|c| c.literals()).any(|l| l.atom >= atoms.len()) {
                    return Err(LtlError::InvalidDfa(format!("state {q} has a guard over an unknown atom")));
                }
            }
        }
        Ok(Self { atoms, initial, accepting, transitions })
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn atom_index(&self, name: &str) -> Option<usize> {
        self.atoms.binary_search_by(|a| a.as_str().cmp(name)).ok()
    }

    pub fn num_states(&self) -> usize {
        self.transitions.len()
    }

    /// State count once the implicit rejecting trap is made explicit.
    pub fn complete_state_count(&self) -> usize {
        let partial = (0..self.num_states()).any(|q| !self.is_total(q));
        self.num_states() + usize::from(partial)
    }

    fn is_total(&self, q: StateId) -> bool {
        let cubes: Vec<Cube> = self.transitions[q].iter().flat_map(|t| t.guard.cubes().iter().cloned()).collect();
        Guard::from_cubes(cubes).is_true()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    /// The accepting sink, or `None` when the formula is unsatisfiable.
    pub fn accepting(&self) -> Option<StateId> {
        self.accepting
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting == Some(q)
    }

    pub fn transitions(&self, q: StateId) -> &[Transition] {
        &self.transitions[q]
    }

    /// Builds a symbol from true atom names. Names outside the alphabet are
    /// ignored.
    pub fn symbol<'a, I: IntoIterator<Item = &'a str>>(&self, names: I) -> AtomSet {
        AtomSet::from_indices(names.into_iter().filter_map(|n| self.atom_index(n)))
    }

    pub fn symbol_names(&self, sigma: &AtomSet) -> Vec<String> {
        sigma.iter().filter(|&i| i < self.atoms.len()).map(|i| self.atoms[i].clone()).collect()
    }

    /// `δ(q, σ)`, or `None` if reading `σ` violates the formula.
    pub fn next_state(&self, q: StateId, sigma: &AtomSet) -> Option<StateId> {
        self.transitions.get(q)?.iter().find(|t| t.guard.eval(sigma)).map(|t| t.target)
    }

    pub fn run<'a, I: IntoIterator<Item = &'a AtomSet>>(&self, word: I) -> Option<StateId> {
        let mut q = self.initial;
        for sigma in word {
            q = self.next_state(q, sigma)?;
        }
        Some(q)
    }

    pub fn accepts<'a, I: IntoIterator<Item = &'a AtomSet>>(&self, word: I) -> bool {
        self.run(word).is_some_and(|q| self.is_accepting(q))
    }

    /// One line per transition: `state TAB guard TAB state`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (q, outs) in self.transitions.iter().enumerate() {
            for t in outs {
                let _ = writeln!(out, "{q}\t{}\t{}", t.guard.render(&self.atoms), t.target);
            }
        }
        out
    }
}

/// Compiles a formula with the default state cap.
pub fn compile_to_dfa(f: &Formula) -> Result<Dfa, LtlError> {
    compile_to_dfa_with_cap(f, DEFAULT_STATE_CAP)
}

pub fn compile_to_dfa_with_cap(f: &Formula, cap: usize) -> Result<Dfa, LtlError> {
    let atoms: Vec<String> = f.atoms().into_iter().collect();
    let mut b = Builder::new(&atoms);
    let root = b.lower(f);
    let init = normalize(b.dnf(&root));
    b.explore(init, cap)?;
    Ok(b.finish(atoms.clone()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum SymLit {
    Atom(usize, bool),
    Until(usize),
}

type Dnf = Vec<Vec<SymLit>>;

#[derive(Clone, Debug)]
enum Node {
    True,
    Lit(usize, bool),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Until(usize),
}

struct Builder<'a> {
    atoms: &'a [String],
    untils: Vec<(Node, Node)>,
    until_ids: HashMap<String, usize>,
    prog_cache: HashMap<usize, Dnf>,
    states: Vec<Dnf>,
    ids: HashMap<Dnf, StateId>,
    // (guard cubes, target) in discovery order per state
    edges: Vec<Vec<(Vec<Cube>, StateId)>>,
}

impl<'a> Builder<'a> {
    fn new(atoms: &'a [String]) -> Self {
        Self {
            atoms,
            untils: Vec::new(),
            until_ids: HashMap::new(),
            prog_cache: HashMap::new(),
            states: Vec::new(),
            ids: HashMap::new(),
            edges: Vec::new(),
        }
    }

    fn atom(&self, name: &str) -> usize {
        self.atoms.binary_search_by(|a| a.as_str().cmp(name)).expect("atom collected from formula")
    }

    fn lower(&mut self, f: &Formula) -> Node {
        match f {
            Formula::True => Node::True,
            Formula::Atom(a) => Node::Lit(self.atom(a), true),
            Formula::Not(a) => Node::Lit(self.atom(a), false),
            Formula::And(l, r) => Node::And(Box::new(self.lower(l)), Box::new(self.lower(r))),
            Formula::Or(l, r) => Node::Or(Box::new(self.lower(l)), Box::new(self.lower(r))),
            Formula::Until(l, r) => {
                let key = f.to_string();
                if let Some(&k) = self.until_ids.get(&key) {
                    return Node::Until(k);
                }
                let (ln, rn) = (self.lower(l), self.lower(r));
                let k = self.untils.len();
                self.untils.push((ln, rn));
                self.until_ids.insert(key, k);
                Node::Until(k)
            }
        }
    }

    /// DNF of a node with `U` subformulas kept opaque.
    fn dnf(&self, n: &Node) -> Dnf {
        match n {
            Node::True => vec![vec![]],
            Node::Lit(a, p) => vec![vec![SymLit::Atom(*a, *p)]],
            Node::And(l, r) => product(&self.dnf(l), &self.dnf(r)),
            Node::Or(l, r) => union(self.dnf(l), self.dnf(r)),
            Node::Until(k) => vec![vec![SymLit::Until(*k)]],
        }
    }

    /// Progression of a node through one symbol, with atom literals left
    /// symbolic.
    fn prog_node(&mut self, n: &Node) -> Dnf {
        match n {
            Node::True => vec![vec![]],
            Node::Lit(a, p) => vec![vec![SymLit::Atom(*a, *p)]],
            Node::And(l, r) => {
                let (pl, pr) = (self.prog_node(l), self.prog_node(r));
                normalize(product(&pl, &pr))
            }
            Node::Or(l, r) => {
                let (pl, pr) = (self.prog_node(l), self.prog_node(r));
                normalize(union(pl, pr))
            }
            Node::Until(k) => self.prog_until(*k),
        }
    }

    fn prog_until(&mut self, k: usize) -> Dnf {
        if let Some(d) = self.prog_cache.get(&k) {
            return d.clone();
        }
        let (lhs, rhs) = self.untils[k].clone();
        let now = self.prog_node(&rhs);
        let keep = product(&self.prog_node(&lhs), &[vec![SymLit::Until(k)]]);
        let d = normalize(union(now, keep));
        self.prog_cache.insert(k, d.clone());
        d
    }

    fn prog_state(&mut self, s: &Dnf) -> Dnf {
        let mut out: Dnf = Vec::new();
        for cube in s {
            let mut acc: Dnf = vec![vec![]];
            for lit in cube {
                let p = match *lit {
                    SymLit::Atom(..) => vec![vec![*lit]],
                    SymLit::Until(k) => self.prog_until(k),
                };
                acc = normalize(product(&acc, &p));
                if acc.is_empty() {
                    break;
                }
            }
            out.extend(acc);
        }
        normalize(out)
    }

    fn intern(&mut self, s: Dnf, queue: &mut VecDeque<StateId>, cap: usize) -> Result<StateId, LtlError> {
        if let Some(&id) = self.ids.get(&s) {
            return Ok(id);
        }
        if self.states.len() >= cap {
            return Err(LtlError::StateLimit { limit: cap });
        }
        let id = self.states.len();
        self.ids.insert(s.clone(), id);
        self.states.push(s);
        self.edges.push(Vec::new());
        queue.push_back(id);
        Ok(id)
    }

    fn explore(&mut self, init: Dnf, cap: usize) -> Result<(), LtlError> {
        let mut queue = VecDeque::new();
        self.intern(init, &mut queue, cap)?;
        while let Some(q) = queue.pop_front() {
            let progressed = self.prog_state(&self.states[q].clone());
            let mut leaves = Vec::new();
            shannon(progressed, &mut Vec::new(), &mut leaves);
            let mut out: Vec<(Vec<Cube>, StateId)> = Vec::new();
            for (path, residual) in leaves {
                let target = self.intern(residual, &mut queue, cap)?;
                let cube = Cube::new(path).expect("shannon paths are consistent");
                match out.iter_mut().find(|(_, t)| *t == target) {
                    Some((cubes, _)) => cubes.push(cube),
                    None => out.push((vec![cube], target)),
                }
            }
            self.edges[q] = out;
        }
        Ok(())
    }

    /// Drops states that cannot reach the accepting sink and renumbers the
    /// rest in BFS order from the initial state.
    fn finish(self, atoms: Vec<String>) -> Dfa {
        let n = self.states.len();
        let accepting_old = self.ids.get(&vec![vec![]]).copied();
        let mut live = vec![false; n];
        if let Some(acc) = accepting_old {
            let mut rev: Vec<Vec<StateId>> = vec![Vec::new(); n];
            for (q, outs) in self.edges.iter().enumerate() {
                for (_, t) in outs {
                    rev[*t].push(q);
                }
            }
            let mut queue = VecDeque::from([acc]);
            live[acc] = true;
            while let Some(q) = queue.pop_front() {
                for &p in &rev[q] {
                    if !live[p] {
                        live[p] = true;
                        queue.push_back(p);
                    }
                }
            }
        }
        // BFS renumbering over live states; the initial state is always kept.
        let mut new_id = vec![usize::MAX; n];
        let mut order = vec![0];
        new_id[0] = 0;
        let mut head = 0;
        while head < order.len() {
            let q = order[head];
            head += 1;
            for (_, t) in &self.edges[q] {
                if live[*t] && new_id[*t] == usize::MAX {
                    new_id[*t] = order.len();
                    order.push(*t);
                }
            }
        }
        let transitions = order
            .iter()
            .map(|&q| {
                self.edges[q]
                    .iter()
                    .filter(|(_, t)| live[*t])
                    .map(|(cubes, t)| Transition { guard: Guard::from_cubes(cubes.clone()), target: new_id[*t] })
                    .collect()
            })
            .collect();
        let accepting = accepting_old.filter(|&a| live[a]).map(|a| new_id[a]);
        Dfa { atoms, initial: 0, accepting, transitions }
    }
}

fn product(a: &[Vec<SymLit>], b: &[Vec<SymLit>]) -> Dnf {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            let mut c = x.clone();
            c.extend_from_slice(y);
            out.push(c);
        }
    }
    out
}

fn union(mut a: Dnf, b: Dnf) -> Dnf {
    a.extend(b);
    a
}

/// Sorts, removes contradictory cubes, deduplicates and applies absorption.
fn normalize(d: Dnf) -> Dnf {
    let mut cubes: Vec<Vec<SymLit>> = d
        .into_iter()
        .filter_map(|mut c| {
            c.sort();
            c.dedup();
            let contradictory = c.windows(2).any(|w| match (w[0], w[1]) {
                (SymLit::Atom(a, _), SymLit::Atom(b, _)) => a == b,
                _ => false,
            });
            (!contradictory).then_some(c)
        })
        .collect();
    cubes.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    cubes.dedup();
    let mut kept: Vec<Vec<SymLit>> = Vec::with_capacity(cubes.len());
    for c in cubes {
        if !kept.iter().any(|k| is_subset(k, &c)) {
            kept.push(c);
        }
    }
    kept.sort();
    kept
}

fn is_subset(small: &[SymLit], big: &[SymLit]) -> bool {
    small.iter().all(|x| big.binary_search(x).is_ok())
}

fn first_atom(d: &Dnf) -> Option<usize> {
    d.iter()
        .flat_map(|c| c.iter())
        .filter_map(|l| match l {
            SymLit::Atom(a, _) => Some(*a),
            SymLit::Until(_) => None,
        })
        .min()
}

fn cofactor(d: &Dnf, atom: usize, value: bool) -> Dnf {
    let out = d
        .iter()
        .filter_map(|c| {
            let mut keep = Vec::with_capacity(c.len());
            for l in c {
                match *l {
                    SymLit::Atom(a, p) if a == atom => {
                        if p != value {
                            return None;
                        }
                    }
                    other => keep.push(other),
                }
            }
            Some(keep)
        })
        .collect();
    normalize(out)
}

/// Enumerates a disjoint cover of the symbol space, positive branch first.
/// Each leaf is a residual over `U` literals only; empty residuals (the
/// formula is violated) are omitted.
fn shannon(d: Dnf, path: &mut Vec<Literal>, leaves: &mut Vec<(Vec<Literal>, Dnf)>) {
    if d.is_empty() {
        return;
    }
    let atom = match first_atom(&d) {
        Some(a) if !d.iter().any(|c| c.is_empty()) => a,
        _ => {
            leaves.push((path.clone(), d));
            return;
        }
    };
    for value in [true, false] {
        path.push(Literal { atom, positive: value });
        shannon(cofactor(&d, atom, value), path, leaves);
        path.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::parse_cosafe_ltl;

    fn compile(text: &str) -> Dfa {
        compile_to_dfa(&parse_cosafe_ltl(text).unwrap()).unwrap()
    }

    #[test]
    fn true_is_single_accepting_state() {
        let d = compile("true");
        assert_eq!(d.num_states(), 1);
        assert_eq!(d.accepting(), Some(d.initial()));
        assert_eq!(d.next_state(0, &AtomSet::new()), Some(0));
    }

    #[test]
    fn eventually_two_states() {
        let d = compile("F a");
        assert_eq!(d.num_states(), 2);
        let a = d.symbol(["a"]);
        let qf = d.next_state(0, &a).unwrap();
        assert!(d.is_accepting(qf));
        assert_eq!(d.next_state(0, &AtomSet::new()), Some(0));
        assert_eq!(d.next_state(qf, &AtomSet::new()), Some(qf));
        assert_eq!(d.dump(), "0\ta\t1\n0\t!a\t0\n1\ttrue\t1\n");
    }

    #[test]
    fn until_violation_is_none() {
        let d = compile("!b U a");
        assert_eq!(d.next_state(0, &d.symbol(["b"])), None);
        assert!(d.is_accepting(d.next_state(0, &d.symbol(["a", "b"])).unwrap()));
        // two live states plus the implicit trap
        assert_eq!(d.complete_state_count(), 3);
    }

    #[test]
    fn ordered_visit_with_avoidance() {
        let d = compile("F (l1 & F l2) & (!s U l2) & (!s U l1)");
        assert_eq!(d.complete_state_count(), 6);
    }

    #[test]
    fn unsatisfiable_has_no_accepting_state() {
        let d = compile("F (a & !a)");
        assert_eq!(d.accepting(), None);
        assert!(!d.accepts([&d.symbol(["a"])]));
    }

    #[test]
    fn atom_on_empty_word_is_false() {
        let d = compile("a");
        assert!(!d.accepts(std::iter::empty::<&AtomSet>()));
        assert!(d.accepts([&d.symbol(["a"])]));
    }

    #[test]
    fn state_cap_enforced() {
        let f = parse_cosafe_ltl("F a & F b & F c").unwrap();
        assert!(matches!(compile_to_dfa_with_cap(&f, 3), Err(LtlError::StateLimit { limit: 3 })));
        assert_eq!(compile_to_dfa(&f).unwrap().num_states(), 8);
    }

    #[test]
    fn dump_is_stable() {
        let f = parse_cosafe_ltl("(F a) & (!b U a) | F (c & F b)").unwrap();
        assert_eq!(compile_to_dfa(&f).unwrap().dump(), compile_to_dfa(&f).unwrap().dump());
    }

    #[test]
    fn from_parts_validates() {
        let t = Transition { guard: Guard::verum(), target: 3 };
        assert!(Dfa::from_parts(vec![], 0, None, vec![vec![t]]).is_err());
    }
}
