//! Symbols (sets of true atoms) and Boolean transition guards in disjunctive
//! normal form.

use std::cmp::Ordering;
use std::fmt::Write as _;

/// A set of atom indices, i.e. one symbol of the alphabet `2^AP`.
///
/// Trailing zero words are always trimmed so that equality, hashing and
/// ordering only depend on the members.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct AtomSet {
    words: Vec<u64>,
}

impl AtomSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut set = Self::new();
        for i in indices {
            set.insert(i);
        }
        set
    }

    pub fn insert(&mut self, atom: usize) {
        let (w, b) = (atom / 64, atom % 64);
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << b;
    }

    pub fn remove(&mut self, atom: usize) {
        let (w, b) = (atom / 64, atom % 64);
        if let Some(word) = self.words.get_mut(w) {
            *word &= !(1 << b);
        }
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    pub fn contains(&self, atom: usize) -> bool {
        let (w, b) = (atom / 64, atom % 64);
        self.words.get(w).is_some_and(|word| word & (1 << b) != 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            (0..64).filter(move |b| word & (1 << b) != 0).map(move |b| wi * 64 + b)
        })
    }
}

impl Ord for AtomSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for AtomSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A literal over an atom index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub atom: usize,
    pub positive: bool,
}

/// Conjunction of literals, sorted by atom index, at most one literal per atom.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cube {
    literals: Vec<Literal>,
}

impl Cube {
    pub fn top() -> Self {
        Self::default()
    }

    /// Builds a cube; returns `None` when the literals are contradictory.
    pub fn new(mut literals: Vec<Literal>) -> Option<Self> {
        literals.sort();
        literals.dedup();
        if literals.windows(2).any(|w| w[0].atom == w[1].atom) {
            return None;
        }
        Some(Self { literals })
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn positives(&self) -> impl Iterator<Item = usize> + '_ {
        self.literals.iter().filter(|l| l.positive).map(|l| l.atom)
    }

    pub fn negatives(&self) -> impl Iterator<Item = usize> + '_ {
        self.literals.iter().filter(|l| !l.positive).map(|l| l.atom)
    }

    pub fn eval(&self, symbol: &AtomSet) -> bool {
        self.literals.iter().all(|l| symbol.contains(l.atom) == l.positive)
    }

    /// The smallest symbol satisfying the cube: its positive atoms.
    pub fn minimal_symbol(&self) -> AtomSet {
        AtomSet::from_indices(self.positives())
    }

    fn implies(&self, other: &Cube) -> bool {
        // self ⊆-literal-superset of other means self ⇒ other.
        other.literals.iter().all(|l| self.literals.binary_search(l).is_ok())
    }
}

/// A transition guard in disjunctive normal form. No cubes means `false`;
/// a single empty cube means `true`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Guard {
    cubes: Vec<Cube>,
}

impl Guard {
    pub fn falsum() -> Self {
        Self::default()
    }

    pub fn verum() -> Self {
        Self { cubes: vec![Cube::top()] }
    }

    pub fn from_cubes(cubes: Vec<Cube>) -> Self {
        let mut g = Self { cubes };
        g.simplify();
        g
    }

    pub fn cubes(&self) -> &[Cube] {
        &self.cubes
    }

    pub fn is_false(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn is_true(&self) -> bool {
        self.cubes.len() == 1 && self.cubes[0].literals.is_empty()
    }

    pub fn eval(&self, symbol: &AtomSet) -> bool {
        self.cubes.iter().any(|c| c.eval(symbol))
    }

    /// Keeps only the cubes accepted by `keep`.
    pub fn filter_cubes(&self, mut keep: impl FnMut(&Cube) -> bool) -> Guard {
        Guard { cubes: self.cubes.iter().filter(|c| keep(c)).cloned().collect() }
    }

    /// Merges cubes that differ in the polarity of one atom and removes
    /// absorbed cubes. Preserves the Boolean function.
    pub fn simplify(&mut self) {
        loop {
            self.cubes.sort();
            self.cubes.dedup();
            let mut changed = false;
            // absorption
            let mut keep = vec![true; self.cubes.len()];
            for i in 0..self.cubes.len() {
                for j in 0..self.cubes.len() {
                    if i != j && keep[j] && keep[i] && self.cubes[i].implies(&self.cubes[j]) && self.cubes[i] != self.cubes[j] {
                        keep[i] = false;
                        changed = true;
                    }
                }
            }
            let mut idx = 0;
            self.cubes.retain(|_| {
                idx += 1;
                keep[idx - 1]
            });
            // resolution on a single clashing literal
            'outer: for i in 0..self.cubes.len() {
                for j in (i + 1)..self.cubes.len() {
                    if let Some((which, cube)) = resolve_pair(&self.cubes[i], &self.cubes[j]) {
                        let target = if which == 0 { i } else { j };
                        self.cubes[target] = cube;
                        changed = true;
                        break 'outer;
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }

    /// Renders the guard with atom names, e.g. `a & !b | c`.
    pub fn render(&self, names: &[String]) -> String {
        if self.is_false() {
            return "false".to_string();
        }
        let mut out = String::new();
        for (ci, cube) in self.cubes.iter().enumerate() {
            if ci > 0 {
                out.push_str(" | ");
            }
            if cube.literals.is_empty() {
                out.push_str("true");
                continue;
            }
            for (li, lit) in cube.literals.iter().enumerate() {
                if li > 0 {
                    out.push_str(" & ");
                }
                if !lit.positive {
                    out.push('!');
                }
                let _ = write!(out, "{}", names[lit.atom]);
            }
        }
        out
    }
}

/// Resolution on one clashing literal. If `a = x & R1` and `b = !x & R2`
/// with `R1 ⊆ R2` then `a | b == a | R2`, so `b` loses its `!x` literal.
/// Returns the index (0 for `a`, 1 for `b`) of the cube to replace and its
/// replacement.
fn resolve_pair(a: &Cube, b: &Cube) -> Option<(usize, Cube)> {
    let mut clash = None;
    for x in &a.literals {
        if let Ok(pos) = b.literals.binary_search_by(|y| y.atom.cmp(&x.atom)) {
            if b.literals[pos].positive != x.positive {
                if clash.is_some() {
                    return None;
                }
                clash = Some(x.atom);
            }
        }
    }
    let atom = clash?;
    let rest = |c: &Cube| -> Vec<Literal> { c.literals.iter().copied().filter(|l| l.atom != atom).collect() };
    let (ra, rb) = (rest(a), rest(b));
    let subset = |small: &[Literal], big: &[Literal]| small.iter().all(|l| big.binary_search(l).is_ok());
    if subset(&ra, &rb) {
        Some((1, Cube { literals: rb }))
    } else if subset(&rb, &ra) {
        Some((0, Cube { literals: ra }))
    } else {
        None
    }
}
