use std::collections::BTreeSet;
use std::fmt;

/// Co-safe LTL formula in negation normal form. Negation is only allowed on
/// atoms; `F φ` is stored as `true U φ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    Atom(String),
    Not(String),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    pub fn not(name: impl Into<String>) -> Self {
        Formula::Not(name.into())
    }

    pub fn and(lhs: Formula, rhs: Formula) -> Self {
        Formula::And(Box::new(lhs), Box::new(rhs))
    }

    pub fn or(lhs: Formula, rhs: Formula) -> Self {
        Formula::Or(Box::new(lhs), Box::new(rhs))
    }

    pub fn until(lhs: Formula, rhs: Formula) -> Self {
        Formula::Until(Box::new(lhs), Box::new(rhs))
    }

    pub fn eventually(f: Formula) -> Self {
        Formula::until(Formula::True, f)
    }

    /// Atom names referenced anywhere in the formula.
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::True => {}
            Formula::Atom(a) | Formula::Not(a) => {
                out.insert(a.clone());
            }
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Until(l, r) => {
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::True | Formula::Atom(_) | Formula::Not(_) => 0,
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Until(l, r) => 1 + l.depth().max(r.depth()),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(a) => write!(f, "!{a}"),
            Formula::And(l, r) => write!(f, "({l} & {r})"),
            Formula::Or(l, r) => write!(f, "({l} | {r})"),
            Formula::Until(l, r) if **l == Formula::True => write!(f, "(F {r})"),
            Formula::Until(l, r) => write!(f, "({l} U {r})"),
        }
    }
}
