//! Perception predicates and the labeling function.

use std::collections::BTreeSet;

use nalgebra::SymmetricEigen;

use crate::dynamics::RobotPose;
use crate::error::PredicateError;
use crate::linalg::{symmetrize, Mat2, Vec2};
use crate::ltl::{AtomBinding, AtomMeta, AtomSet, Dfa};
use crate::semantic_map::{argmax, SemanticMapEstimate};

const EIGEN_FLOOR: f64 = 1e-12;
const TAIL: f64 = 9.0;

fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

// 16-point Gauss-Legendre on [-1, 1]
const GL_X: [f64; 8] = [
    0.0950125098376374,
    0.2816035507792589,
    0.4580167776572274,
    0.6178762444026438,
    0.755404408355003,
    0.8656312023878318,
    0.9445750230732326,
    0.9894009349916499,
];
const GL_W: [f64; 8] = [
    0.1894506104550685,
    0.1826034150449236,
    0.1691565193950025,
    0.1495959888165767,
    0.1246289712555339,
    0.0951585116824928,
    0.0622535239386479,
    0.0271524594117541,
];

fn gl16(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut s = 0.0;
    for i in 0..8 {
        s += GL_W[i] * (f(c + h * GL_X[i]) + f(c - h * GL_X[i]));
    }
    s * h
}

fn adaptive(f: &impl Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (l, r) = (gl16(f, a, m), gl16(f, m, b));
    if depth == 0 || (l + r - whole).abs() <= tol {
        return l + r;
    }
    adaptive(f, a, m, l, 0.5 * tol, depth - 1) + adaptive(f, m, b, r, 0.5 * tol, depth - 1)
}

/// Mass of `N(mean, cov)` inside the closed disk of radius `r` around `point`.
///
/// Works in the eigenbasis of `cov`: the small-variance axis is integrated
/// numerically (substituting `x = r sin ψ` to remove the square-root edge),
/// the other axis in closed form through the normal CDF.
pub fn prob_within_radius(mean: Vec2, cov: &Mat2, point: Vec2, r: f64) -> f64 {
    if !(r > 0.0) {
        return 0.0;
    }
    let eig = SymmetricEigen::new(symmetrize(cov));
    let lam = eig.eigenvalues.map(|l| l.max(EIGEN_FLOOR));
    let s = lam.map(f64::sqrt);
    let smax = s[0].max(s[1]);
    let dist = (mean - point).norm();
    if dist - r > TAIL * smax {
        return 0.0;
    }
    if dist + TAIL * smax <= r {
        return 1.0;
    }
    let mu = eig.eigenvectors.transpose() * (mean - point);
    let (k, m) = if s[0] <= s[1] { (0, 1) } else { (1, 0) };
    let (mk, sk, mm, sm) = (mu[k], s[k], mu[m], s[m]);
    let lo = (mk - TAIL * sk).max(-r);
    let hi = (mk + TAIL * sk).min(r);
    if lo >= hi {
        return 0.0;
    }
    let (a, b) = ((lo / r).clamp(-1.0, 1.0).asin(), (hi / r).clamp(-1.0, 1.0).asin());
    let f = |psi: f64| {
        let (sn, cs) = psi.sin_cos();
        let x = r * sn;
        let h = r * cs.max(0.0);
        let inner = normal_cdf((h - mm) / sm) - normal_cdf((-h - mm) / sm);
        normal_pdf((x - mk) / sk) / sk * r * cs * inner
    };
    let panels = 4;
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let (pa, pb) = (a + p as f64 * width, a + (p + 1) as f64 * width);
        total += adaptive(&f, pa, pb, gl16(&f, pa, pb), 1e-10, 14);
    }
    total.clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PredicateKind {
    Proximity { landmark: usize },
    ClassProximity { class: usize },
    Uncertainty { landmark: usize },
    RelaxedClassProximity { class: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredicateDef {
    pub name: String,
    pub robot: usize,
    pub kind: PredicateKind,
    pub radius: f64,
    pub threshold: f64,
}

impl PredicateDef {
    pub fn meta(&self) -> AtomMeta {
        match self.kind {
            PredicateKind::Proximity { landmark } => AtomMeta { robot: Some(self.robot), binding: AtomBinding::Landmark(landmark) },
            PredicateKind::ClassProximity { class } | PredicateKind::RelaxedClassProximity { class } => {
                AtomMeta { robot: Some(self.robot), binding: AtomBinding::Class(class) }
            }
            PredicateKind::Uncertainty { .. } => AtomMeta::unbound(),
        }
    }

    pub fn validate(&self, robots: usize, landmarks: usize, classes: usize) -> Result<(), PredicateError> {
        if self.robot >= robots {
            return Err(PredicateError::UnknownRobot { predicate: self.name.clone(), robot: self.robot });
        }
        match self.kind {
            PredicateKind::Proximity { landmark } | PredicateKind::Uncertainty { landmark } if landmark >= landmarks => {
                return Err(PredicateError::UnknownLandmark { predicate: self.name.clone(), landmark });
            }
            PredicateKind::ClassProximity { class } | PredicateKind::RelaxedClassProximity { class } if class >= classes => {
                return Err(PredicateError::UnknownClass { predicate: self.name.clone(), class });
            }
            _ => {}
        }
        let uncertainty = matches!(self.kind, PredicateKind::Uncertainty { .. });
        if !uncertainty && !(self.radius > 0.0) {
            return Err(PredicateError::Parameter { predicate: self.name.clone(), message: "radius must be positive".into() });
        }
        if !(self.threshold > 0.0 && (uncertainty || self.threshold < 1.0)) {
            return Err(PredicateError::Parameter { predicate: self.name.clone(), message: "threshold must lie in (0, 1)".into() });
        }
        Ok(())
    }
}

/// Truth value plus the raw quantity compared against the threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub value: bool,
    pub raw: f64,
}

fn robot_pos(def: &PredicateDef, team: &[RobotPose]) -> Result<Vec2, PredicateError> {
    team.get(def.robot)
        .map(RobotPose::position)
        .ok_or(PredicateError::UnknownRobot { predicate: def.name.clone(), robot: def.robot })
}

pub fn eval_proximity(def: &PredicateDef, team: &[RobotPose], map: &SemanticMapEstimate) -> Result<Evaluation, PredicateError> {
    let PredicateKind::Proximity { landmark } = def.kind else { return Err(PredicateError::WrongKind(def.name.clone())) };
    let lm = map.landmarks.get(landmark).ok_or(PredicateError::UnknownLandmark { predicate: def.name.clone(), landmark })?;
    let p = prob_within_radius(lm.mean, &lm.cov, robot_pos(def, team)?, def.radius);
    Ok(Evaluation { value: p - (1.0 - def.threshold) >= 0.0, raw: p })
}

pub fn eval_class_proximity(def: &PredicateDef, team: &[RobotPose], map: &SemanticMapEstimate) -> Result<Evaluation, PredicateError> {
    let PredicateKind::ClassProximity { class } = def.kind else { return Err(PredicateError::WrongKind(def.name.clone())) };
    if class >= map.classes.len() {
        return Err(PredicateError::UnknownClass { predicate: def.name.clone(), class });
    }
    let pos = robot_pos(def, team)?;
    let mut best = 0.0f64;
    for lm in &map.landmarks {
        let dc = lm.class_belief[class];
        if dc <= best {
            continue;
        }
        best = best.max(prob_within_radius(lm.mean, &lm.cov, pos, def.radius) * dc);
    }
    Ok(Evaluation { value: best >= 1.0 - def.threshold, raw: best })
}

pub fn eval_uncertainty(def: &PredicateDef, map: &SemanticMapEstimate) -> Result<Evaluation, PredicateError> {
    let PredicateKind::Uncertainty { landmark } = def.kind else { return Err(PredicateError::WrongKind(def.name.clone())) };
    let lm = map.landmarks.get(landmark).ok_or(PredicateError::UnknownLandmark { predicate: def.name.clone(), landmark })?;
    let det = lm.cov.determinant();
    Ok(Evaluation { value: det <= def.threshold, raw: det })
}

pub fn eval_relaxed_class_proximity(def: &PredicateDef, team: &[RobotPose], map: &SemanticMapEstimate) -> Result<Evaluation, PredicateError> {
    let class = match def.kind {
        PredicateKind::RelaxedClassProximity { class } | PredicateKind::ClassProximity { class } => class,
        _ => return Err(PredicateError::WrongKind(def.name.clone())),
    };
    let pos = robot_pos(def, team)?;
    let best = map
        .landmarks
        .iter()
        .filter(|lm| argmax(&lm.class_belief) == class)
        .map(|lm| prob_within_radius(lm.mean, &lm.cov, pos, def.radius))
        .fold(0.0f64, f64::max);
    Ok(Evaluation { value: best >= 1.0 - def.threshold, raw: best })
}

pub fn evaluate(def: &PredicateDef, team: &[RobotPose], map: &SemanticMapEstimate) -> Result<Evaluation, PredicateError> {
    match def.kind {
        PredicateKind::Proximity { .. } => eval_proximity(def, team, map),
        PredicateKind::ClassProximity { .. } => eval_class_proximity(def, team, map),
        PredicateKind::Uncertainty { .. } => eval_uncertainty(def, map),
        PredicateKind::RelaxedClassProximity { .. } => eval_relaxed_class_proximity(def, team, map),
    }
}

/// Names of the predicates that hold.
pub fn label(team: &[RobotPose], map: &SemanticMapEstimate, defs: &[PredicateDef]) -> Result<BTreeSet<String>, PredicateError> {
    let mut out = BTreeSet::new();
    for d in defs {
        if evaluate(d, team, map)?.value {
            out.insert(d.name.clone());
        }
    }
    Ok(out)
}

/// Labeling function bound to an automaton alphabet. Atoms without a
/// predicate are always false.
#[derive(Clone, Debug)]
pub struct Labeler {
    defs: Vec<PredicateDef>,
    atom_defs: Vec<Option<usize>>,
    relaxed: bool,
}

impl Labeler {
    pub fn new(dfa: &Dfa, defs: &[PredicateDef], relaxed: bool) -> Self {
        let atom_defs = dfa.atoms().iter().map(|a| defs.iter().position(|d| &d.name == a)).collect();
        Self { defs: defs.to_vec(), atom_defs, relaxed }
    }

    pub fn defs(&self) -> &[PredicateDef] {
        &self.defs
    }

    /// Predicate bound to DFA atom `atom`.
    pub fn def_for_atom(&self, atom: usize) -> Option<&PredicateDef> {
        self.atom_defs.get(atom).copied().flatten().map(|i| &self.defs[i])
    }

    pub fn atom_meta(&self) -> Vec<AtomMeta> {
        (0..self.atom_defs.len()).map(|a| self.def_for_atom(a).map_or(AtomMeta::unbound(), PredicateDef::meta)).collect()
    }

    pub fn is_relaxed(&self) -> bool {
        self.relaxed
    }

    pub fn eval_atom(&self, atom: usize, team: &[RobotPose], map: &SemanticMapEstimate) -> Result<Evaluation, PredicateError> {
        let Some(def) = self.def_for_atom(atom) else { return Ok(Evaluation { value: false, raw: 0.0 }) };
        if self.relaxed && matches!(def.kind, PredicateKind::ClassProximity { .. }) {
            return eval_relaxed_class_proximity(def, team, map);
        }
        evaluate(def, team, map)
    }

    pub fn label(&self, team: &[RobotPose], map: &SemanticMapEstimate) -> Result<AtomSet, PredicateError> {
        let mut s = AtomSet::new();
        for a in 0..self.atom_defs.len() {
            if self.eval_atom(a, team, map)?.value {
                s.insert(a);
            }
        }
        Ok(s)
    }
}
