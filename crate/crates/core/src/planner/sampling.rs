//! Control sampling law, landmark assignment and virtual obstacles.

use rand::Rng;

use crate::linalg::Vec2;
use crate::ltl::{AtomSet, Guard};
use crate::predicates::{Labeler, PredicateKind};
use crate::semantic_map::{argmax, predict_mean, SemanticMapEstimate};
use crate::workspace::{Cell, Workspace};

/// How a control was drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Draw {
    Greedy,
    Other,
    Uniform,
}

/// Draws a control index. With a greedy candidate `u_star` the law picks it
/// with probability `p_new` and otherwise one of the remaining controls
/// uniformly; without one every control is equally likely.
pub fn sample_control<R: Rng + ?Sized>(n: usize, u_star: Option<usize>, p_new: f64, rng: &mut R) -> (usize, Draw) {
    assert!(n > 0, "empty control set");
    match u_star {
        Some(star) if n == 1 => (star, Draw::Greedy),
        Some(star) => {
            if rng.random::<f64>() < p_new {
                (star, Draw::Greedy)
            } else {
                let mut i = rng.random_range(0..n - 1);
                if i >= star {
                    i += 1;
                }
                (i, Draw::Other)
            }
        }
        None => (rng.random_range(0..n), Draw::Uniform),
    }
}

/// Landmark a robot is sent toward, or `None` if no positive atom of
/// `sigma` concerns it. The flag reports a class atom with no candidate.
pub fn assign_landmarks(labeler: &Labeler, sigma: &AtomSet, map: &SemanticMapEstimate, robots: usize) -> (Vec<Option<usize>>, bool) {
    let mut out = vec![None; robots];
    let mut unassigned = false;
    for a in sigma.iter() {
        let Some(def) = labeler.def_for_atom(a) else { continue };
        if def.robot >= robots || out[def.robot].is_some() {
            continue;
        }
        let target = match def.kind {
            PredicateKind::Proximity { landmark } | PredicateKind::Uncertainty { landmark } => Some(landmark),
            PredicateKind::ClassProximity { class } | PredicateKind::RelaxedClassProximity { class } => best_for_class(map, class),
        };
        if target.is_none() {
            unassigned = true;
        }
        out[def.robot] = target;
    }
    (out, unassigned)
}

/// Landmark with the largest class probability; ties go to the larger
/// `d / det Σ`, then to the lowest index.
pub fn best_for_class(map: &SemanticMapEstimate, class: usize) -> Option<usize> {
    let mut best: Option<(usize, f64, f64)> = None;
    for (i, lm) in map.landmarks.iter().enumerate() {
        let d = lm.class_belief.get(class).copied().unwrap_or(0.0);
        if !(d > 0.0) {
            continue;
        }
        let det = lm.cov.determinant().max(1e-300);
        let score = d / det;
        match best {
            None => best = Some((i, d, score)),
            Some((_, bd, bs)) if d > bd || (d == bd && score > bs) => best = Some((i, d, score)),
            _ => {}
        }
    }
    best.map(|b| b.0)
}

/// Atoms of robot `robot` whose truth would break every cube of `guard`
/// that `sigma` satisfies.
pub fn blocking_atoms(labeler: &Labeler, guard: &Guard, sigma: &AtomSet, robot: usize, atoms: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for a in 0..atoms {
        if sigma.contains(a) {
            continue;
        }
        let Some(def) = labeler.def_for_atom(a) else { continue };
        if def.robot != robot || matches!(def.kind, PredicateKind::Uncertainty { .. }) {
            continue;
        }
        let mut with = sigma.clone();
        with.insert(a);
        if !guard.eval(&with) {
            out.push(a);
        }
    }
    out
}

/// Grid cells to avoid while heading for `target`.
#[allow(clippy::too_many_arguments)]
pub fn virtual_obstacles(
    labeler: &Labeler,
    blocking: &[usize],
    map: &SemanticMapEstimate,
    t: usize,
    target: usize,
    ws: &Workspace,
    epsilon: f64,
) -> Vec<Cell> {
    let mut cells = Vec::new();
    for &a in blocking {
        let Some(def) = labeler.def_for_atom(a) else { continue };
        let relaxed = labeler.is_relaxed();
        let landmarks: Vec<usize> = match def.kind {
            PredicateKind::Proximity { landmark } => vec![landmark],
            PredicateKind::ClassProximity { class } if !relaxed => (0..map.landmarks.len())
                .filter(|&i| map.landmarks[i].class_belief.get(class).is_some_and(|&d| d >= 1.0 - def.threshold))
                .collect(),
            PredicateKind::ClassProximity { class } | PredicateKind::RelaxedClassProximity { class } => {
                (0..map.landmarks.len()).filter(|&i| argmax(&map.landmarks[i].class_belief) == class).collect()
            }
            PredicateKind::Uncertainty { .. } => Vec::new(),
        };
        for i in landmarks {
            if i == target {
                continue;
            }
            let lm = &map.landmarks[i];
            let mean: Vec2 = predict_mean(lm, t);
            let ellipse = ws.confidence_ellipse_cells(mean, &lm.cov, epsilon);
            cells.extend(ws.dilate(&ellipse, def.radius));
        }
    }
    cells.sort_unstable();
    cells.dedup();
    cells
}
