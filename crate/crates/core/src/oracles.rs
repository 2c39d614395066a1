//! Brute-force reference implementations for tests and acceptance runs.
//!
//! Nothing here calls the code it is meant to check: the word evaluator
//! recurses on the semantics, distances come from a plain BFS, disk mass
//! from sampling, and the filter from the dense textbook equations.

use std::collections::{BTreeSet, VecDeque};

use nalgebra::{DMatrix, Matrix2, Vector2};
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::dynamics::RobotPose;
use crate::ltl::Formula;
use crate::predicates::label;
use crate::scenario::Scenario;
use crate::semantic_map::{propagate_map, SemanticMapEstimate};

/// Truth of `f` on the finite word `w` from position 0.
pub fn semantic_eval(f: &Formula, w: &[BTreeSet<String>]) -> bool {
    holds(f, w, 0)
}

fn holds(f: &Formula, w: &[BTreeSet<String>], t: usize) -> bool {
    match f {
        Formula::True => true,
        Formula::Atom(a) => t < w.len() && w[t].contains(a),
        Formula::Not(a) => t < w.len() && !w[t].contains(a),
        Formula::And(l, r) => holds(l, w, t) && holds(r, w, t),
        Formula::Or(l, r) => holds(l, w, t) || holds(r, w, t),
        Formula::Until(l, r) => (t..w.len()).any(|k| holds(r, w, k) && (t..k).all(|i| holds(l, w, i))),
    }
}

/// Hop distances from `from` over an adjacency list; `None` if unreachable.
pub fn bfs_distances(adj: &[Vec<usize>], from: usize) -> Vec<Option<u32>> {
    let mut dist = vec![None; adj.len()];
    let mut queue = VecDeque::new();
    dist[from] = Some(0);
    queue.push_back(from);
    while let Some(u) = queue.pop_front() {
        let d = dist[u].expect("queued nodes have a distance");
        for &v in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarlo {
    pub p: f64,
    pub stderr: f64,
}

/// Fraction of `samples` Gaussian draws within `r` of `point`.
pub fn mc_disk_mass<R: Rng + ?Sized>(
    mean: Vector2<f64>,
    cov: &Matrix2<f64>,
    point: Vector2<f64>,
    r: f64,
    samples: usize,
    rng: &mut R,
) -> MonteCarlo {
    if !(r > 0.0) || samples == 0 {
        return MonteCarlo { p: 0.0, stderr: 0.0 };
    }
    // closed-form square root of a symmetric 2x2 PSD matrix
    let (a, b, d) = (cov[(0, 0)], 0.5 * (cov[(0, 1)] + cov[(1, 0)]), cov[(1, 1)]);
    let det = (a * d - b * b).max(0.0);
    let s = det.sqrt();
    let tr = (a + d + 2.0 * s).max(0.0).sqrt();
    let root = if tr > 0.0 { Matrix2::new(a + s, b, b, d + s) / tr } else { Matrix2::zeros() };
    let mut hits = 0usize;
    for _ in 0..samples {
        let z = Vector2::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal));
        let x = mean + root * z;
        if (x - point).norm() <= r {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    MonteCarlo { p, stderr: (p * (1.0 - p) / samples as f64).sqrt() }
}

/// `1 − exp(−r² / 2σ²)`: disk mass of an isotropic Gaussian centred on the disk.
pub fn rayleigh_mass(sigma: f64, r: f64) -> f64 {
    1.0 - (-r * r / (2.0 * sigma * sigma)).exp()
}

/// Batch Kalman covariance update `P⁺ = (I − K H) P`.
pub fn kf_update(p: &DMatrix<f64>, h: &DMatrix<f64>, r: &DMatrix<f64>) -> DMatrix<f64> {
    let s = h * p * h.transpose() + r;
    let k = p * h.transpose() * s.try_inverse().expect("innovation covariance is invertible");
    let n = p.nrows();
    (DMatrix::identity(n, n) - k * h) * p
}

/// Information-form update `P⁺ = (P⁻¹ + Hᵀ R⁻¹ H)⁻¹`; `None` when `P` or
/// `R` is singular. Avoids the cancellation `(I − K H) P` suffers when the
/// posterior is much tighter than the prior.
pub fn kf_information_update(p: &DMatrix<f64>, h: &DMatrix<f64>, r: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let p_inv = p.clone().try_inverse()?;
    let r_inv = r.clone().try_inverse()?;
    (p_inv + h.transpose() * r_inv * h).try_inverse()
}

/// Sensor description for the filter oracle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OracleSensor {
    /// `std = base + slope · distance`, variance floored at 1e-6.
    Range { base: f64, slope: f64 },
    Position { noise: Matrix2<f64> },
}

/// Predicted covariance `A P Aᵀ + Q` followed by one stacked update with
/// every listed robot linearized at `at`.
pub fn kf_oracle_covariance(
    prior: &Matrix2<f64>,
    a: &Matrix2<f64>,
    q: &Matrix2<f64>,
    at: Vector2<f64>,
    robots: &[(Vector2<f64>, OracleSensor)],
) -> Matrix2<f64> {
    let pred = a * prior * a.transpose() + q;
    let p = DMatrix::from_column_slice(2, 2, pred.as_slice());
    let rows: usize = robots
        .iter()
        .filter(|(pos, s)| !matches!(s, OracleSensor::Range { .. }) || (at - pos).norm() >= 1e-9)
        .map(|(_, s)| if matches!(s, OracleSensor::Range { .. }) { 1 } else { 2 })
        .sum();
    if rows == 0 {
        return pred;
    }
    let mut h = DMatrix::zeros(rows, 2);
    let mut r = DMatrix::zeros(rows, rows);
    let mut k = 0;
    for (pos, s) in robots {
        match s {
            OracleSensor::Range { base, slope } => {
                let diff = at - pos;
                let l = diff.norm();
                if l < 1e-9 {
                    continue;
                }
                h[(k, 0)] = diff.x / l;
                h[(k, 1)] = diff.y / l;
                r[(k, k)] = ((base + slope * l) * (base + slope * l)).max(1e-6);
                k += 1;
            }
            OracleSensor::Position { noise } => {
                h[(k, 0)] = 1.0;
                h[(k + 1, 1)] = 1.0;
                for i in 0..2 {
                    for j in 0..2 {
                        r[(k + i, k + j)] = noise[(i, j)];
                    }
                }
                k += 2;
            }
        }
    }
    let out = kf_information_update(&p, &h, &r).unwrap_or_else(|| kf_update(&p, &h, &r));
    Matrix2::new(out[(0, 0)], out[(0, 1)], out[(1, 0)], out[(1, 1)])
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("enumeration of {0} sequences exceeds the budget")]
    Budget(f64),
}

pub const EXHAUSTIVE_BUDGET: f64 = 1e7;

/// Cheapest accepting control sequence of at most `depth` steps, found by
/// full enumeration. Goal test is the word semantics of the task.
pub fn exhaustive_plan(scenario: &Scenario, depth: usize) -> Result<Option<f64>, OracleError> {
    let per_step: f64 = scenario.robots.iter().map(|r| r.controls.len() as f64).product();
    let total = per_step.powi(depth as i32);
    if total > EXHAUSTIVE_BUDGET {
        return Err(OracleError::Budget(total));
    }
    let team: Vec<RobotPose> = scenario.robots.iter().map(|r| r.pose).collect();
    let map = scenario.prior_map();
    let Ok(sigma) = label(&team, &map, &scenario.predicates) else { return Ok(None) };
    let mut search = Search { scenario, depth, best: None, word: vec![sigma] };
    search.visit(&team, &map, 0, 0.0);
    Ok(search.best)
}

struct Search<'a> {
    scenario: &'a Scenario,
    depth: usize,
    best: Option<f64>,
    word: Vec<BTreeSet<String>>,
}

impl Search<'_> {
    fn visit(&mut self, team: &[RobotPose], map: &SemanticMapEstimate, t: usize, cost: f64) {
        if semantic_eval(&self.scenario.formula, &self.word) {
            if self.best.is_none_or(|b| cost < b) {
                self.best = Some(cost);
            }
            return;
        }
        if t == self.depth {
            return;
        }
        let sets: Vec<usize> = self.scenario.robots.iter().map(|r| r.controls.len()).collect();
        let mut choice = vec![0usize; sets.len()];
        loop {
            self.try_child(team, map, t, cost, &choice);
            let mut j = 0;
            while j < choice.len() {
                choice[j] += 1;
                if choice[j] < sets[j] {
                    break;
                }
                choice[j] = 0;
                j += 1;
            }
            if j == choice.len() {
                break;
            }
        }
    }

    fn try_child(&mut self, team: &[RobotPose], map: &SemanticMapEstimate, t: usize, cost: f64, choice: &[usize]) {
        let s = self.scenario;
        let tau = s.tau;
        let mut next = Vec::with_capacity(team.len());
        let mut moved = 0.0;
        for ((p, &c), r) in team.iter().zip(choice).zip(&s.robots) {
            let u = r.controls.controls()[c];
            // unicycle integrated in closed form
            let (x, y, th) = if u.omega == 0.0 {
                (p.x + tau * u.u * p.theta.cos(), p.y + tau * u.u * p.theta.sin(), p.theta)
            } else {
                let th2 = p.theta + u.omega * tau;
                (
                    p.x + u.u / u.omega * (th2.sin() - p.theta.sin()),
                    p.y - u.u / u.omega * (th2.cos() - p.theta.cos()),
                    th2,
                )
            };
            let q = RobotPose::new(x, y, th);
            if !s.workspace.segment_free(p.position(), q.position()) {
                return;
            }
            moved += (q.position() - p.position()).norm();
            next.push(q);
        }
        let step_cost = if moved > 0.0 { moved } else { 1e-6 * tau };
        let Ok(map2) = propagate_map(map, t, &next, &s.sensors(), &s.workspace) else { return };
        let Ok(sigma) = label(&next, &map2, &s.predicates) else { return };
        self.word.push(sigma);
        self.visit(&next, &map2, t + 1, cost + step_cost);
        self.word.pop();
    }
}

/// One oracle comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    pub case_id: String,
    pub oracle: f64,
    pub implementation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleReport {
    pub fn new(case_id: impl Into<String>, oracle: f64, implementation: f64, tolerance: f64) -> Self {
        let pass = (oracle - implementation).abs() <= tolerance || (oracle.is_infinite() && oracle == implementation);
        Self { case_id: case_id.into(), oracle, implementation, tolerance, pass }
    }
}

pub fn reports_csv(reports: &[OracleReport]) -> String {
    let mut out = String::from("case_id,oracle,implementation,tolerance,pass\n");
    for r in reports {
        out.push_str(&format!("{},{:.12e},{:.12e},{:.3e},{}\n", r.case_id, r.oracle, r.implementation, r.tolerance, r.pass));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn w(symbols: &[&[&str]]) -> Vec<BTreeSet<String>> {
        symbols.iter().map(|s| s.iter().map(|x| x.to_string()).collect()).collect()
    }

    #[test]
    fn word_semantics() {
        let fa = Formula::eventually(Formula::atom("a"));
        assert!(semantic_eval(&fa, &w(&[&[], &["a"]])));
        assert!(!semantic_eval(&fa, &w(&[&[], &[]])));
        let until = Formula::until(Formula::not("b"), Formula::atom("a"));
        assert!(!semantic_eval(&until, &w(&[&["b"]])));
        assert!(semantic_eval(&until, &w(&[&[], &["a", "b"]])));
        assert!(semantic_eval(&Formula::True, &[]));
        assert!(!semantic_eval(&Formula::atom("a"), &[]));
    }

    #[test]
    fn bfs_on_chain() {
        let adj = vec![vec![1], vec![2], vec![2], vec![]];
        assert_eq!(bfs_distances(&adj, 0), vec![Some(0), Some(1), Some(2), None]);
    }

    #[test]
    fn monte_carlo_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = Vector2::zeros();
        let c = Matrix2::identity();
        assert_eq!(mc_disk_mass(m, &c, m, 0.0, 1000, &mut rng).p, 0.0);
        assert_eq!(mc_disk_mass(m, &c, m, 1e3, 1000, &mut rng).p, 1.0);
        let est = mc_disk_mass(m, &c, m, 1.0, 200_000, &mut rng);
        assert!((est.p - rayleigh_mass(1.0, 1.0)).abs() < 0.005);
    }

    #[test]
    fn matrix_root_squares_back() {
        let cov: Matrix2<f64> = Matrix2::new(2.0, 0.7, 0.7, 1.0);
        let (a, b, d): (f64, f64, f64) = (cov[(0, 0)], cov[(0, 1)], cov[(1, 1)]);
        let s = (a * d - b * b).sqrt();
        let t = (a + d + 2.0 * s).sqrt();
        let root = Matrix2::new(a + s, b, b, d + s) / t;
        assert!((root * root - cov).norm() < 1e-12);
    }

    #[test]
    fn kf_scalar_case() {
        let p = DMatrix::from_element(1, 1, 4.0);
        let h = DMatrix::from_element(1, 1, 1.0);
        let r = DMatrix::from_element(1, 1, 4.0);
        assert!((kf_update(&p, &h, &r)[(0, 0)] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn information_form_agrees_on_easy_case() {
        let p = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let h = DMatrix::identity(2, 2);
        let r = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.5]);
        let a = kf_update(&p, &h, &r);
        let b = kf_information_update(&p, &h, &r).unwrap();
        assert!((a - b).norm() < 1e-14);
        assert!(kf_information_update(&p, &h, &DMatrix::zeros(2, 2)).is_none());
    }

    #[test]
    fn report_pass_flag() {
        assert!(OracleReport::new("a", 1.0, 1.005, 0.01).pass);
        assert!(!OracleReport::new("b", 1.0, 1.05, 0.01).pass);
        let csv = reports_csv(&[OracleReport::new("a", 1.0, 1.0, 0.0)]);
        assert!(csv.starts_with("case_id,oracle,implementation,tolerance,pass\n"));
    }
}
