//! Generated scenario families used by the acceptance suite and `sweep`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::PlanError;
use crate::scenario::{
    ExecutorFile, LandmarkFile, ObstacleFile, PlannerFile, PredicateFile, RobotFile, Scenario, ScenarioFile, SensorFile,
    WorkspaceFile, SCHEMA_VERSION,
};

fn proximity(name: &str, robot: usize, landmark: &str, radius: f64, threshold: f64) -> PredicateFile {
    PredicateFile {
        name: name.into(),
        kind: "proximity".into(),
        robot,
        landmark: Some(landmark.into()),
        class: None,
        radius,
        threshold,
    }
}

fn landmark(name: &str, mean: [f64; 2], var: f64) -> LandmarkFile {
    LandmarkFile {
        name: name.into(),
        mean,
        cov: [[var, 0.0], [0.0, var]],
        class_belief: vec![1.0],
        true_position: None,
        true_class: "target".into(),
        dynamics: Default::default(),
    }
}

fn range_sensor() -> SensorFile {
    SensorFile::Range { range: 1.0, base_std: 0.0, slope: 0.5, footprint: None }
}

/// One robot, 10 x 10 m, two walls, `F pi1 & F pi2` with r = 0.2 m and
/// δ = 0.25.
pub fn two_landmark_benchmark(seed: u64) -> ScenarioFile {
    ScenarioFile {
        schema_version: SCHEMA_VERSION,
        seed,
        tau: 1.0,
        classes: vec!["target".into()],
        task: "F pi1 & F pi2".into(),
        relaxed: false,
        workspace: WorkspaceFile {
            min: [0.0, 0.0],
            max: [10.0, 10.0],
            resolution: 0.25,
            obstacles: vec![ObstacleFile::rect([3.0, 0.0], [3.4, 6.5]), ObstacleFile::rect([6.6, 3.5], [7.0, 10.0])],
        },
        robots: vec![RobotFile { pose: [1.0, 1.0, 0.0], controls: None, sensor: range_sensor() }],
        landmarks: vec![landmark("l1", [5.0, 8.5], 0.01), landmark("l2", [8.8, 1.5], 0.01)],
        predicates: vec![proximity("pi1", 0, "l1", 0.2, 0.25), proximity("pi2", 0, "l2", 0.2, 0.25)],
        confusion: None,
        planner: PlannerFile { n_max: Some(5000), stop_at_first: Some(true), seed: Some(seed), ..Default::default() },
        executor: ExecutorFile::default(),
    }
}

/// One robot with three controls, a depth-4 horizon and a reach task.
pub fn tiny_scenario(index: u64) -> ScenarioFile {
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + index);
    let goal = [rng.random_range(1.0..5.0), rng.random_range(1.0..5.0)];
    let mut landmarks = vec![landmark("g", goal, 1e-4)];
    let mut predicates = vec![proximity("a", 0, "g", 0.7, 0.25)];
    let mut task = "F a".to_string();
    if index % 2 == 1 {
        let avoid = [rng.random_range(1.0..5.0), rng.random_range(1.0..5.0)];
        landmarks.push(landmark("h", avoid, 1e-4));
        predicates.push(proximity("b", 0, "h", 0.5, 0.25));
        task = "!b U a".into();
    }
    ScenarioFile {
        schema_version: SCHEMA_VERSION,
        seed: index,
        tau: 1.0,
        classes: vec!["target".into()],
        task,
        relaxed: false,
        workspace: WorkspaceFile { min: [-1.0, -1.0], max: [7.0, 7.0], resolution: 0.25, obstacles: vec![] },
        robots: vec![RobotFile {
            pose: [1.0, 1.0, rng.random_range(-3.0..3.0)],
            controls: Some(crate::scenario::ControlsFile { speeds: vec![1.0], turn_rates_deg: vec![-90.0, 0.0, 90.0] }),
            sensor: range_sensor(),
        }],
        landmarks,
        predicates,
        confusion: None,
        planner: PlannerFile { n_max: Some(50_000), max_depth: Some(4), seed: Some(index), ..Default::default() },
        executor: ExecutorFile::default(),
    }
}

/// Prior mean displaced by `offset` metres from the true landmark, which
/// lies beside the route to the prior; a noiseless 6 m position sensor.
pub fn replanning_scenario(offset: f64, seed: u64) -> ScenarioFile {
    let truth = [8.0, 10.0];
    let prior = [truth[0] + offset, truth[1]];
    let mut lm = landmark("l1", prior, 0.05);
    lm.true_position = Some(truth);
    ScenarioFile {
        schema_version: SCHEMA_VERSION,
        seed,
        tau: 1.0,
        classes: vec!["target".into()],
        task: "F near".into(),
        relaxed: false,
        workspace: WorkspaceFile {
            min: [0.0, 0.0],
            max: [20.0, 20.0],
            resolution: 0.25,
            obstacles: vec![ObstacleFile::rect([11.0, 0.0], [11.5, 6.0])],
        },
        robots: vec![RobotFile {
            pose: [2.0, 2.0, 0.0],
            controls: None,
            sensor: SensorFile::Position { range: 6.0, noise_cov: [[0.0, 0.0], [0.0, 0.0]], footprint: None },
        }],
        landmarks: vec![lm],
        predicates: vec![proximity("near", 0, "l1", 1.0, 0.25)],
        confusion: None,
        planner: PlannerFile { n_max: Some(20_000), stop_at_first: Some(true), seed: Some(seed), ..Default::default() },
        executor: ExecutorFile { lookahead: Some(3), max_replans: Some(10), max_steps: Some(300), sensing: Some(true) },
    }
}

/// `N` robots and `M` landmarks in a 20 x 20 m workspace with task
/// `F ξ1 & F ξ2 & (!ξ1 U ξ3) & F(ξ4 & F ξ5)`. Each `ξi` is a conjunction of
/// proximity atoms for robots `i` and `i + 1` (mod `N`).
pub fn sweep_scenario(robots: usize, landmarks: usize, seed: u64) -> ScenarioFile {
    assert!(robots >= 1 && landmarks >= 5, "sweep needs a robot and five landmarks");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let obstacles = vec![ObstacleFile::rect([6.0, 4.0], [6.5, 12.0]), ObstacleFile::rect([12.0, 9.0], [12.5, 17.0])];
    let blocked = |p: [f64; 2]| (5.5..=7.0).contains(&p[0]) && (3.5..=12.5).contains(&p[1])
        || (11.5..=13.0).contains(&p[0]) && (8.5..=17.5).contains(&p[1]);
    let mut lms = Vec::new();
    while lms.len() < landmarks {
        let p = [rng.random_range(1.5..18.5), rng.random_range(1.5..18.5)];
        if !blocked(p) {
            lms.push(landmark(&format!("l{}", lms.len()), p, 0.01));
        }
    }
    let team: Vec<RobotFile> = (0..robots)
        .map(|j| RobotFile { pose: [1.0 + 0.8 * j as f64, 1.0, 0.0], controls: None, sensor: range_sensor() })
        .collect();
    let mut predicates = Vec::new();
    let mut xi = Vec::new();
    for i in 0..5 {
        let mut atoms = Vec::new();
        let members = if robots == 1 { vec![0] } else { vec![i % robots, (i + 1) % robots] };
        for (k, &j) in members.iter().enumerate() {
            let lm = (i + 5 * k) % landmarks;
            let name = format!("x{}r{}", i + 1, j);
            predicates.push(proximity(&name, j, &format!("l{lm}"), 1.5, 0.25));
            atoms.push(name);
        }
        xi.push(format!("({})", atoms.join(" & ")));
    }
    let task = format!("F {} & F {} & ({} U {}) & F({} & F {})", xi[0], xi[1], neg(&xi[0]), xi[2], xi[3], xi[4]);
    ScenarioFile {
        schema_version: SCHEMA_VERSION,
        seed,
        tau: 1.0,
        classes: vec!["target".into()],
        task,
        relaxed: false,
        workspace: WorkspaceFile { min: [0.0, 0.0], max: [20.0, 20.0], resolution: 0.25, obstacles },
        robots: team,
        landmarks: lms,
        predicates,
        confusion: None,
        planner: PlannerFile { n_max: Some(300_000), stop_at_first: Some(true), seed: Some(seed), ..Default::default() },
        executor: ExecutorFile::default(),
    }
}

/// One `(N, M)` cell of the scalability sweep, aggregated over seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub robots: usize,
    pub landmarks: usize,
    pub runs: usize,
    pub solved: usize,
    /// Mean planner time to the first solution.
    pub runtime_secs: f64,
    /// Mean horizon over solved runs.
    pub horizon: Option<f64>,
    pub iterations: Vec<usize>,
}

impl SweepRow {
    pub fn feasible(&self) -> bool {
        self.solved == self.runs
    }
}

pub fn run_sweep_cell(robots: usize, landmarks: usize, seeds: &[u64], uniform: bool) -> Result<SweepRow, PlanError> {
    let (mut solved, mut runtime, mut h) = (0, 0.0, 0usize);
    let mut iterations = Vec::new();
    for &seed in seeds {
        let s = Scenario::from_file(&sweep_scenario(robots, landmarks, seed)).map_err(|e| PlanError::Params(e.to_string()))?;
        let mut params = s.planner.clone();
        if uniform {
            params.mode = crate::planner::SamplingMode::Uniform;
        }
        let r = s.plan(&params)?;
        runtime += r.stats.runtime_secs;
        iterations.push(r.stats.iterations);
        if let Some(sol) = r.solution {
            solved += 1;
            h += sol.horizon;
        }
    }
    let n = seeds.len().max(1) as f64;
    Ok(SweepRow {
        robots,
        landmarks,
        runs: seeds.len(),
        solved,
        runtime_secs: runtime / n,
        horizon: (solved > 0).then(|| h as f64 / solved as f64),
        iterations,
    })
}

/// Negation of a parenthesized conjunction of atoms, as a disjunction.
fn neg(conj: &str) -> String {
    let inner = conj.trim_start_matches('(').trim_end_matches(')');
    let parts: Vec<String> = inner.split(" & ").map(|a| format!("!{a}")).collect();
    format!("({})", parts.join(" | "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Scenario;

    #[test]
    fn generated_scenarios_validate() {
        Scenario::from_file(&two_landmark_benchmark(0)).unwrap();
        for i in 0..10 {
            Scenario::from_file(&tiny_scenario(i)).unwrap();
        }
        for off in [0.0, 4.0, 10.0] {
            Scenario::from_file(&replanning_scenario(off, 1)).unwrap();
        }
        for n in [1, 5] {
            for m in [5, 15] {
                let s = Scenario::from_file(&sweep_scenario(n, m, 3)).unwrap();
                assert_eq!(s.robots.len(), n);
                assert_eq!(s.landmarks.len(), m);
            }
        }
    }

    #[test]
    fn negated_conjunction() {
        assert_eq!(neg("(a & b)"), "(!a | !b)");
        assert_eq!(neg("(a)"), "(!a)");
    }
}
