//! Scenario files: TOML schema, validation with field paths, and the
//! in-memory problem they describe.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{ControlSet, RobotPose};
use crate::error::{LtlError, PlanError};
use crate::executor::ExecutorParams;
use crate::linalg::{is_psd, Mat2, Vec2};
use crate::ltl::{compile_to_dfa, parse_cosafe_ltl_with_atoms, Dfa, Formula};
use crate::planner::{plan, PlanContext, PlanResult, PlannerParams, RootState, SamplingMode};
use crate::predicates::{PredicateDef, PredicateKind};
use crate::semantic_map::{LandmarkEstimate, Schedule, SemanticMapEstimate, TargetDynamics};
use crate::sensing::{ConfusionMatrix, Fov, SensorKind, SensorModel};
use crate::workspace::{Polygon, Workspace, DEFAULT_RESOLUTION};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("task: {0}")]
    Task(#[from] LtlError),
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid { path: path.into(), message: message.into() }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub tau: f64,
    pub classes: Vec<String>,
    pub task: String,
    #[serde(default)]
    pub relaxed: bool,
    pub workspace: WorkspaceFile,
    pub robots: Vec<RobotFile>,
    #[serde(default)]
    pub landmarks: Vec<LandmarkFile>,
    #[serde(default)]
    pub predicates: Vec<PredicateFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confusion: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub planner: PlannerFile,
    #[serde(default)]
    pub executor: ExecutorFile,
}

fn one() -> f64 {
    1.0
}

fn default_resolution() -> f64 {
    DEFAULT_RESOLUTION
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct WorkspaceFile {
    pub min: [f64; 2],
    pub max: [f64; 2],
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    #[serde(default)]
    pub obstacles: Vec<ObstacleFile>,
}

/// Either `vertices` or an axis-aligned `min`/`max` box.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct ObstacleFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<[f64; 2]>,
}

impl ObstacleFile {
    pub fn rect(min: [f64; 2], max: [f64; 2]) -> Self {
        Self { vertices: None, min: Some(min), max: Some(max) }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RobotFile {
    /// x, y, heading in radians.
    pub pose: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controls: Option<ControlsFile>,
    pub sensor: SensorFile,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ControlsFile {
    pub speeds: Vec<f64>,
    pub turn_rates_deg: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SensorFile {
    Range {
        range: f64,
        #[serde(default)]
        base_std: f64,
        slope: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        footprint: Option<[f64; 2]>,
    },
    Position {
        range: f64,
        noise_cov: [[f64; 2]; 2],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        footprint: Option<[f64; 2]>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LandmarkFile {
    pub name: String,
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
    pub class_belief: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_position: Option<[f64; 2]>,
    pub true_class: String,
    #[serde(default)]
    pub dynamics: DynamicsFile,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct DynamicsFile {
    #[serde(default)]
    pub schedule: ScheduleFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub process_noise: Option<[[f64; 2]; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Default)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleFile {
    #[default]
    Static,
    Line {
        velocity: [f64; 2],
    },
    Oscillation {
        start: [f64; 2],
        end: [f64; 2],
        speed: f64,
    },
    Orbit {
        center: [f64; 2],
        radius: f64,
        angular_speed: f64,
        #[serde(default)]
        phase: f64,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PredicateFile {
    pub name: String,
    /// proximity | class_proximity | uncertainty | relaxed_class_proximity
    pub kind: String,
    pub robot: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub landmark: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    #[serde(default)]
    pub radius: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct PlannerFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_rand: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_new: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos_quantum: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_quantum_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warmup: Option<usize>,
    /// biased | uniform
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsample_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_at_first: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct ExecutorFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lookahead: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_replans: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensing: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct RobotSpec {
    pub pose: RobotPose,
    pub controls: ControlSet,
    pub sensor: SensorModel,
}

#[derive(Clone, Debug)]
pub struct LandmarkSpec {
    pub name: String,
    pub prior: LandmarkEstimate,
    pub true_position: Vec2,
    pub true_class: usize,
}

/// Validated problem instance.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub seed: u64,
    pub tau: f64,
    pub workspace: Arc<Workspace>,
    pub classes: Arc<[String]>,
    pub robots: Vec<RobotSpec>,
    pub landmarks: Vec<LandmarkSpec>,
    pub predicates: Vec<PredicateDef>,
    pub task: String,
    pub formula: Formula,
    pub dfa: Dfa,
    pub relaxed: bool,
    pub confusion: ConfusionMatrix,
    pub planner: PlannerParams,
    pub executor: ExecutorParams,
}

fn mat(m: [[f64; 2]; 2]) -> Mat2 {
    Mat2::new(m[0][0], m[0][1], m[1][0], m[1][1])
}

fn vec2(v: [f64; 2]) -> Vec2 {
    Vec2::new(v[0], v[1])
}

fn finite(path: &str, xs: &[f64]) -> Result<(), ScenarioError> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(invalid(path, "values must be finite"))
    }
}

fn covariance(path: &str, m: [[f64; 2]; 2]) -> Result<Mat2, ScenarioError> {
    finite(path, &[m[0][0], m[0][1], m[1][0], m[1][1]])?;
    let c = mat(m);
    if (c[(0, 1)] - c[(1, 0)]).abs() > 1e-12 || !is_psd(&c, 1e-12) {
        return Err(invalid(path, "covariance must be symmetric positive semidefinite"));
    }
    Ok(c)
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScenarioError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        Self::from_file(&file)
    }

    pub fn from_file(f: &ScenarioFile) -> Result<Self, ScenarioError> {
        if f.schema_version != SCHEMA_VERSION {
            return Err(invalid("schema_version", format!("unsupported version {}, expected {SCHEMA_VERSION}", f.schema_version)));
        }
        if !(f.tau > 0.0 && f.tau.is_finite()) {
            return Err(invalid("tau", "step period must be positive"));
        }
        if f.classes.is_empty() {
            return Err(invalid("classes", "at least one class is required"));
        }
        let mut seen = BTreeSet::new();
        for (i, c) in f.classes.iter().enumerate() {
            if !seen.insert(c.as_str()) {
                return Err(invalid(format!("classes[{i}]"), format!("duplicate class '{c}'")));
            }
        }
        let class_of = |path: &str, name: &str| {
            f.classes.iter().position(|c| c == name).ok_or_else(|| invalid(path, format!("unknown class '{name}'")))
        };

        let w = &f.workspace;
        finite("workspace", &[w.min[0], w.min[1], w.max[0], w.max[1], w.resolution])?;
        let mut obstacles = Vec::new();
        for (i, o) in w.obstacles.iter().enumerate() {
            let path = format!("workspace.obstacles[{i}]");
            let poly = match (&o.vertices, o.min, o.max) {
                (Some(v), None, None) => Polygon::new(v.iter().map(|&p| vec2(p)).collect()),
                (None, Some(a), Some(b)) => Polygon::rectangle(vec2(a), vec2(b)),
                _ => return Err(invalid(path, "give either vertices or min and max")),
            }
            .map_err(|e| invalid(&path, e.to_string()))?;
            obstacles.push(poly);
        }
        let workspace = Workspace::new(vec2(w.min), vec2(w.max), obstacles, w.resolution).map_err(|e| invalid("workspace", e.to_string()))?;

        if f.robots.is_empty() {
            return Err(invalid("robots", "at least one robot is required"));
        }
        let mut robots = Vec::new();
        for (j, r) in f.robots.iter().enumerate() {
            let path = format!("robots[{j}]");
            finite(&format!("{path}.pose"), &r.pose)?;
            let pose = RobotPose::new(r.pose[0], r.pose[1], r.pose[2]);
            if !workspace.is_free(pose.position()) {
                return Err(invalid(format!("{path}.pose"), "initial pose is not in free space"));
            }
            let controls = match &r.controls {
                None => ControlSet::default_set(),
                Some(c) => {
                    if c.speeds.is_empty() || c.turn_rates_deg.is_empty() {
                        return Err(invalid(format!("{path}.controls"), "control set is empty"));
                    }
                    finite(&format!("{path}.controls"), &c.speeds)?;
                    finite(&format!("{path}.controls"), &c.turn_rates_deg)?;
                    ControlSet::new(c.speeds.clone(), c.turn_rates_deg.iter().map(|d| d.to_radians()).collect())
                }
            };
            let sensor = match &r.sensor {
                SensorFile::Range { range, base_std, slope, footprint } => SensorModel {
                    kind: SensorKind::Range { base_std: *base_std, slope: *slope },
                    range: *range,
                    fov: footprint.map_or(Fov::Disk, |[width, height]| Fov::Rectangle { width, height }),
                },
                SensorFile::Position { range, noise_cov, footprint } => SensorModel {
                    kind: SensorKind::Position { noise_cov: covariance(&format!("{path}.sensor.noise_cov"), *noise_cov)? },
                    range: *range,
                    fov: footprint.map_or(Fov::Disk, |[width, height]| Fov::Rectangle { width, height }),
                },
            };
            sensor.validate().map_err(|m| invalid(format!("{path}.sensor"), m))?;
            robots.push(RobotSpec { pose, controls, sensor });
        }

        let mut landmarks = Vec::new();
        let mut names = BTreeSet::new();
        for (i, l) in f.landmarks.iter().enumerate() {
            let path = format!("landmarks[{i}] ({})", l.name);
            if !names.insert(l.name.as_str()) {
                return Err(invalid(path, "duplicate landmark name"));
            }
            finite(&format!("{path}.mean"), &l.mean)?;
            let cov = covariance(&format!("{path}.cov"), l.cov)?;
            if l.class_belief.len() != f.classes.len() {
                return Err(invalid(format!("{path}.class_belief"), format!("expected {} entries", f.classes.len())));
            }
            let sum: f64 = l.class_belief.iter().sum();
            if l.class_belief.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (sum - 1.0).abs() > 1e-6 {
                return Err(invalid(format!("{path}.class_belief"), format!("beliefs must be probabilities summing to 1, got sum {sum}")));
            }
            let true_class = class_of(&format!("{path}.true_class"), &l.true_class)?;
            let schedule = match l.dynamics.schedule {
                ScheduleFile::Static => Schedule::Static,
                ScheduleFile::Line { velocity } => Schedule::Line { velocity: vec2(velocity) },
                ScheduleFile::Oscillation { start, end, speed } => Schedule::Oscillation { start: vec2(start), end: vec2(end), speed },
                ScheduleFile::Orbit { center, radius, angular_speed, phase } => {
                    Schedule::Orbit { center: vec2(center), radius, angular_speed, phase }
                }
            };
            let noise = match l.dynamics.process_noise {
                Some(q) => covariance(&format!("{path}.dynamics.process_noise"), q)?,
                None => Mat2::zeros(),
            };
            let dynamics = if schedule == Schedule::Static && noise == Mat2::zeros() {
                TargetDynamics::stationary()
            } else {
                TargetDynamics::moving(schedule, noise, f.tau)
            };
            let prior = LandmarkEstimate {
                mean: vec2(l.mean),
                cov,
                class_belief: Arc::from(l.class_belief.clone()),
                dynamics: Arc::new(dynamics),
            };
            let true_position = vec2(l.true_position.unwrap_or(l.mean));
            landmarks.push(LandmarkSpec { name: l.name.clone(), prior, true_position, true_class });
        }

        let mut predicates = Vec::new();
        let mut pnames = BTreeSet::new();
        for (k, p) in f.predicates.iter().enumerate() {
            let path = format!("predicates[{k}] ({})", p.name);
            if !pnames.insert(p.name.clone()) {
                return Err(invalid(path, "duplicate predicate name"));
            }
            let landmark = |p: &PredicateFile| -> Result<usize, ScenarioError> {
                let name = p.landmark.as_deref().ok_or_else(|| invalid(format!("{path}.landmark"), "missing landmark"))?;
                f.landmarks.iter().position(|l| l.name == name).ok_or_else(|| invalid(format!("{path}.landmark"), format!("unknown landmark '{name}'")))
            };
            let class = |p: &PredicateFile| -> Result<usize, ScenarioError> {
                let name = p.class.as_deref().ok_or_else(|| invalid(format!("{path}.class"), "missing class"))?;
                class_of(&format!("{path}.class"), name)
            };
            let kind = match p.kind.as_str() {
                "proximity" => PredicateKind::Proximity { landmark: landmark(p)? },
                "uncertainty" => PredicateKind::Uncertainty { landmark: landmark(p)? },
                "class_proximity" => PredicateKind::ClassProximity { class: class(p)? },
                "relaxed_class_proximity" => PredicateKind::RelaxedClassProximity { class: class(p)? },
                other => return Err(invalid(format!("{path}.kind"), format!("unknown predicate kind '{other}'"))),
            };
            let def = PredicateDef { name: p.name.clone(), robot: p.robot, kind, radius: p.radius, threshold: p.threshold };
            def.validate(robots.len(), landmarks.len(), f.classes.len()).map_err(|e| invalid(&path, e.to_string()))?;
            predicates.push(def);
        }

        let formula = parse_cosafe_ltl_with_atoms(&f.task, &pnames)?;
        let dfa = compile_to_dfa(&formula)?;

        let confusion = match &f.confusion {
            None => ConfusionMatrix::identity(f.classes.len()),
            Some(rows) => {
                let m = ConfusionMatrix::new(rows.clone()).map_err(|e| invalid("confusion", e.to_string()))?;
                if m.size() != f.classes.len() {
                    return Err(invalid("confusion", format!("expected a {0}x{0} matrix", f.classes.len())));
                }
                m
            }
        };

        let pf = &f.planner;
        let d = PlannerParams::default();
        let mode = match pf.sampling.as_deref() {
            None | Some("biased") => SamplingMode::Biased,
            Some("uniform") => SamplingMode::Uniform,
            Some(other) => return Err(invalid("planner.sampling", format!("expected 'biased' or 'uniform', got '{other}'"))),
        };
        let planner = PlannerParams {
            n_max: pf.n_max.unwrap_or(d.n_max),
            p_rand: pf.p_rand.unwrap_or(d.p_rand),
            p_new: pf.p_new.unwrap_or(d.p_new),
            pos_quantum: pf.pos_quantum.unwrap_or(d.pos_quantum),
            angle_quantum: pf.angle_quantum_deg.map_or(d.angle_quantum, f64::to_radians),
            warmup: pf.warmup.unwrap_or(d.warmup),
            mode,
            subsample_cap: pf.subsample_cap.unwrap_or(d.subsample_cap),
            epsilon: pf.epsilon.unwrap_or(d.epsilon),
            max_depth: pf.max_depth,
            stop_at_first: pf.stop_at_first.unwrap_or(d.stop_at_first),
            seed: pf.seed.unwrap_or(f.seed),
        };
        planner.validate().map_err(|e| invalid("planner", e.to_string()))?;

        let ed = ExecutorParams::default();
        let ef = &f.executor;
        let executor = ExecutorParams {
            lookahead: ef.lookahead.unwrap_or(ed.lookahead),
            max_replans: ef.max_replans.unwrap_or(ed.max_replans),
            max_steps: ef.max_steps.unwrap_or(ed.max_steps),
            sensing: ef.sensing.unwrap_or(ed.sensing),
        };
        if executor.lookahead == 0 {
            return Err(invalid("executor.lookahead", "lookahead must be at least 1"));
        }

        Ok(Self {
            seed: f.seed,
            tau: f.tau,
            workspace: Arc::new(workspace),
            classes: Arc::from(f.classes.clone()),
            robots,
            landmarks,
            predicates,
            task: f.task.clone(),
            formula,
            dfa,
            relaxed: f.relaxed,
            confusion,
            planner,
            executor,
        })
    }

    pub fn initial_team(&self) -> Vec<RobotPose> {
        self.robots.iter().map(|r| r.pose).collect()
    }

    pub fn prior_map(&self) -> SemanticMapEstimate {
        SemanticMapEstimate { landmarks: self.landmarks.iter().map(|l| l.prior.clone()).collect(), classes: self.classes.clone() }
    }

    pub fn sensors(&self) -> Vec<SensorModel> {
        self.robots.iter().map(|r| r.sensor.clone()).collect()
    }

    pub fn plan_context(&self) -> PlanContext {
        PlanContext::new(
            self.workspace.clone(),
            self.robots.iter().map(|r| r.controls.clone()).collect(),
            self.sensors(),
            self.tau,
            &self.dfa,
            &self.predicates,
            self.relaxed,
        )
    }

    pub fn root(&self) -> RootState {
        RootState { team: self.initial_team(), map: self.prior_map(), dfa_state: self.dfa.initial(), step: 0 }
    }

    /// Plans from the scenario's initial state.
    pub fn plan(&self, params: &PlannerParams) -> Result<PlanResult, PlanError> {
        plan(&self.plan_context(), self.root(), params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = r#"
schema_version = 1
classes = ["box"]
task = "F near"

[workspace]
min = [0.0, 0.0]
max = [5.0, 5.0]

[[robots]]
pose = [1.0, 1.0, 0.0]
sensor = { kind = "range", range = 1.0, slope = 0.5 }

[[landmarks]]
name = "l1"
mean = [4.0, 4.0]
cov = [[0.01, 0.0], [0.0, 0.01]]
class_belief = [1.0]
true_class = "box"

[[predicates]]
name = "near"
kind = "proximity"
robot = 0
landmark = "l1"
radius = 0.5
threshold = 0.25
"#;

    #[test]
    fn minimal_loads() {
        let s = Scenario::from_toml_str(MINIMAL).unwrap();
        assert_eq!(s.robots.len(), 1);
        assert_eq!(s.landmarks.len(), 1);
        assert_eq!(s.robots[0].controls.len(), 50);
        assert_eq!(s.dfa.num_states(), 2);
        assert_eq!(s.executor.lookahead, 3);
    }

    #[test]
    fn bad_belief_names_landmark() {
        let text = MINIMAL.replace("class_belief = [1.0]", "class_belief = [0.9]");
        let err = Scenario::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("landmarks[0] (l1).class_belief"), "{err}");
    }

    #[test]
    fn unknown_atom_is_named() {
        let text = MINIMAL.replace("F near", "F near & F far");
        let err = Scenario::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("'far'"), "{err}");
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = MINIMAL.replace("task = \"F near\"", "task = \"F near\"\ncolour = 3");
        assert!(matches!(Scenario::from_toml_str(&text), Err(ScenarioError::Parse(_))));
    }

    #[test]
    fn schema_version_checked() {
        let text = MINIMAL.replace("schema_version = 1", "schema_version = 2");
        let err = Scenario::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.starts_with("schema_version"), "{err}");
    }

    #[test]
    fn blocked_start_rejected() {
        let text = MINIMAL.replace("max = [5.0, 5.0]", "max = [5.0, 5.0]\nobstacles = [{ min = [0.5, 0.5], max = [1.5, 1.5] }]");
        let err = Scenario::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("robots[0].pose"), "{err}");
    }

    #[test]
    fn round_trips_through_toml() {
        let file: ScenarioFile = toml::from_str(MINIMAL).unwrap();
        let text = toml::to_string(&file).unwrap();
        let again: ScenarioFile = toml::from_str(&text).unwrap();
        assert_eq!(file, again);
    }
}
