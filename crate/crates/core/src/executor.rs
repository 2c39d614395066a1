//! Closed-loop mission simulation with online map updates and replanning.

use std::fmt;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::RobotPose;
use crate::error::PlanError;
use crate::linalg::Vec2;
use crate::ltl::{AtomSet, StateId};
use crate::planner::{plan, PlanContext, PlanResult, PlannerParams, RootState, Solution};
use crate::scenario::Scenario;
use crate::semantic_map::{
    class_belief_update, ground_truth_step, posterior_position_update, propagate_map, SemanticMapEstimate,
};
use crate::sensing::{classify, sense, MeasurementValue};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExecutorParams {
    pub lookahead: usize,
    pub max_replans: usize,
    pub max_steps: usize,
    /// Off: the online map evolves exactly like the planner's model.
    pub sensing: bool,
}

impl Default for ExecutorParams {
    fn default() -> Self {
        Self { lookahead: 3, max_replans: 20, max_steps: 400, sensing: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MissionStatus {
    Success,
    Violated,
    FailedReplanBudget,
    FailedStepBudget,
    NoPlan,
}

impl fmt::Display for MissionStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MissionStatus::Success => "SUCCESS",
            MissionStatus::Violated => "VIOLATED",
            MissionStatus::FailedReplanBudget => "FAILED_REPLAN_BUDGET",
            MissionStatus::FailedStepBudget => "FAILED_STEP_BUDGET",
            MissionStatus::NoPlan => "NO_PLAN",
        })
    }
}

#[derive(Clone, Debug)]
pub struct StepRecord {
    pub step: usize,
    pub team: Vec<RobotPose>,
    pub truth: Vec<Vec2>,
    pub map: SemanticMapEstimate,
    pub label: AtomSet,
    pub dfa_state: StateId,
    pub replanned: bool,
    pub measurements: usize,
}

#[derive(Clone, Debug)]
pub struct MissionTrace {
    pub records: Vec<StepRecord>,
    pub status: MissionStatus,
    pub replans: usize,
    pub plan_calls: usize,
    /// Executed motion cost.
    pub cost: f64,
    pub planning_secs: f64,
    pub wall_secs: f64,
    pub belief_warnings: usize,
}

impl MissionTrace {
    pub fn success(&self) -> bool {
        self.status == MissionStatus::Success
    }
}

/// One remaining planned step: controls to apply and the automaton state the
/// plan expects after reading the resulting label.
#[derive(Clone, Debug, PartialEq)]
pub struct PlannedStep {
    pub controls: Vec<usize>,
    pub next_dfa: StateId,
}

pub fn planned_steps(solution: &Solution) -> Vec<PlannedStep> {
    solution.path[1..].iter().map(|n| PlannedStep { controls: n.controls.clone(), next_dfa: n.next_dfa }).collect()
}

/// Replays the next `min(horizon, planned.len())` planned steps on the
/// online map with the planner's model and checks every planned automaton
/// transition still happens.
pub fn lookahead_feasible(
    ctx: &PlanContext,
    team: &[RobotPose],
    map: &SemanticMapEstimate,
    step: usize,
    q: StateId,
    planned: &[PlannedStep],
    horizon: usize,
) -> bool {
    let mut team = team.to_vec();
    let mut map = map.clone();
    let mut q = q;
    for (i, ps) in planned.iter().take(horizon).enumerate() {
        team = ctx.step(&team, &ps.controls);
        map = match propagate_map(&map, step + i, &team, &ctx.sensors, &ctx.workspace) {
            Ok(m) => m,
            Err(_) => return false,
        };
        let Ok(sigma) = ctx.labeler.label(&team, &map) else { return false };
        match ctx.dfa().next_state(q, &sigma) {
            Some(next) if next == ps.next_dfa => q = next,
            _ => return false,
        }
    }
    true
}

fn motion(a: &[RobotPose], b: &[RobotPose]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (q.position() - p.position()).norm()).sum()
}

/// Runs the mission. `initial` is used as the first plan when given,
/// otherwise the executor plans from the scenario root with `planner`.
pub fn execute(
    scenario: &Scenario,
    params: &ExecutorParams,
    planner: &PlannerParams,
    initial: Option<PlanResult>,
) -> Result<MissionTrace, PlanError> {
    let start = Instant::now();
    let ctx = scenario.plan_context();
    let dfa = ctx.dfa();
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let mut team = scenario.initial_team();
    let mut truth: Vec<Vec2> = scenario.landmarks.iter().map(|l| l.true_position).collect();
    let mut map = scenario.prior_map();
    let mut trace = MissionTrace {
        records: Vec::new(),
        status: MissionStatus::NoPlan,
        replans: 0,
        plan_calls: 0,
        cost: 0.0,
        planning_secs: 0.0,
        wall_secs: 0.0,
        belief_warnings: 0,
    };

    let sigma = ctx.labeler.label(&team, &map)?;
    let q0 = dfa.initial();
    let Some(mut q) = dfa.next_state(q0, &sigma) else {
        trace.records.push(StepRecord {
            step: 0,
            team,
            truth,
            map,
            label: sigma,
            dfa_state: q0,
            replanned: false,
            measurements: 0,
        });
        trace.status = MissionStatus::Violated;
        trace.wall_secs = start.elapsed().as_secs_f64();
        return Ok(trace);
    };
    trace.records.push(StepRecord {
        step: 0,
        team: team.clone(),
        truth: truth.clone(),
        map: map.clone(),
        label: sigma,
        dfa_state: q,
        replanned: false,
        measurements: 0,
    });
    if dfa.is_accepting(q) {
        trace.status = MissionStatus::Success;
        trace.wall_secs = start.elapsed().as_secs_f64();
        return Ok(trace);
    }

    let first = match initial {
        Some(r) => r,
        None => {
            let t0 = Instant::now();
            let r = plan(&ctx, RootState { team: team.clone(), map: map.clone(), dfa_state: q0, step: 0 }, planner)?;
            trace.planning_secs += t0.elapsed().as_secs_f64();
            r
        }
    };
    trace.plan_calls = 1;
    let Some(sol) = first.solution else {
        trace.wall_secs = start.elapsed().as_secs_f64();
        return Ok(trace);
    };
    let mut planned = planned_steps(&sol);
    if planned.is_empty() {
        trace.wall_secs = start.elapsed().as_secs_f64();
        return Ok(trace);
    }
    let mut cursor = 0;

    let mut t = 0;
    let status = loop {
        if t >= params.max_steps {
            break MissionStatus::FailedStepBudget;
        }
        let ps = &planned[cursor];
        let next_team = ctx.step(&team, &ps.controls);
        trace.cost += motion(&team, &next_team);
        team = next_team;
        cursor += 1;

        for (i, l) in scenario.landmarks.iter().enumerate() {
            truth[i] = ground_truth_step(truth[i], &l.prior.dynamics, t, &mut rng);
        }
        let mut measurements = 0;
        if params.sensing {
            let mut landmarks = Vec::with_capacity(map.landmarks.len());
            for (i, lm) in map.landmarks.iter().enumerate() {
                let mut zs = Vec::new();
                let mut belief = lm.class_belief.to_vec();
                for (pose, r) in team.iter().zip(&scenario.robots) {
                    if let Some(z) = sense(&r.sensor, pose, truth[i], &scenario.workspace, &mut rng) {
                        zs.push((*pose, &r.sensor, z));
                        let label = classify(scenario.landmarks[i].true_class, &scenario.confusion, &mut rng);
                        let (b, warn) = class_belief_update(&belief, label, &scenario.confusion)
                            .map_err(|e| PlanError::Params(e.to_string()))?;
                        belief = b;
                        trace.belief_warnings += warn as usize;
                    }
                }
                measurements += zs.len();
                let mut updated = match posterior_position_update(lm, t, &zs) {
                    Ok(u) => u,
                    Err(_) => posterior_position_update(lm, t, &[] as &[(RobotPose, _, MeasurementValue)])
                        .expect("prediction alone cannot fail"),
                };
                if !zs.is_empty() {
                    updated.class_belief = belief.into();
                }
                landmarks.push(updated);
            }
            map = SemanticMapEstimate { landmarks, classes: map.classes.clone() };
        } else {
            map = propagate_map(&map, t, &team, &ctx.sensors, &ctx.workspace).map_err(|e| PlanError::Params(e.to_string()))?;
        }
        t += 1;

        let sigma = ctx.labeler.label(&team, &map)?;
        let q_before = q;
        let Some(next) = dfa.next_state(q, &sigma) else {
            trace.records.push(StepRecord {
                step: t,
                team: team.clone(),
                truth: truth.clone(),
                map: map.clone(),
                label: sigma,
                dfa_state: q,
                replanned: false,
                measurements,
            });
            break MissionStatus::Violated;
        };
        q = next;
        let mut record = StepRecord {
            step: t,
            team: team.clone(),
            truth: truth.clone(),
            map: map.clone(),
            label: sigma,
            dfa_state: q,
            replanned: false,
            measurements,
        };
        if dfa.is_accepting(q) {
            trace.records.push(record);
            break MissionStatus::Success;
        }

        let on_track = planned[cursor - 1].next_dfa == q
            && cursor < planned.len()
            && lookahead_feasible(&ctx, &team, &map, t, q, &planned[cursor..], params.lookahead);
        if on_track {
            trace.records.push(record);
            continue;
        }

        record.replanned = true;
        let mut replanned = None;
        while trace.replans < params.max_replans {
            trace.replans += 1;
            trace.plan_calls += 1;
            let mut p = planner.clone();
            p.seed = planner.seed.wrapping_add(trace.replans as u64);
            let root = RootState { team: team.clone(), map: map.clone(), dfa_state: q_before, step: t };
            let t0 = Instant::now();
            let r = plan(&ctx, root, &p)?;
            trace.planning_secs += t0.elapsed().as_secs_f64();
            if let Some(s) = r.solution {
                replanned = Some(s);
                break;
            }
        }
        trace.records.push(record);
        match replanned {
            Some(s) if s.horizon > 0 => {
                planned = planned_steps(&s);
                cursor = 0;
            }
            _ => break MissionStatus::FailedReplanBudget,
        }
    };
    trace.status = status;
    trace.wall_secs = start.elapsed().as_secs_f64();
    Ok(trace)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplanSummary {
    pub variant: String,
    pub runs: usize,
    pub mean_replans: f64,
    pub success_rate: f64,
    pub mean_runtime_secs: f64,
}

/// Runs every variant over the same seeds and summarizes replanning.
pub fn compare_replanning_frequency(variants: &[(String, Scenario)], seeds: &[u64]) -> Result<Vec<ReplanSummary>, PlanError> {
    let mut out = Vec::new();
    for (name, scenario) in variants {
        let (mut replans, mut successes, mut runtime) = (0usize, 0usize, 0.0);
        for &seed in seeds {
            let mut s = scenario.clone();
            s.seed = seed;
            let mut p = s.planner.clone();
            p.seed = seed;
            let trace = execute(&s, &s.executor, &p, None)?;
            replans += trace.replans;
            successes += trace.success() as usize;
            runtime += trace.wall_secs;
        }
        let n = seeds.len().max(1) as f64;
        out.push(ReplanSummary {
            variant: name.clone(),
            runs: seeds.len(),
            mean_replans: replans as f64 / n,
            success_rate: successes as f64 / n,
            mean_runtime_secs: runtime / n,
        });
    }
    Ok(out)
}

/// CSV with the fixed trace columns.
pub fn trace_csv(trace: &MissionTrace, scenario: &Scenario) -> String {
    let mut out = String::new();
    let mut header = vec!["step".to_string()];
    for j in 0..scenario.robots.len() {
        for c in ["x", "y", "theta"] {
            header.push(format!("robot_{j}_{c}"));
        }
    }
    for i in 0..scenario.landmarks.len() {
        for c in ["true_x", "true_y", "est_x", "est_y", "det_cov", "top_class"] {
            header.push(format!("lm_{i}_{c}"));
        }
    }
    header.extend(["dfa_state", "replanned", "label"].map(String::from));
    out.push_str(&header.join(","));
    out.push('\n');
    for r in &trace.records {
        out.push_str(&trace_row(r, scenario));
        out.push('\n');
    }
    out
}

fn trace_row(r: &StepRecord, scenario: &Scenario) -> String {
    let mut row = vec![r.step.to_string()];
    for p in &r.team {
        row.extend([format!("{:.6}", p.x), format!("{:.6}", p.y), format!("{:.6}", p.theta)]);
    }
    for (x, lm) in r.truth.iter().zip(&r.map.landmarks) {
        row.extend([
            format!("{:.6}", x.x),
            format!("{:.6}", x.y),
            format!("{:.6}", lm.mean.x),
            format!("{:.6}", lm.mean.y),
            format!("{:.6e}", lm.cov.determinant()),
            lm.top_class().to_string(),
        ]);
    }
    row.push(r.dfa_state.to_string());
    row.push((r.replanned as u8).to_string());
    row.push(scenario.dfa.symbol_names(&r.label).join(";"));
    row.join(",")
}

/// Same columns, at most `max_rows` evenly spaced records plus the last.
pub fn plot_csv(trace: &MissionTrace, scenario: &Scenario, max_rows: usize) -> String {
    let full = trace_csv(trace, scenario);
    let mut lines = full.lines();
    let header = lines.next().unwrap_or_default();
    let rows: Vec<&str> = lines.collect();
    let stride = rows.len().div_ceil(max_rows.max(1)).max(1);
    let mut out = format!("{header}\n");
    for (i, row) in rows.iter().enumerate() {
        if i % stride == 0 || i + 1 == rows.len() {
            out.push_str(row);
            out.push('\n');
        }
    }
    out
}
