//! Sampling-based tree search over team poses, map estimates and automaton
//! states.

pub mod buckets;
pub mod sampling;

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use buckets::{sample_bucket, BucketIndex, SamplingMode, INF_DIST};
pub use sampling::{assign_landmarks, best_for_class, sample_control, Draw};

use crate::dynamics::{step_diff_drive, Control, ControlSet, RobotPose};
pub use crate::error::PlanError;
use crate::ltl::{prune_dfa, unpruned_index, Dfa, PrunedDfaIndex, StateId};
use crate::predicates::{Labeler, PredicateDef};
use crate::semantic_map::{predict_mean, propagate_map, SemanticMapEstimate};
use crate::sensing::SensorModel;
use crate::workspace::{Cell, GeodesicField, Workspace};

/// Cost charged for a step that does not move any robot.
pub const IDLE_COST_FACTOR: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct PlannerParams {
    pub n_max: usize,
    pub p_rand: f64,
    pub p_new: f64,
    pub pos_quantum: f64,
    pub angle_quantum: f64,
    pub warmup: usize,
    pub mode: SamplingMode,
    /// Max bucket members extended per iteration.
    pub subsample_cap: usize,
    /// Confidence of the ellipses turned into virtual obstacles.
    pub epsilon: f64,
    /// Nodes at this depth are not extended.
    pub max_depth: Option<usize>,
    pub stop_at_first: bool,
    pub seed: u64,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            n_max: 5000,
            p_rand: 0.9,
            p_new: 0.9,
            pos_quantum: 0.5,
            angle_quantum: 30f64.to_radians(),
            warmup: 100,
            mode: SamplingMode::Biased,
            subsample_cap: 32,
            epsilon: 0.9,
            max_depth: None,
            stop_at_first: false,
            seed: 0,
        }
    }
}

impl PlannerParams {
    pub fn validate(&self) -> Result<(), PlanError> {
        let open = |p: f64| p > 0.5 && p < 1.0;
        if !open(self.p_rand) {
            return Err(PlanError::Params(format!("p_rand must lie in (0.5, 1), got {}", self.p_rand)));
        }
        if !open(self.p_new) {
            return Err(PlanError::Params(format!("p_new must lie in (0.5, 1), got {}", self.p_new)));
        }
        if !(self.pos_quantum > 0.0) || !(self.angle_quantum > 0.0) {
            return Err(PlanError::Params("quantization cells must be positive".into()));
        }
        if self.subsample_cap == 0 {
            return Err(PlanError::Params("subsample_cap must be positive".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(PlanError::Params(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// Everything about the problem that stays fixed across replanning calls.
#[derive(Clone, Debug)]
pub struct PlanContext {
    pub workspace: Arc<Workspace>,
    pub controls: Vec<ControlSet>,
    pub sensors: Vec<SensorModel>,
    pub tau: f64,
    pub labeler: Labeler,
    pruned: PrunedDfaIndex,
    unpruned: PrunedDfaIndex,
}

impl PlanContext {
    pub fn new(
        workspace: Arc<Workspace>,
        controls: Vec<ControlSet>,
        sensors: Vec<SensorModel>,
        tau: f64,
        dfa: &Dfa,
        defs: &[PredicateDef],
        relaxed: bool,
    ) -> Self {
        let labeler = Labeler::new(dfa, defs, relaxed);
        let pruned = prune_dfa(dfa, &labeler.atom_meta());
        let unpruned = unpruned_index(dfa);
        Self { workspace, controls, sensors, tau, labeler, pruned, unpruned }
    }

    pub fn dfa(&self) -> &Dfa {
        self.pruned.dfa()
    }

    pub fn index(&self) -> &PrunedDfaIndex {
        &self.pruned
    }

    pub fn robots(&self) -> usize {
        self.controls.len()
    }

    /// Team successor under the given control indices.
    pub fn step(&self, team: &[RobotPose], controls: &[usize]) -> Vec<RobotPose> {
        team.iter()
            .zip(controls)
            .zip(&self.controls)
            .map(|((p, &c), set)| {
                let u = set.controls()[c];
                step_diff_drive(p, u.u, u.omega, self.tau)
            })
            .collect()
    }

    pub fn motion_cost(&self, from: &[RobotPose], to: &[RobotPose]) -> f64 {
        let d: f64 = from.iter().zip(to).map(|(a, b)| (b.position() - a.position()).norm()).sum();
        if d > 0.0 {
            d
        } else {
            IDLE_COST_FACTOR * self.tau
        }
    }
}

/// Where a (re)planning call starts: `dfa_state` is the automaton state
/// before the root's own label is read.
#[derive(Clone, Debug)]
pub struct RootState {
    pub team: Vec<RobotPose>,
    pub map: SemanticMapEstimate,
    pub dfa_state: StateId,
    pub step: usize,
}

#[derive(Clone, Debug)]
pub struct TreeNode {
    pub id: usize,
    pub team: Vec<RobotPose>,
    pub map: SemanticMapEstimate,
    /// State reached by reading the parent's label.
    pub dfa_state: StateId,
    /// State reached by also reading this node's label.
    pub next_dfa: StateId,
    pub parent: Option<usize>,
    /// Control indices that produced this node from its parent.
    pub controls: Vec<usize>,
    pub cost: f64,
    pub step: usize,
    pub depth: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PlanStats {
    pub iterations: usize,
    pub first_solution_iteration: Option<usize>,
    pub tree_size: usize,
    pub buckets: usize,
    pub bucket_occupancy: Vec<usize>,
    pub goal_nodes: usize,
    pub rejected_obstacle: usize,
    pub rejected_violation: usize,
    pub rejected_filter: usize,
    pub rejected_duplicate: usize,
    pub rejected_depth: usize,
    pub greedy_draws: usize,
    pub uniform_fallbacks: usize,
    pub unassigned_class: usize,
    pub pruning_warning: bool,
    pub d_min: Option<u32>,
    pub runtime_secs: f64,
    pub workers: usize,
}

#[derive(Clone, Debug)]
pub struct Solution {
    /// Root first, goal last.
    pub path: Vec<TreeNode>,
    pub controls: Vec<Vec<Control>>,
    pub horizon: usize,
    pub cost: f64,
}

#[derive(Clone, Debug)]
pub struct PlanResult {
    pub solution: Option<Solution>,
    pub stats: PlanStats,
}

pub struct Planner<'a> {
    ctx: &'a PlanContext,
    params: PlannerParams,
    rng: ChaCha8Rng,
    index: &'a PrunedDfaIndex,
    nodes: Vec<TreeNode>,
    tried: Vec<Vec<u128>>,
    buckets: BucketIndex,
    goals: Vec<usize>,
    fields: HashMap<(Cell, Vec<Cell>), Option<Arc<GeodesicField>>>,
    stats: PlanStats,
}

const FIELD_CACHE_LIMIT: usize = 4096;

impl<'a> Planner<'a> {
    pub fn new(ctx: &'a PlanContext, root: RootState, params: PlannerParams) -> Result<Self, PlanError> {
        params.validate()?;
        if root.team.len() != ctx.robots() || ctx.sensors.len() != ctx.robots() {
            return Err(PlanError::TeamSize { expected: ctx.robots(), got: root.team.len() });
        }
        for (j, p) in root.team.iter().enumerate() {
            if !ctx.workspace.is_free(p.position()) {
                return Err(PlanError::InitialPoseBlocked(j));
            }
        }
        let dfa = ctx.dfa();
        if root.dfa_state >= dfa.num_states() {
            return Err(crate::error::LtlError::UnknownState(root.dfa_state).into());
        }
        let sigma = ctx.labeler.label(&root.team, &root.map)?;
        let next = dfa.next_state(root.dfa_state, &sigma).ok_or(PlanError::InitialViolation)?;
        let mut stats = PlanStats { workers: 1, ..PlanStats::default() };
        let mut index = &ctx.pruned;
        if index.infeasible_warning() {
            stats.pruning_warning = true;
        }
        if dfa.accepting().is_some() && index.distance_to_accept(next).is_none() && ctx.unpruned.distance_to_accept(next).is_some() {
            index = &ctx.unpruned;
            stats.pruning_warning = true;
        }
        let mut buckets = BucketIndex::new(params.pos_quantum, params.angle_quantum, params.warmup);
        let mut goals = Vec::new();
        if dfa.is_accepting(next) {
            goals.push(0);
            stats.first_solution_iteration = Some(0);
        } else {
            buckets.insert(0, &root.team, next, index.distance_to_accept(next).unwrap_or(INF_DIST));
        }
        let node = TreeNode {
            id: 0,
            team: root.team,
            map: root.map,
            dfa_state: root.dfa_state,
            next_dfa: next,
            parent: None,
            controls: Vec::new(),
            cost: 0.0,
            step: root.step,
            depth: 0,
        };
        Ok(Self {
            ctx,
            rng: ChaCha8Rng::seed_from_u64(params.seed),
            params,
            index,
            nodes: vec![node],
            tried: vec![Vec::new()],
            buckets,
            goals,
            fields: HashMap::new(),
            stats,
        })
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn goals(&self) -> &[usize] {
        &self.goals
    }

    pub fn buckets(&self) -> &BucketIndex {
        &self.buckets
    }

    pub fn stats(&self) -> PlanStats {
        let mut s = self.stats.clone();
        s.tree_size = self.nodes.len();
        s.buckets = self.buckets.len();
        s.bucket_occupancy = self.buckets.occupancy();
        s.goal_nodes = self.goals.len();
        s.d_min = if !self.goals.is_empty() {
            Some(0)
        } else if self.buckets.d_min() == INF_DIST {
            None
        } else {
            Some(self.buckets.d_min())
        };
        s
    }

    fn done(&self) -> bool {
        self.stats.iterations >= self.params.n_max || self.buckets.is_empty() || (self.params.stop_at_first && !self.goals.is_empty())
    }

    pub fn run(&mut self) {
        let start = Instant::now();
        while !self.done() {
            self.iterate();
        }
        self.stats.runtime_secs += start.elapsed().as_secs_f64();
    }

    /// One draw of a bucket followed by extension of a subsample of it.
    pub fn iterate(&mut self) {
        if self.buckets.is_empty() {
            return;
        }
        self.stats.iterations += 1;
        let b = self.buckets.sample(self.params.p_rand, self.params.mode, &mut self.rng);
        let members = self.buckets.members(b);
        let chosen: Vec<usize> = if members.len() <= self.params.subsample_cap {
            members.to_vec()
        } else {
            let picks = sample_indices(&mut self.rng, members.len(), self.params.subsample_cap);
            picks.into_iter().map(|i| members[i]).collect()
        };
        for id in chosen {
            self.extend(id);
        }
    }

    fn joint_code(&self, controls: &[usize]) -> Option<u128> {
        let mut code: u128 = 0;
        for (c, set) in controls.iter().zip(&self.ctx.controls) {
            code = code.checked_mul(set.len() as u128)?.checked_add(*c as u128)?;
        }
        Some(code)
    }

    fn extend(&mut self, id: usize) {
        if self.params.max_depth.is_some_and(|d| self.nodes[id].depth >= d) {
            self.stats.rejected_depth += 1;
            return;
        }
        let ctx = self.ctx;
        let guidance = if self.params.mode == SamplingMode::Biased { self.guidance(id) } else { vec![None; ctx.robots()] };
        let mut controls = Vec::with_capacity(ctx.robots());
        for (j, g) in guidance.iter().enumerate() {
            let (c, draw) = sample_control(ctx.controls[j].len(), *g, self.params.p_new, &mut self.rng);
            if draw == Draw::Greedy {
                self.stats.greedy_draws += 1;
            }
            controls.push(c);
        }
        if let Some(code) = self.joint_code(&controls) {
            if self.tried[id].contains(&code) {
                self.stats.rejected_duplicate += 1;
                return;
            }
            self.tried[id].push(code);
        }
        let parent = &self.nodes[id];
        let team = ctx.step(&parent.team, &controls);
        let ws = &ctx.workspace;
        if !parent.team.iter().zip(&team).all(|(a, b)| ws.segment_free(a.position(), b.position())) {
            self.stats.rejected_obstacle += 1;
            return;
        }
        let Ok(map) = propagate_map(&parent.map, parent.step, &team, &ctx.sensors, ws) else {
            self.stats.rejected_filter += 1;
            return;
        };
        let Ok(sigma) = ctx.labeler.label(&team, &map) else {
            self.stats.rejected_filter += 1;
            return;
        };
        let dfa = ctx.dfa();
        let dfa_state = parent.next_dfa;
        let Some(next) = dfa.next_state(dfa_state, &sigma) else {
            self.stats.rejected_violation += 1;
            return;
        };
        let node = TreeNode {
            id: self.nodes.len(),
            cost: parent.cost + ctx.motion_cost(&parent.team, &team),
            team,
            map,
            dfa_state,
            next_dfa: next,
            parent: Some(id),
            controls,
            step: parent.step + 1,
            depth: parent.depth + 1,
        };
        let nid = node.id;
        if dfa.is_accepting(next) {
            self.goals.push(nid);
            if self.stats.first_solution_iteration.is_none() {
                self.stats.first_solution_iteration = Some(self.stats.iterations);
            }
        } else {
            let d = self.index.distance_to_accept(next).unwrap_or(INF_DIST);
            self.buckets.insert(nid, &node.team, next, d);
        }
        self.nodes.push(node);
        self.tried.push(Vec::new());
    }

    /// Greedy control candidate per robot, `None` where the law is uniform.
    fn guidance(&mut self, id: usize) -> Vec<Option<usize>> {
        let ctx = self.ctx;
        let n = ctx.robots();
        let q_next = self.nodes[id].next_dfa;
        let targets = self.index.reachable_min_set(q_next);
        if targets.is_empty() {
            return vec![None; n];
        }
        let q_min = targets[self.rng.random_range(0..targets.len())];
        let Ok(sigma) = self.index.select_transition_symbol(q_next, q_min) else { return vec![None; n] };
        let node = &self.nodes[id];
        let (assigned, unassigned) = assign_landmarks(&ctx.labeler, &sigma, &node.map, n);
        if unassigned {
            self.stats.unassigned_class += 1;
        }
        let guard = self.index.pruned_guard(q_next, q_min).cloned();
        let atoms = ctx.dfa().atoms().len();
        let mut out = vec![None; n];
        for j in 0..n {
            let Some(l) = assigned[j] else { continue };
            let node = &self.nodes[id];
            let goal = predict_mean(&node.map.landmarks[l], node.step);
            let blocking = match &guard {
                Some(g) => sampling::blocking_atoms(&ctx.labeler, g, &sigma, j, atoms),
                None => Vec::new(),
            };
            let virt = if blocking.is_empty() {
                Vec::new()
            } else {
                sampling::virtual_obstacles(&ctx.labeler, &blocking, &node.map, node.step, l, &ctx.workspace, self.params.epsilon)
            };
            let pose = node.team[j];
            let Some(field) = self.field(goal, virt) else {
                self.stats.uniform_fallbacks += 1;
                continue;
            };
            if field.distance_at(pose.position()) < ctx.sensors[j].range {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for (c, u) in ctx.controls[j].controls().iter().enumerate() {
                let next = step_diff_drive(&pose, u.u, u.omega, ctx.tau);
                if !ctx.workspace.segment_free(pose.position(), next.position()) {
                    continue;
                }
                let d = field.distance_at(next.position());
                if d.is_finite() && best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((c, d));
                }
            }
            match best {
                Some((c, _)) => out[j] = Some(c),
                None => self.stats.uniform_fallbacks += 1,
            }
        }
        out
    }

    fn field(&mut self, goal: crate::linalg::Vec2, virt: Vec<Cell>) -> Option<Arc<GeodesicField>> {
        let ws = &self.ctx.workspace;
        let cell = ws.cell_of(goal)?;
        let key = (cell, virt);
        if let Some(f) = self.fields.get(&key) {
            return f.clone();
        }
        let target = ws.cell_center(cell);
        let built = ws
            .build_geodesic_field(target, &key.1)
            .or_else(|_| ws.build_geodesic_field(target, &[]))
            .ok()
            .map(Arc::new);
        if self.fields.len() >= FIELD_CACHE_LIMIT {
            self.fields.clear();
        }
        self.fields.insert(key, built.clone());
        built
    }

    /// Cheapest goal node, lowest id on ties.
    pub fn best_goal(&self) -> Option<usize> {
        self.goals.iter().copied().min_by(|&a, &b| self.nodes[a].cost.total_cmp(&self.nodes[b].cost).then(a.cmp(&b)))
    }

    pub fn path_to(&self, id: usize) -> Vec<usize> {
        let mut path = vec![id];
        let mut cur = id;
        while let Some(p) = self.nodes[cur].parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    pub fn extract_best(&self) -> Option<Solution> {
        let goal = self.best_goal()?;
        let ids = self.path_to(goal);
        let path: Vec<TreeNode> = ids.iter().map(|&i| self.nodes[i].clone()).collect();
        let controls = path[1..]
            .iter()
            .map(|n| n.controls.iter().zip(&self.ctx.controls).map(|(&c, set)| set.controls()[c]).collect())
            .collect();
        Some(Solution { horizon: path.len() - 1, cost: self.nodes[goal].cost, path, controls })
    }

    pub fn result(&self) -> PlanResult {
        PlanResult { solution: self.extract_best(), stats: self.stats() }
    }
}

/// Builds a tree from `root` for `params.n_max` iterations and returns the
/// cheapest accepting path found.
pub fn plan(ctx: &PlanContext, root: RootState, params: &PlannerParams) -> Result<PlanResult, PlanError> {
    let mut planner = Planner::new(ctx, root, params.clone())?;
    planner.run();
    Ok(planner.result())
}
