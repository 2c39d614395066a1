use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use semplan::benchmarks::{run_sweep_cell, tiny_scenario, SweepRow};
use semplan::dynamics::RobotPose;
use semplan::executor::{execute, plot_csv, trace_csv, MissionStatus, MissionTrace};
use semplan::linalg::{Mat2, Vec2};
use semplan::oracles::{exhaustive_plan, rayleigh_mass, reports_csv, OracleReport};
use semplan::planner::{plan, PlanError, PlanResult, PlannerParams, SamplingMode};
use semplan::predicates::{eval_relaxed_class_proximity, evaluate, prob_within_radius, PredicateKind};
use semplan::scenario::Scenario;

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_NO_SOLUTION: u8 = 2;
const EXIT_VIOLATION: u8 = 3;

#[derive(Parser)]
#[command(name = "semplan", version, about = "Temporal logic mission planning over uncertain semantic maps")]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Scenario file (TOML)
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,

    /// Overrides the scenario and planner seeds
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory for output files; stdout when omitted
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Independent planner runs (plan) or parallel cells (sweep)
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,

    /// Replace biased sampling by uniform sampling
    #[arg(long, global = true)]
    uniform_sampling: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Print the task automaton and its pruning report
    CompileDfa,
    /// Plan from the scenario's initial state
    Plan,
    /// Run the closed-loop mission with online updates and replanning
    Simulate {
        /// Rows kept in the downsampled plot file
        #[arg(long, default_value_t = 200)]
        plot_rows: usize,
    },
    /// Evaluate every predicate at the initial map and a team state
    EvalPredicate {
        /// Team poses as `x,y,theta;x,y,theta;...` (initial poses by default)
        #[arg(long)]
        poses: Option<String>,
    },
    /// Scalability grid over team and map sizes
    Sweep {
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 5])]
        robots: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [5usize, 15])]
        landmarks: Vec<usize>,
        /// Seeds per cell, counted up from --seed
        #[arg(long, default_value_t = 3)]
        seeds: u64,
        /// Also compare the planner with exhaustive search on tiny instances
        #[arg(long)]
        oracle: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(EXIT_USAGE)
        }
    }
}

/// The error chain, skipping causes already spelled out by their parent.
fn describe(e: &anyhow::Error) -> String {
    let mut text = e.to_string();
    for cause in e.chain().skip(1) {
        let c = cause.to_string();
        if !text.contains(&c) {
            text = format!("{text}: {c}");
        }
    }
    text
}

fn run(cli: Cli) -> Result<u8> {
    let g = &cli.global;
    if g.workers == 0 {
        bail!("--workers must be at least 1");
    }
    match &cli.command {
        Command::CompileDfa => compile_dfa(g),
        Command::Plan => cmd_plan(g),
        Command::Simulate { plot_rows } => simulate(g, *plot_rows),
        Command::EvalPredicate { poses } => eval_predicate(g, poses.as_deref()),
        Command::Sweep { robots, landmarks, seeds, oracle } => sweep(g, robots, landmarks, *seeds, *oracle),
    }
}

fn load(g: &Global) -> Result<Scenario> {
    let path = g.scenario.as_ref().context("--scenario is required for this command")?;
    let mut s = Scenario::load(path)?;
    if let Some(seed) = g.seed {
        s.seed = seed;
        s.planner.seed = seed;
    }
    if g.uniform_sampling {
        s.planner.mode = SamplingMode::Uniform;
    }
    Ok(s)
}

/// Writes `text` to `out/name`, or to stdout without `--out`.
fn emit(g: &Global, name: &str, text: &str) -> Result<()> {
    match &g.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
            let path = dir.join(name);
            fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn compile_dfa(g: &Global) -> Result<u8> {
    let s = load(g)?;
    let ctx = s.plan_context();
    let text = format!("# task: {}\n# states: {}\n{}\n{}", s.task, s.dfa.num_states(), s.dfa.dump(), ctx.index().report());
    emit(g, "dfa.txt", &text)?;
    Ok(EXIT_OK)
}

/// Plan with `workers` seeds in parallel; the cheapest solution wins, lowest
/// worker on ties.
fn plan_parallel(s: &Scenario, params: &PlannerParams, workers: usize) -> Result<PlanResult, PlanError> {
    let ctx = s.plan_context();
    if workers == 1 {
        return plan(&ctx, s.root(), params);
    }
    let results: Vec<Result<PlanResult, PlanError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let ctx = &ctx;
                let mut p = params.clone();
                p.seed = params.seed.wrapping_add(w as u64);
                let root = s.root();
                scope.spawn(move || plan(ctx, root, &p))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("planner thread panicked")).collect()
    });
    let mut best: Option<PlanResult> = None;
    let mut runtime = 0.0f64;
    for r in results {
        let r = r?;
        runtime = runtime.max(r.stats.runtime_secs);
        let better = match (&best, &r.solution) {
            (None, _) => true,
            (Some(b), Some(sol)) => b.solution.as_ref().is_none_or(|bs| sol.cost < bs.cost),
            (Some(_), None) => false,
        };
        if better {
            best = Some(r);
        }
    }
    let mut best = best.expect("at least one worker");
    best.stats.workers = workers;
    best.stats.runtime_secs = runtime;
    Ok(best)
}

#[derive(Serialize)]
struct PlanSummary {
    solved: bool,
    horizon: Option<usize>,
    cost: Option<f64>,
    iterations: usize,
    first_solution_iteration: Option<usize>,
    tree_size: usize,
    buckets: usize,
    goal_nodes: usize,
    rejected_obstacle: usize,
    rejected_violation: usize,
    rejected_filter: usize,
    rejected_duplicate: usize,
    rejected_depth: usize,
    greedy_draws: usize,
    uniform_fallbacks: usize,
    unassigned_class: usize,
    pruning_warning: bool,
    d_min: Option<u32>,
    workers: usize,
}

fn plan_summary(r: &PlanResult) -> PlanSummary {
    let st = &r.stats;
    PlanSummary {
        solved: r.solution.is_some(),
        horizon: r.solution.as_ref().map(|s| s.horizon),
        cost: r.solution.as_ref().map(|s| s.cost),
        iterations: st.iterations,
        first_solution_iteration: st.first_solution_iteration,
        tree_size: st.tree_size,
        buckets: st.buckets,
        goal_nodes: st.goal_nodes,
        rejected_obstacle: st.rejected_obstacle,
        rejected_violation: st.rejected_violation,
        rejected_filter: st.rejected_filter,
        rejected_duplicate: st.rejected_duplicate,
        rejected_depth: st.rejected_depth,
        greedy_draws: st.greedy_draws,
        uniform_fallbacks: st.uniform_fallbacks,
        unassigned_class: st.unassigned_class,
        pruning_warning: st.pruning_warning,
        d_min: st.d_min,
        workers: st.workers,
    }
}

fn plan_csv(r: &PlanResult, robots: usize) -> String {
    let mut header = vec!["step".to_string()];
    for j in 0..robots {
        for c in ["x", "y", "theta", "u", "omega"] {
            header.push(format!("robot_{j}_{c}"));
        }
    }
    header.extend(["dfa_state", "cost"].map(String::from));
    let mut out = header.join(",") + "\n";
    let Some(sol) = &r.solution else { return out };
    for (i, node) in sol.path.iter().enumerate() {
        let mut row = vec![node.step.to_string()];
        for (j, p) in node.team.iter().enumerate() {
            row.extend([format!("{:.6}", p.x), format!("{:.6}", p.y), format!("{:.6}", p.theta)]);
            match i.checked_sub(1).map(|k| sol.controls[k][j]) {
                Some(u) => row.extend([format!("{:.6}", u.u), format!("{:.6}", u.omega)]),
                None => row.extend([String::new(), String::new()]),
            }
        }
        row.push(node.next_dfa.to_string());
        row.push(format!("{:.6}", node.cost));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn plan_exit(e: PlanError) -> Result<u8> {
    match e {
        PlanError::InitialViolation => {
            eprintln!("the initial state already violates the task");
            Ok(EXIT_VIOLATION)
        }
        other => Err(other.into()),
    }
}

fn cmd_plan(g: &Global) -> Result<u8> {
    let s = load(g)?;
    let r = match plan_parallel(&s, &s.planner, g.workers) {
        Ok(r) => r,
        Err(e) => return plan_exit(e),
    };
    let csv = plan_csv(&r, s.robots.len());
    let stats = json(&plan_summary(&r))?;
    match &g.out {
        Some(_) => {
            emit(g, "plan.csv", &csv)?;
            emit(g, "plan_stats.json", &stats)?;
        }
        None => print!("{csv}{stats}"),
    }
    match &r.solution {
        Some(sol) => eprintln!(
            "solution: H={} cost={:.6} iterations={} runtime={:.3}s",
            sol.horizon, sol.cost, r.stats.iterations, r.stats.runtime_secs
        ),
        None => eprintln!("no solution after {} iterations", r.stats.iterations),
    }
    Ok(if r.solution.is_some() { EXIT_OK } else { EXIT_NO_SOLUTION })
}

#[derive(Serialize)]
struct MissionSummary {
    status: String,
    steps: usize,
    replans: usize,
    plan_calls: usize,
    cost: f64,
    final_dfa_state: usize,
    belief_warnings: usize,
}

fn mission_summary(t: &MissionTrace) -> MissionSummary {
    MissionSummary {
        status: t.status.to_string(),
        steps: t.records.len().saturating_sub(1),
        replans: t.replans,
        plan_calls: t.plan_calls,
        cost: t.cost,
        final_dfa_state: t.records.last().map_or(0, |r| r.dfa_state),
        belief_warnings: t.belief_warnings,
    }
}

fn simulate(g: &Global, plot_rows: usize) -> Result<u8> {
    let s = load(g)?;
    let initial = match plan_parallel(&s, &s.planner, g.workers) {
        Ok(r) => r,
        Err(e) => return plan_exit(e),
    };
    let trace = execute(&s, &s.executor, &s.planner, Some(initial))?;
    let csv = trace_csv(&trace, &s);
    let summary = json(&mission_summary(&trace))?;
    match &g.out {
        Some(_) => {
            emit(g, "trace.csv", &csv)?;
            emit(g, "trace_plot.csv", &plot_csv(&trace, &s, plot_rows))?;
            emit(g, "summary.json", &summary)?;
        }
        None => print!("{csv}{summary}"),
    }
    eprintln!(
        "{}: {} steps, {} replans, cost {:.3}, wall {:.3}s",
        trace.status,
        trace.records.len().saturating_sub(1),
        trace.replans,
        trace.cost,
        trace.wall_secs
    );
    Ok(match trace.status {
        MissionStatus::Success => EXIT_OK,
        MissionStatus::Violated => EXIT_VIOLATION,
        _ => EXIT_NO_SOLUTION,
    })
}

fn parse_poses(text: &str, expected: usize) -> Result<Vec<RobotPose>> {
    let poses = text
        .split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let v: Vec<f64> = p.split(',').map(|x| x.trim().parse::<f64>()).collect::<Result<_, _>>().with_context(|| format!("bad pose '{p}'"))?;
            match v.as_slice() {
                [x, y, th] => Ok(RobotPose::new(*x, *y, *th)),
                _ => bail!("pose '{p}' needs x,y,theta"),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    if poses.len() != expected {
        bail!("expected {expected} poses, got {}", poses.len());
    }
    Ok(poses)
}

fn eval_predicate(g: &Global, poses: Option<&str>) -> Result<u8> {
    let s = load(g)?;
    let team = match poses {
        Some(text) => parse_poses(text, s.robots.len())?,
        None => s.initial_team(),
    };
    let map = s.prior_map();
    let mut out = String::from("predicate,kind,robot,value,raw\n");
    for def in &s.predicates {
        let (kind, e) = match def.kind {
            PredicateKind::Proximity { .. } => ("proximity", evaluate(def, &team, &map)?),
            PredicateKind::ClassProximity { .. } if s.relaxed => {
                ("relaxed_class_proximity", eval_relaxed_class_proximity(def, &team, &map)?)
            }
            PredicateKind::ClassProximity { .. } => ("class_proximity", evaluate(def, &team, &map)?),
            PredicateKind::Uncertainty { .. } => ("uncertainty", evaluate(def, &team, &map)?),
            PredicateKind::RelaxedClassProximity { .. } => ("relaxed_class_proximity", evaluate(def, &team, &map)?),
        };
        out.push_str(&format!("{},{},{},{},{:.9}\n", def.name, kind, def.robot, e.value, e.raw));
    }
    emit(g, "predicates.csv", &out)?;
    Ok(EXIT_OK)
}

fn sweep_table(rows: &[SweepRow]) -> String {
    let mut out = String::from("N,M,runtime_s,H,solved\n");
    for r in rows {
        let h = r.horizon.map_or_else(|| "-".to_string(), |h| format!("{h:.1}"));
        out.push_str(&format!("{},{},{:.3},{},{}/{}\n", r.robots, r.landmarks, r.runtime_secs, h, r.solved, r.runs));
    }
    out
}

fn oracle_reports() -> Result<Vec<OracleReport>> {
    let mut reports = Vec::new();
    for i in 0..10 {
        let s = Scenario::from_file(&tiny_scenario(i))?;
        let oracle = exhaustive_plan(&s, 4)?.unwrap_or(f64::INFINITY);
        let got = s.plan(&s.planner)?.solution.map_or(f64::INFINITY, |x| x.cost);
        reports.push(OracleReport::new(format!("tiny_{i}"), oracle, got, 1e-9));
    }
    for (k, (sigma, r)) in [(0.1, 0.05), (0.5, 0.5), (1.0, 2.0), (2.0, 1.0), (0.3, 1.5)].into_iter().enumerate() {
        let mean = Vec2::new(1.0, -2.0);
        let got = prob_within_radius(mean, &(Mat2::identity() * sigma * sigma), mean, r);
        reports.push(OracleReport::new(format!("rayleigh_{k}"), rayleigh_mass(sigma, r), got, 1e-4));
    }
    Ok(reports)
}

fn sweep(g: &Global, robots: &[usize], landmarks: &[usize], seeds: u64, oracle: bool) -> Result<u8> {
    let base = g.seed.unwrap_or(0);
    let seeds: Vec<u64> = (base..base + seeds).collect();
    let cells: Vec<(usize, usize)> = robots.iter().flat_map(|&n| landmarks.iter().map(move |&m| (n, m))).collect();
    if cells.iter().any(|&(n, m)| n == 0 || m < 5) {
        bail!("sweep needs at least one robot and five landmarks per cell");
    }
    let uniform = g.uniform_sampling;
    let mut rows: Vec<Option<SweepRow>> = vec![None; cells.len()];
    for chunk in cells.iter().enumerate().collect::<Vec<_>>().chunks(g.workers) {
        let done: Vec<(usize, Result<SweepRow, PlanError>)> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|&(i, &(n, m))| {
                    let seeds = &seeds;
                    (i, scope.spawn(move || run_sweep_cell(n, m, seeds, uniform)))
                })
                .collect();
            handles.into_iter().map(|(i, h)| (i, h.join().expect("sweep thread panicked"))).collect()
        });
        for (i, r) in done {
            rows[i] = Some(r?);
        }
    }
    let rows: Vec<SweepRow> = rows.into_iter().map(|r| r.expect("every cell ran")).collect();
    emit(g, "sweep.csv", &sweep_table(&rows))?;
    let mut all_pass = rows.iter().all(SweepRow::feasible);
    if oracle {
        let reports = oracle_reports()?;
        all_pass &= reports.iter().all(|r| r.pass);
        emit(g, "oracle.csv", &reports_csv(&reports))?;
    }
    Ok(if all_pass { EXIT_OK } else { EXIT_NO_SOLUTION })
}
