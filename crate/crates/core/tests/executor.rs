use semplan::benchmarks::replanning_scenario;
use semplan::executor::{
    compare_replanning_frequency, execute, lookahead_feasible, planned_steps, plot_csv, trace_csv, ExecutorParams,
    MissionStatus,
};
use semplan::linalg::Vec2;
use semplan::scenario::Scenario;
use semplan::semantic_map::propagate_map;

fn offset(off: f64, seed: u64) -> Scenario {
    Scenario::from_file(&replanning_scenario(off, seed)).unwrap()
}

#[test]
fn exact_prior_needs_no_replanning() {
    let s = offset(0.0, 2);
    let trace = execute(&s, &s.executor, &s.planner, None).unwrap();
    assert_eq!(trace.status, MissionStatus::Success);
    assert_eq!(trace.replans, 0);
    assert_eq!(trace.plan_calls, 1);
}

#[test]
fn displaced_prior_triggers_replanning() {
    let s = offset(10.0, 2);
    let trace = execute(&s, &s.executor, &s.planner, None).unwrap();
    assert!(trace.success(), "{}", trace.status);
    assert!(trace.replans >= 1);
    assert_eq!(trace.plan_calls, trace.replans + 1);
    assert!(trace.records.iter().any(|r| r.replanned));
}

#[test]
fn zero_replan_budget_fails_when_plan_breaks() {
    let s = offset(10.0, 2);
    let params = ExecutorParams { max_replans: 0, ..s.executor };
    let trace = execute(&s, &params, &s.planner, None).unwrap();
    assert_eq!(trace.status, MissionStatus::FailedReplanBudget);
    assert_eq!(trace.replans, 0);
}

#[test]
fn step_budget_stops_the_mission() {
    let s = offset(0.0, 2);
    let params = ExecutorParams { max_steps: 2, ..s.executor };
    let trace = execute(&s, &params, &s.planner, None).unwrap();
    assert_eq!(trace.status, MissionStatus::FailedStepBudget);
    assert_eq!(trace.records.len(), 3);
}

#[test]
fn no_plan_when_budget_is_zero() {
    let s = offset(0.0, 2);
    let mut p = s.planner.clone();
    p.n_max = 0;
    let trace = execute(&s, &s.executor, &p, None).unwrap();
    assert_eq!(trace.status, MissionStatus::NoPlan);
    assert_eq!(trace.records.len(), 1);
}

#[test]
fn traces_are_deterministic() {
    let s = offset(4.0, 9);
    let a = execute(&s, &s.executor, &s.planner, None).unwrap();
    let b = execute(&s, &s.executor, &s.planner, None).unwrap();
    assert_eq!(trace_csv(&a, &s), trace_csv(&b, &s));
    assert_eq!(a.replans, b.replans);
}

#[test]
fn automaton_states_fold_over_online_labels() {
    let s = offset(4.0, 3);
    let trace = execute(&s, &s.executor, &s.planner, None).unwrap();
    let mut q = s.dfa.initial();
    for r in &trace.records {
        q = s.dfa.next_state(q, &r.label).unwrap();
        assert_eq!(q, r.dfa_state);
    }
    assert!(s.dfa.is_accepting(q));
    for (i, r) in trace.records.iter().enumerate() {
        assert_eq!(r.step, i);
    }
}

#[test]
fn without_sensing_the_map_follows_the_model() {
    let s = offset(0.0, 5);
    let params = ExecutorParams { sensing: false, ..s.executor };
    let trace = execute(&s, &params, &s.planner, None).unwrap();
    assert!(trace.success());
    assert_eq!(trace.replans, 0);
    let ctx = s.plan_context();
    let mut map = s.prior_map();
    for w in trace.records.windows(2) {
        map = propagate_map(&map, w[0].step, &w[1].team, &ctx.sensors, &ctx.workspace).unwrap();
        for (a, b) in map.landmarks.iter().zip(&w[1].map.landmarks) {
            assert_eq!(a.cov, b.cov);
            assert_eq!(a.mean, b.mean);
        }
    }
}

#[test]
fn lookahead_checks_planned_transitions() {
    let s = offset(0.0, 1);
    let ctx = s.plan_context();
    let sol = s.plan(&s.planner).unwrap().solution.unwrap();
    let planned = planned_steps(&sol);
    let root = &sol.path[0];
    let all = planned.len();
    assert!(lookahead_feasible(&ctx, &root.team, &root.map, 0, root.next_dfa, &planned, 3));
    assert!(lookahead_feasible(&ctx, &root.team, &root.map, 0, root.next_dfa, &planned, all + 10));

    let mut moved = root.map.clone();
    moved.landmarks[0].mean += Vec2::new(0.0, -8.0);
    assert!(!lookahead_feasible(&ctx, &root.team, &moved, 0, root.next_dfa, &planned, all));

    let before = &sol.path[all - 1];
    let mut moved = before.map.clone();
    moved.landmarks[0].mean += Vec2::new(0.0, -8.0);
    assert!(lookahead_feasible(&ctx, &before.team, &before.map, before.step, before.next_dfa, &planned[all - 1..], 3));
    assert!(!lookahead_feasible(&ctx, &before.team, &moved, before.step, before.next_dfa, &planned[all - 1..], 3));
}

#[test]
fn identical_variants_report_identically() {
    let s = offset(4.0, 0);
    let variants = vec![("a".to_string(), s.clone()), ("b".to_string(), s)];
    let r = compare_replanning_frequency(&variants, &[1, 2, 3]).unwrap();
    assert_eq!(r[0].mean_replans, r[1].mean_replans);
    assert_eq!(r[0].success_rate, r[1].success_rate);
    assert_eq!(r[0].runs, 3);
}

#[test]
fn csv_has_fixed_header_and_one_row_per_record() {
    let s = offset(4.0, 3);
    let trace = execute(&s, &s.executor, &s.planner, None).unwrap();
    let csv = trace_csv(&trace, &s);
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "step,robot_0_x,robot_0_y,robot_0_theta,lm_0_true_x,lm_0_true_y,lm_0_est_x,lm_0_est_y,lm_0_det_cov,lm_0_top_class,dfa_state,replanned,label"
    );
    assert_eq!(lines.count(), trace.records.len());
    let plot = plot_csv(&trace, &s, 5);
    assert!(plot.lines().count() <= 7);
    assert_eq!(plot.lines().last(), csv.lines().last());
}
