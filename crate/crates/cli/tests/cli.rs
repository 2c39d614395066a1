use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn semplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semplan")).args(args).output().expect("run semplan")
}

fn with_planner(dir: &TempDir, base: &str, planner: &str) -> PathBuf {
    let text = fs::read_to_string(scenario(base)).unwrap();
    let (head, _) = text.split_once("[planner]").unwrap();
    let path = dir.path().join("scenario.toml");
    fs::write(&path, format!("{head}[planner]\n{planner}\n")).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(semplan(&["--help"]).status.code(), Some(0));
    assert_eq!(semplan(&["--version"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(semplan(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(semplan(&["plan"]).status.code(), Some(1));
    assert_eq!(semplan(&["plan", "--scenario", "/nonexistent.toml"]).status.code(), Some(1));
}

#[test]
fn malformed_scenario_exits_one() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "schema_version = 1\ntask = \"F nowhere\"\n").unwrap();
    let o = semplan(&["plan", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn plan_without_budget_exits_two() {
    let dir = TempDir::new().unwrap();
    let path = with_planner(&dir, "two_landmarks.toml", "n_max = 0");
    let o = semplan(&["plan", "--scenario", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("\"solved\": false"));
}

#[test]
fn plan_writes_solution_and_stats() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let o = semplan(&["plan", "--scenario", scenario("two_landmarks.toml").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("plan.csv")).unwrap();
    let stats: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("plan_stats.json")).unwrap()).unwrap();
    assert_eq!(stats["solved"], true);
    let horizon = stats["horizon"].as_u64().unwrap() as usize;
    assert_eq!(csv.lines().count(), horizon + 2);
    assert!(csv.starts_with("step,robot_0_x,robot_0_y,robot_0_theta,robot_0_u,robot_0_omega,dfa_state,cost\n"));
    let last_cost: f64 = csv.lines().last().unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!((last_cost - stats["cost"].as_f64().unwrap()).abs() < 1e-6);
}

#[test]
fn initial_violation_exits_three() {
    let dir = TempDir::new().unwrap();
    let text = fs::read_to_string(scenario("team_patrol.toml")).unwrap().replace("pose = [1.0, 1.0, 0.0]", "pose = [3.0, 6.0, 0.0]");
    let path = dir.path().join("s.toml");
    fs::write(&path, text).unwrap();
    assert_eq!(semplan(&["plan", "--scenario", path.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn outputs_are_byte_stable() {
    let dir = TempDir::new().unwrap();
    let s = scenario("displaced_prior.toml");
    let mut runs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}"));
        let o = semplan(&["simulate", "--scenario", s.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        let p = dir.path().join(format!("plan{k}"));
        assert_eq!(semplan(&["plan", "--scenario", s.to_str().unwrap(), "--workers", "2", "--out", p.to_str().unwrap()]).status.code(), Some(0));
        runs.push((out, p));
    }
    for name in ["trace.csv", "trace_plot.csv", "summary.json"] {
        assert_eq!(fs::read(runs[0].0.join(name)).unwrap(), fs::read(runs[1].0.join(name)).unwrap(), "{name}");
    }
    for name in ["plan.csv", "plan_stats.json"] {
        assert_eq!(fs::read(runs[0].1.join(name)).unwrap(), fs::read(runs[1].1.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn seed_flag_changes_the_plan() {
    let s = scenario("two_landmarks.toml");
    let a = stdout(&semplan(&["plan", "--scenario", s.to_str().unwrap(), "--seed", "1"]));
    let b = stdout(&semplan(&["plan", "--scenario", s.to_str().unwrap(), "--seed", "2"]));
    let c = stdout(&semplan(&["plan", "--scenario", s.to_str().unwrap(), "--seed", "1"]));
    assert_ne!(a, b);
    assert_eq!(a, c);
}

#[test]
fn more_workers_never_cost_more() {
    let s = scenario("two_landmarks.toml");
    let cost = |w: &str| {
        let o = semplan(&["plan", "--scenario", s.to_str().unwrap(), "--workers", w]);
        let text = stdout(&o);
        let json = &text[text.find('{').unwrap()..];
        let v: serde_json::Value = serde_json::from_str(json).unwrap();
        (v["cost"].as_f64().unwrap(), v["workers"].as_u64().unwrap())
    };
    let (one, w1) = cost("1");
    let (three, w3) = cost("3");
    assert_eq!((w1, w3), (1, 3));
    assert!(three <= one);
}

#[test]
fn simulate_exact_prior_needs_no_replanning() {
    let dir = TempDir::new().unwrap();
    let text = fs::read_to_string(scenario("displaced_prior.toml")).unwrap().replace("mean = [12.0, 10.0]", "mean = [8.0, 10.0]");
    let path = dir.path().join("s.toml");
    fs::write(&path, text).unwrap();
    let out = dir.path().join("out");
    let o = semplan(&["simulate", "--scenario", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(v["status"], "SUCCESS");
    assert_eq!(v["replans"], 0);
    assert_eq!(v["plan_calls"], 1);
}

#[test]
fn displaced_prior_replans() {
    let o = semplan(&["simulate", "--scenario", scenario("displaced_prior.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let v: serde_json::Value = serde_json::from_str(&text[text.find('{').unwrap()..]).unwrap();
    assert!(v["replans"].as_u64().unwrap() >= 1);
}

#[test]
fn compile_dfa_reports_distances() {
    let o = semplan(&["compile-dfa", "--scenario", scenario("team_patrol.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("# states: 4"));
    assert_eq!(text.lines().filter(|l| l.starts_with("dist_to_accept")).count(), 4);
}

#[test]
fn eval_predicate_at_given_poses() {
    let s = scenario("team_patrol.toml");
    let o = semplan(&["eval-predicate", "--scenario", s.to_str().unwrap(), "--poses", "3,6,0;1,10,0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let hazard = text.lines().find(|l| l.starts_with("in_hazard,")).unwrap();
    assert!(hazard.starts_with("in_hazard,proximity,0,true,"));
    let bad = semplan(&["eval-predicate", "--scenario", s.to_str().unwrap(), "--poses", "3,6,0"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn sweep_prints_one_row_per_cell() {
    let o = semplan(&["sweep", "--robots", "1,2", "--landmarks", "5,6", "--seeds", "1", "--workers", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,M,runtime_s,H,solved"));
    let cells: Vec<(String, String)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f.len(), 5);
            assert!(f[2].parse::<f64>().unwrap() > 0.0);
            assert!(f[3].parse::<f64>().unwrap() > 0.0);
            (f[0].to_string(), f[1].to_string())
        })
        .collect();
    let want: Vec<(String, String)> =
        [("1", "5"), ("1", "6"), ("2", "5"), ("2", "6")].iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    assert_eq!(cells, want);
}
