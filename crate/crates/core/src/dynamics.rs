//! Differential-drive robots with finite control sets.

use std::f64::consts::PI;

use crate::error::DynamicsError;
use crate::linalg::Vec2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RobotPose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl RobotPose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta: wrap_angle(theta) }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

/// Wraps to (-π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    if w <= -PI {
        w += 2.0 * PI;
    }
    w
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Control {
    pub u: f64,
    pub omega: f64,
}

/// Exact unicycle integration over one period.
pub fn step_diff_drive(pose: &RobotPose, u: f64, omega: f64, tau: f64) -> RobotPose {
    let half = 0.5 * tau * omega;
    let s = tau * u * sinc(half);
    let heading = pose.theta + half;
    RobotPose { x: pose.x + s * heading.cos(), y: pose.y + s * heading.sin(), theta: wrap_angle(pose.theta + tau * omega) }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ControlSet {
    speeds: Vec<f64>,
    turn_rates: Vec<f64>,
    controls: Vec<Control>,
}

impl ControlSet {
    pub fn new(speeds: Vec<f64>, turn_rates: Vec<f64>) -> Self {
        let controls = speeds.iter().flat_map(|&u| turn_rates.iter().map(move |&omega| Control { u, omega })).collect();
        Self { speeds, turn_rates, controls }
    }

    /// Explicit control list, for sets that are not a speed × turn-rate grid.
    pub fn from_controls(controls: Vec<Control>) -> Self {
        let mut speeds: Vec<f64> = controls.iter().map(|c| c.u).collect();
        let mut turn_rates: Vec<f64> = controls.iter().map(|c| c.omega).collect();
        speeds.sort_by(f64::total_cmp);
        speeds.dedup();
        turn_rates.sort_by(f64::total_cmp);
        turn_rates.dedup();
        Self { speeds, turn_rates, controls }
    }

    /// u ∈ {0, 1} m/s, ω ∈ {0, ±15°, …, ±180°}/s.
    pub fn default_set() -> Self {
        let mut rates = vec![0.0];
        for k in 1..=12 {
            let w = (15.0 * k as f64).to_radians();
            rates.push(w);
            rates.push(-w);
        }
        Self::new(vec![0.0, 1.0], rates)
    }

    pub fn controls(&self) -> &[Control] {
        &self.controls
    }

    pub fn len(&self) -> usize {
        self.controls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.controls.is_empty()
    }

    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }

    pub fn turn_rates(&self) -> &[f64] {
        &self.turn_rates
    }

    pub fn max_speed(&self) -> f64 {
        self.speeds.iter().fold(0.0f64, |m, u| m.max(u.abs()))
    }
}

pub type RobotTeamState = Vec<RobotPose>;

pub fn step_team(team: &[RobotPose], controls: &[Control], tau: f64) -> Result<RobotTeamState, DynamicsError> {
    if team.len() != controls.len() {
        return Err(DynamicsError::Arity { expected: team.len(), got: controls.len() });
    }
    Ok(team.iter().zip(controls).map(|(p, c)| step_diff_drive(p, c.u, c.omega, tau)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let p = RobotPose::new(1.0, 2.0, 0.3);
        assert_eq!(step_diff_drive(&p, 0.0, 0.0, 0.5), p);
        let q = step_diff_drive(&RobotPose::new(0.0, 0.0, 0.0), 1.0, 0.0, 0.1);
        assert!((q.x - 0.1).abs() < 1e-15 && q.y == 0.0);
        let r = step_diff_drive(&RobotPose::new(0.0, 0.0, PI / 2.0), 1.0, 0.0, 0.5);
        assert!(r.x.abs() < 1e-15 && (r.y - 0.5).abs() < 1e-15);
    }

    #[test]
    fn default_set_has_fifty_controls() {
        let s = ControlSet::default_set();
        assert_eq!(s.turn_rates().len(), 25);
        assert_eq!(s.len(), 50);
        assert!(s.turn_rates().iter().any(|&w| (w - PI).abs() < 1e-12));
    }

    #[test]
    fn team_step_is_componentwise() {
        let team = vec![RobotPose::new(0.0, 0.0, 0.0), RobotPose::new(1.0, 1.0, 1.0)];
        let cs = [Control { u: 1.0, omega: 0.5 }, Control { u: 0.5, omega: -1.0 }];
        let next = step_team(&team, &cs, 0.4).unwrap();
        for j in 0..2 {
            assert_eq!(next[j], step_diff_drive(&team[j], cs[j].u, cs[j].omega, 0.4));
        }
        assert!(step_team(&team, &cs[..1], 0.4).is_err());
    }

    #[test]
    fn quarter_turn_arc() {
        // radius u/ω = 1, quarter circle lands at (1, 1)
        let p = step_diff_drive(&RobotPose::new(0.0, 0.0, 0.0), 1.0, 1.0, PI / 2.0);
        assert!((p.x - 1.0).abs() < 1e-12 && (p.y - 1.0).abs() < 1e-12);
        assert!((p.theta - PI / 2.0).abs() < 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn chord_shorter_than_arc(x in -5.0f64..5.0, th in -4.0f64..4.0, u in 0.0f64..2.0, w in -4.0f64..4.0, tau in 0.01f64..1.0) {
            let p = RobotPose::new(x, 0.0, th);
            let q = step_diff_drive(&p, u, w, tau);
            proptest::prop_assert!((q.position() - p.position()).norm() <= tau * u + 1e-12);
            proptest::prop_assert!(q.theta > -PI && q.theta <= PI);
        }

        #[test]
        fn small_turn_limit(th in -3.0f64..3.0, u in 0.0f64..2.0, tau in 0.01f64..1.0) {
            let w = 1e-6;
            let p = RobotPose::new(0.0, 0.0, th);
            let a = step_diff_drive(&p, u, w, tau);
            // exact arc endpoint
            let ax = u / w * ((th + tau * w).sin() - th.sin());
            let ay = -u / w * ((th + tau * w).cos() - th.cos());
            proptest::prop_assert!((a.x - ax).abs() < 1e-9 && (a.y - ay).abs() < 1e-9);
            // straight line differs only by the heading drift
            let b = step_diff_drive(&p, u, 0.0, tau);
            proptest::prop_assert!((a.position() - b.position()).norm() <= 0.5 * tau * tau * u * w + 1e-15);
        }
    }
}
