//! Uncertain semantic map: Gaussian landmark positions with linear dynamics
//! and discrete class beliefs.

use std::sync::Arc;

use rand::Rng;

use crate::dynamics::RobotPose;
use crate::error::FilterError;
use crate::linalg::{condition_cov, sample_gaussian, Mat2, Vec2};
use crate::sensing::{in_gate, observation_jacobian_and_noise, ConfusionMatrix, Linearized, MeasurementValue, SensorModel};
use crate::workspace::Workspace;

/// Nominal target motion; the input is the per-step displacement of the
/// nominal trajectory.
#[derive(Clone, Debug, PartialEq)]
pub enum Schedule {
    Static,
    Line { velocity: Vec2 },
    /// Back and forth along `start`–`end` at `speed`, starting at `start`.
    Oscillation { start: Vec2, end: Vec2, speed: f64 },
    Orbit { center: Vec2, radius: f64, angular_speed: f64, phase: f64 },
}

impl Schedule {
    /// Nominal position offset after `t` steps of length `dt`.
    fn nominal(&self, t: f64, dt: f64) -> Vec2 {
        match *self {
            Schedule::Static => Vec2::zeros(),
            Schedule::Line { velocity } => velocity * (t * dt),
            Schedule::Oscillation { start, end, speed } => {
                let len = (end - start).norm();
                if len == 0.0 || speed == 0.0 {
                    return Vec2::zeros();
                }
                let s = (speed * t * dt).rem_euclid(2.0 * len);
                let along = if s <= len { s } else { 2.0 * len - s };
                (end - start) * (along / len)
            }
            Schedule::Orbit { center, radius, angular_speed, phase } => {
                let a = phase + angular_speed * t * dt;
                center + Vec2::new(a.cos(), a.sin()) * radius
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TargetDynamics {
    pub a: Mat2,
    pub b: Mat2,
    pub schedule: Schedule,
    pub process_noise: Mat2,
    pub dt: f64,
}

impl TargetDynamics {
    pub fn stationary() -> Self {
        Self { a: Mat2::identity(), b: Mat2::identity(), schedule: Schedule::Static, process_noise: Mat2::zeros(), dt: 1.0 }
    }

    pub fn moving(schedule: Schedule, process_noise: Mat2, dt: f64) -> Self {
        Self { a: Mat2::identity(), b: Mat2::identity(), schedule, process_noise, dt }
    }

    /// `μ(t) = s(t+1) − s(t)`.
    pub fn input(&self, t: usize) -> Vec2 {
        self.schedule.nominal(t as f64 + 1.0, self.dt) - self.schedule.nominal(t as f64, self.dt)
    }

    pub fn is_static(&self) -> bool {
        self.a == Mat2::identity() && (self.schedule == Schedule::Static || self.b == Mat2::zeros())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LandmarkEstimate {
    pub mean: Vec2,
    pub cov: Mat2,
    pub class_belief: Arc<[f64]>,
    pub dynamics: Arc<TargetDynamics>,
}

impl LandmarkEstimate {
    pub fn top_class(&self) -> usize {
        argmax(&self.class_belief)
    }
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq)]
pub struct SemanticMapEstimate {
    pub landmarks: Vec<LandmarkEstimate>,
    pub classes: Arc<[String]>,
}

/// `x̂(t+1) = A x̂(t) + B μ(t)`.
pub fn predict_mean(lm: &LandmarkEstimate, t: usize) -> Vec2 {
    lm.dynamics.a * lm.mean + lm.dynamics.b * lm.dynamics.input(t)
}

pub fn predict_cov(lm: &LandmarkEstimate) -> Mat2 {
    let a = lm.dynamics.a;
    a * lm.cov * a.transpose() + lm.dynamics.process_noise
}

/// One Joseph-form covariance update for a linearized observation.
fn joseph(p: &Mat2, lin: &Linearized) -> Result<(Mat2, KalmanGain), FilterError> {
    match lin {
        Linearized::Range { h, variance, .. } => {
            let s = (h * p * h.transpose())[(0, 0)] + variance;
            if !(s > 0.0) || !s.is_finite() {
                return Err(FilterError::SingularInnovation);
            }
            let k = p * h.transpose() / s;
            let ikh = Mat2::identity() - k * h;
            let out = ikh * p * ikh.transpose() + k * k.transpose() * *variance;
            Ok((out, KalmanGain::Range(k)))
        }
        Linearized::Position { noise_cov } => {
            let s = p + noise_cov;
            // noiseless sensor on a collapsed belief: S is singular and the
            // pseudo-inverse gives the limiting gain
            let s_inv = match s.try_inverse().filter(|_| s.determinant().abs() > 1e-300) {
                Some(inv) => inv,
                None => s.pseudo_inverse(1e-300).map_err(|_| FilterError::SingularInnovation)?,
            };
            let k = p * s_inv;
            let ikh = Mat2::identity() - k;
            let out = ikh * p * ikh.transpose() + k * noise_cov * k.transpose();
            Ok((out, KalmanGain::Position(k)))
        }
    }
}

enum KalmanGain {
    Range(Vec2),
    Position(Mat2),
}

/// A-posteriori covariance after the robots at `team` look at the predicted
/// landmark; needs no measurement values.
pub fn propagate_covariance(
    lm: &LandmarkEstimate,
    predicted_mean: Vec2,
    team: &[RobotPose],
    sensors: &[SensorModel],
    ws: &Workspace,
) -> Result<Mat2, FilterError> {
    let mut p = predict_cov(lm);
    for (pose, sensor) in team.iter().zip(sensors) {
        if !in_gate(sensor, pose, predicted_mean, ws) {
            continue;
        }
        let lin = match observation_jacobian_and_noise(sensor, pose, predicted_mean) {
            Ok(l) => l,
            // a robot sitting on the predicted mean gets no bearing
            Err(FilterError::ZeroDistanceLinearization) => continue,
            Err(e) => return Err(e),
        };
        p = joseph(&p, &lin)?.0;
    }
    Ok(condition_cov(&p))
}

/// Offline map step used by the planner: predicted means, measurement-free
/// covariance update, frozen class beliefs.
pub fn propagate_map(
    map: &SemanticMapEstimate,
    t: usize,
    team: &[RobotPose],
    sensors: &[SensorModel],
    ws: &Workspace,
) -> Result<SemanticMapEstimate, FilterError> {
    let landmarks = map
        .landmarks
        .iter()
        .map(|lm| {
            let mean = predict_mean(lm, t);
            let cov = propagate_covariance(lm, mean, team, sensors, ws)?;
            Ok(LandmarkEstimate { mean, cov, class_belief: lm.class_belief.clone(), dynamics: lm.dynamics.clone() })
        })
        .collect::<Result<Vec<_>, FilterError>>()?;
    Ok(SemanticMapEstimate { landmarks, classes: map.classes.clone() })
}

/// Prediction followed by sequential (E)KF updates, each linearized at the
/// predicted mean. Without measurements this is the prediction alone.
pub fn posterior_position_update(
    lm: &LandmarkEstimate,
    t: usize,
    measurements: &[(RobotPose, &SensorModel, MeasurementValue)],
) -> Result<LandmarkEstimate, FilterError> {
    let predicted = predict_mean(lm, t);
    let mut mean = predicted;
    let mut p = predict_cov(lm);
    for (pose, sensor, value) in measurements {
        let lin = match observation_jacobian_and_noise(sensor, pose, predicted) {
            Ok(l) => l,
            Err(FilterError::ZeroDistanceLinearization) => continue,
            Err(e) => return Err(e),
        };
        let (np, gain) = joseph(&p, &lin)?;
        match (gain, value, &lin) {
            (KalmanGain::Range(k), MeasurementValue::Range(z), Linearized::Range { h, predicted: l0, .. }) => {
                // h(x) ≈ l0 + H (x − x̂⁻)
                let innovation = z - (l0 + (h * (mean - predicted))[(0, 0)]);
                mean += k * innovation;
            }
            (KalmanGain::Position(k), MeasurementValue::Position(z), _) => {
                mean += k * (z - mean);
            }
            _ => return Err(FilterError::SingularInnovation),
        }
        p = np;
    }
    Ok(LandmarkEstimate { mean, cov: condition_cov(&p), class_belief: lm.class_belief.clone(), dynamics: lm.dynamics.clone() })
}

/// Bayes update with a measured label. Returns the new belief and a flag set
/// when the likelihood annihilated the prior (belief then left unchanged).
pub fn class_belief_update(belief: &[f64], label: usize, confusion: &ConfusionMatrix) -> Result<(Vec<f64>, bool), FilterError> {
    if label >= confusion.size() {
        return Err(FilterError::UnknownClass(label));
    }
    if belief.len() != confusion.size() {
        return Err(FilterError::Confusion(format!("belief has {} classes, matrix has {}", belief.len(), confusion.size())));
    }
    let post: Vec<f64> = belief.iter().enumerate().map(|(c, &b)| confusion.likelihood(label, c) * b).collect();
    let z: f64 = post.iter().sum();
    if !(z > 0.0) {
        return Ok((belief.to_vec(), true));
    }
    Ok((post.into_iter().map(|x| x / z).collect(), false))
}

/// Simulator truth: `x(t+1) = A x(t) + B μ(t) + ν`, `ν ~ N(0, R)`.
pub fn ground_truth_step<R: Rng + ?Sized>(x: Vec2, dynamics: &TargetDynamics, t: usize, rng: &mut R) -> Vec2 {
    let det = dynamics.a * x + dynamics.b * dynamics.input(t);
    if dynamics.process_noise == Mat2::zeros() {
        return det;
    }
    sample_gaussian(&det, &dynamics.process_noise, rng)
}
