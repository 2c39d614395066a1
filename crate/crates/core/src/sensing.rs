//! Simulated range and position sensors and the confusion-matrix classifier.

use nalgebra::{DMatrix, RowVector2};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::dynamics::RobotPose;
use crate::error::FilterError;
use crate::linalg::{is_psd, sample_gaussian, Mat2, Vec2};
use crate::workspace::Workspace;

/// Variance floor for range measurements.
pub const RANGE_NOISE_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub enum SensorKind {
    /// Std grows linearly with distance: `base_std + slope · ℓ`.
    Range { base_std: f64, slope: f64 },
    Position { noise_cov: Mat2 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Fov {
    Disk,
    /// Axis-aligned footprint centred on the robot.
    Rectangle { width: f64, height: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SensorModel {
    pub kind: SensorKind,
    pub range: f64,
    pub fov: Fov,
}

impl SensorModel {
    pub fn range_sensor(range: f64, base_std: f64, slope: f64) -> Self {
        Self { kind: SensorKind::Range { base_std, slope }, range, fov: Fov::Disk }
    }

    pub fn position_sensor(range: f64, noise_cov: Mat2) -> Self {
        Self { kind: SensorKind::Position { noise_cov }, range, fov: Fov::Disk }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.range > 0.0) {
            return Err("range must be positive".into());
        }
        match &self.kind {
            SensorKind::Range { base_std, slope } if *base_std < 0.0 || *slope < 0.0 => {
                Err("range noise parameters must be non-negative".into())
            }
            SensorKind::Position { noise_cov } if !is_psd(noise_cov, 1e-10) => Err("noise covariance must be symmetric PSD".into()),
            _ => match self.fov {
                Fov::Rectangle { width, height } if !(width > 0.0 && height > 0.0) => Err("footprint must have positive size".into()),
                _ => Ok(()),
            },
        }
    }

    fn in_fov(&self, d: Vec2) -> bool {
        let inside = match self.fov {
            Fov::Disk => true,
            Fov::Rectangle { width, height } => d.x.abs() <= 0.5 * width && d.y.abs() <= 0.5 * height,
        };
        inside && d.norm() <= self.range
    }

    /// Range noise variance at distance `l`.
    pub fn range_variance(&self, l: f64) -> f64 {
        match self.kind {
            SensorKind::Range { base_std, slope } => (base_std + slope * l).powi(2).max(RANGE_NOISE_FLOOR),
            SensorKind::Position { .. } => f64::NAN,
        }
    }
}

/// Within range and footprint, with an unobstructed line of sight.
pub fn in_gate(sensor: &SensorModel, pose: &RobotPose, landmark: Vec2, ws: &Workspace) -> bool {
    sensor.in_fov(landmark - pose.position()) && ws.line_of_sight(pose.position(), landmark)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeasurementValue {
    Range(f64),
    Position(Vec2),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measurement {
    pub robot: usize,
    pub landmark: usize,
    pub step: usize,
    pub value: MeasurementValue,
}

/// Noisy reading of the true landmark position, or `None` outside the gate.
pub fn sense<R: Rng + ?Sized>(
    sensor: &SensorModel,
    pose: &RobotPose,
    truth: Vec2,
    ws: &Workspace,
    rng: &mut R,
) -> Option<MeasurementValue> {
    if !in_gate(sensor, pose, truth, ws) {
        return None;
    }
    Some(match &sensor.kind {
        SensorKind::Range { .. } => {
            let l = (truth - pose.position()).norm();
            let std = sensor.range_variance(l).sqrt();
            MeasurementValue::Range(Normal::new(l, std).expect("finite std").sample(rng))
        }
        SensorKind::Position { noise_cov } => MeasurementValue::Position(sample_gaussian(&truth, noise_cov, rng)),
    })
}

/// Observation model linearized at `at`.
#[derive(Clone, Debug, PartialEq)]
pub enum Linearized {
    Range { h: RowVector2<f64>, variance: f64, predicted: f64 },
    Position { noise_cov: Mat2 },
}

pub fn observation_jacobian_and_noise(sensor: &SensorModel, pose: &RobotPose, at: Vec2) -> Result<Linearized, FilterError> {
    match &sensor.kind {
        SensorKind::Range { .. } => {
            let d = at - pose.position();
            let l = d.norm();
            if l < 1e-9 {
                return Err(FilterError::ZeroDistanceLinearization);
            }
            Ok(Linearized::Range { h: (d / l).transpose(), variance: sensor.range_variance(l), predicted: l })
        }
        SensorKind::Position { noise_cov } => Ok(Linearized::Position { noise_cov: *noise_cov }),
    }
}

/// `P(label = r | true = c) = m[r][c]`; every column sums to one.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfusionMatrix {
    m: DMatrix<f64>,
}

impl ConfusionMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, FilterError> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(FilterError::Confusion("matrix must be square and non-empty".into()));
        }
        let m = DMatrix::from_fn(n, n, |r, c| rows[r][c]);
        if m.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
            return Err(FilterError::Confusion("entries must lie in [0, 1]".into()));
        }
        for c in 0..n {
            let s: f64 = m.column(c).sum();
            if (s - 1.0).abs() > 1e-6 {
                return Err(FilterError::Confusion(format!("column {c} sums to {s}, expected 1")));
            }
        }
        Ok(Self { m })
    }

    pub fn identity(n: usize) -> Self {
        Self { m: DMatrix::identity(n, n) }
    }

    pub fn size(&self) -> usize {
        self.m.nrows()
    }

    pub fn likelihood(&self, label: usize, class: usize) -> f64 {
        self.m[(label, class)]
    }
}

/// Draws a predicted label from the column of the true class.
pub fn classify<R: Rng + ?Sized>(true_class: usize, confusion: &ConfusionMatrix, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let n = confusion.size();
    for r in 0..n {
        acc += confusion.likelihood(r, true_class);
        if u < acc {
            return r;
        }
    }
    // rounding slack: last label with positive probability
    (0..n).rev().find(|&r| confusion.likelihood(r, true_class) > 0.0).unwrap_or(n - 1)
}
