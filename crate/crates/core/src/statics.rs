//! Resting shape of the unactuated arm under its own weight.
//!
//! The arm hangs in the vertical plane that contains its base axis. Each
//! joint balances its elastic torque `k_n·θ_n` against the weight of every
//! section beyond it. Joints that would pass the rotation limit stay at the
//! limit and the remaining joints are solved with them locked.

use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::frames::{chain, BackboneShape, Frame, JointConfiguration};
use crate::manipulator::{bending_stiffness, ManipulatorSpec};
use crate::roots::{brent, Tolerance};

pub const RESIDUAL_TOLERANCE: f64 = 1e-8;
const FIXED_POINT_ITERATIONS: usize = 5000;
const SWEEP_ITERATIONS: usize = 2000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestState {
    /// Angle of the base axis below horizontal (radians).
    pub theta_0: f64,
    /// Joint rotations, positive when the distal side drops (radians).
    /// Past vertical (`theta_0 > 90°`) gravity pulls the other way and the
    /// angles come out negative.
    pub joint_angles: Vec<f64>,
    pub saturated: Vec<bool>,
}

impl RestState {
    pub fn straight(theta_0: f64, joints: usize) -> Self {
        RestState {
            theta_0,
            joint_angles: vec![0.0; joints],
            saturated: vec![false; joints],
        }
    }

    /// Joint rotation matrices in each joint's local frame.
    pub fn rotations(&self) -> Vec<Matrix3<f64>> {
        self.joint_angles.iter().map(|&t| rest_rotation(t)).collect()
    }

    pub fn configuration(&self, limit: f64) -> JointConfiguration {
        JointConfiguration::planar(&self.joint_angles, Vector3::y(), limit)
    }
}

/// Rotation of a joint that sags by `angle` toward the ventral side.
pub fn rest_rotation(angle: f64) -> Matrix3<f64> {
    if angle == 0.0 {
        return Matrix3::identity();
    }
    *Rotation3::from_axis_angle(&Vector3::y_axis(), angle).matrix()
}

/// World frame of the arm base: `x` points along the base axis, tilted
/// `theta_0` below horizontal; world `z` is up.
pub fn base_frame(theta_0: f64) -> Frame {
    Frame::new(rest_rotation(theta_0), Vector3::zeros())
}

/// World-frame backbone of a rest state.
pub fn rest_shape(spec: &ManipulatorSpec, state: &RestState) -> BackboneShape {
    chain(spec, &base_frame(state.theta_0), &state.rotations())
}

/// Horizontal lever arms of the chain for given joint angles.
struct Levers {
    /// Horizontal position of joint `n` (index `n − 1`).
    joint_x: Vec<f64>,
    /// Horizontal position of each section's centroid.
    cg_x: Vec<f64>,
}

fn levers(spec: &ManipulatorSpec, theta_0: f64, angles: &[f64]) -> Levers {
    let mut phi = theta_0;
    let mut x = 0.0;
    let mut joint_x = Vec::with_capacity(angles.len());
    let mut cg_x = Vec::with_capacity(spec.sections.len());
    for (i, s) in spec.sections.iter().enumerate() {
        let c = phi.cos();
        cg_x.push(x + s.cg_fraction * s.link_length * c);
        x += s.link_length * c;
        if i < angles.len() {
            joint_x.push(x);
            phi += angles[i];
        }
    }
    Levers { joint_x, cg_x }
}

fn all_moments(spec: &ManipulatorSpec, theta_0: f64, angles: &[f64]) -> Vec<f64> {
    let lv = levers(spec, theta_0, angles);
    let g = spec.material.gravity * 1e-3;
    (0..angles.len())
        .map(|n| {
            let pivot = lv.joint_x[n];
            spec.sections[n + 1..]
                .iter()
                .zip(&lv.cg_x[n + 1..])
                .map(|(s, x)| s.mass * (x - pivot))
                .sum::<f64>()
                * g
        })
        .collect()
}

/// Moment of the weight of everything beyond `joint` about that joint
/// (N·mm), positive when it drops the distal side.
pub fn gravity_moment(spec: &ManipulatorSpec, state: &RestState, joint: usize) -> Result<f64> {
    spec.check_joint(joint)?;
    if state.joint_angles.len() != spec.joints() {
        return Err(Error::Mismatch(format!(
            "state has {} joint angles, spec has {} joints",
            state.joint_angles.len(),
            spec.joints()
        )));
    }
    Ok(all_moments(spec, state.theta_0, &state.joint_angles)[joint - 1])
}

/// Per-joint equilibrium residual (N·mm). Locked joints count only when
/// gravity no longer pushes them into the limit.
pub fn equilibrium_residuals(spec: &ManipulatorSpec, state: &RestState) -> Result<Vec<f64>> {
    let k = stiffnesses(spec)?;
    let m = all_moments(spec, state.theta_0, &state.joint_angles);
    Ok(residuals(&k, &m, &state.joint_angles, spec.joint_limit))
}

fn residuals(k: &[f64], m: &[f64], theta: &[f64], limit: f64) -> Vec<f64> {
    theta
        .iter()
        .enumerate()
        .map(|(n, &t)| {
            let r = m[n] - k[n] * t;
            if t.abs() >= limit {
                (-r * t.signum()).max(0.0)
            } else {
                r.abs()
            }
        })
        .collect()
}

fn stiffnesses(spec: &ManipulatorSpec) -> Result<Vec<f64>> {
    (1..=spec.joints()).map(|j| bending_stiffness(spec, j)).collect()
}

/// Equilibrium shape for base tilt `theta_0` (radians).
pub fn solve_rest_shape(spec: &ManipulatorSpec, theta_0: f64) -> Result<RestState> {
    spec.validate()?;
    if !theta_0.is_finite() {
        return Err(Error::Domain("tilt must be finite".into()));
    }
    let n = spec.joints();
    let limit = spec.joint_limit;
    let k = stiffnesses(spec)?;
    if k.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidParams("every joint needs positive stiffness".into()));
    }
    let clamp = |v: f64| v.clamp(-limit, limit);
    let done = |theta: &[f64]| -> (bool, Vec<f64>) {
        let m = all_moments(spec, theta_0, theta);
        let r = residuals(&k, &m, theta, limit);
        (r.iter().all(|&v| v < RESIDUAL_TOLERANCE), r)
    };

    // Damped fixed point.
    let mut theta = vec![0.0; n];
    let mut omega = 0.5;
    let mut last_change = f64::INFINITY;
    for _ in 0..FIXED_POINT_ITERATIONS {
        let m = all_moments(spec, theta_0, &theta);
        let mut change: f64 = 0.0;
        for j in 0..n {
            let target = clamp(m[j] / k[j]);
            let next = clamp(theta[j] + omega * (target - theta[j]));
            change = change.max((next - theta[j]).abs());
            theta[j] = next;
        }
        if change > last_change {
            omega *= 0.7;
        }
        last_change = change;
        if change < 1e-15 {
            break;
        }
    }
    let (ok, _) = done(&theta);
    if ok {
        return Ok(finish(theta_0, theta, limit));
    }

    // Joint-by-joint sweeps, each an exact 1D solve.
    let mut last = Vec::new();
    for _ in 0..SWEEP_ITERATIONS {
        for j in 0..n {
            let f = |t: f64| {
                let mut trial = theta.clone();
                trial[j] = t;
                all_moments(spec, theta_0, &trial)[j] - k[j] * t
            };
            theta[j] = if f(limit) >= 0.0 {
                limit
            } else if f(-limit) <= 0.0 {
                -limit
            } else {
                brent(f, -limit, limit, Tolerance::default())?
            };
        }
        let (ok, r) = done(&theta);
        if ok {
            return Ok(finish(theta_0, theta, limit));
        }
        last = r;
    }
    Err(Error::NotConverged {
        iterations: FIXED_POINT_ITERATIONS + SWEEP_ITERATIONS,
        max_residual: last.iter().cloned().fold(0.0, f64::max),
        residuals: last,
    })
}

fn finish(theta_0: f64, joint_angles: Vec<f64>, limit: f64) -> RestState {
    let saturated = joint_angles.iter().map(|t| t.abs() == limit).collect();
    RestState {
        theta_0,
        joint_angles,
        saturated,
    }
}
