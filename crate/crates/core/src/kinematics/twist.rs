//! Two-cable twisting.
//!
//! The first cable bends the arm as in [`distribute_bend`]. The second cable
//! then rotates each joint that still has room about the line from the joint
//! centre through the first cable's proximal hole. That line passes through
//! the hole, so the first cable's chord does not change.

use nalgebra::{Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use super::bend::{distribute_bend, distribute_pair_bend, BendDistribution};
use super::frames::{JointConfiguration, JointState};
use crate::error::{Error, Result};
use crate::manipulator::{distal_hole, proximal_hole, Cable, ManipulatorSpec};
use crate::roots::{bisect_predicate, brent, Tolerance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwistMode {
    /// First cable bends, second cable twists.
    Sequential,
    /// Equal commands: both cables bend together toward their midpoint.
    Pair,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistResult {
    pub mode: TwistMode,
    pub first: BendDistribution,
    pub configuration: JointConfiguration,
    /// Joints `1..=m` (1-based) took part in the second stage.
    pub saturation_index: usize,
    /// Second-cable shortening assigned to each joint (mm).
    pub second_shortenings: Vec<f64>,
    /// Largest second-stage shortening each joint could take (mm).
    pub second_caps: Vec<f64>,
    /// Second-stage rotation about the twist axis (radians).
    pub twist_angles: Vec<f64>,
    /// Unabsorbed part of the second command (mm).
    pub remainder: f64,
}

/// Per-joint second-stage geometry.
struct TwistJoint {
    axis: Unit<Vector3<f64>>,
    /// First-stage rotation.
    r1: Rotation3<f64>,
    /// Second cable's distal hole after stage 1.
    v: Vector3<f64>,
    /// Second cable's proximal hole.
    b2: Vector3<f64>,
    cap_angle: f64,
}

impl TwistJoint {
    fn rotation(&self, delta: f64) -> Rotation3<f64> {
        Rotation3::from_axis_angle(&self.axis, delta) * self.r1
    }

    fn chord(&self, delta: f64) -> f64 {
        (Rotation3::from_axis_angle(&self.axis, delta) * self.v - self.b2).norm()
    }

    fn build(spec: &ManipulatorSpec, joint: usize, c1: Cable, c2: Cable, r1: Rotation3<f64>) -> Option<Self> {
        let s = spec.section(joint);
        let limit = spec.joint_limit;
        let b1 = proximal_hole(s.hole_radius, limit, &spec.cable_direction(c1));
        let b2 = proximal_hole(s.hole_radius, limit, &spec.cable_direction(c2));
        let v = r1 * distal_hole(s.hole_radius, limit, &spec.cable_direction(c2));
        let mut k = b1.normalize();
        // d(x²)/dδ at 0 is −2·b2·(k×v); pick the sign that shortens cable 2.
        let mut slope = b2.dot(&k.cross(&v));
        if slope < 0.0 {
            k = -k;
            slope = -slope;
        }
        if slope <= 1e-15 {
            return None;
        }
        let v_perp = v - k * k.dot(&v);
        let best = slope.atan2(b2.dot(&v_perp));
        let mut joint = TwistJoint {
            axis: Unit::new_unchecked(k),
            r1,
            v,
            b2,
            cap_angle: best,
        };
        let angle_at = |j: &TwistJoint, d: f64| j.rotation(d).angle();
        if angle_at(&joint, best) >= limit {
            joint.cap_angle = bisect_predicate(|d| angle_at(&joint, d) >= limit, 0.0, best, 1e-14);
            // The bisection returns the first point at or past the bound.
            while joint.cap_angle > 0.0 && angle_at(&joint, joint.cap_angle) > limit {
                joint.cap_angle = f64::from_bits(joint.cap_angle.to_bits() - 1);
            }
        }
        Some(joint)
    }
}

/// Shorten `cable1` by `d1` and then `cable2` by `d2` (mm).
pub fn apply_twist(
    spec: &ManipulatorSpec,
    (cable1, d1): (Cable, f64),
    (cable2, d2): (Cable, f64),
) -> Result<TwistResult> {
    if cable1 == cable2 {
        return Err(Error::Domain("twist needs two distinct cables".into()));
    }
    if !(d2 >= 0.0) || !d2.is_finite() {
        return Err(Error::Domain(format!(
            "second shortening must be finite and >= 0, got {d2}"
        )));
    }
    let n = spec.joints();

    if d1 == d2 && d1 > 0.0 {
        let pair = distribute_pair_bend(spec, cable1, cable2, d1)?;
        return Ok(TwistResult {
            mode: TwistMode::Pair,
            configuration: pair.configuration(),
            saturation_index: n,
            second_shortenings: pair.shortenings(),
            second_caps: pair
                .budget_quanta
                .iter()
                .map(|&q| super::bend::from_quanta(q))
                .collect(),
            twist_angles: vec![0.0; n],
            remainder: pair.remainder(),
            first: pair,
        });
    }

    let first = distribute_bend(spec, cable1, d1)?;
    let mut result = TwistResult {
        mode: TwistMode::Sequential,
        configuration: first.configuration(),
        saturation_index: saturation_index(&first.saturated),
        second_shortenings: vec![0.0; n],
        second_caps: vec![0.0; n],
        twist_angles: vec![0.0; n],
        remainder: 0.0,
        first,
    };
    if d2 == 0.0 {
        return Ok(result);
    }

    let m = result.saturation_index;
    let joints: Vec<Option<TwistJoint>> = (0..m)
        .map(|i| TwistJoint::build(spec, i + 1, cable1, cable2, result.first.rotation(i)))
        .collect();
    let rest: Vec<f64> = joints
        .iter()
        .map(|j| j.as_ref().map_or(0.0, |j| j.chord(0.0)))
        .collect();
    let caps: Vec<f64> = joints
        .iter()
        .zip(&rest)
        .map(|(j, r)| j.as_ref().map_or(0.0, |j| (r - j.chord(j.cap_angle)).max(0.0)))
        .collect();
    let portions: Vec<f64> = {
        let total: f64 = rest.iter().sum();
        rest.iter().map(|r| if total > 0.0 { r / total } else { 0.0 }).collect()
    };

    let (alloc, remainder) = water_fill(&portions, &caps, d2)?;
    for (i, joint) in joints.iter().enumerate() {
        let Some(joint) = joint else { continue };
        let a = alloc[i];
        let delta = if a <= 0.0 {
            0.0
        } else if a >= caps[i] {
            joint.cap_angle
        } else {
            let target = rest[i] - a;
            brent(|d| joint.chord(d) - target, 0.0, joint.cap_angle, Tolerance::default())?
        };
        let saturated = result.first.saturated[i] || (caps[i] > 0.0 && a >= caps[i]);
        result.configuration.joints[i] = JointState::from_rotation(&joint.rotation(delta), saturated);
        result.twist_angles[i] = delta;
        result.second_shortenings[i] = a;
    }
    result.second_caps[..m].copy_from_slice(&caps);
    result.remainder = remainder;
    Ok(result)
}

/// Smallest `m` such that every joint after `m` (1-based) is saturated.
pub fn saturation_index(saturated: &[bool]) -> usize {
    saturated.iter().rposition(|&s| !s).map_or(0, |i| i + 1)
}

/// Split `total` in proportion to `portions`, capping each share and
/// handing the overflow to the joints that still have room.
fn water_fill(portions: &[f64], caps: &[f64], total: f64) -> Result<(Vec<f64>, f64)> {
    let cap_sum: f64 = caps.iter().sum();
    if total >= cap_sum {
        return Ok((caps.to_vec(), total - cap_sum));
    }
    let share = |lambda: f64| -> Vec<f64> { portions.iter().zip(caps).map(|(p, c)| (lambda * p).min(*c)).collect() };
    let hi = portions
        .iter()
        .zip(caps)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, c)| c / p)
        .fold(0.0, f64::max);
    let lambda = brent(|l| share(l).iter().sum::<f64>() - total, 0.0, hi, Tolerance::default())?;
    Ok((share(lambda), 0.0))
}
