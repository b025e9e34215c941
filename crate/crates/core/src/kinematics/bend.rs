//! Single-cable bending: spread a cable shortening over the joints.
//!
//! Unsaturated joints keep a fixed angle ratio `ρ = k_p^(e−3)` between
//! neighbours (base to tip), where `e` is the torque exponent. A single
//! scale factor `c` sets the angles `δ_i = min(c·ρ^(i−1), limit)`; it is
//! found so that the chord shortenings add up to the commanded length.
//! Shortenings are then booked in integer quanta so the total is exact.

use nalgebra::{Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use super::chord::{angle_from_chord, chord_from_angle};
use super::frames::{JointConfiguration, JointState};
use crate::error::{Error, Result};
use crate::manipulator::{cable_chord, Cable, ManipulatorSpec};
use crate::roots::{brent, Tolerance};

/// Bookkeeping unit for cable lengths (mm).
pub const QUANTUM: f64 = 1e-12;

pub fn to_quanta(mm: f64) -> i64 {
    (mm / QUANTUM).round() as i64
}

pub fn from_quanta(q: i64) -> f64 {
    q as f64 * QUANTUM
}

/// Rotation axis that tilts the local `x` axis toward direction `toward`.
pub fn bend_axis_toward(toward: &Vector3<f64>) -> Vector3<f64> {
    Vector3::x().cross(toward).normalize()
}

pub fn bend_axis(spec: &ManipulatorSpec, cable: Cable) -> Vector3<f64> {
    bend_axis_toward(&spec.cable_direction(cable))
}

/// Ratio of consecutive joint-angle increments, base to tip.
pub fn angle_ratio(spec: &ManipulatorSpec) -> f64 {
    spec.k_p.powf(spec.torque_exponent - 3.0)
}

fn weights(spec: &ManipulatorSpec) -> Vec<f64> {
    let rho = angle_ratio(spec);
    (0..spec.joints()).map(|i| rho.powi(i as i32)).collect()
}

/// Share of a small total shortening taken by each joint. Sums to 1.
pub fn bend_portions(spec: &ManipulatorSpec) -> Vec<f64> {
    let half = 0.5 * spec.joint_limit;
    let raw: Vec<f64> = weights(spec)
        .iter()
        .enumerate()
        .map(|(i, w)| spec.sections[i].hole_radius * half.cos() * w)
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / total).collect()
}

/// Outcome of distributing one shortening command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BendDistribution {
    /// Rotation axis shared by all joints (local frame).
    pub axis: Vector3<f64>,
    pub requested_quanta: i64,
    pub shortening_quanta: Vec<i64>,
    pub budget_quanta: Vec<i64>,
    /// Part of the command no joint could absorb.
    pub remainder_quanta: i64,
    /// Rotation of each joint (radians).
    pub angles: Vec<f64>,
    /// Hole-to-hole length of the driven cable across each joint after bending.
    pub chords: Vec<f64>,
    pub saturated: Vec<bool>,
}

impl BendDistribution {
    pub fn shortenings(&self) -> Vec<f64> {
        self.shortening_quanta.iter().map(|&q| from_quanta(q)).collect()
    }

    pub fn total_quanta(&self) -> i64 {
        self.shortening_quanta.iter().sum()
    }

    pub fn total_budget_quanta(&self) -> i64 {
        self.budget_quanta.iter().sum()
    }

    pub fn remainder(&self) -> f64 {
        from_quanta(self.remainder_quanta)
    }

    pub fn fully_saturated(&self) -> bool {
        self.saturated.iter().all(|&s| s)
    }

    pub fn rotation(&self, joint_index: usize) -> Rotation3<f64> {
        self.joint_state(joint_index).rotation()
    }

    fn joint_state(&self, i: usize) -> JointState {
        JointState {
            bend_angle: self.angles[i],
            rotation_axis: self.axis,
            saturated: self.saturated[i],
        }
    }

    pub fn configuration(&self) -> JointConfiguration {
        JointConfiguration {
            joints: (0..self.angles.len()).map(|i| self.joint_state(i)).collect(),
        }
    }
}

/// Chord of the measured cable across joint `i` (0-based) as a function of
/// the bend angle, plus its inverse.
trait ChordModel {
    fn chord(&self, i: usize, delta: f64) -> f64;
    fn angle(&self, i: usize, chord: f64) -> Result<f64>;
}

/// Bending straight toward the measured cable: closed-form chord.
struct Facing<'a> {
    spec: &'a ManipulatorSpec,
}

impl ChordModel for Facing<'_> {
    fn chord(&self, i: usize, delta: f64) -> f64 {
        let limit = self.spec.joint_limit;
        chord_from_angle(self.spec.sections[i].hole_radius, limit - delta)
    }

    fn angle(&self, i: usize, chord: f64) -> Result<f64> {
        let open = angle_from_chord(self.spec.sections[i].hole_radius, chord)?;
        Ok((self.spec.joint_limit - open).max(0.0))
    }
}

/// Bending along an arbitrary axis, measured on one cable.
struct Oblique<'a> {
    spec: &'a ManipulatorSpec,
    cable: Cable,
    axis: Unit<Vector3<f64>>,
}

impl ChordModel for Oblique<'_> {
    fn chord(&self, i: usize, delta: f64) -> f64 {
        let rot = Rotation3::from_axis_angle(&self.axis, delta);
        cable_chord(self.spec, i + 1, self.cable, &rot)
    }

    fn angle(&self, i: usize, chord: f64) -> Result<f64> {
        let rest = self.chord(i, 0.0);
        if chord >= rest {
            return Ok(0.0);
        }
        let limit = self.spec.joint_limit;
        let at_limit = self.chord(i, limit);
        if chord <= at_limit {
            return Ok(limit);
        }
        brent(|d| self.chord(i, d) - chord, 0.0, limit, Tolerance::default())
    }
}

/// Distribute a shortening `d_mm` of `cable` over all joints.
pub fn distribute_bend(spec: &ManipulatorSpec, cable: Cable, d_mm: f64) -> Result<BendDistribution> {
    let axis = bend_axis(spec, cable);
    distribute_with(spec, axis, &Facing { spec }, d_mm)
}

/// Bend toward the midpoint direction of two cables so both shorten by
/// `d_mm`. With a mirror-symmetric layout the two cables stay equal.
pub fn distribute_pair_bend(
    spec: &ManipulatorSpec,
    first: Cable,
    second: Cable,
    d_mm: f64,
) -> Result<BendDistribution> {
    if first == second {
        return Err(Error::Domain("pair bend needs two distinct cables".into()));
    }
    let mid = spec.cable_direction(first) + spec.cable_direction(second);
    if mid.norm() < 1e-9 {
        return Err(Error::Degenerate("cables are diametrically opposed".into()));
    }
    let axis = bend_axis_toward(&mid.normalize());
    let model = Oblique {
        spec,
        cable: first,
        axis: Unit::new_normalize(axis),
    };
    distribute_with(spec, axis, &model, d_mm)
}

fn distribute_with(
    spec: &ManipulatorSpec,
    axis: Vector3<f64>,
    model: &dyn ChordModel,
    d_mm: f64,
) -> Result<BendDistribution> {
    if !(d_mm >= 0.0) || !d_mm.is_finite() {
        return Err(Error::Domain(format!("shortening must be finite and >= 0, got {d_mm}")));
    }
    let n = spec.joints();
    let limit = spec.joint_limit;
    let w = weights(spec);
    let rest: Vec<f64> = (0..n).map(|i| model.chord(i, 0.0)).collect();
    let shortening = |i: usize, delta: f64| rest[i] - model.chord(i, delta);
    let budget_quanta: Vec<i64> = (0..n)
        .map(|i| (shortening(i, limit) / QUANTUM).floor() as i64)
        .collect();
    let total_budget: i64 = budget_quanta.iter().sum();
    let requested = to_quanta(d_mm);

    let mut quanta = vec![0i64; n];
    let mut saturated = vec![false; n];
    let remainder;

    if requested >= total_budget {
        quanta.clone_from(&budget_quanta);
        saturated.iter_mut().for_each(|s| *s = true);
        remainder = requested - total_budget;
    } else if requested == 0 {
        remainder = 0;
    } else {
        let target = from_quanta(requested);
        let w_min = w.iter().cloned().fold(f64::INFINITY, f64::min);
        let c_hi = limit / w_min;
        let total_at = |c: f64| -> f64 { (0..n).map(|i| shortening(i, (c * w[i]).min(limit))).sum::<f64>() - target };
        let c = brent(total_at, 0.0, c_hi, Tolerance::default())?;
        for i in 0..n {
            if c * w[i] >= limit {
                saturated[i] = true;
                quanta[i] = budget_quanta[i];
            } else {
                let q = (shortening(i, c * w[i]) / QUANTUM).floor() as i64;
                quanta[i] = q.clamp(0, budget_quanta[i]);
            }
        }
        settle_deficit(&mut quanta, &budget_quanta, &saturated, &w, requested);
        remainder = 0;
    }

    let mut angles = vec![0.0; n];
    let mut chords = vec![0.0; n];
    for i in 0..n {
        if saturated[i] {
            angles[i] = limit;
            chords[i] = model.chord(i, limit);
        } else {
            let chord = (rest[i] - from_quanta(quanta[i])).max(0.0);
            angles[i] = model.angle(i, chord)?.min(limit);
            chords[i] = chord;
        }
    }

    Ok(BendDistribution {
        axis,
        requested_quanta: requested,
        shortening_quanta: quanta,
        budget_quanta,
        remainder_quanta: remainder,
        angles,
        chords,
        saturated,
    })
}

/// Push the rounding difference onto unsaturated joints, largest weight first.
fn settle_deficit(quanta: &mut [i64], budget: &[i64], saturated: &[bool], w: &[f64], requested: i64) {
    let mut order: Vec<usize> = (0..quanta.len()).filter(|&i| !saturated[i]).collect();
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
    let mut deficit = requested - quanta.iter().sum::<i64>();
    for &i in &order {
        if deficit == 0 {
            break;
        }
        let next = (quanta[i] + deficit).clamp(0, budget[i]);
        deficit -= next - quanta[i];
        quanta[i] = next;
    }
    // Saturated joints absorb nothing extra, so any leftover here would mean
    // the request exceeded the budget, which the caller has ruled out.
    debug_assert_eq!(deficit, 0);
}
