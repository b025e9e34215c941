//! Scripted grasping strategies and their playback into shapes.
//!
//! A script is a list of keyframes: where the arm base sits, which cables
//! are pulled and by how much, and how far the tip gripper is open. Scripts
//! are plain JSON files under `strategies/` and are bundled at build time.

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::frames::{chain, planarity_residual, BackboneShape, Frame};
use crate::kinematics::{actuate, ActuationCommand};
use crate::manipulator::ManipulatorSpec;
use crate::statics::{solve_rest_shape, RestState};

const BUNDLED: [(&str, &str); 9] = [
    ("tip_pinch", include_str!("../strategies/tip_pinch.json")),
    ("tip_grip", include_str!("../strategies/tip_grip.json")),
    (
        "distal_wrap_vertical",
        include_str!("../strategies/distal_wrap_vertical.json"),
    ),
    (
        "twist_wrap_oblique",
        include_str!("../strategies/twist_wrap_oblique.json"),
    ),
    (
        "twist_wrap_horizontal",
        include_str!("../strategies/twist_wrap_horizontal.json"),
    ),
    ("trunk_kick", include_str!("../strategies/trunk_kick.json")),
    ("sweep", include_str!("../strategies/sweep.json")),
    (
        "distal_flip_transport",
        include_str!("../strategies/distal_flip_transport.json"),
    ),
    (
        "release_propagation",
        include_str!("../strategies/release_propagation.json"),
    ),
];

/// Bending-class shapes must stay within this fraction of arm length of a plane.
pub const PLANAR_TOLERANCE: f64 = 1e-6;
/// Twisting-class scripts must leave the plane by more than this fraction.
pub const TWIST_THRESHOLD: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyClass {
    Bending,
    Twisting,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Reaching,
    Prehension,
    Transport,
    Release,
}

/// Pose of the arm base, supplied by the rigid carrier arm.
///
/// The base axis is yawed about world `z`, tilted `tilt_deg` below
/// horizontal, then rolled about itself.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasePose {
    #[serde(default)]
    pub position_mm: [f64; 3],
    #[serde(default)]
    pub yaw_deg: f64,
    pub tilt_deg: f64,
    #[serde(default)]
    pub roll_deg: f64,
}

impl BasePose {
    pub fn tilted(tilt_deg: f64) -> Self {
        BasePose {
            position_mm: [0.0; 3],
            yaw_deg: 0.0,
            tilt_deg,
            roll_deg: 0.0,
        }
    }

    pub fn frame(&self) -> Frame {
        let yaw = Rotation3::from_axis_angle(&Vector3::z_axis(), self.yaw_deg.to_radians());
        let tilt = Rotation3::from_axis_angle(&Vector3::y_axis(), self.tilt_deg.to_radians());
        let roll = Rotation3::from_axis_angle(&Vector3::x_axis(), self.roll_deg.to_radians());
        Frame::new(*(yaw * tilt * roll).matrix(), Vector3::from(self.position_mm))
    }

    /// World-horizontal sag axis expressed in the base frame.
    fn sag_axis(&self) -> Unit<Vector3<f64>> {
        let roll = Rotation3::from_axis_angle(&Vector3::x_axis(), -self.roll_deg.to_radians());
        Unit::new_normalize(roll * Vector3::y())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Keyframe {
    pub phase: Phase,
    pub base_pose: BasePose,
    pub command: ActuationCommand,
    /// 0 = closed, 1 = fully open.
    pub aperture: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyScript {
    pub name: String,
    pub number: u8,
    pub class: StrategyClass,
    pub description: String,
    /// Range of object sizes the strategy suits (mm).
    pub object_size_mm: [f64; 2],
    pub keyframes: Vec<Keyframe>,
}

impl StrategyScript {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: StrategyScript = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.keyframes.is_empty() {
            return Err(Error::InvalidParams(format!(
                "strategy '{}' has no keyframes",
                self.name
            )));
        }
        for (i, k) in self.keyframes.iter().enumerate() {
            if !(0.0..=1.0).contains(&k.aperture) {
                return Err(Error::InvalidParams(format!(
                    "strategy '{}' keyframe {i}: aperture {} outside [0, 1]",
                    self.name, k.aperture
                )));
            }
            k.command.validate()?;
        }
        Ok(())
    }
}

pub fn strategy_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|(n, _)| *n).collect()
}

pub fn get_strategy(name: &str) -> Result<StrategyScript> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::UnknownStrategy {
            name: name.to_string(),
            available: strategy_names().join(", "),
        })?;
    StrategyScript::from_json(text)
}

pub fn all_strategies() -> Result<Vec<StrategyScript>> {
    strategy_names().into_iter().map(get_strategy).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaybackFrame {
    pub index: usize,
    pub phase: Phase,
    pub base_pose: BasePose,
    pub aperture: f64,
    /// World frame.
    pub shape: BackboneShape,
    pub saturated_joints: usize,
    /// Largest distance of a backbone point from its best-fit plane (mm).
    pub planarity: f64,
}

/// World-frame shape for one keyframe: rest sag under gravity for the
/// keyframe's tilt, then the cable command, placed at the base pose.
pub fn keyframe_shape(spec: &ManipulatorSpec, keyframe: &Keyframe, rest: &RestState) -> Result<(BackboneShape, usize)> {
    let config = actuate(spec, &keyframe.command)?;
    let sag_axis = keyframe.base_pose.sag_axis();
    let rotations: Vec<Matrix3<f64>> = config
        .joints
        .iter()
        .zip(&rest.joint_angles)
        .map(|(j, &angle)| {
            let act = *j.rotation().matrix();
            if angle == 0.0 {
                act
            } else {
                Rotation3::from_axis_angle(&sag_axis, angle).matrix() * act
            }
        })
        .collect();
    let shape = chain(spec, &keyframe.base_pose.frame(), &rotations);
    Ok((shape, config.saturated_count()))
}

pub fn playback(script: &StrategyScript, spec: &ManipulatorSpec) -> Result<Vec<PlaybackFrame>> {
    script.validate()?;
    let mut out = Vec::with_capacity(script.keyframes.len());
    let mut cached: Option<(f64, RestState)> = None;
    for (index, k) in script.keyframes.iter().enumerate() {
        let tilt = k.base_pose.tilt_deg;
        let rest = match &cached {
            Some((t, r)) if *t == tilt => r.clone(),
            _ => {
                let r = solve_rest_shape(spec, tilt.to_radians())?;
                cached = Some((tilt, r.clone()));
                r
            }
        };
        let (shape, saturated_joints) = keyframe_shape(spec, k, &rest)?;
        let planarity = planarity_residual(&shape.points());
        out.push(PlaybackFrame {
            index,
            phase: k.phase,
            base_pose: k.base_pose,
            aperture: k.aperture,
            shape,
            saturated_joints,
            planarity,
        });
    }
    Ok(out)
}

/// Saturated-joint counts of the keyframes in `phase`, in order.
pub fn phase_saturation(frames: &[PlaybackFrame], phase: Phase) -> Vec<usize> {
    frames
        .iter()
        .filter(|f| f.phase == phase)
        .map(|f| f.saturated_joints)
        .collect()
}
