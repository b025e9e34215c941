//! Cable actuation to joint rotations to backbone shape.

pub mod bend;
pub mod cables;
pub mod chord;
pub mod frames;
pub mod twist;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

pub use bend::{bend_portions, distribute_bend, distribute_pair_bend, BendDistribution};
pub use cables::{passive_cable_lengths, sweep, Sweep};
pub use chord::{angle_from_chord, chord_from_angle};
pub use frames::{forward_shape, BackboneShape, Frame, JointConfiguration, JointState};
pub use twist::{apply_twist, TwistResult};

use crate::error::{Error, Result};
use crate::manipulator::{Cable, ManipulatorSpec};
use crate::statics::{base_frame, RestState};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CableShortening {
    pub cable: Cable,
    /// Millimetres pulled in, `>= 0`.
    pub mm: f64,
}

/// One cable, or two cables applied in order (bend then twist).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActuationCommand {
    pub primary: CableShortening,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secondary: Option<CableShortening>,
}

impl ActuationCommand {
    pub fn none() -> Self {
        ActuationCommand::bend(Cable::Dorsal, 0.0)
    }

    pub fn bend(cable: Cable, mm: f64) -> Self {
        ActuationCommand {
            primary: CableShortening { cable, mm },
            secondary: None,
        }
    }

    pub fn twist(cable1: Cable, d1: f64, cable2: Cable, d2: f64) -> Self {
        ActuationCommand {
            primary: CableShortening { cable: cable1, mm: d1 },
            secondary: Some(CableShortening { cable: cable2, mm: d2 }),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.primary.mm == 0.0 && self.secondary.is_none_or(|s| s.mm == 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |s: &CableShortening| {
            if !(s.mm >= 0.0) || !s.mm.is_finite() {
                return Err(Error::Domain(format!(
                    "shortening of {} must be finite and >= 0, got {}",
                    s.cable, s.mm
                )));
            }
            Ok(())
        };
        check(&self.primary)?;
        if let Some(s) = &self.secondary {
            check(s)?;
            if s.cable == self.primary.cable {
                return Err(Error::Domain("the two cables of a twist must differ".into()));
            }
        }
        Ok(())
    }
}

/// Joint rotations produced by a command on the straight arm.
pub fn actuate(spec: &ManipulatorSpec, command: &ActuationCommand) -> Result<JointConfiguration> {
    command.validate()?;
    match command.secondary {
        None => Ok(distribute_bend(spec, command.primary.cable, command.primary.mm)?.configuration()),
        Some(s) => Ok(apply_twist(spec, (command.primary.cable, command.primary.mm), (s.cable, s.mm))?.configuration),
    }
}

/// World-frame shape after applying `command` on top of a rest state.
/// Each joint first takes its rest sag, then the actuation rotation in the
/// sagged frame.
pub fn actuate_from_rest(
    spec: &ManipulatorSpec,
    rest: &RestState,
    command: &ActuationCommand,
) -> Result<BackboneShape> {
    if rest.joint_angles.len() != spec.joints() {
        return Err(Error::Mismatch(format!(
            "rest state has {} joints, spec has {}",
            rest.joint_angles.len(),
            spec.joints()
        )));
    }
    let actuated = actuate(spec, command)?;
    let rest_rot = rest.rotations();
    let rotations: Vec<Matrix3<f64>> = actuated
        .joints
        .iter()
        .zip(&rest_rot)
        .zip(&rest.joint_angles)
        .map(|((j, r), &angle)| {
            let act = *j.rotation().matrix();
            if angle == 0.0 {
                act
            } else {
                r * act
            }
        })
        .collect();
    Ok(frames::chain(spec, &base_frame(rest.theta_0), &rotations))
}
