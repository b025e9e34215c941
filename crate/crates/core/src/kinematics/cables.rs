//! Cable path lengths and the stepwise actuation protocol.

use serde::{Deserialize, Serialize};

use super::bend::distribute_bend;
use super::frames::JointConfiguration;
use crate::error::{Error, Result};
use crate::manipulator::{cable_chord, Cable, ManipulatorSpec};

pub const PROTOCOL_STEPS: usize = 26;
pub const PROTOCOL_STEP_MM: f64 = 5.0;

/// Sum of hole-to-hole chords across all joints, in [`Cable`] order (mm).
pub fn passive_cable_lengths(spec: &ManipulatorSpec, config: &JointConfiguration) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (i, joint) in config.joints.iter().enumerate().take(spec.joints()) {
        let rot = joint.rotation();
        for c in Cable::ALL {
            out[c.index()] += cable_chord(spec, i + 1, c, &rot);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CableRole {
    Active,
    Passive,
}

/// One row of a cable schedule: how much a cable is pulled in at a step.
/// Negative values pay cable out.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRow {
    pub step: usize,
    pub cable: Cable,
    pub role: CableRole,
    pub delta_mm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepStep {
    /// 1-based.
    pub step: usize,
    /// Cumulative shortening of the active cable (mm).
    pub commanded_mm: f64,
    pub configuration: JointConfiguration,
    pub lengths: [f64; 3],
    /// Length each passive cable must be let out at this step (mm).
    pub relax: Vec<(Cable, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub active: Cable,
    pub step_mm: f64,
    pub steps: Vec<SweepStep>,
}

impl Sweep {
    pub fn schedule(&self) -> Vec<ScheduleRow> {
        let mut rows = Vec::with_capacity(self.steps.len() * 3);
        for s in &self.steps {
            rows.push(ScheduleRow {
                step: s.step,
                cable: self.active,
                role: CableRole::Active,
                delta_mm: self.step_mm,
            });
            for &(cable, relax) in &s.relax {
                rows.push(ScheduleRow {
                    step: s.step,
                    cable,
                    role: CableRole::Passive,
                    delta_mm: -relax,
                });
            }
        }
        rows
    }
}

/// Shorten `active` by `step_mm` per step and track how far the other two
/// cables must be let out.
pub fn sweep(spec: &ManipulatorSpec, active: Cable, steps: usize, step_mm: f64) -> Result<Sweep> {
    if steps == 0 {
        return Err(Error::Domain("sweep needs at least one step".into()));
    }
    if !(step_mm > 0.0) || !step_mm.is_finite() {
        return Err(Error::Domain(format!("step length must be > 0, got {step_mm}")));
    }
    let mut previous = passive_cable_lengths(spec, &JointConfiguration::straight(spec.joints()));
    let mut out = Vec::with_capacity(steps);
    for step in 1..=steps {
        let commanded = step as f64 * step_mm;
        let configuration = distribute_bend(spec, active, commanded)?.configuration();
        let lengths = passive_cable_lengths(spec, &configuration);
        let relax = active
            .others()
            .iter()
            .map(|&c| (c, lengths[c.index()] - previous[c.index()]))
            .collect();
        previous = lengths;
        out.push(SweepStep {
            step,
            commanded_mm: commanded,
            configuration,
            lengths,
            relax,
        });
    }
    Ok(Sweep {
        active,
        step_mm,
        steps: out,
    })
}
