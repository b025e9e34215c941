//! Physical description of the manipulator built from a discrete profile.
//!
//! Each profile quadrilateral becomes a rigid link: a conical frustum whose
//! axis is the inner-contour edge `DC` and whose end radii are the cut
//! widths `|AD|` and `|BC|`. Between consecutive links sits a short elastic
//! joint. The link end faces open a wedge of `joint_limit` at rest; closing
//! that wedge on one side bends the joint.

use std::f64::consts::{FRAC_PI_6, PI};

use nalgebra::{Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spiral::DiscreteProfile;

pub const DEFAULT_JOINT_FRACTION: f64 = 0.15;
pub const DEFAULT_HOLE_FRACTION: f64 = 0.8;
pub const DEFAULT_TORQUE_EXPONENT: f64 = -2.5;

/// TPU 95A.
pub const DEFAULT_DENSITY: f64 = 1.22;
pub const DEFAULT_YOUNGS_MODULUS: f64 = 16.9;
pub const STANDARD_GRAVITY: f64 = 9.81;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialConstants {
    /// Young's modulus (MPa, i.e. N/mm²).
    pub youngs_modulus: f64,
    /// Mass density (g/cm³).
    pub density: f64,
    /// Gravitational acceleration (m/s²).
    pub gravity: f64,
}

impl Default for MaterialConstants {
    fn default() -> Self {
        MaterialConstants {
            youngs_modulus: DEFAULT_YOUNGS_MODULUS,
            density: DEFAULT_DENSITY,
            gravity: STANDARD_GRAVITY,
        }
    }
}

/// The three actuation cables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cable {
    Dorsal,
    VentralLeft,
    VentralRight,
}

impl Cable {
    pub const ALL: [Cable; 3] = [Cable::Dorsal, Cable::VentralLeft, Cable::VentralRight];

    pub fn index(self) -> usize {
        match self {
            Cable::Dorsal => 0,
            Cable::VentralLeft => 1,
            Cable::VentralRight => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Cable::Dorsal => "dorsal",
            Cable::VentralLeft => "ventral_left",
            Cable::VentralRight => "ventral_right",
        }
    }

    /// The other two cables, in layout order.
    pub fn others(self) -> [Cable; 2] {
        let i = self.index();
        [Cable::ALL[(i + 1) % 3], Cable::ALL[(i + 2) % 3]]
    }
}

impl std::str::FromStr for Cable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dorsal" => Ok(Cable::Dorsal),
            "ventral_left" => Ok(Cable::VentralLeft),
            "ventral_right" => Ok(Cable::VentralRight),
            other => Err(Error::Domain(format!(
                "unknown cable '{other}' (expected dorsal, ventral_left or ventral_right)"
            ))),
        }
    }
}

impl std::fmt::Display for Cable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionSpec {
    /// 1 = base.
    pub index: usize,
    /// Proximal end radius (mm).
    pub link_radius: f64,
    /// Distal end radius (mm).
    pub distal_radius: f64,
    /// Axial length (mm).
    pub link_length: f64,
    /// Radius of the elastic joint on the distal side (mm).
    pub joint_radius: f64,
    pub joint_length: f64,
    /// Distance of the cable holes from the joint centre (mm).
    pub hole_radius: f64,
    /// Grams.
    pub mass: f64,
    /// Centroid position along the axis as a fraction of the link length,
    /// measured from the proximal end.
    pub cg_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManipulatorSpec {
    /// Base to tip.
    pub sections: Vec<SectionSpec>,
    pub material: MaterialConstants,
    /// Per-joint rotation limit (radians); also the rest wedge angle.
    pub joint_limit: f64,
    /// Angular hole positions on the joint rim, in [`Cable`] order (radians).
    pub cable_layout: [f64; 3],
    pub k_p: f64,
    /// Exponent `e` in `M_i = k_p^e · M_{i-1}` used to distribute bending.
    #[serde(default = "default_torque_exponent")]
    pub torque_exponent: f64,
}

fn default_torque_exponent() -> f64 {
    DEFAULT_TORQUE_EXPONENT
}

/// Dorsal at 90°, ventral pair at 210° and 330°.
pub fn default_cable_layout() -> [f64; 3] {
    [PI / 2.0, 7.0 * PI / 6.0, 11.0 * PI / 6.0]
}

#[derive(Clone, Copy, Debug)]
pub struct BuildOptions {
    pub joint_fraction: f64,
    pub hole_fraction: f64,
    pub joint_limit: f64,
    pub torque_exponent: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            joint_fraction: DEFAULT_JOINT_FRACTION,
            hole_fraction: DEFAULT_HOLE_FRACTION,
            joint_limit: FRAC_PI_6,
            torque_exponent: DEFAULT_TORQUE_EXPONENT,
        }
    }
}

/// Volume of a conical frustum.
pub fn frustum_volume(length: f64, r0: f64, r1: f64) -> f64 {
    PI * length / 3.0 * (r0 * r0 + r0 * r1 + r1 * r1)
}

/// Centroid of a solid frustum as a fraction of its length from the `r0` end.
pub fn frustum_centroid_fraction(r0: f64, r1: f64) -> f64 {
    (r0 * r0 + 2.0 * r0 * r1 + 3.0 * r1 * r1) / (4.0 * (r0 * r0 + r0 * r1 + r1 * r1))
}

pub fn build_spec(
    profile: &DiscreteProfile,
    material: MaterialConstants,
    joint_fraction: f64,
) -> Result<ManipulatorSpec> {
    build_spec_with(
        profile,
        material,
        &BuildOptions {
            joint_fraction,
            ..BuildOptions::default()
        },
    )
}

pub fn build_spec_with(
    profile: &DiscreteProfile,
    material: MaterialConstants,
    opts: &BuildOptions,
) -> Result<ManipulatorSpec> {
    if profile.sections.len() < 2 {
        return Err(Error::InvalidParams(
            "profile needs at least two sections to form a joint".into(),
        ));
    }
    if !(opts.joint_fraction > 0.0 && opts.joint_fraction < 0.5) {
        return Err(Error::InvalidParams(format!(
            "joint_fraction must lie in (0, 0.5), got {}",
            opts.joint_fraction
        )));
    }
    if !(opts.hole_fraction > 0.0 && opts.hole_fraction <= 1.0) {
        return Err(Error::InvalidParams("hole_fraction must lie in (0, 1]".into()));
    }
    if !(material.youngs_modulus > 0.0 && material.density > 0.0) {
        return Err(Error::InvalidParams("E and density must be positive".into()));
    }
    if !(opts.joint_limit > 0.0 && opts.joint_limit < PI) {
        return Err(Error::InvalidParams("joint_limit must lie in (0, π)".into()));
    }

    let sections = (0..profile.sections.len())
        .map(|s| {
            let [_, bc, cd, da] = profile.edge_lengths(s);
            let (r0, r1, length) = (da, bc, cd);
            // g/cm³ → g/mm³
            let mass = material.density * 1e-3 * frustum_volume(length, r0, r1);
            SectionSpec {
                index: s + 1,
                link_radius: r0,
                distal_radius: r1,
                link_length: length,
                joint_radius: opts.joint_fraction * r1,
                joint_length: opts.joint_fraction * length,
                hole_radius: opts.hole_fraction * r1,
                mass,
                cg_fraction: frustum_centroid_fraction(r0, r1),
            }
        })
        .collect();

    Ok(ManipulatorSpec {
        sections,
        material,
        joint_limit: opts.joint_limit,
        cable_layout: default_cable_layout(),
        k_p: profile.k_p,
        torque_exponent: opts.torque_exponent,
    })
}

impl ManipulatorSpec {
    /// Number of joints `N`.
    pub fn joints(&self) -> usize {
        self.sections.len() - 1
    }

    /// Section record for 1-based `index`.
    pub fn section(&self, index: usize) -> &SectionSpec {
        &self.sections[index - 1]
    }

    pub fn check_joint(&self, joint: usize) -> Result<()> {
        if joint == 0 || joint > self.joints() {
            return Err(Error::IndexOutOfRange {
                index: joint,
                max: self.joints(),
            });
        }
        Ok(())
    }

    pub fn total_mass(&self) -> f64 {
        self.sections.iter().map(|s| s.mass).sum()
    }

    pub fn arm_length(&self) -> f64 {
        self.sections.iter().map(|s| s.link_length).sum()
    }

    /// Unit direction of cable `c` in the joint cross-section (local `y–z`).
    pub fn cable_direction(&self, c: Cable) -> Vector3<f64> {
        let phi = self.cable_layout[c.index()];
        Vector3::new(0.0, phi.cos(), phi.sin())
    }

    pub fn validate(&self) -> Result<()> {
        if self.sections.len() < 2 {
            return Err(Error::InvalidParams("spec needs at least two sections".into()));
        }
        for (i, s) in self.sections.iter().enumerate() {
            let ok = [
                s.link_radius,
                s.distal_radius,
                s.link_length,
                s.joint_radius,
                s.joint_length,
                s.hole_radius,
                s.mass,
            ]
            .iter()
            .all(|v| v.is_finite() && *v >= 0.0);
            if !ok || s.link_length <= 0.0 || s.joint_length <= 0.0 {
                return Err(Error::InvalidParams(format!("section {} has invalid geometry", i + 1)));
            }
        }
        if !(self.joint_limit > 0.0 && self.joint_limit < PI) {
            return Err(Error::InvalidParams("joint_limit must lie in (0, π)".into()));
        }
        Ok(())
    }
}

/// `EI/L` of joint `joint` (N·mm/rad).
pub fn bending_stiffness(spec: &ManipulatorSpec, joint: usize) -> Result<f64> {
    spec.check_joint(joint)?;
    let s = spec.section(joint);
    let second_moment = PI / 4.0 * s.joint_radius.powi(4);
    Ok(spec.material.youngs_modulus * second_moment / s.joint_length)
}

/// Hole and joint-centre positions around one joint, in the proximal link's
/// joint frame (origin at the joint centre `E`, `x` along the proximal axis).
///
/// `A`/`B` are the cable's entry and exit holes on the proximal link, `C`/`D`
/// those on the distal link, `G` the distal hole of the next cable in the
/// layout.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointGeometry {
    pub a: Vector3<f64>,
    pub b: Vector3<f64>,
    pub c: Vector3<f64>,
    pub d: Vector3<f64>,
    pub e: Vector3<f64>,
    pub g: Vector3<f64>,
}

/// Proximal-face hole of a cable at `radius`, rest wedge `limit`.
pub(crate) fn proximal_hole(radius: f64, limit: f64, dir: &Vector3<f64>) -> Vector3<f64> {
    let half = 0.5 * limit;
    radius * (dir * half.cos() - Vector3::x() * half.sin())
}

/// Distal-face hole before the joint rotates.
pub(crate) fn distal_hole(radius: f64, limit: f64, dir: &Vector3<f64>) -> Vector3<f64> {
    let half = 0.5 * limit;
    radius * (dir * half.cos() + Vector3::x() * half.sin())
}

pub fn joint_geometry(
    spec: &ManipulatorSpec,
    joint: usize,
    cable: Cable,
    rotation: &Rotation3<f64>,
) -> Result<JointGeometry> {
    spec.check_joint(joint)?;
    let s = spec.section(joint);
    let next = spec.section(joint + 1);
    let dir = spec.cable_direction(cable);
    let other = spec.cable_direction(cable.others()[0]);
    let b = proximal_hole(s.hole_radius, spec.joint_limit, &dir);
    let c = rotation * distal_hole(s.hole_radius, spec.joint_limit, &dir);
    Ok(JointGeometry {
        a: b - Vector3::x() * s.link_length,
        b,
        c,
        d: c + rotation * (Vector3::x() * next.link_length),
        e: Vector3::zeros(),
        g: rotation * distal_hole(s.hole_radius, spec.joint_limit, &other),
    })
}

/// Hole-to-hole distance across a joint for a given distal rotation.
pub fn cable_chord(spec: &ManipulatorSpec, joint: usize, cable: Cable, rotation: &Rotation3<f64>) -> f64 {
    let s = spec.section(joint);
    let dir = spec.cable_direction(cable);
    let b = proximal_hole(s.hole_radius, spec.joint_limit, &dir);
    let c = rotation * distal_hole(s.hole_radius, spec.joint_limit, &dir);
    (c - b).norm()
}

/// Chord across `joint` for cable `c` in the straight configuration.
pub fn rest_chord(spec: &ManipulatorSpec, joint: usize, cable: Cable) -> Result<f64> {
    spec.check_joint(joint)?;
    Ok(cable_chord(spec, joint, cable, &Rotation3::identity()))
}
