//! Logarithmic-spiral profile design.
//!
//! The manipulator outline is the band between an outer contour
//! `r = a·e^{bθ}` and a copy of it scaled by `k`. Compactness fixes `k` as a
//! function of `b`, and the gripper/body grasp-range overlap ratio `m` then
//! fixes `b`. The band is cut every `Δθ` into quadrilateral sections that
//! are all similar to each other with ratio `k_p = e^{-bΔθ}`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_6, PI, TAU};

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::{self, Tolerance};

/// Slack allowed when checking that a polar angle lies inside the profile
/// range, and that the range is an integer number of steps.
const ANGLE_EPS: f64 = 1e-9;

/// Bracket for the growth-rate solve.
const B_BRACKET: (f64, f64) = (1e-4, 2.0);

/// Number of samples used by [`compactness_residual`].
pub const RESIDUAL_GRID: usize = 1000;

/// Shape parameters of a discretised logarithmic spiral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpiralParams {
    /// Scale factor in millimetres per spiral unit.
    pub a: f64,
    /// Growth rate.
    pub b: f64,
    /// Contour scaling factor, `0 < k < 1`.
    pub k: f64,
    /// Discretisation step (radians).
    pub delta_theta: f64,
    pub theta_start: f64,
    pub theta_end: f64,
}

impl SpiralParams {
    pub fn new(a: f64, b: f64, k: f64, delta_theta: f64, theta_start: f64, theta_end: f64) -> Result<Self> {
        let p = SpiralParams {
            a,
            b,
            k,
            delta_theta,
            theta_start,
            theta_end,
        };
        p.validate()?;
        Ok(p)
    }

    /// Trunk profile: `θ ∈ (π/2, 7π/2)` in steps of `π/6`.
    pub fn trunk(a: f64, b: f64, k: f64) -> Result<Self> {
        Self::new(a, b, k, FRAC_PI_6, FRAC_PI_2, 7.0 * FRAC_PI_2)
    }

    /// Finger profile for the tip gripper: golden-ratio growth `b = 0.618`,
    /// `Δθ = π/3`, one full turn, compact `k`.
    pub fn gripper(a: f64) -> Result<Self> {
        let b = 0.618;
        Self::new(a, b, compact_k(b), FRAC_PI_3, FRAC_PI_2, FRAC_PI_2 + TAU)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.a,
            self.b,
            self.k,
            self.delta_theta,
            self.theta_start,
            self.theta_end,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParams("non-finite spiral parameter".into()));
        }
        if self.a <= 0.0 {
            return Err(Error::InvalidParams(format!("a must be > 0, got {}", self.a)));
        }
        if self.b <= 0.0 {
            return Err(Error::InvalidParams(format!("b must be > 0, got {}", self.b)));
        }
        if !(self.k > 0.0 && self.k < 1.0) {
            return Err(Error::InvalidParams(format!("k must lie in (0, 1), got {}", self.k)));
        }
        if self.delta_theta <= 0.0 {
            return Err(Error::InvalidParams("delta_theta must be > 0".into()));
        }
        let steps = (self.theta_end - self.theta_start) / self.delta_theta;
        if steps < 1.0 - ANGLE_EPS || (steps - steps.round()).abs() > ANGLE_EPS {
            return Err(Error::InvalidParams(format!(
                "theta range is {steps} steps of delta_theta, expected a positive integer"
            )));
        }
        Ok(())
    }

    pub fn section_count(&self) -> usize {
        ((self.theta_end - self.theta_start) / self.delta_theta).round() as usize
    }

    /// Linear similarity ratio between adjacent sections, `e^{-bΔθ}`.
    pub fn k_p(&self) -> f64 {
        (-self.b * self.delta_theta).exp()
    }

    /// Polar angle of the `i`-th cut, counted from `theta_start`.
    fn cut(&self, i: usize) -> f64 {
        self.theta_start + i as f64 * self.delta_theta
    }
}

/// The compact contour scale for growth rate `b`: the scaled contour sits
/// midway between successive loops of the outer one.
pub fn compact_k(b: f64) -> f64 {
    0.5 + 0.5 * (-2.0 * PI * b).exp()
}

/// Outer-contour point without range checking.
fn outer(a: f64, b: f64, theta: f64) -> Vector2<f64> {
    let r = a * (b * theta).exp();
    Vector2::new(-r * theta.cos(), r * theta.sin())
}

/// Point on the outer contour, or on the `k`-scaled contour when `scaled`.
pub fn spiral_point(params: &SpiralParams, theta: f64, scaled: bool) -> Result<Vector2<f64>> {
    if !(theta >= params.theta_start - ANGLE_EPS && theta <= params.theta_end + ANGLE_EPS) {
        return Err(Error::Domain(format!(
            "theta {theta} outside [{}, {}]",
            params.theta_start, params.theta_end
        )));
    }
    let p = outer(params.a, params.b, theta);
    Ok(if scaled { p * params.k } else { p })
}

/// Inputs to the design solve.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DesignConstraints {
    /// Gripper-to-base graspable size ratio, `m > 1`.
    pub m: f64,
    /// Radius of the rigid arm's last link (mm).
    pub r_rigid: f64,
    /// Base radius of the soft body in spiral units. `None` takes the
    /// profile's own base section width at `a = 1`.
    pub r_soft: Option<f64>,
    pub delta_theta: f64,
    pub theta_start: f64,
    pub theta_end: f64,
}

impl DesignConstraints {
    pub fn trunk(m: f64, r_rigid: f64) -> Self {
        DesignConstraints {
            m,
            r_rigid,
            r_soft: None,
            delta_theta: FRAC_PI_6,
            theta_start: FRAC_PI_2,
            theta_end: 7.0 * FRAC_PI_2,
        }
    }
}

/// Residual of the grasp-overlap equation for growth rate `b`, with the
/// compactness relation substituted for `k`.
pub fn overlap_equation(b: f64, m: f64) -> f64 {
    let k = compact_k(b);
    ((-2.0 * PI * b).exp() + (-PI * b).exp()) / (2.0 * (1.0 - k)) - m
}

/// Solve `(a, b, k)` from the compactness, overlap and rigid-arm matching
/// constraints.
pub fn solve_design_parameters(c: &DesignConstraints) -> Result<SpiralParams> {
    if !(c.m > 1.0) {
        return Err(Error::InvalidParams(format!("m must be > 1, got {}", c.m)));
    }
    if !(c.r_rigid > 0.0) {
        return Err(Error::InvalidParams(format!("r_rigid must be > 0, got {}", c.r_rigid)));
    }
    let tol = Tolerance {
        x_abs: 1e-16,
        f_abs: 0.0,
        max_iter: 300,
    };
    let b = roots::brent(|b| overlap_equation(b, c.m), B_BRACKET.0, B_BRACKET.1, tol)?;
    let k = compact_k(b);
    let r_soft = match c.r_soft {
        Some(r) if r > 0.0 => r,
        Some(r) => return Err(Error::InvalidParams(format!("r_soft must be > 0, got {r}"))),
        None => (1.0 - k) * (b * c.theta_end).exp(),
    };
    SpiralParams::new(c.r_rigid / r_soft, b, k, c.delta_theta, c.theta_start, c.theta_end)
}

/// Largest deviation of the scaled contour from the midpoint of two
/// successive outer loops, over a uniform θ grid (mm).
pub fn compactness_residual(p: &SpiralParams) -> f64 {
    (0..RESIDUAL_GRID)
        .map(|i| {
            let theta = p.theta_start + (p.theta_end - p.theta_start) * i as f64 / (RESIDUAL_GRID - 1) as f64;
            let y_inside = p.a * (p.b * (theta - TAU)).exp() * (theta - TAU).sin();
            let y_outside = p.a * (p.b * theta).exp() * theta.sin();
            let y_k = p.k * y_outside;
            (y_k - 0.5 * (y_inside + y_outside)).abs()
        })
        .fold(0.0, f64::max)
}

/// Graspable-size bounds at the small end of the spiral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraspRange {
    /// Smallest object the curled body can enclose (mm).
    pub hj: f64,
    /// Gripper base width (mm).
    pub gh: f64,
    /// Largest object the gripper can hold, `m·GH` (mm).
    pub gripper_max: f64,
    /// `gripper_max − HJ`; positive means the two ranges overlap.
    pub overlap: f64,
}

/// Chord lengths across the inner loop (half and full turn from `theta_start`).
pub fn grasp_range(p: &SpiralParams, m: f64) -> GraspRange {
    let t = p.theta_start;
    let base = outer(p.a, p.b, t);
    let hj = (base - outer(p.a, p.b, t + PI)).norm();
    let gh = (base - outer(p.a, p.b, t + TAU)).norm();
    let gripper_max = m * gh;
    GraspRange {
        hj,
        gh,
        gripper_max,
        overlap: gripper_max - hj,
    }
}

/// One quadrilateral section cut from the spiral band, in millimetres.
///
/// `A`/`B` lie on the outer contour, `C`/`D` on the scaled one; `A` and `D`
/// share the proximal cut, `B` and `C` the distal cut.
pub type Quad = [[f64; 2]; 4];

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiscreteProfile {
    pub params: SpiralParams,
    pub k_p: f64,
    /// Base to tip.
    pub sections: Vec<Quad>,
}

pub fn discretize_profile(p: &SpiralParams) -> DiscreteProfile {
    let n = p.section_count();
    let sections = (0..n)
        .map(|j| {
            let hi = p.cut(n - j);
            let lo = p.cut(n - j - 1);
            let a = outer(p.a, p.b, hi);
            let b = outer(p.a, p.b, lo);
            let c = b * p.k;
            let d = a * p.k;
            [[a.x, a.y], [b.x, b.y], [c.x, c.y], [d.x, d.y]]
        })
        .collect();
    DiscreteProfile {
        params: *p,
        k_p: p.k_p(),
        sections,
    }
}

impl DiscreteProfile {
    pub fn vertex(&self, section: usize, corner: usize) -> Vector2<f64> {
        let v = self.sections[section][corner];
        Vector2::new(v[0], v[1])
    }

    /// Edge lengths `AB, BC, CD, DA` of a section.
    pub fn edge_lengths(&self, section: usize) -> [f64; 4] {
        let v = |c| self.vertex(section, c);
        [
            (v(1) - v(0)).norm(),
            (v(2) - v(1)).norm(),
            (v(3) - v(2)).norm(),
            (v(0) - v(3)).norm(),
        ]
    }
}

/// Revolve every section about its inner-contour edge and emit a triangle
/// mesh in Wavefront OBJ text.
pub fn profile_mesh_obj(profile: &DiscreteProfile, segments: usize) -> String {
    let segments = segments.max(3);
    let mut vertices: Vec<Vector3<f64>> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();

    for s in 0..profile.sections.len() {
        let lift = |c: usize| {
            let v = profile.vertex(s, c);
            Vector3::new(v.x, v.y, 0.0)
        };
        let (a, b, c, d) = (lift(0), lift(1), lift(2), lift(3));
        let axis = (c - d).normalize();
        let ring = |p: Vector3<f64>, vertices: &mut Vec<Vector3<f64>>| -> usize {
            let foot = d + axis * (p - d).dot(&axis);
            let radial = p - foot;
            let ortho = axis.cross(&radial);
            let start = vertices.len();
            for i in 0..segments {
                let phi = TAU * i as f64 / segments as f64;
                vertices.push(foot + radial * phi.cos() + ortho * phi.sin());
            }
            start
        };
        let d_idx = vertices.len();
        vertices.push(d);
        let c_idx = vertices.len();
        vertices.push(c);
        let ra = ring(a, &mut vertices);
        let rb = ring(b, &mut vertices);
        for i in 0..segments {
            let j = (i + 1) % segments;
            faces.push([d_idx, ra + j, ra + i]);
            faces.push([ra + i, ra + j, rb + j]);
            faces.push([ra + i, rb + j, rb + i]);
            faces.push([c_idx, rb + i, rb + j]);
        }
    }

    let mut out = String::with_capacity(vertices.len() * 40 + faces.len() * 24);
    out.push_str("# spirokin revolved profile\n");
    for v in &vertices {
        out.push_str(&format!("v {:.6} {:.6} {:.6}\n", v.x, v.y, v.z));
    }
    for f in &faces {
        out.push_str(&format!("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1));
    }
    out
}
