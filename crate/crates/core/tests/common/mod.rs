#![allow(dead_code)]

use spirokin::manipulator::{build_spec, ManipulatorSpec, MaterialConstants};
use spirokin::spiral::{discretize_profile, solve_design_parameters, DesignConstraints};

pub fn trunk() -> ManipulatorSpec {
    trunk_with(MaterialConstants::default())
}

pub fn trunk_with(material: MaterialConstants) -> ManipulatorSpec {
    let p = solve_design_parameters(&DesignConstraints::trunk(1.53, 31.5)).unwrap();
    build_spec(&discretize_profile(&p), material, 0.15).unwrap()
}

/// The first `joints + 1` sections of `spec`, base first.
pub fn truncated(spec: &ManipulatorSpec, joints: usize) -> ManipulatorSpec {
    let mut s = spec.clone();
    s.sections.truncate(joints + 1);
    s
}

/// Elastic plus gravitational energy (N·mm) of a planar rest configuration.
/// Heights are measured upward; `theta_0` and the angles tilt sections down.
pub fn potential_energy(spec: &ManipulatorSpec, theta_0: f64, angles: &[f64]) -> f64 {
    let g = spec.material.gravity * 1e-3;
    let mut elastic = 0.0;
    for (n, &t) in angles.iter().enumerate() {
        let k = spirokin::manipulator::bending_stiffness(spec, n + 1).unwrap();
        elastic += 0.5 * k * t * t;
    }
    let mut phi = theta_0;
    let mut z = 0.0;
    let mut gravity = 0.0;
    for (i, s) in spec.sections.iter().enumerate() {
        let drop = phi.sin();
        gravity += s.mass * g * (z - s.cg_fraction * s.link_length * drop);
        z -= s.link_length * drop;
        if i < angles.len() {
            phi += angles[i];
        }
    }
    elastic + gravity
}

/// Derivative-free minimiser of [`potential_energy`] over the box
/// `[-limit, limit]^N`: cyclic coordinate search, each coordinate scanned on
/// a grid that is refined around the best point.
pub fn energy_minimum(spec: &ManipulatorSpec, theta_0: f64) -> Vec<f64> {
    let n = spec.joints();
    let lim = spec.joint_limit;
    let mut x = vec![0.0; n];
    let mut best = potential_energy(spec, theta_0, &x);
    for _sweep in 0..500 {
        let before = best;
        for j in 0..n {
            let (mut lo, mut hi) = (-lim, lim);
            for _level in 0..12 {
                let steps = 40;
                let h = (hi - lo) / steps as f64;
                let mut arg = x[j];
                for s in 0..=steps {
                    let t = lo + h * s as f64;
                    let old = x[j];
                    x[j] = t;
                    let e = potential_energy(spec, theta_0, &x);
                    if e < best {
                        best = e;
                        arg = t;
                    }
                    x[j] = old;
                }
                x[j] = arg;
                lo = (arg - h).max(-lim);
                hi = (arg + h).min(lim);
            }
        }
        if before - best < 1e-14 * before.abs().max(1.0) {
            break;
        }
    }
    x
}
