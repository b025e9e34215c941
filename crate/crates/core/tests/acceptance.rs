//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use nalgebra::{Rotation3, Unit, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use spirokin::calibration::{adjusted_schedule, compensate_rows, SlackModel};
use spirokin::kinematics::bend::{angle_ratio, from_quanta, to_quanta};
use spirokin::kinematics::frames::{forward_shape, planarity_residual, BackboneShape};
use spirokin::kinematics::twist::TwistMode;
use spirokin::kinematics::{actuate, apply_twist, distribute_bend, sweep, ActuationCommand};
use spirokin::manipulator::Cable;
use spirokin::spiral::{compactness_residual, grasp_range, solve_design_parameters, spiral_point, DesignConstraints};
use spirokin::statics::solve_rest_shape;
use spirokin::strategy::{
    all_strategies, phase_saturation, playback, Phase, StrategyClass, PLANAR_TOLERANCE, TWIST_THRESHOLD,
};
use spirokin::validation::{compare, expected_noise_rmse, rigid_align, rmse, Alignment, RigidTransform, Trace};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !($cond) {
            return Err(format!($($fmt)+));
        }
    };
}

const BIN: &str = env!("CARGO_BIN_EXE_spirokin");

fn design_reproduction() -> Outcome {
    let start = Instant::now();
    let out = Command::new(BIN)
        .args(["design", "--m", "1.53"])
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    ensure!(out.status.success(), "design exited with {}", out.status);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let b = doc["params"]["b"].as_f64().ok_or("no params.b in output")?;
    let k_p = (-b * std::f64::consts::PI / 6.0).exp();
    ensure!((k_p - 0.9196).abs() <= 0.001, "k_p = {k_p:.6}");
    ensure!(elapsed < 1.0, "took {elapsed:.3} s");
    Ok(format!("b = {b:.6}, k_p = {k_p:.6}, {elapsed:.3} s"))
}

fn compactness_identity() -> Outcome {
    let p = solve_design_parameters(&DesignConstraints::trunk(1.53, 31.5)).map_err(|e| e.to_string())?;
    let r = compactness_residual(&p);
    ensure!(r < 1e-9, "residual {r:e}");
    Ok(format!("residual {r:.2e}"))
}

fn grasp_overlap() -> Outcome {
    let p = solve_design_parameters(&DesignConstraints::trunk(1.53, 31.5)).map_err(|e| e.to_string())?;
    let g = grasp_range(&p, 1.53);
    let detail = format!(
        "HJ = {:.3} mm, gripper max = {:.3} mm, overlap = {:.3e} mm",
        g.hj, g.gripper_max, g.overlap
    );
    ensure!(g.overlap > 0.0, "no positive overlap: {detail}");
    ensure!((g.overlap - 7.0).abs() <= 2.0, "overlap outside 7 ± 2 mm: {detail}");
    Ok(detail)
}

fn gravity_vertical() -> Outcome {
    let spec = common::trunk();
    let rest = solve_rest_shape(&spec, FRAC_PI_2).map_err(|e| e.to_string())?;
    let max = rest.joint_angles.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    ensure!(max < 1e-6, "max joint angle {max:e} rad");
    Ok(format!("max joint angle {max:.1e} rad"))
}

fn gravity_oracle() -> Outcome {
    let start = Instant::now();
    let full = common::trunk();
    let mut worst = 0.0f64;
    for n in 1..=6 {
        let spec = common::truncated(&full, n);
        for tilt in [0.0f64, 30.0, 60.0, 120.0] {
            let t0 = tilt.to_radians();
            let solved = solve_rest_shape(&spec, t0).map_err(|e| e.to_string())?;
            let oracle = common::energy_minimum(&spec, t0);
            for (a, b) in solved.joint_angles.iter().zip(&oracle) {
                worst = worst.max((a - b).abs().to_degrees());
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure!(worst < 0.5, "worst joint difference {worst:.4}°");
    ensure!(elapsed < 10.0, "took {elapsed:.2} s");
    Ok(format!("worst joint difference {worst:.2e}°, {elapsed:.2} s"))
}

fn bending_ratio() -> Outcome {
    let spec = common::trunk();
    let expect = spec.k_p.powf(-5.5);
    ensure!(
        ((angle_ratio(&spec) - expect) / expect).abs() < 1e-12,
        "configured ratio {} vs {expect}",
        angle_ratio(&spec)
    );
    let mut worst = 0.0f64;
    let mut checked = 0;
    for d in [0.01, 0.1, 0.5, 1.0, 2.0, 3.0] {
        let dist = distribute_bend(&spec, Cable::Dorsal, d).map_err(|e| e.to_string())?;
        ensure!(dist.saturated.iter().all(|s| !s), "D = {d} saturates");
        for w in dist.angles.windows(2) {
            worst = worst.max(((w[1] / w[0]) - expect).abs() / expect);
            checked += 1;
        }
    }
    ensure!(worst < 1e-6, "worst relative error {worst:e}");
    Ok(format!(
        "ratio {expect:.6}, {checked} pairs, worst relative error {worst:.1e}"
    ))
}

fn cable_conservation() -> Outcome {
    let spec = common::trunk();
    let budget = distribute_bend(&spec, Cable::Dorsal, 0.0)
        .map_err(|e| e.to_string())?
        .total_budget_quanta();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..1000 {
        let cable = Cable::ALL[rng.random_range(0..3)];
        let d = rng.random_range(0.0..1.3 * from_quanta(budget));
        let dist = distribute_bend(&spec, cable, d).map_err(|e| e.to_string())?;
        let want = to_quanta(d).min(dist.total_budget_quanta());
        ensure!(
            dist.total_quanta() == want,
            "sample {i}: {cable} D = {d}: distributed {} quanta, expected {want}",
            dist.total_quanta()
        );
        ensure!(
            dist.total_quanta() + dist.remainder_quanta == dist.requested_quanta,
            "sample {i}: remainder does not close the books"
        );
    }
    Ok(format!("1000 samples exact, budget {:.6} mm", from_quanta(budget)))
}

fn full_wrap() -> Outcome {
    let spec = common::trunk();
    let params = solve_design_parameters(&DesignConstraints::trunk(1.53, 31.5)).map_err(|e| e.to_string())?;
    let budget = distribute_bend(&spec, Cable::Dorsal, 0.0)
        .map_err(|e| e.to_string())?
        .total_budget_quanta();
    let dist = distribute_bend(&spec, Cable::Dorsal, from_quanta(budget)).map_err(|e| e.to_string())?;
    ensure!(dist.angles.len() == 17, "{} joints", dist.angles.len());
    for (i, a) in dist.angles.iter().enumerate() {
        ensure!(*a == spec.joint_limit, "joint {} at {:.12}°", i + 1, a.to_degrees());
    }
    let shape = forward_shape(&spec, &dist.configuration());
    let n = spec.sections.len();
    let mut design = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let theta = params.theta_end - i as f64 * params.delta_theta;
        let p = spiral_point(&params, theta, true).map_err(|e| e.to_string())?;
        design.push(Vector3::new(p.x, p.y, 0.0));
    }
    let backbone = shape.points();
    let t = rigid_align(&design, &backbone).map_err(|e| e.to_string())?;
    let fitted: Vec<_> = backbone.iter().map(|p| t.apply(p)).collect();
    let worst = fitted
        .iter()
        .zip(&design)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let bound = 0.01 * spec.arm_length();
    ensure!(worst < bound, "worst vertex distance {worst:.4} mm > {bound:.4} mm");
    Ok(format!(
        "17 joints at 30°, worst vertex distance {worst:.2e} mm (bound {bound:.3} mm)"
    ))
}

fn max_frame_difference(a: &BackboneShape, b: &BackboneShape) -> f64 {
    a.frames
        .iter()
        .zip(&b.frames)
        .map(|(x, y)| {
            (x.translation - y.translation)
                .abs()
                .max()
                .max((x.rotation - y.rotation).abs().max())
        })
        .fold(0.0, f64::max)
}

fn twist_degeneracy() -> Outcome {
    let spec = common::trunk();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let c1 = Cable::ALL[rng.random_range(0..3)];
        let c2 = c1.others()[rng.random_range(0..2)];
        let d1 = rng.random_range(0.0..130.0);
        let bend = distribute_bend(&spec, c1, d1).map_err(|e| e.to_string())?;
        let twist = apply_twist(&spec, (c1, d1), (c2, 0.0)).map_err(|e| e.to_string())?;
        let diff = max_frame_difference(
            &forward_shape(&spec, &bend.configuration()),
            &forward_shape(&spec, &twist.configuration),
        );
        worst = worst.max(diff);
    }
    ensure!(worst < 1e-12, "worst frame difference {worst:e}");
    Ok(format!("50 commands, worst frame difference {worst:.1e}"))
}

fn symmetric_ventral() -> Outcome {
    let spec = common::trunk();
    let bound = 1e-6 * spec.arm_length();
    let mut worst_plane = 0.0f64;
    let mut worst_y = 0.0f64;
    for d in [1.0, 5.0, 20.0, 50.0, 80.0, 120.0] {
        let r = apply_twist(&spec, (Cable::VentralLeft, d), (Cable::VentralRight, d)).map_err(|e| e.to_string())?;
        ensure!(r.mode == TwistMode::Pair, "D = {d} not handled as a pair bend");
        let pts = forward_shape(&spec, &r.configuration).points();
        worst_plane = worst_plane.max(planarity_residual(&pts));
        worst_y = worst_y.max(pts.iter().fold(0.0f64, |m, p| m.max(p.y.abs())));
        let tip = pts.last().unwrap();
        ensure!(tip.z < 0.0, "D = {d}: tip not on the ventral side");
    }
    ensure!(worst_plane < bound, "planarity {worst_plane:e} mm");
    ensure!(worst_y < bound, "lateral offset {worst_y:e} mm");
    Ok(format!(
        "planarity {worst_plane:.1e} mm, lateral offset {worst_y:.1e} mm"
    ))
}

fn frame_validity() -> Outcome {
    let spec = common::trunk();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_orth = 0.0f64;
    let mut worst_det = 0.0f64;
    for _ in 0..1000 {
        let c1 = Cable::ALL[rng.random_range(0..3)];
        let d1 = rng.random_range(0.0..140.0);
        let command = if rng.random_bool(0.5) {
            ActuationCommand::bend(c1, d1)
        } else {
            let c2 = c1.others()[rng.random_range(0..2)];
            ActuationCommand::twist(c1, d1, c2, rng.random_range(0.0..60.0))
        };
        let shape = forward_shape(&spec, &actuate(&spec, &command).map_err(|e| e.to_string())?);
        ensure!(shape.frames.len() == 19, "{} frames", shape.frames.len());
        for f in &shape.frames {
            let (orth, det) = f.orthonormality();
            worst_orth = worst_orth.max(orth);
            worst_det = worst_det.max((det - 1.0).abs());
        }
    }
    ensure!(
        worst_orth <= 1e-12 && worst_det <= 1e-12,
        "orthonormality {worst_orth:e}, det {worst_det:e}"
    );
    Ok(format!(
        "1000 commands, orthonormality {worst_orth:.1e}, |det − 1| {worst_det:.1e}"
    ))
}

fn calibration_protocol() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..200 {
        let steps = rng.random_range(1..60usize);
        let slack = rng.random_range(0.0..30.0);
        let model = SlackModel::new([slack, 0.0, 0.0], steps).map_err(|e| e.to_string())?;
        let base: Vec<f64> = (0..steps).map(|_| rng.random_range(0.0..10.0)).collect();
        let c = slack / steps as f64;
        let got = adjusted_schedule(&base, c);
        for (i, (g, b)) in got.iter().zip(&base).enumerate() {
            ensure!(
                *g == b + c * (i + 1) as f64,
                "step {}: {g} vs {}",
                i + 1,
                b + c * (i + 1) as f64
            );
        }
        ensure!(
            c == spirokin::calibration::compensation_factor(&model, Cable::Dorsal),
            "factor mismatch"
        );
    }

    let spec = common::trunk();
    let sw = sweep(&spec, Cable::Dorsal, 26, 5.0).map_err(|e| e.to_string())?;
    ensure!(sw.steps.len() == 26, "{} steps", sw.steps.len());
    ensure!(sw.steps.iter().all(|s| s.relax.len() == 2), "relax pairs incomplete");
    let rows = sw.schedule();
    ensure!(rows.len() == 78, "{} schedule rows", rows.len());
    let model = SlackModel::new([13.0, 0.0, 0.0], 26).map_err(|e| e.to_string())?;
    let adjusted = compensate_rows(&rows, &model);
    let active: Vec<f64> = adjusted
        .iter()
        .filter(|r| r.cable == Cable::Dorsal)
        .map(|r| r.delta_mm)
        .collect();
    ensure!(active[3] == 7.0, "step 4 pulls {} mm", active[3]);

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = Command::new(BIN)
        .args(["sweep", "--steps", "26", "--step-mm", "5", "--out-dir"])
        .arg(dir.path())
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "sweep exited with {}", out.status);
    let shapes = std::fs::read_dir(dir.path())
        .map_err(|e| e.to_string())?
        .filter(|e| {
            e.as_ref()
                .is_ok_and(|e| e.file_name().to_string_lossy().starts_with("step_"))
        })
        .count();
    let relax = std::fs::read_to_string(dir.path().join("relax.csv")).map_err(|e| e.to_string())?;
    let relax_rows = relax.lines().count() - 1;
    ensure!(shapes == 27, "{shapes} shape files");
    ensure!(relax_rows == 52, "{relax_rows} relax rows");
    Ok(format!(
        "200 random schedules exact; 26 steps, 26 relax pairs, {shapes} shapes (rest + steps)"
    ))
}

fn validation_harness() -> Outcome {
    let spec = common::trunk();
    let shape = forward_shape(
        &spec,
        &actuate(
            &spec,
            &ActuationCommand::twist(Cable::Dorsal, 40.0, Cable::VentralLeft, 15.0),
        )
        .map_err(|e| e.to_string())?,
    );
    let pts = shape.points();
    let n = pts.len();
    let mapping: BTreeMap<i64, usize> = (0..n).map(|i| (i as i64 + 1, i)).collect();
    let model: BTreeMap<i64, BackboneShape> = [(1, shape.clone())].into_iter().collect();
    let trace_of = |f: &dyn Fn(usize) -> Vector3<f64>| {
        let mut t = Trace::default();
        for i in 0..n {
            t.insert(1, i as i64 + 1, Some(f(i)));
        }
        t
    };

    let same = compare(&model, &trace_of(&|i| pts[i]), &mapping, Alignment::Global).map_err(|e| e.to_string())?;
    ensure!(same.mean_rmse == 0.0, "identical trace rmse {:e}", same.mean_rmse);

    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let noise = Normal::new(0.0, 1.5).unwrap();
    let noisy: Vec<Vector3<f64>> = pts
        .iter()
        .map(|p| p + Vector3::new(noise.sample(&mut rng), noise.sample(&mut rng), noise.sample(&mut rng)))
        .collect();
    let reference = compare(&model, &trace_of(&|i| noisy[i]), &mapping, Alignment::Global)
        .map_err(|e| e.to_string())?
        .mean_rmse;
    let mut worst_invariance = 0.0f64;
    for _ in 0..20 {
        let axis = Unit::new_normalize(Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ));
        let motion = RigidTransform {
            rotation: *Rotation3::from_axis_angle(&axis, rng.random_range(-3.0..3.0)).matrix(),
            translation: Vector3::new(
                rng.random_range(-500.0..500.0),
                rng.random_range(-500.0..500.0),
                rng.random_range(-500.0..500.0),
            ),
        };
        let moved = trace_of(&|i| noisy[i]).transformed(&motion);
        let r = compare(&model, &moved, &mapping, Alignment::Global)
            .map_err(|e| e.to_string())?
            .mean_rmse;
        worst_invariance = worst_invariance.max((r - reference).abs());
    }
    ensure!(
        worst_invariance < 1e-9,
        "rigid motion changed rmse by {worst_invariance:e}"
    );

    let sigma = 0.8;
    let normal = Normal::new(0.0, sigma).unwrap();
    let mut total = 0.0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let noisy: Vec<Vector3<f64>> = pts
            .iter()
            .map(|p| {
                p + Vector3::new(
                    normal.sample(&mut rng),
                    normal.sample(&mut rng),
                    normal.sample(&mut rng),
                )
            })
            .collect();
        let t = rigid_align(&pts, &noisy).map_err(|e| e.to_string())?;
        let aligned: Vec<_> = noisy.iter().map(|p| t.apply(p)).collect();
        total += rmse(&pts, &aligned);
    }
    let mean = total / 100.0;
    let expect = expected_noise_rmse(sigma, n);
    let rel = (mean - expect).abs() / expect;
    ensure!(rel < 0.2, "Monte-Carlo mean {mean:.4} vs expected {expect:.4}");
    Ok(format!(
        "identical 0, invariance {worst_invariance:.1e}, noise rmse {mean:.4} vs {expect:.4} ({:.1}%)",
        rel * 100.0
    ))
}

fn strategy_suite() -> Outcome {
    let spec = common::trunk();
    let length = spec.arm_length();
    let mut lines = Vec::new();
    for script in all_strategies().map_err(|e| e.to_string())? {
        let frames = playback(&script, &spec).map_err(|e| format!("{}: {e}", script.name))?;
        let worst = frames.iter().map(|f| f.planarity).fold(0.0, f64::max) / length;
        match script.class {
            StrategyClass::Bending => {
                ensure!(
                    worst < PLANAR_TOLERANCE,
                    "{} leaves the plane by {worst:e} of arm length",
                    script.name
                )
            }
            StrategyClass::Twisting => {
                ensure!(
                    worst > TWIST_THRESHOLD,
                    "{} only reaches {:.2}% out of plane",
                    script.name,
                    worst * 100.0
                )
            }
        }
        let transport = phase_saturation(&frames, Phase::Transport);
        ensure!(
            transport.windows(2).all(|w| w[1] >= w[0]),
            "{} transport saturation {transport:?}",
            script.name
        );
        lines.push(script.name.clone());
    }
    Ok(format!("{} scripts", lines.len()))
}

fn main() {
    let criteria: [Criterion; 14] = [
        ("design parameter reproduction", design_reproduction),
        ("compactness identity", compactness_identity),
        ("grasp range overlap", grasp_overlap),
        ("gravity at vertical", gravity_vertical),
        ("gravity energy oracle", gravity_oracle),
        ("bending distribution ratio", bending_ratio),
        ("cable conservation", cable_conservation),
        ("full wrap", full_wrap),
        ("twist degeneracy", twist_degeneracy),
        ("symmetric ventral actuation", symmetric_ventral),
        ("frame validity", frame_validity),
        ("calibration and protocol", calibration_protocol),
        ("validation harness", validation_harness),
        ("strategy suite", strategy_suite),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name} ... PASS ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} {name} ... FAIL ({detail})", i + 1);
            }
        }
    }
    println!("\n{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
