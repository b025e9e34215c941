//! Model-versus-measurement comparison for marker traces.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::frames::BackboneShape;

pub const TRACE_HEADER: [&str; 5] = ["step", "frame", "x_mm", "y_mm", "z_mm"];

/// Marker positions per step and marker frame. `None` marks an occluded
/// sample.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    pub steps: BTreeMap<i64, BTreeMap<i64, Option<Vector3<f64>>>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceRow {
    step: i64,
    frame: i64,
    x_mm: Option<f64>,
    y_mm: Option<f64>,
    z_mm: Option<f64>,
}

impl Trace {
    pub fn insert(&mut self, step: i64, frame: i64, p: Option<Vector3<f64>>) {
        self.steps.entry(step).or_default().insert(frame, p);
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Trace> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header != TRACE_HEADER {
            return Err(Error::Mismatch(format!(
                "trace header must be {}, got {}",
                TRACE_HEADER.join(","),
                header.join(",")
            )));
        }
        let mut trace = Trace::default();
        for row in rdr.deserialize() {
            let row: TraceRow = row?;
            let p = match (row.x_mm, row.y_mm, row.z_mm) {
                (Some(x), Some(y), Some(z)) => {
                    let v = Vector3::new(x, y, z);
                    if !v.iter().all(|c| c.is_finite()) {
                        return Err(Error::Domain(format!(
                            "non-finite position at step {} frame {}",
                            row.step, row.frame
                        )));
                    }
                    Some(v)
                }
                _ => None,
            };
            trace.insert(row.step, row.frame, p);
        }
        Ok(trace)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        w.write_record(TRACE_HEADER)?;
        for (&step, frames) in &self.steps {
            for (&frame, p) in frames {
                w.serialize(TraceRow {
                    step,
                    frame,
                    x_mm: p.map(|v| v.x),
                    y_mm: p.map(|v| v.y),
                    z_mm: p.map(|v| v.z),
                })?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Apply a rigid motion to every marker.
    pub fn transformed(&self, t: &RigidTransform) -> Trace {
        let mut out = self.clone();
        for frames in out.steps.values_mut() {
            for p in frames.values_mut().flatten() {
                *p = t.apply(p);
            }
        }
        out
    }
}

/// Average two runs marker by marker. A marker seen in only one run keeps
/// that run's position.
pub fn average_traces(a: &Trace, b: &Trace) -> Trace {
    let mut out = Trace::default();
    let steps: BTreeSet<i64> = a.steps.keys().chain(b.steps.keys()).copied().collect();
    for step in steps {
        let fa = a.steps.get(&step);
        let fb = b.steps.get(&step);
        let frames: BTreeSet<i64> = fa
            .into_iter()
            .flat_map(|m| m.keys())
            .chain(fb.into_iter().flat_map(|m| m.keys()))
            .copied()
            .collect();
        for frame in frames {
            let pa = fa.and_then(|m| m.get(&frame).copied().flatten());
            let pb = fb.and_then(|m| m.get(&frame).copied().flatten());
            let p = match (pa, pb) {
                (Some(x), Some(y)) => Some((x + y) * 0.5),
                (x, y) => x.or(y),
            };
            out.insert(step, frame, p);
        }
    }
    out
}

/// `p ↦ R·p + t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl RigidTransform {
    pub fn identity() -> Self {
        RigidTransform {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }
}

/// Rigid transform that best maps `trace` onto `model` in the least-squares
/// sense (Kabsch).
pub fn rigid_align(model: &[Vector3<f64>], trace: &[Vector3<f64>]) -> Result<RigidTransform> {
    if model.len() != trace.len() {
        return Err(Error::Mismatch(format!(
            "alignment needs equal point counts, got {} and {}",
            model.len(),
            trace.len()
        )));
    }
    if model.len() < 3 {
        return Err(Error::Degenerate(format!(
            "alignment needs at least 3 points, got {}",
            model.len()
        )));
    }
    let n = model.len() as f64;
    let cm = model.iter().sum::<Vector3<f64>>() / n;
    let ct = trace.iter().sum::<Vector3<f64>>() / n;
    let mut h = Matrix3::zeros();
    let mut spread = Matrix3::zeros();
    for (m, t) in model.iter().zip(trace) {
        let (dm, dt) = (m - cm, t - ct);
        h += dt * dm.transpose();
        spread += dt * dt.transpose();
    }
    let sv = spread.symmetric_eigenvalues();
    let mut sorted = [sv[0], sv[1], sv[2]];
    sorted.sort_by(f64::total_cmp);
    if sorted[1] <= 1e-12 * sorted[2].max(f64::MIN_POSITIVE) {
        return Err(Error::Degenerate("points are collinear or coincident".into()));
    }
    if model == trace {
        // Zero residual; the SVD route would leave rounding noise.
        return Ok(RigidTransform::identity());
    }
    let svd = h.svd(true, true);
    let (u, v_t) = (svd.u.expect("svd u"), svd.v_t.expect("svd v_t"));
    let v = v_t.transpose();
    let d = (v * u.transpose()).determinant().signum();
    let fix = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, d));
    let rotation = v * fix * u.transpose();
    Ok(RigidTransform {
        rotation,
        translation: cm - rotation * ct,
    })
}

pub fn rmse(a: &[Vector3<f64>], b: &[Vector3<f64>]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_squared()).sum();
    (sum / a.len() as f64).sqrt()
}

/// Expected RMSE after a rigid fit of `n` exact points against copies with
/// independent Gaussian noise `sigma` on each coordinate. The fit absorbs
/// six degrees of freedom.
pub fn expected_noise_rmse(sigma: f64, n: usize) -> f64 {
    let n = n as f64;
    sigma * ((3.0 * n - 6.0) / n).sqrt()
}

/// Marker frame id → backbone frame index (0 = base, `i` = distal end of
/// section `i`).
pub type MarkerMapping = BTreeMap<i64, usize>;

pub fn read_mapping<R: Read>(reader: R) -> Result<MarkerMapping> {
    let raw: BTreeMap<String, usize> = serde_json::from_reader(reader)?;
    raw.into_iter()
        .map(|(k, v)| {
            k.trim()
                .parse::<i64>()
                .map(|id| (id, v))
                .map_err(|_| Error::Mismatch(format!("mapping key '{k}' is not an integer frame id")))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    /// One transform for the whole experiment.
    #[default]
    Global,
    /// A fresh transform per step.
    PerStep,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepError {
    pub step: i64,
    pub rmse: f64,
    pub max_error: f64,
    pub markers: usize,
    pub missing: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub per_step: Vec<StepError>,
    /// Absolute marker errors grouped by backbone frame index, in step order.
    pub per_section: BTreeMap<usize, Vec<f64>>,
    pub mean_rmse: f64,
    pub max_deviation: f64,
    pub missing_markers: usize,
    pub alignment: Alignment,
    pub transforms: Vec<RigidTransform>,
}

struct Pairs {
    step: i64,
    model: Vec<Vector3<f64>>,
    trace: Vec<Vector3<f64>>,
    sections: Vec<usize>,
    missing: usize,
}

/// Compare model shapes (keyed by step) with a marker trace.
pub fn compare(
    model: &BTreeMap<i64, BackboneShape>,
    trace: &Trace,
    mapping: &MarkerMapping,
    alignment: Alignment,
) -> Result<ComparisonReport> {
    let model_steps: BTreeSet<i64> = model.keys().copied().collect();
    let trace_steps: BTreeSet<i64> = trace.steps.keys().copied().collect();
    if model_steps != trace_steps {
        let only_model: Vec<_> = model_steps.difference(&trace_steps).collect();
        let only_trace: Vec<_> = trace_steps.difference(&model_steps).collect();
        return Err(Error::Mismatch(format!(
            "step sets differ: model only {only_model:?}, trace only {only_trace:?}"
        )));
    }
    if mapping.is_empty() {
        return Err(Error::Mismatch("marker mapping is empty".into()));
    }

    let mut pairs = Vec::with_capacity(model.len());
    for (&step, shape) in model {
        let frames = &trace.steps[&step];
        let mut p = Pairs {
            step,
            model: Vec::new(),
            trace: Vec::new(),
            sections: Vec::new(),
            missing: 0,
        };
        for (&frame_id, &section) in mapping {
            let target = shape.frames.get(section).ok_or(Error::IndexOutOfRange {
                index: section,
                max: shape.frames.len().saturating_sub(1),
            })?;
            match frames.get(&frame_id).copied().flatten() {
                Some(pos) => {
                    p.model.push(target.translation);
                    p.trace.push(pos);
                    p.sections.push(section);
                }
                None => p.missing += 1,
            }
        }
        pairs.push(p);
    }

    let transforms = match alignment {
        Alignment::Global => {
            let all_m: Vec<_> = pairs.iter().flat_map(|p| p.model.iter().copied()).collect();
            let all_t: Vec<_> = pairs.iter().flat_map(|p| p.trace.iter().copied()).collect();
            vec![rigid_align(&all_m, &all_t)?]
        }
        Alignment::PerStep => pairs
            .iter()
            .map(|p| rigid_align(&p.model, &p.trace))
            .collect::<Result<Vec<_>>>()?,
    };

    let mut per_step = Vec::with_capacity(pairs.len());
    let mut per_section: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut missing_markers = 0;
    for (i, p) in pairs.iter().enumerate() {
        let t = if transforms.len() == 1 {
            &transforms[0]
        } else {
            &transforms[i]
        };
        let aligned: Vec<_> = p.trace.iter().map(|x| t.apply(x)).collect();
        let errors: Vec<f64> = aligned.iter().zip(&p.model).map(|(a, m)| (a - m).norm()).collect();
        for (e, s) in errors.iter().zip(&p.sections) {
            per_section.entry(*s).or_default().push(*e);
        }
        missing_markers += p.missing;
        per_step.push(StepError {
            step: p.step,
            rmse: rmse(&aligned, &p.model),
            max_error: errors.iter().cloned().fold(0.0, f64::max),
            markers: errors.len(),
            missing: p.missing,
        });
    }
    let mean_rmse = per_step.iter().map(|s| s.rmse).sum::<f64>() / per_step.len() as f64;
    let max_deviation = per_step.iter().map(|s| s.max_error).fold(0.0, f64::max);
    Ok(ComparisonReport {
        per_step,
        per_section,
        mean_rmse,
        max_deviation,
        missing_markers,
        alignment,
        transforms,
    })
}
