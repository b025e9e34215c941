use nalgebra::{Matrix3, Matrix4, Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use crate::manipulator::ManipulatorSpec;

/// Rigid transform with an explicit rotation matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Frame {
    pub fn identity() -> Self {
        Frame {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        Frame { rotation, translation }
    }

    pub fn compose(&self, other: &Frame) -> Frame {
        Frame {
            rotation: self.rotation * other.rotation,
            translation: self.translation + self.rotation * other.translation,
        }
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// `max |RᵀR − I|` and `det R`.
    pub fn orthonormality(&self) -> (f64, f64) {
        let err = (self.rotation.transpose() * self.rotation - Matrix3::identity())
            .abs()
            .max();
        (err, self.rotation.determinant())
    }
}

/// Rotation state of one joint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointState {
    /// Rotation angle (radians).
    pub bend_angle: f64,
    /// Unit rotation axis in the proximal link's frame.
    pub rotation_axis: Vector3<f64>,
    pub saturated: bool,
}

impl JointState {
    pub fn straight() -> Self {
        JointState {
            bend_angle: 0.0,
            rotation_axis: Vector3::y(),
            saturated: false,
        }
    }

    pub fn from_rotation(r: &Rotation3<f64>, saturated: bool) -> Self {
        match r.axis_angle() {
            Some((axis, angle)) => JointState {
                bend_angle: angle,
                rotation_axis: axis.into_inner(),
                saturated,
            },
            None => JointState {
                saturated,
                ..JointState::straight()
            },
        }
    }

    pub fn rotation(&self) -> Rotation3<f64> {
        if self.bend_angle == 0.0 {
            return Rotation3::identity();
        }
        Rotation3::from_axis_angle(&Unit::new_normalize(self.rotation_axis), self.bend_angle)
    }
}

/// Rotation of every joint, base to tip.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointConfiguration {
    pub joints: Vec<JointState>,
}

impl JointConfiguration {
    pub fn straight(n: usize) -> Self {
        JointConfiguration {
            joints: vec![JointState::straight(); n],
        }
    }

    /// All joints rotate about the same local axis.
    pub fn planar(angles: &[f64], axis: Vector3<f64>, limit: f64) -> Self {
        let axis = axis.normalize();
        JointConfiguration {
            joints: angles
                .iter()
                .map(|&a| {
                    let (angle, axis) = if a < 0.0 { (-a, -axis) } else { (a, axis) };
                    JointState {
                        bend_angle: angle,
                        rotation_axis: axis,
                        saturated: angle >= limit,
                    }
                })
                .collect(),
        }
    }

    pub fn saturated_count(&self) -> usize {
        self.joints.iter().filter(|j| j.saturated).count()
    }

    pub fn angles(&self) -> Vec<f64> {
        self.joints.iter().map(|j| j.bend_angle).collect()
    }
}

/// Base frame followed by one frame at the distal end of every section.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackboneShape {
    pub frames: Vec<Frame>,
}

impl BackboneShape {
    pub fn points(&self) -> Vec<Vector3<f64>> {
        self.frames.iter().map(|f| f.translation).collect()
    }

    pub fn tip(&self) -> &Frame {
        self.frames.last().expect("shape has at least a base frame")
    }

    pub fn transformed(&self, base: &Frame) -> BackboneShape {
        BackboneShape {
            frames: self.frames.iter().map(|f| base.compose(f)).collect(),
        }
    }

    /// Largest distance of any frame origin from its least-squares plane.
    pub fn planarity_residual(&self) -> f64 {
        planarity_residual(&self.points())
    }
}

/// Largest point distance to the best-fit plane through `points`.
pub fn planarity_residual(points: &[Vector3<f64>]) -> f64 {
    if points.len() < 4 {
        return 0.0;
    }
    let n = points.len() as f64;
    let centroid = points.iter().fold(Vector3::zeros(), |acc, p| acc + p) / n;
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = p - centroid;
        cov += d * d.transpose();
    }
    let eig = cov.symmetric_eigen();
    let (imin, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    let normal = eig.eigenvectors.column(imin).into_owned();
    points
        .iter()
        .map(|p| (p - centroid).dot(&normal).abs())
        .fold(0.0, f64::max)
}

/// Chain section translations and joint rotations from the base frame.
///
/// Frame `i` sits at the distal end of section `i`; the rotation of joint
/// `i` is applied there, so it moves every later section.
pub fn forward_shape(spec: &ManipulatorSpec, config: &JointConfiguration) -> BackboneShape {
    let rotations: Vec<Matrix3<f64>> = config.joints.iter().map(|j| *j.rotation().matrix()).collect();
    chain(spec, &Frame::identity(), &rotations)
}

/// Same chain from explicit joint rotation matrices and a base frame.
/// Joints without an entry in `rotations` stay straight.
pub fn chain(spec: &ManipulatorSpec, base: &Frame, rotations: &[Matrix3<f64>]) -> BackboneShape {
    let mut frames = Vec::with_capacity(spec.sections.len() + 1);
    let mut current = *base;
    frames.push(current);
    for (i, section) in spec.sections.iter().enumerate() {
        let rotation = rotations.get(i).copied().unwrap_or_else(Matrix3::identity);
        let step = Frame::new(rotation, Vector3::x() * section.link_length);
        current = current.compose(&step);
        frames.push(current);
    }
    BackboneShape { frames }
}
