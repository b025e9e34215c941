//! File output helpers and the backbone shape CSV format.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::frames::{BackboneShape, Frame};

pub const SHAPE_HEADER: [&str; 5] = ["joint_index", "angle_deg", "frame_x_mm", "frame_y_mm", "frame_z_mm"];

/// Write `bytes` to `path` through a temporary file in the same directory,
/// so readers never see a partial file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let file = std::fs::File::open(path)?;
    Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
}

#[derive(Debug, Serialize, Deserialize)]
struct ShapeRow {
    joint_index: usize,
    angle_deg: f64,
    frame_x_mm: f64,
    frame_y_mm: f64,
    frame_z_mm: f64,
}

/// Rotation angle of every joint recovered from consecutive frames.
pub fn joint_angles(shape: &BackboneShape) -> Vec<f64> {
    let n = shape.frames.len().saturating_sub(2);
    (1..=n)
        .map(|i| {
            let rel = shape.frames[i - 1].rotation.transpose() * shape.frames[i].rotation;
            Rotation3::from_matrix_unchecked(rel).angle()
        })
        .collect()
}

/// One row per backbone frame; `angles` (radians) holds the rotation of
/// joint `i` at row `i`, rows without a joint get 0.
pub fn write_shape_csv<W: Write>(writer: W, shape: &BackboneShape, angles: &[f64]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    for (i, f) in shape.frames.iter().enumerate() {
        let angle = if i >= 1 {
            angles.get(i - 1).copied().unwrap_or(0.0)
        } else {
            0.0
        };
        w.serialize(ShapeRow {
            joint_index: i,
            angle_deg: angle.to_degrees(),
            frame_x_mm: f.translation.x,
            frame_y_mm: f.translation.y,
            frame_z_mm: f.translation.z,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn shape_csv_bytes(shape: &BackboneShape, angles: &[f64]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_shape_csv(&mut buf, shape, angles)?;
    Ok(buf)
}

/// Read frame positions back from a shape CSV. Orientations are not stored,
/// so every frame comes back with an identity rotation.
pub fn read_shape_csv<R: Read>(reader: R) -> Result<BackboneShape> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != SHAPE_HEADER {
        return Err(Error::Mismatch(format!(
            "shape header must be {}, got {}",
            SHAPE_HEADER.join(","),
            header.join(",")
        )));
    }
    let mut frames = Vec::new();
    for (expected, row) in rdr.deserialize().enumerate() {
        let row: ShapeRow = row?;
        if row.joint_index != expected {
            return Err(Error::Mismatch(format!(
                "shape rows out of order: expected index {expected}, got {}",
                row.joint_index
            )));
        }
        frames.push(Frame::new(
            Matrix3::identity(),
            Vector3::new(row.frame_x_mm, row.frame_y_mm, row.frame_z_mm),
        ));
    }
    Ok(BackboneShape { frames })
}
