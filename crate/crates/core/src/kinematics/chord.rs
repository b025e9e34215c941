//! Cosine-law conversion between a joint's hole-to-hole chord and the
//! angle it subtends at the joint centre.

use crate::error::{Error, Result};

/// Angle subtended by chord `x` between two holes at distance `r_hole` from
/// the joint centre. Equivalent to `acos((2r² − x²) / 2r²)`, evaluated in a
/// form that stays accurate near 0 and π.
pub fn angle_from_chord(r_hole: f64, x: f64) -> Result<f64> {
    if !(r_hole > 0.0) {
        return Err(Error::Domain(format!("hole radius must be > 0, got {r_hole}")));
    }
    if !(x >= 0.0) || x > 2.0 * r_hole {
        return Err(Error::Domain(format!("chord {x} outside [0, {}]", 2.0 * r_hole)));
    }
    let half = 0.5 * x;
    let adj = ((r_hole - half) * (r_hole + half)).max(0.0).sqrt();
    Ok(2.0 * half.atan2(adj))
}

pub fn chord_from_angle(r_hole: f64, theta: f64) -> f64 {
    2.0 * r_hole * (0.5 * theta).sin()
}
