//! Kinematics of a logarithmic-spiral, cable-driven soft manipulator.

// `!(x > 0.0)` is used on purpose so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod cli;
pub mod error;
pub mod io;
pub mod kinematics;
pub mod manipulator;
pub mod roots;
pub mod spiral;
pub mod statics;
pub mod strategy;
pub mod validation;

pub use error::{Error, Result};
