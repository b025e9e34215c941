//! C ABI over the spirokin engine.
//!
//! Handles are opaque and owned by the caller, who releases them with the
//! matching `*_free` function. Every fallible call returns a
//! [`SpirokinStatus`]; on failure [`spirokin_last_error`] describes what went
//! wrong on the calling thread. Angles are radians, lengths millimetres.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use spirokin::io::joint_angles;
use spirokin::kinematics::frames::{forward_shape, BackboneShape};
use spirokin::kinematics::{actuate, actuate_from_rest, ActuationCommand};
use spirokin::manipulator::{build_spec, Cable, ManipulatorSpec, MaterialConstants};
use spirokin::spiral::{discretize_profile, solve_design_parameters, DesignConstraints};
use spirokin::statics::{rest_shape, solve_rest_shape};
use spirokin::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpirokinStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    NotConverged = 4,
    OutOfRange = 5,
    BufferTooSmall = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpirokinCable {
    Dorsal = 0,
    VentralLeft = 1,
    VentralRight = 2,
}

/// Manipulator description.
pub struct SpirokinSpec {
    inner: ManipulatorSpec,
}

/// Backbone shape: one frame at the base and one at the distal end of each
/// section.
pub struct SpirokinShape {
    shape: BackboneShape,
    angles: Vec<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SpirokinStatus {
    match e {
        Error::Domain(_) => SpirokinStatus::Domain,
        Error::NotConverged { .. } | Error::NoRootInBracket { .. } => SpirokinStatus::NotConverged,
        Error::IndexOutOfRange { .. } => SpirokinStatus::OutOfRange,
        _ => SpirokinStatus::InvalidArgument,
    }
}

struct Failure(SpirokinStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SpirokinStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SpirokinStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SpirokinStatus::Internal
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(SpirokinStatus::NullPointer, format!("{what} is null"))
}

unsafe fn spec_ref<'a>(spec: *const SpirokinSpec) -> Result<&'a ManipulatorSpec, Failure> {
    spec.as_ref().map(|s| &s.inner).ok_or_else(|| null("spec"))
}

unsafe fn shape_ref<'a>(shape: *const SpirokinShape) -> Result<&'a SpirokinShape, Failure> {
    shape.as_ref().ok_or_else(|| null("shape"))
}

fn cable(c: u32) -> Result<Cable, Failure> {
    Cable::ALL.get(c as usize).copied().ok_or_else(|| {
        Failure(
            SpirokinStatus::InvalidArgument,
            format!("cable id {c} is not 0, 1 or 2"),
        )
    })
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn spirokin_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn spirokin_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Solve the spiral design for ratio `m` and rigid-arm radius `r_rigid` and
/// build the manipulator with default material constants.
///
/// # Safety
/// `out` must be a valid pointer to write a handle into.
#[no_mangle]
pub unsafe extern "C" fn spirokin_spec_design(
    m: f64,
    r_rigid: f64,
    joint_fraction: f64,
    out: *mut *mut SpirokinSpec,
) -> SpirokinStatus {
    guard(|| {
        let params = solve_design_parameters(&DesignConstraints::trunk(m, r_rigid))?;
        let spec = build_spec(
            &discretize_profile(&params),
            MaterialConstants::default(),
            joint_fraction,
        )?;
        put(out, SpirokinSpec { inner: spec })
    })
}

/// The default trunk design.
///
/// # Safety
/// `out` must be a valid pointer to write a handle into.
#[no_mangle]
pub unsafe extern "C" fn spirokin_spec_default(out: *mut *mut SpirokinSpec) -> SpirokinStatus {
    guard(|| {
        put(
            out,
            SpirokinSpec {
                inner: spirokin::cli::default_spec()?,
            },
        )
    })
}

/// Parse a manipulator description from JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn spirokin_spec_from_json(json: *const c_char, out: *mut *mut SpirokinSpec) -> SpirokinStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Failure(SpirokinStatus::InvalidArgument, format!("json is not UTF-8: {e}")))?;
        let spec: ManipulatorSpec = serde_json::from_str(text)
            .map_err(|e| Failure(SpirokinStatus::InvalidArgument, format!("bad spec json: {e}")))?;
        spec.validate()?;
        put(out, SpirokinSpec { inner: spec })
    })
}

/// Serialise a spec to JSON. Release the string with [`spirokin_string_free`].
///
/// # Safety
/// `spec` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn spirokin_spec_to_json(spec: *const SpirokinSpec, out: *mut *mut c_char) -> SpirokinStatus {
    guard(|| {
        let spec = spec_ref(spec)?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let text = serde_json::to_string(spec).map_err(|e| Failure(SpirokinStatus::Internal, e.to_string()))?;
        *out = CString::new(text)
            .map_err(|e| Failure(SpirokinStatus::Internal, e.to_string()))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn spirokin_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Number of joints, or 0 for a null handle.
///
/// # Safety
/// `spec` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn spirokin_spec_joint_count(spec: *const SpirokinSpec) -> usize {
    spec.as_ref().map_or(0, |s| s.inner.joints())
}

/// Sum of link lengths (mm), or 0 for a null handle.
///
/// # Safety
/// `spec` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn spirokin_spec_arm_length(spec: *const SpirokinSpec) -> f64 {
    spec.as_ref().map_or(0.0, |s| s.inner.arm_length())
}

/// # Safety
/// `spec` must come from this library or be null, and is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn spirokin_spec_free(spec: *mut SpirokinSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Rest shape under gravity with the base tilted `tilt` below horizontal.
///
/// # Safety
/// `spec` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn spirokin_rest(
    spec: *const SpirokinSpec,
    tilt: f64,
    out: *mut *mut SpirokinShape,
) -> SpirokinStatus {
    guard(|| {
        let spec = spec_ref(spec)?;
        let state = solve_rest_shape(spec, tilt)?;
        let shape = rest_shape(spec, &state);
        put(
            out,
            SpirokinShape {
                angles: state.joint_angles,
                shape,
            },
        )
    })
}

unsafe fn actuated(
    spec: *const SpirokinSpec,
    command: ActuationCommand,
    tilt: Option<f64>,
    out: *mut *mut SpirokinShape,
) -> Result<(), Failure> {
    let spec = spec_ref(spec)?;
    command.validate()?;
    let shape = match tilt {
        Some(t) => actuate_from_rest(spec, &solve_rest_shape(spec, t)?, &command)?,
        None => forward_shape(spec, &actuate(spec, &command)?),
    };
    let angles = joint_angles(&shape);
    put(out, SpirokinShape { shape, angles })
}

/// Shorten one cable by `shorten_mm` from the straight arm (no gravity).
///
/// # Safety
/// `spec` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn spirokin_bend(
    spec: *const SpirokinSpec,
    cable_id: u32,
    shorten_mm: f64,
    out: *mut *mut SpirokinShape,
) -> SpirokinStatus {
    guard(|| actuated(spec, ActuationCommand::bend(cable(cable_id)?, shorten_mm), None, out))
}

/// Shorten `cable1` by `d1`, then `cable2` by `d2`. With `with_gravity`
/// non-zero the command starts from the rest shape at `tilt`.
///
/// # Safety
/// `spec` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn spirokin_twist(
    spec: *const SpirokinSpec,
    cable1: u32,
    d1: f64,
    cable2: u32,
    d2: f64,
    with_gravity: i32,
    tilt: f64,
    out: *mut *mut SpirokinShape,
) -> SpirokinStatus {
    guard(|| {
        let command = ActuationCommand::twist(cable(cable1)?, d1, cable(cable2)?, d2);
        actuated(spec, command, (with_gravity != 0).then_some(tilt), out)
    })
}

/// Number of frames (joints + 2), or 0 for a null handle.
///
/// # Safety
/// `shape` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn spirokin_shape_frame_count(shape: *const SpirokinShape) -> usize {
    shape.as_ref().map_or(0, |s| s.shape.frames.len())
}

/// Copy frame origins as `x, y, z` triples into `buf` (`3 × frame count`
/// doubles).
///
/// # Safety
/// `shape` must be a live handle and `buf` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn spirokin_shape_points(
    shape: *const SpirokinShape,
    buf: *mut f64,
    len: usize,
) -> SpirokinStatus {
    guard(|| {
        let s = shape_ref(shape)?;
        let need = 3 * s.shape.frames.len();
        if buf.is_null() {
            return Err(null("buffer"));
        }
        if len < need {
            return Err(Failure(
                SpirokinStatus::BufferTooSmall,
                format!("need {need} doubles, got {len}"),
            ));
        }
        let out = std::slice::from_raw_parts_mut(buf, need);
        for (dst, f) in out.chunks_exact_mut(3).zip(&s.shape.frames) {
            dst.copy_from_slice(f.translation.as_slice());
        }
        Ok(())
    })
}

/// Copy joint rotation angles (radians, base first) into `buf`.
///
/// # Safety
/// `shape` must be a live handle and `buf` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn spirokin_shape_angles(
    shape: *const SpirokinShape,
    buf: *mut f64,
    len: usize,
) -> SpirokinStatus {
    guard(|| {
        let s = shape_ref(shape)?;
        if buf.is_null() {
            return Err(null("buffer"));
        }
        if len < s.angles.len() {
            return Err(Failure(
                SpirokinStatus::BufferTooSmall,
                format!("need {} doubles, got {len}", s.angles.len()),
            ));
        }
        ptr::copy_nonoverlapping(s.angles.as_ptr(), buf, s.angles.len());
        Ok(())
    })
}

/// Homogeneous transform of frame `index`, row-major, into `out16`.
///
/// # Safety
/// `shape` must be a live handle and `out16` valid for 16 doubles.
#[no_mangle]
pub unsafe extern "C" fn spirokin_shape_frame(
    shape: *const SpirokinShape,
    index: usize,
    out16: *mut f64,
) -> SpirokinStatus {
    guard(|| {
        let s = shape_ref(shape)?;
        if out16.is_null() {
            return Err(null("buffer"));
        }
        let f = s.shape.frames.get(index).ok_or_else(|| {
            Failure(
                SpirokinStatus::OutOfRange,
                format!("frame {index} out of range 0..{}", s.shape.frames.len()),
            )
        })?;
        let m = f.to_homogeneous();
        let out = std::slice::from_raw_parts_mut(out16, 16);
        for r in 0..4 {
            for c in 0..4 {
                out[4 * r + c] = m[(r, c)];
            }
        }
        Ok(())
    })
}

/// # Safety
/// `shape` must come from this library or be null, and is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn spirokin_shape_free(shape: *mut SpirokinShape) {
    if !shape.is_null() {
        drop(Box::from_raw(shape));
    }
}
