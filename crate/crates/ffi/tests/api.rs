use std::ffi::{CStr, CString};
use std::ptr;

use spirokin_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(spirokin_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn default_spec() -> *mut SpirokinSpec {
    let mut spec = ptr::null_mut();
    assert_eq!(unsafe { spirokin_spec_default(&mut spec) }, SpirokinStatus::Ok);
    assert!(!spec.is_null());
    spec
}

fn points(shape: *const SpirokinShape) -> Vec<f64> {
    let n = unsafe { spirokin_shape_frame_count(shape) };
    let mut buf = vec![0.0; 3 * n];
    assert_eq!(
        unsafe { spirokin_shape_points(shape, buf.as_mut_ptr(), buf.len()) },
        SpirokinStatus::Ok
    );
    buf
}

#[test]
fn default_spec_dimensions() {
    let spec = default_spec();
    unsafe {
        assert_eq!(spirokin_spec_joint_count(spec), 17);
        let len = spirokin_spec_arm_length(spec);
        assert!((len - 330.35).abs() < 0.01, "{len}");
        spirokin_spec_free(spec);
        assert_eq!(spirokin_spec_joint_count(ptr::null()), 0);
    }
}

#[test]
fn json_round_trip_matches_design() {
    let spec = default_spec();
    let mut designed = ptr::null_mut();
    unsafe {
        assert_eq!(
            spirokin_spec_design(1.53, 31.5, 0.15, &mut designed),
            SpirokinStatus::Ok
        );
        let mut a = ptr::null_mut();
        let mut b = ptr::null_mut();
        assert_eq!(spirokin_spec_to_json(spec, &mut a), SpirokinStatus::Ok);
        assert_eq!(spirokin_spec_to_json(designed, &mut b), SpirokinStatus::Ok);
        assert_eq!(CStr::from_ptr(a), CStr::from_ptr(b));

        let mut parsed = ptr::null_mut();
        assert_eq!(spirokin_spec_from_json(a, &mut parsed), SpirokinStatus::Ok);
        assert_eq!(spirokin_spec_joint_count(parsed), 17);

        spirokin_string_free(a);
        spirokin_string_free(b);
        spirokin_spec_free(parsed);
        spirokin_spec_free(designed);
        spirokin_spec_free(spec);
    }
}

#[test]
fn bend_and_rest() {
    let spec = default_spec();
    unsafe {
        let mut shape = ptr::null_mut();
        assert_eq!(
            spirokin_bend(spec, SpirokinCable::Dorsal as u32, 200.0, &mut shape),
            SpirokinStatus::Ok
        );
        assert_eq!(spirokin_shape_frame_count(shape), 19);
        let mut angles = vec![0.0; 17];
        assert_eq!(
            spirokin_shape_angles(shape, angles.as_mut_ptr(), 17),
            SpirokinStatus::Ok
        );
        for a in &angles {
            assert!((a.to_degrees() - 30.0).abs() < 1e-9);
        }
        let mut m = [0.0; 16];
        assert_eq!(spirokin_shape_frame(shape, 0, m.as_mut_ptr()), SpirokinStatus::Ok);
        assert_eq!(
            m,
            [1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]
        );
        assert_eq!(
            spirokin_shape_frame(shape, 19, m.as_mut_ptr()),
            SpirokinStatus::OutOfRange
        );
        spirokin_shape_free(shape);

        let mut rest = ptr::null_mut();
        assert_eq!(
            spirokin_rest(spec, std::f64::consts::FRAC_PI_2, &mut rest),
            SpirokinStatus::Ok
        );
        let p = points(rest);
        let tip_z = p[p.len() - 1];
        assert!((tip_z + spirokin_spec_arm_length(spec)).abs() < 1e-9);
        spirokin_shape_free(rest);
        spirokin_spec_free(spec);
    }
}

#[test]
fn twist_degenerates_to_bend() {
    let spec = default_spec();
    unsafe {
        let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(spirokin_bend(spec, 1, 35.0, &mut a), SpirokinStatus::Ok);
        assert_eq!(
            spirokin_twist(spec, 1, 35.0, 2, 0.0, 0, 0.0, &mut b),
            SpirokinStatus::Ok
        );
        assert_eq!(points(a), points(b));
        spirokin_shape_free(a);
        spirokin_shape_free(b);
        spirokin_spec_free(spec);
    }
}

#[test]
fn errors_are_reported() {
    let spec = default_spec();
    unsafe {
        let mut shape = ptr::null_mut();
        assert_eq!(spirokin_bend(spec, 0, -3.0, &mut shape), SpirokinStatus::Domain);
        assert!(shape.is_null());
        assert!(last_error().contains("-3"), "{}", last_error());

        assert_eq!(spirokin_bend(spec, 7, 3.0, &mut shape), SpirokinStatus::InvalidArgument);
        assert_eq!(
            spirokin_bend(ptr::null(), 0, 3.0, &mut shape),
            SpirokinStatus::NullPointer
        );
        assert_eq!(
            spirokin_bend(spec, 0, 3.0, ptr::null_mut()),
            SpirokinStatus::NullPointer
        );

        let bad = CString::new("{not json").unwrap();
        let mut parsed = ptr::null_mut();
        assert_eq!(
            spirokin_spec_from_json(bad.as_ptr(), &mut parsed),
            SpirokinStatus::InvalidArgument
        );

        assert_eq!(spirokin_bend(spec, 0, 3.0, &mut shape), SpirokinStatus::Ok);
        assert_eq!(last_error(), "");
        let mut small = [0.0; 3];
        assert_eq!(
            spirokin_shape_points(shape, small.as_mut_ptr(), 3),
            SpirokinStatus::BufferTooSmall
        );
        spirokin_shape_free(shape);
        spirokin_spec_free(spec);

        let mut designed = ptr::null_mut();
        assert_eq!(
            spirokin_spec_design(0.9, 31.5, 0.15, &mut designed),
            SpirokinStatus::InvalidArgument
        );
    }
}

#[test]
fn header_is_current_and_compiles() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/spirokin.h")).unwrap();
    for name in [
        "spirokin_spec_default",
        "spirokin_twist",
        "spirokin_shape_frame",
        "SPIROKIN_CABLE_VENTRAL_LEFT",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
    let src = tempfile_path("check.c");
    std::fs::write(
        &src,
        "#include \"spirokin.h\"\nint main(void) { SpirokinSpec *s = 0; return spirokin_spec_default(&s) == SPIROKIN_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let status = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(dir.join("include"))
        .arg(&src)
        .status();
    match status {
        Ok(s) => assert!(s.success(), "header does not compile"),
        Err(e) => eprintln!("no C compiler available, skipping compile check: {e}"),
    }
    let _ = std::fs::remove_dir_all(src.parent().unwrap());
}

fn tempfile_path(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("spirokin-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}
