#ifndef SPIROKIN_H
#define SPIROKIN_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SpirokinStatus {
  SPIROKIN_STATUS_OK = 0,
  SPIROKIN_STATUS_NULL_POINTER = 1,
  SPIROKIN_STATUS_INVALID_ARGUMENT = 2,
  SPIROKIN_STATUS_DOMAIN = 3,
  SPIROKIN_STATUS_NOT_CONVERGED = 4,
  SPIROKIN_STATUS_OUT_OF_RANGE = 5,
  SPIROKIN_STATUS_BUFFER_TOO_SMALL = 6,
  SPIROKIN_STATUS_INTERNAL = 7,
} SpirokinStatus;

typedef enum SpirokinCable {
  SPIROKIN_CABLE_DORSAL = 0,
  SPIROKIN_CABLE_VENTRAL_LEFT = 1,
  SPIROKIN_CABLE_VENTRAL_RIGHT = 2,
} SpirokinCable;

/*
 Backbone shape: one frame at the base and one at the distal end of each
 section.
 */
typedef struct SpirokinShape SpirokinShape;

/*
 Manipulator description.
 */
typedef struct SpirokinSpec SpirokinSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread; empty after a success.
 Valid until the next call into the library from the same thread.
 */
const char *spirokin_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *spirokin_version(void);

/*
 Solve the spiral design for ratio `m` and rigid-arm radius `r_rigid` and
 build the manipulator with default material constants.

 # Safety
 `out` must be a valid pointer to write a handle into.
 */
enum SpirokinStatus spirokin_spec_design(double m,
                                         double r_rigid,
                                         double joint_fraction,
                                         struct SpirokinSpec **out);

/*
 The default trunk design.

 # Safety
 `out` must be a valid pointer to write a handle into.
 */
enum SpirokinStatus spirokin_spec_default(struct SpirokinSpec **out);

/*
 Parse a manipulator description from JSON.

 # Safety
 `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SpirokinStatus spirokin_spec_from_json(const char *json, struct SpirokinSpec **out);

/*
 Serialise a spec to JSON. Release the string with [`spirokin_string_free`].

 # Safety
 `spec` must be a live handle and `out` a valid pointer.
 */
enum SpirokinStatus spirokin_spec_to_json(const struct SpirokinSpec *spec, char **out);

/*
 # Safety
 `s` must come from this library or be null.
 */
void spirokin_string_free(char *s);

/*
 Number of joints, or 0 for a null handle.

 # Safety
 `spec` must be a live handle or null.
 */
size_t spirokin_spec_joint_count(const struct SpirokinSpec *spec);

/*
 Sum of link lengths (mm), or 0 for a null handle.

 # Safety
 `spec` must be a live handle or null.
 */
double spirokin_spec_arm_length(const struct SpirokinSpec *spec);

/*
 # Safety
 `spec` must come from this library or be null, and is invalid afterwards.
 */
void spirokin_spec_free(struct SpirokinSpec *spec);

/*
 Rest shape under gravity with the base tilted `tilt` below horizontal.

 # Safety
 `spec` must be a live handle and `out` a valid pointer.
 */
enum SpirokinStatus spirokin_rest(const struct SpirokinSpec *spec,
                                  double tilt,
                                  struct SpirokinShape **out);

/*
 Shorten one cable by `shorten_mm` from the straight arm (no gravity).

 # Safety
 `spec` must be a live handle and `out` a valid pointer.
 */
enum SpirokinStatus spirokin_bend(const struct SpirokinSpec *spec,
                                  uint32_t cable_id,
                                  double shorten_mm,
                                  struct SpirokinShape **out);

/*
 Shorten `cable1` by `d1`, then `cable2` by `d2`. With `with_gravity`
 non-zero the command starts from the rest shape at `tilt`.

 # Safety
 `spec` must be a live handle and `out` a valid pointer.
 */
enum SpirokinStatus spirokin_twist(const struct SpirokinSpec *spec,
                                   uint32_t cable1,
                                   double d1,
                                   uint32_t cable2,
                                   double d2,
                                   int32_t with_gravity,
                                   double tilt,
                                   struct SpirokinShape **out);

/*
 Number of frames (joints + 2), or 0 for a null handle.

 # Safety
 `shape` must be a live handle or null.
 */
size_t spirokin_shape_frame_count(const struct SpirokinShape *shape);

/*
 Copy frame origins as `x, y, z` triples into `buf` (`3 × frame count`
 doubles).

 # Safety
 `shape` must be a live handle and `buf` valid for `len` doubles.
 */
enum SpirokinStatus spirokin_shape_points(const struct SpirokinShape *shape,
                                          double *buf,
                                          size_t len);

/*
 Copy joint rotation angles (radians, base first) into `buf`.

 # Safety
 `shape` must be a live handle and `buf` valid for `len` doubles.
 */
enum SpirokinStatus spirokin_shape_angles(const struct SpirokinShape *shape,
                                          double *buf,
                                          size_t len);

/*
 Homogeneous transform of frame `index`, row-major, into `out16`.

 # Safety
 `shape` must be a live handle and `out16` valid for 16 doubles.
 */
enum SpirokinStatus spirokin_shape_frame(const struct SpirokinShape *shape,
                                         size_t index,
                                         double *out16);

/*
 # Safety
 `shape` must come from this library or be null, and is invalid afterwards.
 */
void spirokin_shape_free(struct SpirokinShape *shape);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPIROKIN_H */
