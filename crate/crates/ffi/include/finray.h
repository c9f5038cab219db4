#ifndef FINRAY_H
#define FINRAY_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum FinrayStatus {
  FINRAY_STATUS_OK = 0,
  FINRAY_STATUS_NULL_POINTER = 1,
  FINRAY_STATUS_INVALID_ARGUMENT = 2,
  FINRAY_STATUS_UNKNOWN_ENTITY = 3,
  FINRAY_STATUS_NUMERICAL = 4,
  FINRAY_STATUS_PANIC = 5,
} FinrayStatus;

typedef enum FinrayFailureMode {
  FINRAY_FAILURE_MODE_YIELD = 0,
  FINRAY_FAILURE_MODE_BUCKLING = 1,
} FinrayFailureMode;

typedef enum FinrayAxis {
  FINRAY_AXIS_X = 0,
  FINRAY_AXIS_Y = 1,
} FinrayAxis;

typedef enum FinrayOutcome {
  FINRAY_OUTCOME_SUCCESS = 0,
  FINRAY_OUTCOME_JAMMED = 1,
  FINRAY_OUTCOME_MISSED = 2,
  FINRAY_OUTCOME_OVERFORCE = 3,
} FinrayOutcome;

/**
 * Opaque finger design.
 */
typedef struct FinrayDesign FinrayDesign;

/**
 * Opaque insertion scenario with its search strategy.
 */
typedef struct FinrayScenario FinrayScenario;

/**
 * Fingertip stiffness, N/mm.
 */
typedef struct FinrayStiffness {
  double kxx;
  double kyy;
  double kzz;
  double kzy;
} FinrayStiffness;

typedef struct FinrayStrength {
  /**
   * N
   */
  double max_force;
  /**
   * mm
   */
  double max_deflection;
  enum FinrayFailureMode failure_mode;
} FinrayStrength;

typedef struct FinrayViscoFit {
  double k;
  double b;
  double residual_rms;
} FinrayViscoFit;

typedef struct FinrayInsertResult {
  enum FinrayOutcome outcome;
  /**
   * N
   */
  double peak_contact_force;
  /**
   * mm
   */
  double insert_depth;
} FinrayInsertResult;

typedef struct FinrayWindow {
  double min_offset;
  double max_offset;
  double window;
  enum FinrayOutcome limiting_outcome;
} FinrayWindow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread. Valid until the next
 * failing call on the same thread; never null.
 */
const char *finray_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *finray_version(void);

/**
 * Creates a design with the default envelope, notched contact-plane tip and
 * 10° mount. `material` is a builtin name such as `"PLA+"` or `"PETG"`.
 *
 * # Safety
 * `material` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FinrayStatus finray_design_new(double infill_direction,
                                    double infill_density,
                                    const char *material,
                                    struct FinrayDesign **out);

/**
 * # Safety
 * `design` must come from [`finray_design_new`] and not be used afterwards. Null is ignored.
 */
void finray_design_free(struct FinrayDesign *design);

/**
 * # Safety
 * `design` must be a live handle.
 */
enum FinrayStatus finray_design_set_mount_angle(struct FinrayDesign *design, double degrees);

/**
 * Modulus scale that makes `anchor` reproduce `measured_kyy`.
 *
 * # Safety
 * `anchor` must be a live handle and `out_scale` a valid pointer.
 */
enum FinrayStatus finray_calibration_scale(const struct FinrayDesign *anchor,
                                           double measured_kyy,
                                           size_t elems_per_member,
                                           double *out_scale);

/**
 * Applies a calibration scale to the design's material. A design can be
 * calibrated once.
 *
 * # Safety
 * `design` must be a live handle.
 */
enum FinrayStatus finray_design_calibrate(struct FinrayDesign *design, double scale);

/**
 * # Safety
 * `design` must be a live handle and `out` a valid pointer.
 */
enum FinrayStatus finray_design_rib_count(const struct FinrayDesign *design,
                                          size_t elems_per_member,
                                          size_t *out);

/**
 * Identifies the fingertip stiffness with the default probe plan.
 *
 * # Safety
 * `design` must be a live handle and `out` a valid pointer.
 */
enum FinrayStatus finray_design_stiffness(const struct FinrayDesign *design,
                                          size_t elems_per_member,
                                          struct FinrayStiffness *out);

/**
 * Axial push to first yield or instability.
 *
 * # Safety
 * `design` must be a live handle and `out` a valid pointer.
 */
enum FinrayStatus finray_design_strength(const struct FinrayDesign *design,
                                         size_t elems_per_member,
                                         struct FinrayStrength *out);

/**
 * Angle of the stiff principal axis from z toward y, degrees.
 *
 * # Safety
 * Both pointers must be valid.
 */
enum FinrayStatus finray_principal_angle(const struct FinrayStiffness *k, double *out_degrees);

/**
 * Line through (`angle_a`, `k_a`) and (`angle_b`, `k_b`) evaluated at `target`.
 *
 * # Safety
 * `out_value` must be valid; `out_slope` may be null.
 */
enum FinrayStatus finray_extrapolate_stiffness(double angle_a,
                                               double k_a,
                                               double angle_b,
                                               double k_b,
                                               double target,
                                               double *out_value,
                                               double *out_slope);

/**
 * Least-squares fit of `F = k δ + b δ̇` to `n` samples.
 *
 * # Safety
 * The three arrays must hold `n` values each; `out` must be valid.
 */
enum FinrayStatus finray_fit_viscoelastic(const double *displacement,
                                          const double *velocity,
                                          const double *force,
                                          size_t n,
                                          struct FinrayViscoFit *out);

/**
 * Default connector insertion gripped by two fingers of stiffness `k`, with
 * the default search strategy.
 *
 * # Safety
 * `k` and `out` must be valid pointers.
 */
enum FinrayStatus finray_scenario_new(const struct FinrayStiffness *k, struct FinrayScenario **out);

/**
 * # Safety
 * `scenario` must come from [`finray_scenario_new`] and not be used afterwards. Null is ignored.
 */
void finray_scenario_free(struct FinrayScenario *scenario);

/**
 * Socket offset along one axis, mm. The other axis is reset to zero.
 *
 * # Safety
 * `scenario` must be a live handle.
 */
enum FinrayStatus finray_scenario_set_misalignment(struct FinrayScenario *scenario,
                                                   enum FinrayAxis axis_,
                                                   double offset);

/**
 * # Safety
 * `scenario` must be a live handle.
 */
enum FinrayStatus finray_scenario_set_clearance(struct FinrayScenario *scenario, double clearance);

/**
 * # Safety
 * `scenario` must be a live handle and `out` a valid pointer.
 */
enum FinrayStatus finray_simulate_insert(const struct FinrayScenario *scenario,
                                         struct FinrayInsertResult *out);

/**
 * Misalignment window along `axis_` scanned at `step` mm.
 *
 * # Safety
 * `scenario` must be a live handle and `out` a valid pointer.
 */
enum FinrayStatus finray_tolerance_window(const struct FinrayScenario *scenario,
                                          enum FinrayAxis axis_,
                                          double step,
                                          struct FinrayWindow *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FINRAY_H */
