#ifndef SOFTGAIT_H
#define SOFTGAIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define SG_NUM_LEGS 4

/**
 * Length of the array filled by [`sg_servo_targets`].
 */
#define SG_SERVO_TARGET_COUNT 48

typedef enum SgAxis {
  SG_AXIS_PLUS_X = 0,
  SG_AXIS_MINUS_X = 1,
  SG_AXIS_PLUS_Y = 2,
  SG_AXIS_MINUS_Y = 3,
  SG_AXIS_PLUS_THETA = 4,
  SG_AXIS_MINUS_THETA = 5,
} SgAxis;

/**
 * Result code of every fallible call. `SG_STATUS_OK` is zero.
 */
typedef enum SgStatus {
  SG_STATUS_OK = 0,
  SG_STATUS_NULL_POINTER = 1,
  SG_STATUS_INVALID_ARGUMENT = 2,
  SG_STATUS_INVALID_CONFIG = 3,
  SG_STATUS_SEARCH_ABORTED = 4,
  SG_STATUS_PANIC = 5,
} SgStatus;

/**
 * Opaque simulator handle.
 */
typedef struct SgSim SgSim;

/**
 * Per-cycle body displacement: BL, BL, rad.
 */
typedef struct SgDisplacement {
  double dx;
  double dy;
  double dtheta;
} SgDisplacement;

typedef struct SgCoefficients {
  double a;
  double b;
  double c;
  double d;
  double e;
  double f;
} SgCoefficients;

typedef struct SgEvalConfig {
  double step_delay;
  uint32_t cycles_per_eval;
  double per_eval_overhead;
} SgEvalConfig;

typedef struct SgPair {
  uint8_t first;
  uint8_t second;
} SgPair;

/**
 * One primitive pair per leg, legs A-D.
 */
typedef struct SgAssignment {
  struct SgPair pairs[SG_NUM_LEGS];
} SgAssignment;

/**
 * Meters, meters, radians. Used for poses and twists alike.
 */
typedef struct SgPose {
  double x;
  double y;
  double theta;
} SgPose;

typedef struct SgSimConfig {
  uint64_t seed;
  struct SgPose noise_sigma;
  double wear_rate;
  struct SgPose effect_scale;
  double max_step_translation;
  double max_step_rotation;
} SgSimConfig;

/**
 * Search settings. `leg_order` holds `n_legs` leg indices (0 = A .. 3 = D).
 */
typedef struct SgSearchConfig {
  uint8_t leg_order[SG_NUM_LEGS];
  uint32_t n_legs;
  uint32_t n_prims;
  uint32_t repeats;
} SgSearchConfig;

/**
 * Called after every evaluation with its index, the evaluated assignment and
 * its reward. Return non-zero to abort the search.
 */
typedef int (*SgProgressFn)(void *user,
                            uint64_t eval_index,
                            const struct SgAssignment *gait,
                            double reward);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length in
 * bytes, excluding the terminator.
 *
 * # Safety
 * `buf` must be null or valid for `len` writable bytes.
 */
size_t sg_last_error_message(char *buf, size_t len);

/**
 * Reward of a per-cycle displacement. NaN if either pointer is null.
 *
 * # Safety
 * Pointers must be null or point to valid values.
 */
double sg_reward(const struct SgDisplacement *d, const struct SgCoefficients *k);

/**
 * # Safety
 * `out` must be null or valid for writing.
 */
enum SgStatus sg_preset(enum SgAxis axis, struct SgCoefficients *out);

uint64_t sg_evals_required(uint32_t n_legs, uint32_t n_prims);

/**
 * Simulated seconds for `rounds` rounds of search at the given timing.
 *
 * # Safety
 * Pointers must be null or valid.
 */
enum SgStatus sg_estimate_training_time(const struct SgEvalConfig *eval,
                                        uint32_t n_legs,
                                        uint32_t n_prims,
                                        uint32_t rounds,
                                        double *out_seconds);

/**
 * Servo angles (rad) of the three steps of a gait, step-major:
 * `out[step * 16 + servo]`. `out` must hold `SG_SERVO_TARGET_COUNT` doubles.
 *
 * # Safety
 * `gait` must be valid; `out` must be valid for 48 writes.
 */
enum SgStatus sg_servo_targets(const struct SgAssignment *gait, double *out);

/**
 * Fills `out` with the default simulator configuration.
 *
 * # Safety
 * `out` must be null or valid for writing.
 */
enum SgStatus sg_sim_config_default(struct SgSimConfig *out);

/**
 * Creates a simulator. On success `*out` owns a handle to free with
 * [`sg_sim_free`].
 *
 * # Safety
 * `config` must be valid; `out` must be valid for writing.
 */
enum SgStatus sg_sim_new(const struct SgSimConfig *config, struct SgSim **out);

/**
 * Releases a simulator. Null is ignored.
 *
 * # Safety
 * `sim` must be null or a handle from [`sg_sim_new`] not yet freed.
 */
void sg_sim_free(struct SgSim *sim);

/**
 * Runs one evaluation of `gait`, advancing the simulator, and writes the
 * per-cycle body-frame displacement.
 *
 * # Safety
 * All pointers must be valid; `sim` must be a live handle.
 */
enum SgStatus sg_sim_execute(struct SgSim *sim,
                             const struct SgAssignment *gait,
                             const struct SgEvalConfig *eval,
                             struct SgDisplacement *out);

/**
 * # Safety
 * `sim` must be a live handle; `out` must be valid for writing.
 */
enum SgStatus sg_sim_pose(const struct SgSim *sim, struct SgPose *out);

/**
 * # Safety
 * `sim` must be a live handle.
 */
enum SgStatus sg_sim_reset_pose(struct SgSim *sim, struct SgPose pose);

/**
 * Legs A-D in order, all seven primitives, one repeat.
 */
struct SgSearchConfig sg_search_config_default(void);

/**
 * Greedy per-leg search from `initial` on the simulator, followed by
 * `rounds - 1` refinement rounds. `search` may be null for the full space.
 *
 * # Safety
 * Pointers other than `search`, `callback` and `user` must be valid;
 * `sim` must be a live handle.
 */
enum SgStatus sg_tree_search(struct SgSim *sim,
                             const struct SgCoefficients *coefficients,
                             const struct SgEvalConfig *eval,
                             const struct SgSearchConfig *search,
                             const struct SgAssignment *initial,
                             uint32_t rounds,
                             SgProgressFn callback,
                             void *user,
                             struct SgAssignment *best_out,
                             double *reward_out);

/**
 * Refinement rounds around `existing`; each round first re-measures it.
 *
 * # Safety
 * As for [`sg_tree_search`].
 */
enum SgStatus sg_refine(struct SgSim *sim,
                        const struct SgCoefficients *coefficients,
                        const struct SgEvalConfig *eval,
                        const struct SgSearchConfig *search,
                        const struct SgAssignment *existing,
                        uint32_t rounds,
                        SgProgressFn callback,
                        void *user,
                        struct SgAssignment *best_out,
                        double *reward_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SOFTGAIT_H */
