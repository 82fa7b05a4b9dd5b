#ifndef NAVBENCH_H
#define NAVBENCH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum {
  /**
   * The call succeeded.
   */
  NAVBENCH_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  NAVBENCH_STATUS_NULL_POINTER = 1,
  /**
   * An argument was out of range or a config failed validation.
   */
  NAVBENCH_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Text input (RON world, TOML config) failed to parse.
   */
  NAVBENCH_STATUS_PARSE = 3,
  /**
   * An index was past the end of the collection.
   */
  NAVBENCH_STATUS_OUT_OF_RANGE = 4,
  /**
   * The operation panicked internally; the output is untouched.
   */
  NAVBENCH_STATUS_INTERNAL = 5,
} NavbenchStatus;

/**
 * How an episode ended.
 */
typedef enum {
  NAVBENCH_OUTCOME_SUCCESS = 0,
  NAVBENCH_OUTCOME_TIMEOUT = 1,
  NAVBENCH_OUTCOME_COLLISION = 2,
  NAVBENCH_OUTCOME_PLANNER_ABORT = 3,
} NavbenchOutcome;

/**
 * Opaque pipeline configuration handle.
 */
typedef struct NavbenchConfig NavbenchConfig;

/**
 * Opaque episode result handle.
 */
typedef struct NavbenchRecord NavbenchRecord;

/**
 * Opaque scenario world handle.
 */
typedef struct NavbenchWorld NavbenchWorld;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Generate the scenario world for a difficulty tier and seed.
 *
 * `difficulty`: 0 = easy, 1 = medium, 2 = hard. Returns null for any other
 * value. Free with [`navbench_world_free`].
 */
NavbenchWorld *navbench_world_generate(uint32_t difficulty, uint64_t seed);

/**
 * The fixed grass-corridor world (the one feasible route passes tall
 * grass). Free with [`navbench_world_free`].
 */
NavbenchWorld *navbench_world_corridor(void);

/**
 * Parse a world from RON text.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string; `out` must be a valid
 * pointer. On `Ok`, `*out` owns the world and must be released with
 * [`navbench_world_free`]; on any error `*out` is untouched.
 */
NavbenchStatus navbench_world_parse_ron(const char *text, NavbenchWorld **out);

/**
 * Serialize a world to RON. Returns null if `world` is null; otherwise a
 * string owned by the caller (release with [`navbench_string_free`]).
 *
 * # Safety
 * `world` must be a live handle from this library or null.
 */
char *navbench_world_to_ron(const NavbenchWorld *world);

/**
 * Release a world handle. Null is a no-op.
 *
 * # Safety
 * `world` must be a handle from this library, not yet freed, or null.
 */
void navbench_world_free(NavbenchWorld *world);

/**
 * Default pipeline config for a sensor mode (0 = lidar, 1 = mono).
 * Returns null for any other value. Free with [`navbench_config_free`].
 */
NavbenchConfig *navbench_config_default(uint32_t mode);

/**
 * Default config with a bundled planner preset applied.
 *
 * `mode`: 0 = lidar, 1 = mono. `preset`: 0 = real-params, 1 = sim-tuned.
 * Returns null for out-of-range values. Free with [`navbench_config_free`].
 */
NavbenchConfig *navbench_config_preset(uint32_t mode, uint32_t preset);

/**
 * Parse a TOML config (same schema as the CLI's `--config` files) and
 * resolve it against the built-in defaults.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string; `out` must be a valid
 * pointer. On `Ok`, `*out` owns the config and must be released with
 * [`navbench_config_free`]; on any error `*out` is untouched.
 */
NavbenchStatus navbench_config_parse_toml(const char *text, NavbenchConfig **out);

/**
 * Release a config handle. Null is a no-op.
 *
 * # Safety
 * `config` must be a handle from this library, not yet freed, or null.
 */
void navbench_config_free(NavbenchConfig *config);

/**
 * Run one navigation episode from (0, 0) toward `(goal_x, goal_y)` with
 * the standard wall-clock budget, and hand back its record.
 *
 * # Safety
 * `world` and `config` must be live handles; `out` must be a valid
 * pointer. On `Ok`, `*out` owns the record and must be released with
 * [`navbench_record_free`]; on any error `*out` is untouched.
 */
NavbenchStatus navbench_run_episode(const NavbenchWorld *world,
                                    const NavbenchConfig *config,
                                    double goal_x,
                                    double goal_y,
                                    uint64_t seed,
                                    NavbenchRecord **out);

/**
 * Read how the episode ended.
 *
 * # Safety
 * `record` must be a live handle; `out` must be a valid pointer.
 */
NavbenchStatus navbench_record_outcome(const NavbenchRecord *record, NavbenchOutcome *out);

/**
 * Read the driven path length in metres.
 *
 * # Safety
 * `record` must be a live handle; `out` must be a valid pointer.
 */
NavbenchStatus navbench_record_path_length(const NavbenchRecord *record, double *out);

/**
 * Number of (t, pose) samples in the record's trajectory.
 *
 * # Safety
 * `record` must be a live handle or null (null reads as 0).
 */
uintptr_t navbench_record_trajectory_len(const NavbenchRecord *record);

/**
 * Read one trajectory sample. Any of the value pointers may be null to
 * skip that field.
 *
 * # Safety
 * `record` must be a live handle; non-null value pointers must be valid.
 */
NavbenchStatus navbench_record_trajectory_at(const NavbenchRecord *record,
                                             uintptr_t index,
                                             double *t,
                                             double *x,
                                             double *y,
                                             double *theta);

/**
 * Serialize the whole record (outcome, path length, trajectory) as JSON.
 * Returns null if `record` is null; otherwise a string owned by the
 * caller (release with [`navbench_string_free`]).
 *
 * # Safety
 * `record` must be a live handle or null.
 */
char *navbench_record_to_json(const NavbenchRecord *record);

/**
 * Release a record handle. Null is a no-op.
 *
 * # Safety
 * `record` must be a handle from this library, not yet freed, or null.
 */
void navbench_record_free(NavbenchRecord *record);

/**
 * Release a string returned by this library. Null is a no-op.
 *
 * # Safety
 * `s` must be a string returned by this library, not yet freed, or null.
 */
void navbench_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NAVBENCH_H */
