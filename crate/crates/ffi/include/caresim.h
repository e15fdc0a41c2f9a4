#ifndef CARESIM_H
#define CARESIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CaresimStatus {
  CARESIM_STATUS_OK = 0,
  CARESIM_STATUS_NULL_POINTER = 1,
  CARESIM_STATUS_INVALID_CONFIG = 2,
  CARESIM_STATUS_INVALID_ARGUMENT = 3,
  CARESIM_STATUS_IO = 4,
  CARESIM_STATUS_PANIC = 5,
} CaresimStatus;

typedef enum CaresimPreset {
  CARESIM_PRESET_PAPER_FULL = 0,
  CARESIM_PRESET_PAPER_SINGLE = 1,
} CaresimPreset;

typedef enum CaresimModel {
  CARESIM_MODEL_CLASSICAL = 0,
  CARESIM_MODEL_CSS = 1,
} CaresimModel;

// Opaque simulation handle.
typedef struct CaresimSimulation CaresimSimulation;

// Flat mirror of the engine configuration.
typedef struct CaresimConfig {
  enum CaresimModel model;
  size_t num_doctors;
  size_t num_patients;
  uint32_t num_rounds;
  size_t num_infected_per_round;
  size_t num_repeats;
  double mutation_chance;
  double crossover_chance;
  size_t tournament_size;
  size_t num_elites;
  // 0 selects the population-size default.
  size_t tournaments_per_round;
  // 0 disables snapshots.
  uint32_t snapshot_every;
  uint64_t base_seed;
  // Mutate a single random tie per patient instead of every tie.
  bool single_tie_mutation;
  double infection_severity;
  double needs_doctor_threshold;
  double rating_perfect_threshold;
  double effectiveness_cap;
  // Negative disables the extra search rule for infected patients.
  double infected_seek_threshold;
} CaresimConfig;

// Metrics of one completed round.
typedef struct CaresimRoundMetrics {
  uint32_t round_index;
  double doctor_fitness;
  double patient_fitness;
  double research_ability;
  double empathy;
  double weight_wmrat;
  double weight_mwres;
  double confidence;
  double cred_weight;
  double mean_rating_weight;
  double past_rating_weight;
  double resilience;
  size_t infections;
  size_t treatments;
  size_t untreated;
} CaresimRoundMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Fills `out` with a named parameter set for `model`.
//
// # Safety
// `out` must be null or point to writable memory for one `CaresimConfig`.
enum CaresimStatus caresim_config_preset(enum CaresimPreset preset,
                                         enum CaresimModel model,
                                         struct CaresimConfig *out);

// Checks a configuration without running anything.
//
// # Safety
// `config` must be null or point to a valid `CaresimConfig`.
enum CaresimStatus caresim_config_validate(const struct CaresimConfig *config);

// Creates a simulation seeded with `run_seed` and stores the handle in `out`.
//
// # Safety
// `config` must be null or valid; `out` must be null or writable.
enum CaresimStatus caresim_simulation_new(const struct CaresimConfig *config,
                                          uint64_t run_seed,
                                          struct CaresimSimulation **out);

// Advances one round. `metrics` may be null when the values are not needed.
//
// # Safety
// `sim` must be null or a live handle; `metrics` must be null or writable.
enum CaresimStatus caresim_simulation_run_round(struct CaresimSimulation *sim,
                                                struct CaresimRoundMetrics *metrics);

// Rounds completed so far, or 0 for a null handle.
//
// # Safety
// `sim` must be null or a live handle.
uint32_t caresim_simulation_round(const struct CaresimSimulation *sim);

// Writes the current tie network as JSON to `path` (css model only).
//
// # Safety
// `sim` must be null or a live handle; `path` must be null or a valid
// NUL-terminated UTF-8 string.
enum CaresimStatus caresim_simulation_write_snapshot(const struct CaresimSimulation *sim,
                                                     const char *path);

// Releases a handle. Null is ignored.
//
// # Safety
// `sim` must be null or a handle from `caresim_simulation_new` that has not
// been freed.
void caresim_simulation_free(struct CaresimSimulation *sim);

// Runs every repeat of `config` and writes metrics CSVs and snapshots into
// `out_dir`, creating it if needed.
//
// # Safety
// `config` must be null or valid; `out_dir` must be null or a valid
// NUL-terminated UTF-8 string.
enum CaresimStatus caresim_run_batch_to_csv(const struct CaresimConfig *config,
                                            const char *out_dir);

// Seed of repeat `repeat_index` in a batch started from `base_seed`.
uint64_t caresim_derive_run_seed(uint64_t base_seed, uint64_t repeat_index);

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next caresim call on the same thread.
const char *caresim_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CARESIM_H */
