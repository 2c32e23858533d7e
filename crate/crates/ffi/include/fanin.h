#ifndef FANIN_H
#define FANIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

#define FANIN_FLAG_LEAK_DOMINATED 1

#define FANIN_FLAG_SDF_EXCEEDS_MAX 2

#define FANIN_FLAG_SATURATION_VIOLATED 4

#define FANIN_FLAG_BAND_NOT_FLAT 8

#define FANIN_FLAG_SDF_UNREACHABLE 16

typedef enum FaninScale {
  /*
   No fan-in: the leak dominates.
   */
  FANIN_SCALE_NONE = 0,
  FANIN_SCALE_SUB_SMALL = 1,
  FANIN_SCALE_SMALL = 2,
  FANIN_SCALE_LARGE = 3,
  FANIN_SCALE_ABOVE_LARGE = 4,
} FaninScale;

typedef enum FaninStatus {
  FANIN_STATUS_OK = 0,
  FANIN_STATUS_NULL_POINTER = 1,
  FANIN_STATUS_INVALID_ARGUMENT = 2,
  FANIN_STATUS_OUT_OF_RANGE = 3,
  FANIN_STATUS_INFEASIBLE = 4,
  FANIN_STATUS_LEAK_DOMINATED = 5,
  FANIN_STATUS_NEVER_FIRES = 6,
  FANIN_STATUS_UNKNOWN_DEVICE = 7,
  FANIN_STATUS_PARSE = 8,
  FANIN_STATUS_IO = 9,
  FANIN_STATUS_INVALID_UTF8 = 10,
  FANIN_STATUS_PANIC = 11,
} FaninStatus;

/*
 Opaque tool configuration.
 */
typedef struct FaninConfig FaninConfig;

/*
 One abacus point with its circuit checks.
 */
typedef struct FaninReport {
  double c_mem;
  double sdf;
  double r_lrs;
  double i_leak;
  double v_th;
  double delta_v_mem;
  double i_input_attenuated;
  /*
   Valid only when `has_fan_in` is true.
   */
  uint64_t fan_in;
  bool has_fan_in;
  /*
   Bitwise OR of the `FANIN_FLAG_*` constants.
   */
  uint32_t flags;
  enum FaninScale scale;
} FaninReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the most recent failed call on this thread, or NULL.
 The pointer stays valid until the next call into this library.
 */
const char *fanin_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *fanin_version(void);

/*
 Built-in reference configuration. Free with `fanin_config_free`.
 */
struct FaninConfig *fanin_config_default(void);

/*
 Parses a TOML configuration. On success `*out` owns a new handle.

 # Safety
 `toml` must be NUL-terminated; `out` must be writable.
 */
enum FaninStatus fanin_config_from_toml(const char *toml, struct FaninConfig **out);

/*
 Releases a handle. NULL is ignored.

 # Safety
 `cfg` must come from this library and not be used afterwards.
 */
void fanin_config_free(struct FaninConfig *cfg);

/*
 Number of configured devices, or 0 for NULL.

 # Safety
 `cfg` must be NULL or a live handle.
 */
size_t fanin_config_device_count(const struct FaninConfig *cfg);

/*
 Fan-in of a named device. `sdf <= 0` selects the configured SDF.

 # Safety
 `cfg` must be a live handle, `device` NUL-terminated, `out` writable.
 */
enum FaninStatus fanin_evaluate(const struct FaninConfig *cfg,
                                const char *device,
                                double sdf,
                                struct FaninReport *out);

/*
 LRS resistance that reproduces `target_fan_in` with the configured
 neuron and pulse.

 # Safety
 `cfg` must be a live handle and `out_ohms` writable.
 */
enum FaninStatus fanin_derive_lrs(const struct FaninConfig *cfg,
                                  uint64_t target_fan_in,
                                  double sdf,
                                  double *out_ohms);

/*
 Attenuator output current and SDF at input `i_in`. Either output may be
 NULL when not wanted.

 # Safety
 `cfg` must be a live handle; non-NULL outputs must be writable.
 */
enum FaninStatus fanin_attenuate(const struct FaninConfig *cfg,
                                 double i_in,
                                 double *out_i_out,
                                 double *out_sdf);

/*
 Steady firing frequency of the configured neuron under constant drive.

 # Safety
 `cfg` must be a live handle and `out_hz` writable.
 */
enum FaninStatus fanin_firing_frequency(const struct FaninConfig *cfg,
                                        double i_const,
                                        double *out_hz);

/*
 Simulates `count` back-to-back LRS reads of a device through an ideal
 attenuator. `*out_event` receives the 1-based event of the first fire,
 or 0 when the neuron never fires. `sdf <= 0` selects the configured SDF
 and `dt <= 0` uses a hundredth of the pulse width.

 # Safety
 `cfg` must be a live handle, `device` NUL-terminated, `out_event` writable.
 */
enum FaninStatus fanin_simulate_first_fire(const struct FaninConfig *cfg,
                                           const char *device,
                                           size_t count,
                                           double sdf,
                                           double dt,
                                           size_t *out_event);

/*
 Runs the configured sweep grid and returns it as CSV text. Release the
 string with `fanin_string_free`.

 # Safety
 `cfg` must be a live handle and `out_csv` writable.
 */
enum FaninStatus fanin_sweep_csv(const struct FaninConfig *cfg, char **out_csv);

/*
 Releases a string returned by this library. NULL is ignored.

 # Safety
 `s` must come from this library and not be used afterwards.
 */
void fanin_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FANIN_H */
