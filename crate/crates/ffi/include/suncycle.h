#ifndef SUNCYCLE_H
#define SUNCYCLE_H

/* Generated by cbindgen from the suncycle-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Controller FSM state.
 */
typedef enum {
  SUNCYCLE_FSM_STATE_DECREASE = 0,
  SUNCYCLE_FSM_STATE_HOLD = 1,
  SUNCYCLE_FSM_STATE_INCREASE = 2,
} SuncycleFsmState;

/**
 * Call outcome. Anything but `OK` leaves out-parameters untouched.
 */
typedef enum {
  SUNCYCLE_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  SUNCYCLE_STATUS_NULL_POINTER = 1,
  /**
   * A value argument was out of its documented range.
   */
  SUNCYCLE_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The battery reading was zero; the control metric is undefined there.
   */
  SUNCYCLE_STATUS_BATTERY_DRAINED = 3,
} SuncycleStatus;

/**
 * Opaque handle to a running controller.
 */
typedef struct SuncycleController SuncycleController;

/**
 * Opaque handle to a finished simulation.
 */
typedef struct SuncycleSimulation SuncycleSimulation;

/**
 * Controller thresholds; see `suncycle_params_default` for the tuned
 * reference values.
 */
typedef struct {
  double beta1;
  double beta2;
  /**
   * Battery fraction at and above which the rate always ramps up.
   */
  double gamma;
  /**
   * Weight of the day-over-day battery difference (battery capacity in
   * ampere-hours for the reference tuning).
   */
  double metric_scale;
} SuncycleParams;

/**
 * Device energy model; see `suncycle_profile_default` for the reference
 * hardware numbers.
 */
typedef struct {
  double energy_per_localization_j;
  double idle_power_w;
  double battery_capacity_mah;
  double system_voltage_v;
  /**
   * Fraction below which a day counts as a battery-floor violation.
   */
  double battery_floor;
} SuncycleProfile;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The tuned reference thresholds.
 */
SuncycleParams suncycle_params_default(void);

/**
 * The reference device profile (5.1 J per localization, 19 mW idle,
 * 3000 mAh at 3.8 V, 5 % floor).
 */
SuncycleProfile suncycle_profile_default(void);

/**
 * Evaluate the control metric for today's and yesterday's end-of-day
 * battery fractions. On success writes whether the metric saturated
 * (battery at or above gamma) and, when finite, its value; a saturated
 * metric leaves `out_value` untouched.
 *
 * # Safety
 * `params`, `out_saturated` and `out_value` must be valid for the call.
 */
SuncycleStatus suncycle_metric(double battery_today,
                               double battery_yesterday,
                               const SuncycleParams *params,
                               bool *out_saturated,
                               double *out_value);

/**
 * Create a controller starting at rate `k_min` in the hold state.
 * `initial_battery` seeds the previous-day reading; pass the first
 * observed battery fraction so the first step sees a zero difference.
 * The handle must be released with `suncycle_controller_free`.
 *
 * # Safety
 * `params` and `out_controller` must be valid for the call.
 */
SuncycleStatus suncycle_controller_new(const SuncycleParams *params,
                                       uint32_t k_min,
                                       uint32_t increase_step,
                                       double initial_battery,
                                       SuncycleController **out_controller);

/**
 * Feed one end-of-day battery fraction; writes the sampling rate to use
 * for the next day.
 *
 * # Safety
 * `controller` must be a live handle from `suncycle_controller_new`;
 * `out_next_rate` must be valid for the call.
 */
SuncycleStatus suncycle_controller_step(SuncycleController *controller,
                                        double battery_today,
                                        uint32_t *out_next_rate);

/**
 * Current samplings-per-day rate. Returns 0 on a null handle.
 *
 * # Safety
 * `controller` must be a live handle or null.
 */
uint32_t suncycle_controller_rate(const SuncycleController *controller);

/**
 * Current FSM state. Returns `HOLD` on a null handle.
 *
 * # Safety
 * `controller` must be a live handle or null.
 */
SuncycleFsmState suncycle_controller_fsm_state(const SuncycleController *controller);

/**
 * Release a controller handle. Null is a no-op.
 *
 * # Safety
 * `controller` must be a handle from `suncycle_controller_new` that has
 * not been freed, or null.
 */
void suncycle_controller_free(SuncycleController *controller);

/**
 * Run the closed loop over `days` daily harvest values (joules per day).
 * The returned handle must be released with `suncycle_simulation_free`.
 *
 * # Safety
 * `daily_harvest_j` must point to `days` readable doubles; `profile`,
 * `params` and `out_simulation` must be valid for the call.
 */
SuncycleStatus suncycle_simulate(const double *daily_harvest_j,
                                 uintptr_t days,
                                 const SuncycleProfile *profile,
                                 const SuncycleParams *params,
                                 double initial_battery,
                                 uint32_t k_min,
                                 uint32_t increase_step,
                                 SuncycleSimulation **out_simulation);

/**
 * Number of simulated days. Returns 0 on a null handle.
 *
 * # Safety
 * `simulation` must be a live handle or null.
 */
uintptr_t suncycle_simulation_days(const SuncycleSimulation *simulation);

/**
 * Whether the battery stayed at or above the floor on every day.
 *
 * # Safety
 * `simulation` must be a live handle or null (null reads as false).
 */
bool suncycle_simulation_feasible(const SuncycleSimulation *simulation);

/**
 * Total samplings over the horizon.
 *
 * # Safety
 * `simulation` must be a live handle or null (null reads as 0).
 */
uint64_t suncycle_simulation_total_localizations(const SuncycleSimulation *simulation);

/**
 * Lowest end-of-day battery fraction seen.
 *
 * # Safety
 * `simulation` must be a live handle or null (null reads as 0).
 */
double suncycle_simulation_min_battery(const SuncycleSimulation *simulation);

/**
 * Read one day's record. Out-pointers may be null to skip a field.
 *
 * # Safety
 * `simulation` must be a live handle; non-null out-pointers must be valid
 * for the call.
 */
SuncycleStatus suncycle_simulation_day(const SuncycleSimulation *simulation,
                                       uintptr_t day,
                                       double *out_harvested_j,
                                       uint32_t *out_rate,
                                       double *out_battery_end,
                                       SuncycleFsmState *out_state,
                                       double *out_spilled_j);

/**
 * Release a simulation handle. Null is a no-op.
 *
 * # Safety
 * `simulation` must be a handle from `suncycle_simulate` that has not been
 * freed, or null.
 */
void suncycle_simulation_free(SuncycleSimulation *simulation);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* SUNCYCLE_H */
