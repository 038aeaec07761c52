/* Minimal embedding example: one controller step per simulated day, then a
 * whole-horizon simulation through the same C ABI.
 *
 * Build (after `cargo build -p suncycle-ffi --release`):
 *   cc daily_loop.c -I../include ../../../target/release/libsuncycle_ffi.a \
 *      -lm -o daily_loop
 */
#include <stdio.h>

#include "suncycle.h"

int main(void) {
    SuncycleParams params = suncycle_params_default();
    SuncycleProfile profile = suncycle_profile_default();

    /* Day-by-day use, as device firmware would drive it. */
    SuncycleController *ctrl = NULL;
    if (suncycle_controller_new(&params, 24, 24, 0.80, &ctrl) != SUNCYCLE_STATUS_OK) {
        return 1;
    }
    uint32_t next_rate = 0;
    if (suncycle_controller_step(ctrl, 0.80, &next_rate) != SUNCYCLE_STATUS_OK) {
        return 2;
    }
    printf("tomorrow's rate: %u fixes\n", next_rate);
    suncycle_controller_free(ctrl);

    /* Batch evaluation of a 60-day constant-harvest horizon. */
    double harvest[60];
    for (int d = 0; d < 60; d++) {
        harvest[d] = 3000.0; /* joules per day */
    }
    SuncycleSimulation *sim = NULL;
    if (suncycle_simulate(harvest, 60, &profile, &params, 1.0, 24, 24, &sim) !=
        SUNCYCLE_STATUS_OK) {
        return 3;
    }
    printf("days=%zu feasible=%d total=%llu min_battery=%.3f\n",
           suncycle_simulation_days(sim),
           (int)suncycle_simulation_feasible(sim),
           (unsigned long long)suncycle_simulation_total_localizations(sim),
           suncycle_simulation_min_battery(sim));
    suncycle_simulation_free(sim);
    return 0;
}
