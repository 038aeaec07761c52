//! C ABI for the adaptive sampling controller and the daily battery
//! simulator, so the control logic proven here can be called from C,
//! Python (ctypes/cffi) or any other language with a C FFI.
//!
//! Conventions: handles (`SuncycleController`, `SuncycleSimulation`) are
//! opaque pointers created by `*_new`/`suncycle_simulate` and released by
//! the matching `*_free`; every fallible call returns a [`SuncycleStatus`]
//! and writes results through out-pointers. Passing null where a non-null
//! pointer is expected yields `NULL_POINTER` rather than undefined
//! behavior; handles themselves must still be valid, not-yet-freed pointers
//! from this library.
//!
//! The generated header lands in `include/suncycle.h` at build time.

use suncycle::controller::{compute_metric, Controller, FsmState, TuningParams};
use suncycle::energy::DeviceEnergyProfile;
use suncycle::sim::{run_simulation, SimulationResult};
use suncycle::trace::HarvestTrace;
use suncycle::Error;

/// Call outcome. Anything but `OK` leaves out-parameters untouched.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuncycleStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A value argument was out of its documented range.
    InvalidArgument = 2,
    /// The battery reading was zero; the control metric is undefined there.
    BatteryDrained = 3,
}

/// Controller thresholds; see `suncycle_params_default` for the tuned
/// reference values.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SuncycleParams {
    pub beta1: f64,
    pub beta2: f64,
    /// Battery fraction at and above which the rate always ramps up.
    pub gamma: f64,
    /// Weight of the day-over-day battery difference (battery capacity in
    /// ampere-hours for the reference tuning).
    pub metric_scale: f64,
}

/// Device energy model; see `suncycle_profile_default` for the reference
/// hardware numbers.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SuncycleProfile {
    pub energy_per_localization_j: f64,
    pub idle_power_w: f64,
    pub battery_capacity_mah: f64,
    pub system_voltage_v: f64,
    /// Fraction below which a day counts as a battery-floor violation.
    pub battery_floor: f64,
}

/// Controller FSM state.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuncycleFsmState {
    Decrease = 0,
    Hold = 1,
    Increase = 2,
}

impl From<FsmState> for SuncycleFsmState {
    fn from(state: FsmState) -> Self {
        match state {
            FsmState::Decrease => SuncycleFsmState::Decrease,
            FsmState::Hold => SuncycleFsmState::Hold,
            FsmState::Increase => SuncycleFsmState::Increase,
        }
    }
}

/// Opaque handle to a running controller.
pub struct SuncycleController {
    inner: Controller,
}

/// Opaque handle to a finished simulation.
pub struct SuncycleSimulation {
    inner: SimulationResult,
}

fn to_params(p: &SuncycleParams) -> Result<TuningParams, SuncycleStatus> {
    TuningParams::new(p.beta1, p.beta2, p.gamma, p.metric_scale)
        .map_err(|_| SuncycleStatus::InvalidArgument)
}

fn to_profile(p: &SuncycleProfile) -> Result<DeviceEnergyProfile, SuncycleStatus> {
    DeviceEnergyProfile::new(
        p.energy_per_localization_j,
        p.idle_power_w,
        p.battery_capacity_mah,
        p.system_voltage_v,
        p.battery_floor,
    )
    .map_err(|_| SuncycleStatus::InvalidArgument)
}

/// The tuned reference thresholds.
#[no_mangle]
pub extern "C" fn suncycle_params_default() -> SuncycleParams {
    let p = TuningParams::tuned();
    SuncycleParams {
        beta1: p.beta1,
        beta2: p.beta2,
        gamma: p.gamma,
        metric_scale: p.metric_scale,
    }
}

/// The reference device profile (5.1 J per localization, 19 mW idle,
/// 3000 mAh at 3.8 V, 5 % floor).
#[no_mangle]
pub extern "C" fn suncycle_profile_default() -> SuncycleProfile {
    let p = DeviceEnergyProfile::default();
    SuncycleProfile {
        energy_per_localization_j: p.energy_per_localization_j(),
        idle_power_w: p.idle_power_w(),
        battery_capacity_mah: p.battery_capacity_mah(),
        system_voltage_v: p.system_voltage_v(),
        battery_floor: p.battery_floor(),
    }
}

/// Evaluate the control metric for today's and yesterday's end-of-day
/// battery fractions. On success writes whether the metric saturated
/// (battery at or above gamma) and, when finite, its value; a saturated
/// metric leaves `out_value` untouched.
///
/// # Safety
/// `params`, `out_saturated` and `out_value` must be valid for the call.
#[no_mangle]
pub unsafe extern "C" fn suncycle_metric(
    battery_today: f64,
    battery_yesterday: f64,
    params: *const SuncycleParams,
    out_saturated: *mut bool,
    out_value: *mut f64,
) -> SuncycleStatus {
    if params.is_null() || out_saturated.is_null() || out_value.is_null() {
        return SuncycleStatus::NullPointer;
    }
    if !(0.0..=1.0).contains(&battery_today) || !(0.0..=1.0).contains(&battery_yesterday) {
        return SuncycleStatus::InvalidArgument;
    }
    let params = match to_params(&*params) {
        Ok(p) => p,
        Err(status) => return status,
    };
    match compute_metric(battery_today, battery_yesterday, &params) {
        Ok(m) => {
            *out_saturated = m.is_saturated();
            if let Some(v) = m.as_finite() {
                *out_value = v;
            }
            SuncycleStatus::Ok
        }
        Err(Error::BatteryDrained) => SuncycleStatus::BatteryDrained,
        Err(_) => SuncycleStatus::InvalidArgument,
    }
}

/// Create a controller starting at rate `k_min` in the hold state.
/// `initial_battery` seeds the previous-day reading; pass the first
/// observed battery fraction so the first step sees a zero difference.
/// The handle must be released with `suncycle_controller_free`.
///
/// # Safety
/// `params` and `out_controller` must be valid for the call.
#[no_mangle]
pub unsafe extern "C" fn suncycle_controller_new(
    params: *const SuncycleParams,
    k_min: u32,
    increase_step: u32,
    initial_battery: f64,
    out_controller: *mut *mut SuncycleController,
) -> SuncycleStatus {
    if params.is_null() || out_controller.is_null() {
        return SuncycleStatus::NullPointer;
    }
    let params = match to_params(&*params) {
        Ok(p) => p,
        Err(status) => return status,
    };
    match Controller::new(params, k_min, increase_step, initial_battery) {
        Ok(inner) => {
            *out_controller = Box::into_raw(Box::new(SuncycleController { inner }));
            SuncycleStatus::Ok
        }
        Err(_) => SuncycleStatus::InvalidArgument,
    }
}

/// Feed one end-of-day battery fraction; writes the sampling rate to use
/// for the next day.
///
/// # Safety
/// `controller` must be a live handle from `suncycle_controller_new`;
/// `out_next_rate` must be valid for the call.
#[no_mangle]
pub unsafe extern "C" fn suncycle_controller_step(
    controller: *mut SuncycleController,
    battery_today: f64,
    out_next_rate: *mut u32,
) -> SuncycleStatus {
    if controller.is_null() || out_next_rate.is_null() {
        return SuncycleStatus::NullPointer;
    }
    if !(0.0..=1.0).contains(&battery_today) {
        return SuncycleStatus::InvalidArgument;
    }
    match (*controller).inner.step(battery_today) {
        Ok(k) => {
            *out_next_rate = k;
            SuncycleStatus::Ok
        }
        Err(Error::BatteryDrained) => SuncycleStatus::BatteryDrained,
        Err(_) => SuncycleStatus::InvalidArgument,
    }
}

/// Current samplings-per-day rate. Returns 0 on a null handle.
///
/// # Safety
/// `controller` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn suncycle_controller_rate(controller: *const SuncycleController) -> u32 {
    if controller.is_null() {
        return 0;
    }
    (*controller).inner.state().k
}

/// Current FSM state. Returns `HOLD` on a null handle.
///
/// # Safety
/// `controller` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn suncycle_controller_fsm_state(
    controller: *const SuncycleController,
) -> SuncycleFsmState {
    if controller.is_null() {
        return SuncycleFsmState::Hold;
    }
    (*controller).inner.state().fsm.into()
}

/// Release a controller handle. Null is a no-op.
///
/// # Safety
/// `controller` must be a handle from `suncycle_controller_new` that has
/// not been freed, or null.
#[no_mangle]
pub unsafe extern "C" fn suncycle_controller_free(controller: *mut SuncycleController) {
    if !controller.is_null() {
        drop(Box::from_raw(controller));
    }
}

/// Run the closed loop over `days` daily harvest values (joules per day).
/// The returned handle must be released with `suncycle_simulation_free`.
///
/// # Safety
/// `daily_harvest_j` must point to `days` readable doubles; `profile`,
/// `params` and `out_simulation` must be valid for the call.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn suncycle_simulate(
    daily_harvest_j: *const f64,
    days: usize,
    profile: *const SuncycleProfile,
    params: *const SuncycleParams,
    initial_battery: f64,
    k_min: u32,
    increase_step: u32,
    out_simulation: *mut *mut SuncycleSimulation,
) -> SuncycleStatus {
    if daily_harvest_j.is_null()
        || profile.is_null()
        || params.is_null()
        || out_simulation.is_null()
    {
        return SuncycleStatus::NullPointer;
    }
    let profile = match to_profile(&*profile) {
        Ok(p) => p,
        Err(status) => return status,
    };
    let params = match to_params(&*params) {
        Ok(p) => p,
        Err(status) => return status,
    };
    let harvest = std::slice::from_raw_parts(daily_harvest_j, days);
    let trace = match HarvestTrace::new(
        "ffi",
        suncycle::trace::default_start_day(),
        harvest.to_vec(),
    ) {
        Ok(t) => t,
        Err(_) => return SuncycleStatus::InvalidArgument,
    };
    match run_simulation(
        &trace,
        &profile,
        &params,
        initial_battery,
        k_min,
        increase_step,
    ) {
        Ok(inner) => {
            *out_simulation = Box::into_raw(Box::new(SuncycleSimulation { inner }));
            SuncycleStatus::Ok
        }
        Err(_) => SuncycleStatus::InvalidArgument,
    }
}

/// Number of simulated days. Returns 0 on a null handle.
///
/// # Safety
/// `simulation` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn suncycle_simulation_days(simulation: *const SuncycleSimulation) -> usize {
    if simulation.is_null() {
        return 0;
    }
    (*simulation).inner.days.len()
}

/// Whether the battery stayed at or above the floor on every day.
///
/// # Safety
/// `simulation` must be a live handle or null (null reads as false).
#[no_mangle]
pub unsafe extern "C" fn suncycle_simulation_feasible(
    simulation: *const SuncycleSimulation,
) -> bool {
    if simulation.is_null() {
        return false;
    }
    (*simulation).inner.feasible
}

/// Total samplings over the horizon.
///
/// # Safety
/// `simulation` must be a live handle or null (null reads as 0).
#[no_mangle]
pub unsafe extern "C" fn suncycle_simulation_total_localizations(
    simulation: *const SuncycleSimulation,
) -> u64 {
    if simulation.is_null() {
        return 0;
    }
    (*simulation).inner.total_localizations
}

/// Lowest end-of-day battery fraction seen.
///
/// # Safety
/// `simulation` must be a live handle or null (null reads as 0).
#[no_mangle]
pub unsafe extern "C" fn suncycle_simulation_min_battery(
    simulation: *const SuncycleSimulation,
) -> f64 {
    if simulation.is_null() {
        return 0.0;
    }
    (*simulation).inner.min_battery
}

/// Read one day's record. Out-pointers may be null to skip a field.
///
/// # Safety
/// `simulation` must be a live handle; non-null out-pointers must be valid
/// for the call.
#[no_mangle]
pub unsafe extern "C" fn suncycle_simulation_day(
    simulation: *const SuncycleSimulation,
    day: usize,
    out_harvested_j: *mut f64,
    out_rate: *mut u32,
    out_battery_end: *mut f64,
    out_state: *mut SuncycleFsmState,
    out_spilled_j: *mut f64,
) -> SuncycleStatus {
    if simulation.is_null() {
        return SuncycleStatus::NullPointer;
    }
    let result = &(*simulation).inner;
    let Some(record) = result.days.get(day) else {
        return SuncycleStatus::InvalidArgument;
    };
    if !out_harvested_j.is_null() {
        *out_harvested_j = record.harvested_j;
    }
    if !out_rate.is_null() {
        *out_rate = record.k_used;
    }
    if !out_battery_end.is_null() {
        *out_battery_end = record.battery_end;
    }
    if !out_state.is_null() {
        *out_state = record.state.into();
    }
    if !out_spilled_j.is_null() {
        *out_spilled_j = record.spilled_j;
    }
    SuncycleStatus::Ok
}

/// Release a simulation handle. Null is a no-op.
///
/// # Safety
/// `simulation` must be a handle from `suncycle_simulate` that has not been
/// freed, or null.
#[no_mangle]
pub unsafe extern "C" fn suncycle_simulation_free(simulation: *mut SuncycleSimulation) {
    if !simulation.is_null() {
        drop(Box::from_raw(simulation));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn defaults_round_trip_through_c_types() {
        let p = suncycle_params_default();
        assert_eq!(
            (p.beta1, p.beta2, p.gamma, p.metric_scale),
            (-0.203, 0.468, 0.67, 3.0)
        );
        let prof = suncycle_profile_default();
        assert_eq!(prof.energy_per_localization_j, 5.1);
        assert_eq!(prof.idle_power_w, 0.019);
        assert_eq!(prof.battery_floor, 0.05);
    }

    #[test]
    fn metric_reports_saturation_and_values() {
        let p = suncycle_params_default();
        let mut saturated = false;
        let mut value = f64::NAN;
        unsafe {
            assert_eq!(
                suncycle_metric(0.70, 0.70, &p, &mut saturated, &mut value),
                SuncycleStatus::Ok
            );
            assert!(saturated);
            assert_eq!(
                suncycle_metric(0.50, 0.50, &p, &mut saturated, &mut value),
                SuncycleStatus::Ok
            );
            assert!(!saturated);
            assert_eq!(value, -1.0);
            assert_eq!(
                suncycle_metric(0.0, 0.5, &p, &mut saturated, &mut value),
                SuncycleStatus::BatteryDrained
            );
            assert_eq!(
                suncycle_metric(0.5, 0.5, ptr::null(), &mut saturated, &mut value),
                SuncycleStatus::NullPointer
            );
        }
    }

    #[test]
    fn controller_lifecycle_matches_core_behavior() {
        let p = suncycle_params_default();
        let mut handle: *mut SuncycleController = ptr::null_mut();
        unsafe {
            assert_eq!(
                suncycle_controller_new(&p, 24, 24, 0.95, &mut handle),
                SuncycleStatus::Ok
            );
            assert!(!handle.is_null());
            assert_eq!(suncycle_controller_rate(handle), 24);
            assert_eq!(
                suncycle_controller_fsm_state(handle),
                SuncycleFsmState::Hold
            );

            // 0.95 >= gamma: saturated metric, hold -> increase, k 24 -> 48.
            let mut k = 0u32;
            assert_eq!(
                suncycle_controller_step(handle, 0.95, &mut k),
                SuncycleStatus::Ok
            );
            assert_eq!(k, 48);
            assert_eq!(
                suncycle_controller_fsm_state(handle),
                SuncycleFsmState::Increase
            );

            assert_eq!(
                suncycle_controller_step(handle, 0.0, &mut k),
                SuncycleStatus::BatteryDrained
            );
            assert_eq!(
                suncycle_controller_step(handle, 1.5, &mut k),
                SuncycleStatus::InvalidArgument
            );
            suncycle_controller_free(handle);
            suncycle_controller_free(ptr::null_mut());
        }

        // Invalid thresholds are rejected at construction.
        let bad = SuncycleParams {
            beta1: 0.5,
            beta2: 0.2,
            gamma: 0.67,
            metric_scale: 3.0,
        };
        let mut handle: *mut SuncycleController = ptr::null_mut();
        unsafe {
            assert_eq!(
                suncycle_controller_new(&bad, 24, 24, 0.5, &mut handle),
                SuncycleStatus::InvalidArgument
            );
        }
        assert!(handle.is_null());
    }

    #[test]
    fn simulation_matches_direct_library_run() {
        let params = suncycle_params_default();
        let profile = suncycle_profile_default();
        let harvest: Vec<f64> = (0..120)
            .map(|d| 2500.0 + 2000.0 * ((d as f64) / 20.0).sin().abs())
            .collect();

        let mut handle: *mut SuncycleSimulation = ptr::null_mut();
        unsafe {
            assert_eq!(
                suncycle_simulate(
                    harvest.as_ptr(),
                    harvest.len(),
                    &profile,
                    &params,
                    1.0,
                    24,
                    24,
                    &mut handle,
                ),
                SuncycleStatus::Ok
            );
        }

        let trace = HarvestTrace::new(
            "direct",
            suncycle::trace::default_start_day(),
            harvest.clone(),
        )
        .unwrap();
        let direct = run_simulation(
            &trace,
            &DeviceEnergyProfile::default(),
            &TuningParams::tuned(),
            1.0,
            24,
            24,
        )
        .unwrap();

        unsafe {
            assert_eq!(suncycle_simulation_days(handle), direct.days.len());
            assert_eq!(suncycle_simulation_feasible(handle), direct.feasible);
            assert_eq!(
                suncycle_simulation_total_localizations(handle),
                direct.total_localizations
            );
            assert_eq!(suncycle_simulation_min_battery(handle), direct.min_battery);

            for day in [0usize, 17, 119] {
                let mut h = 0.0;
                let mut k = 0u32;
                let mut b = 0.0;
                let mut s = SuncycleFsmState::Hold;
                let mut spill = 0.0;
                assert_eq!(
                    suncycle_simulation_day(
                        handle, day, &mut h, &mut k, &mut b, &mut s, &mut spill
                    ),
                    SuncycleStatus::Ok
                );
                let expect = &direct.days[day];
                assert_eq!(h, expect.harvested_j);
                assert_eq!(k, expect.k_used);
                assert_eq!(b, expect.battery_end);
                assert_eq!(s, SuncycleFsmState::from(expect.state));
                assert_eq!(spill, expect.spilled_j);
            }
            assert_eq!(
                suncycle_simulation_day(
                    handle,
                    direct.days.len(),
                    ptr::null_mut(),
                    ptr::null_mut(),
                    ptr::null_mut(),
                    ptr::null_mut(),
                    ptr::null_mut()
                ),
                SuncycleStatus::InvalidArgument
            );
            suncycle_simulation_free(handle);
            suncycle_simulation_free(ptr::null_mut());
        }
    }
}
