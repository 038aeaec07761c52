//! Comparison baselines: the best fixed daily rate a trace can sustain, and
//! a clairvoyant finite-horizon optimizer that upper-bounds what any online
//! policy could achieve.
//!
//! The finite-horizon problem is a linear program over hourly rates, spills
//! and battery levels with a cyclic boundary (the battery ends the horizon
//! where it started). Hours that share the same harvest — all hours of a
//! day, since daily energy is split uniformly — can be collapsed into one
//! block without changing the optimum: averaging rates and spills inside a
//! uniform-harvest block keeps every boundary battery level, moves the
//! intra-block battery linearly between bounded endpoints, and preserves the
//! objective. A year-long horizon therefore solves as a few-hundred-row LP
//! instead of an 8760-row one, exactly.

pub mod simplex;

use std::path::Path;

use crate::energy::DeviceEnergyProfile;
use crate::sim::run_fixed_rate;
use crate::trace::HarvestTrace;
use crate::{Error, Result, HOURS_PER_DAY};
use simplex::{LinearProgram, LpOutcome};

/// Largest constant daily rate that keeps the battery at or above the floor
/// on every day of the trace, found by doubling then integer bisection.
/// Errors when even `k_min` cannot be sustained.
pub fn optimize_constant_rate(
    trace: &HarvestTrace,
    profile: &DeviceEnergyProfile,
    b0: f64,
    k_min: u32,
) -> Result<u32> {
    let feasible = |k: u32| -> Result<bool> { Ok(run_fixed_rate(trace, profile, k, b0)?.feasible) };
    if !feasible(k_min)? {
        return Err(Error::UnsustainableTrace);
    }

    // Feasibility is monotone in k: more samplings only drain the battery
    // further. Grow until infeasible, then bisect the boundary.
    let mut lo = k_min;
    let mut hi = loop {
        let next = lo.saturating_mul(2);
        if next == lo {
            return Ok(lo);
        }
        if feasible(next)? {
            lo = next;
        } else {
            break next;
        }
    };
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FhcStatus {
    Optimal,
    Infeasible,
}

/// Solution of the clairvoyant finite-horizon problem.
#[derive(Debug, Clone, PartialEq)]
pub struct FhcSolution {
    pub status: FhcStatus,
    /// Localizations per hour over the horizon (continuous relaxation).
    pub hourly_rate: Vec<f64>,
    /// Harvested energy discarded per hour, in joules.
    pub spill_j: Vec<f64>,
    /// Battery fraction at each hour boundary; length horizon + 1, first
    /// and last equal at the optimum.
    pub battery_path: Vec<f64>,
    /// Total localizations over the horizon (sum of `hourly_rate`).
    pub objective: f64,
}

impl FhcSolution {
    fn infeasible() -> Self {
        Self {
            status: FhcStatus::Infeasible,
            hourly_rate: Vec::new(),
            spill_j: Vec::new(),
            battery_path: Vec::new(),
            objective: 0.0,
        }
    }
}

/// Total localizations of an optimal solution; errors when the instance was
/// infeasible.
pub fn fhc_total_localizations(solution: &FhcSolution) -> Result<f64> {
    match solution.status {
        FhcStatus::Optimal => Ok(solution.objective),
        FhcStatus::Infeasible => Err(Error::NotOptimal(
            "finite-horizon instance is infeasible".into(),
        )),
    }
}

/// Solve the finite-horizon problem for a daily harvest trace.
///
/// Each day's energy is split uniformly over its 24 hours; the first
/// `horizon_hours` hourly buckets form the instance. Maximizes the total
/// number of localizations subject to hourly battery dynamics, battery
/// bounds `floor <= e <= 1`, non-negative spill, `rate >= min_hourly_rate`,
/// and the cyclic condition `e[0] = e[horizon]`.
pub fn solve_fhc(
    trace: &HarvestTrace,
    profile: &DeviceEnergyProfile,
    floor: f64,
    horizon_hours: usize,
    min_hourly_rate: f64,
) -> Result<FhcSolution> {
    let available = trace.len() * HOURS_PER_DAY;
    if horizon_hours > available {
        return Err(Error::InvalidParameter(format!(
            "horizon of {horizon_hours} h exceeds the trace's {available} h"
        )));
    }
    let hourly: Vec<f64> = trace
        .daily_energy_j()
        .iter()
        .flat_map(|&day| std::iter::repeat_n(day / HOURS_PER_DAY as f64, HOURS_PER_DAY))
        .take(horizon_hours)
        .collect();
    solve_fhc_hourly(&hourly, profile, floor, min_hourly_rate)
}

/// Solve the finite-horizon problem on explicit hourly harvest buckets.
pub fn solve_fhc_hourly(
    hourly_harvest_j: &[f64],
    profile: &DeviceEnergyProfile,
    floor: f64,
    min_hourly_rate: f64,
) -> Result<FhcSolution> {
    let horizon = hourly_harvest_j.len();
    if horizon < 2 {
        return Err(Error::InvalidParameter(format!(
            "horizon must span at least 2 hours, got {horizon}"
        )));
    }
    if !(0.0..1.0).contains(&floor) {
        return Err(Error::InvalidParameter(format!(
            "battery floor must lie in [0, 1), got {floor}"
        )));
    }
    if !(min_hourly_rate >= 0.0 && min_hourly_rate.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "minimum hourly rate must be non-negative, got {min_hourly_rate}"
        )));
    }
    if let Some(&bad) = hourly_harvest_j
        .iter()
        .find(|&&h| !(h >= 0.0 && h.is_finite()))
    {
        return Err(Error::InvalidParameter(format!(
            "hourly harvest must be non-negative and finite, got {bad}"
        )));
    }

    // Everything in battery fractions: h, idle and localization cost divide
    // by the pack energy. This keeps the LP well scaled and makes uniform
    // rescalings of all energies a no-op.
    let pack = profile.battery_energy_j();
    let idle_frac = profile.idle_power_w() * 3600.0 / pack;
    let loc_frac = profile.energy_per_localization_j() / pack;

    // Collapse maximal runs of equal hourly harvest into blocks.
    let mut blocks: Vec<(usize, f64)> = Vec::new(); // (hours, harvest fraction)
    for &h in hourly_harvest_j {
        let frac = h / pack;
        match blocks.last_mut() {
            Some((len, last)) if *last == frac => *len += 1,
            _ => blocks.push((1, frac)),
        }
    }
    let b = blocks.len();

    // Variables: rates (b), spills (b), block-boundary batteries (b).
    let n = 3 * b;
    let rho = |i: usize| i;
    let sig = |i: usize| b + i;
    let eps = |i: usize| 2 * b + i;

    let mut objective = vec![0.0; n];
    let mut lower = vec![0.0; n];
    let mut upper = vec![f64::INFINITY; n];
    for i in 0..b {
        let hours = blocks[i].0 as f64;
        objective[rho(i)] = hours;
        lower[rho(i)] = min_hourly_rate;
        lower[eps(i)] = floor;
        upper[eps(i)] = 1.0;
    }

    let mut constraints = Vec::with_capacity(b);
    let mut rhs = Vec::with_capacity(b);
    for i in 0..b {
        let (hours, harvest) = blocks[i];
        let hours = hours as f64;
        let mut row = vec![0.0; n];
        row[eps(i)] -= 1.0;
        row[eps((i + 1) % b)] += 1.0;
        row[rho(i)] = hours * loc_frac;
        row[sig(i)] = hours;
        constraints.push(row);
        rhs.push(hours * (harvest - idle_frac));
    }

    let lp = LinearProgram {
        objective,
        constraints,
        rhs,
        lower,
        upper,
    };
    let solution = match simplex::solve(&lp)? {
        LpOutcome::Optimal(s) => s,
        LpOutcome::Infeasible => return Ok(FhcSolution::infeasible()),
        LpOutcome::Unbounded => {
            // Summing the cyclic dynamics bounds the objective by the net
            // energy budget, so this cannot happen on valid inputs.
            return Err(Error::NotOptimal(
                "finite-horizon program reported unbounded".into(),
            ));
        }
    };

    // Expand blocks back to hours and rebuild the battery path from the
    // dynamics.
    let mut hourly_rate = Vec::with_capacity(horizon);
    let mut spill = Vec::with_capacity(horizon);
    let mut battery_path = Vec::with_capacity(horizon + 1);
    battery_path.push(solution.x[eps(0)]);
    let mut level = solution.x[eps(0)];
    for (i, &(hours, harvest)) in blocks.iter().enumerate() {
        let rate = solution.x[rho(i)];
        let sigma = solution.x[sig(i)];
        for _ in 0..hours {
            hourly_rate.push(rate);
            spill.push(sigma * pack);
            level += harvest - idle_frac - rate * loc_frac - sigma;
            battery_path.push(level);
        }
    }

    let objective = hourly_rate.iter().sum();
    Ok(FhcSolution {
        status: FhcStatus::Optimal,
        hourly_rate,
        spill_j: spill,
        battery_path,
        objective,
    })
}

/// Write an optimal solution as CSV with header
/// `hour,rate,battery_frac,spill_j`; the battery column is the end-of-hour
/// level.
pub fn write_fhc_csv(solution: &FhcSolution, path: impl AsRef<Path>) -> Result<()> {
    if solution.status != FhcStatus::Optimal {
        return Err(Error::NotOptimal(
            "cannot serialize an infeasible finite-horizon solution".into(),
        ));
    }
    let path = path.as_ref();
    let mut out = String::from("hour,rate,battery_frac,spill_j\n");
    for (i, rate) in solution.hourly_rate.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            i,
            rate,
            solution.battery_path[i + 1],
            solution.spill_j[i]
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
