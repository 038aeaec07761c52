//! Offline search for the controller thresholds (β1, β2, γ).
//!
//! The search is a plain exhaustive grid: reproducible, embarrassingly
//! parallel, and good enough at the published granularity. Worst-case
//! robustness is baked in by requiring feasibility on *every* training
//! trace simultaneously; the objective is the summed localization count
//! across traces.

use std::path::Path;

use rayon::prelude::*;

use crate::controller::{TuningParams, DEFAULT_INCREASE_STEP};
use crate::energy::DeviceEnergyProfile;
use crate::sim::run_simulation;
use crate::trace::HarvestTrace;
use crate::{Error, Result};

/// Evaluation of one parameter tuple across the training traces.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamEvaluation {
    /// Summed localizations across all traces.
    pub total_localizations: u64,
    /// True iff the battery constraint held on every day of every trace.
    pub feasible_all: bool,
    /// Per-trace localization totals, in input order.
    pub per_trace: Vec<u64>,
}

/// Simulate `params` on every trace and aggregate.
pub fn evaluate_params(
    params: &TuningParams,
    traces: &[HarvestTrace],
    profile: &DeviceEnergyProfile,
    b0: f64,
    k_min: u32,
) -> Result<ParamEvaluation> {
    if traces.is_empty() {
        return Err(Error::NotEnoughSamples { needed: 1, got: 0 });
    }
    let mut per_trace = Vec::with_capacity(traces.len());
    let mut feasible_all = true;
    for trace in traces {
        let result = run_simulation(trace, profile, params, b0, k_min, DEFAULT_INCREASE_STEP)?;
        feasible_all &= result.feasible;
        per_trace.push(result.total_localizations);
    }
    Ok(ParamEvaluation {
        total_localizations: per_trace.iter().sum(),
        feasible_all,
        per_trace,
    })
}

/// One axis of the search grid: `steps` evenly spaced values across
/// [min, max] (a single step collapses to `min`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl AxisSpec {
    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidParameter(
                "axis needs at least one step".into(),
            ));
        }
        if !(min.is_finite() && max.is_finite() && min <= max) {
            return Err(Error::InvalidParameter(format!(
                "axis range must be finite with min <= max, got [{min}, {max}]"
            )));
        }
        Ok(Self { min, max, steps })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let width = self.max - self.min;
        (0..self.steps)
            .map(|i| self.min + width * i as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

/// Search grid over the three thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub beta1: AxisSpec,
    pub beta2: AxisSpec,
    pub gamma: AxisSpec,
}

impl Default for GridSpec {
    /// 21 × 21 × 11 over β1 ∈ [−1, 0], β2 ∈ [0, 1], γ ∈ [0.5, 1.0].
    fn default() -> Self {
        Self {
            beta1: AxisSpec::new(-1.0, 0.0, 21).expect("valid axis"),
            beta2: AxisSpec::new(0.0, 1.0, 21).expect("valid axis"),
            gamma: AxisSpec::new(0.5, 1.0, 11).expect("valid axis"),
        }
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub beta1: f64,
    pub beta2: f64,
    pub gamma: f64,
    pub feasible: bool,
    pub total_localizations: u64,
}

/// Grid search outcome: the best feasible point plus the full report.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchOutcome {
    pub best: TuningParams,
    pub best_total: u64,
    /// Every evaluated point, infeasible ones included, in enumeration
    /// order (β1 outermost, γ innermost, each ascending).
    pub report: Vec<GridPoint>,
}

/// Exhaustively evaluate the grid and return the feasible point with the
/// highest total, breaking ties toward the lexicographically smaller
/// (β1, β2, γ). Pairs violating β1 < β2 are skipped. The metric scale is
/// taken from the profile's battery capacity in ampere-hours.
///
/// Grid points are independent simulations and evaluate in parallel; the
/// winner is reduced with an order-free comparator, so the result does not
/// depend on scheduling.
pub fn grid_search(
    grid: &GridSpec,
    traces: &[HarvestTrace],
    profile: &DeviceEnergyProfile,
    b0: f64,
    k_min: u32,
) -> Result<GridSearchOutcome> {
    if traces.is_empty() {
        return Err(Error::NotEnoughSamples { needed: 1, got: 0 });
    }
    let metric_scale = profile.battery_capacity_ah();
    let (beta1s, beta2s, gammas) = (
        grid.beta1.values(),
        grid.beta2.values(),
        grid.gamma.values(),
    );
    let mut tuples = Vec::new();
    for &b1 in &beta1s {
        for &b2 in &beta2s {
            if b1 >= b2 {
                continue;
            }
            for &g in &gammas {
                // Surfaces bad gamma ranges (e.g. 0) as an error up front.
                TuningParams::new(b1, b2, g, metric_scale)?;
                tuples.push((b1, b2, g));
            }
        }
    }
    if tuples.is_empty() {
        return Err(Error::InvalidParameter(
            "grid contains no valid (beta1 < beta2) pairs".into(),
        ));
    }

    let report: Vec<GridPoint> = tuples
        .par_iter()
        .map(|&(beta1, beta2, gamma)| {
            let params =
                TuningParams::new(beta1, beta2, gamma, metric_scale).expect("validated above");
            let eval = evaluate_params(&params, traces, profile, b0, k_min)?;
            Ok(GridPoint {
                beta1,
                beta2,
                gamma,
                feasible: eval.feasible_all,
                total_localizations: eval.total_localizations,
            })
        })
        .collect::<Result<_>>()?;

    let best = pick_best(&report).ok_or(Error::NoFeasibleParameters)?;
    Ok(GridSearchOutcome {
        best: TuningParams::new(best.beta1, best.beta2, best.gamma, metric_scale)?,
        best_total: best.total_localizations,
        report,
    })
}

/// Deterministic reduction: maximum total among feasible points, ties going
/// to the lexicographically smaller (β1, β2, γ). Invariant under any
/// permutation of the report.
pub(crate) fn pick_best(report: &[GridPoint]) -> Option<GridPoint> {
    report
        .iter()
        .filter(|p| p.feasible)
        .copied()
        .reduce(|a, b| {
            use std::cmp::Ordering;
            let key_a = (a.beta1, a.beta2, a.gamma);
            let key_b = (b.beta1, b.beta2, b.gamma);
            match a.total_localizations.cmp(&b.total_localizations) {
                Ordering::Greater => a,
                Ordering::Less => b,
                Ordering::Equal => {
                    if key_a.partial_cmp(&key_b) == Some(Ordering::Greater) {
                        b
                    } else {
                        a
                    }
                }
            }
        })
}

/// Write the evaluation report as CSV with header
/// `beta1,beta2,gamma,feasible,J_total`.
pub fn write_report_csv(report: &[GridPoint], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("beta1,beta2,gamma,feasible,J_total\n");
    for p in report {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            p.beta1, p.beta2, p.gamma, p.feasible, p.total_localizations
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::daily_consumption;
    use crate::trace::{synth_trace, HarvestTrace};

    fn profile() -> DeviceEnergyProfile {
        DeviceEnergyProfile::default()
    }

    #[test]
    fn zero_harvest_is_never_feasible() {
        let traces = vec![HarvestTrace::constant(0.0, 120).unwrap()];
        let eval = evaluate_params(&TuningParams::tuned(), &traces, &profile(), 1.0, 24).unwrap();
        assert!(!eval.feasible_all);
    }

    #[test]
    fn pinned_rate_gives_k_min_per_day() {
        // Balanced trace below every gamma: the controller pins at k_min
        // and J is exactly 24 per day.
        let profile = profile();
        let balanced = daily_consumption(24, &profile);
        let traces = vec![HarvestTrace::constant(balanced, 90).unwrap()];
        let eval = evaluate_params(&TuningParams::tuned(), &traces, &profile, 0.3, 24).unwrap();
        assert!(eval.feasible_all);
        assert_eq!(eval.per_trace, vec![24 * 90]);
        assert_eq!(eval.total_localizations, 24 * 90);
    }

    #[test]
    fn single_trace_total_equals_its_entry() {
        let traces = vec![synth_trace(120, 0.02, 0.18, 60, 0.2, 5).unwrap()];
        let eval = evaluate_params(&TuningParams::tuned(), &traces, &profile(), 1.0, 24).unwrap();
        assert_eq!(eval.total_localizations, eval.per_trace[0]);
    }

    #[test]
    fn degenerate_grid_returns_its_point() {
        let grid = GridSpec {
            beta1: AxisSpec::new(-0.203, -0.203, 1).unwrap(),
            beta2: AxisSpec::new(0.468, 0.468, 1).unwrap(),
            gamma: AxisSpec::new(0.67, 0.67, 1).unwrap(),
        };
        let traces = vec![synth_trace(365, 0.02, 0.18, 172, 0.0, 1).unwrap()];
        let out = grid_search(&grid, &traces, &profile(), 1.0, 24).unwrap();
        assert_eq!(out.best.beta1, -0.203);
        assert_eq!(out.best.beta2, 0.468);
        assert_eq!(out.best.gamma, 0.67);
        assert_eq!(out.report.len(), 1);
    }

    #[test]
    fn search_beats_or_matches_known_feasible_point() {
        let traces = vec![synth_trace(365, 0.02, 0.18, 172, 0.0, 1).unwrap()];
        let profile = profile();
        let reference = TuningParams::tuned();
        let ref_eval = evaluate_params(&reference, &traces, &profile, 1.0, 24).unwrap();
        assert!(
            ref_eval.feasible_all,
            "reference point must be feasible here"
        );

        // A small grid containing the reference point.
        let grid = GridSpec {
            beta1: AxisSpec::new(-0.203, -0.103, 2).unwrap(),
            beta2: AxisSpec::new(0.468, 0.568, 2).unwrap(),
            gamma: AxisSpec::new(0.67, 0.87, 3).unwrap(),
        };
        let out = grid_search(&grid, &traces, &profile, 1.0, 24).unwrap();
        assert!(out.best_total >= ref_eval.total_localizations);

        // Whatever won must itself be feasible on every training trace.
        let best_eval = evaluate_params(&out.best, &traces, &profile, 1.0, 24).unwrap();
        assert!(best_eval.feasible_all);
        assert_eq!(best_eval.total_localizations, out.best_total);
    }

    #[test]
    fn ties_break_lexicographically() {
        // On a balanced trace at low charge every candidate pins at k_min,
        // so all totals tie and the smallest tuple must win.
        let profile = profile();
        let balanced = daily_consumption(24, &profile);
        let traces = vec![HarvestTrace::constant(balanced, 30).unwrap()];
        let grid = GridSpec {
            beta1: AxisSpec::new(-0.9, -0.3, 3).unwrap(),
            beta2: AxisSpec::new(0.1, 0.7, 3).unwrap(),
            gamma: AxisSpec::new(0.6, 1.0, 3).unwrap(),
        };
        let out = grid_search(&grid, &traces, &profile, 0.3, 24).unwrap();
        assert_eq!(out.best.beta1, -0.9);
        assert_eq!(out.best.beta2, 0.1);
        assert_eq!(out.best.gamma, 0.6);
    }

    #[test]
    fn infeasible_everywhere_is_an_error() {
        let traces = vec![HarvestTrace::constant(0.0, 60).unwrap()];
        let err = grid_search(&GridSpec::default(), &traces, &profile(), 1.0, 24).unwrap_err();
        assert!(matches!(err, Error::NoFeasibleParameters));
    }

    #[test]
    fn pick_best_is_permutation_invariant() {
        let mk = |b1: f64, b2: f64, g: f64, feasible, total| GridPoint {
            beta1: b1,
            beta2: b2,
            gamma: g,
            feasible,
            total_localizations: total,
        };
        let points = vec![
            mk(-0.5, 0.3, 0.7, true, 100),
            mk(-0.4, 0.3, 0.7, true, 100),
            mk(-0.6, 0.2, 0.6, false, 900),
            mk(-0.9, 0.9, 0.9, true, 40),
        ];
        let best = pick_best(&points).unwrap();
        let mut reversed = points.clone();
        reversed.reverse();
        let best_rev = pick_best(&reversed).unwrap();
        assert_eq!(best, best_rev);
        assert_eq!(best.beta1, -0.5);
        assert!(pick_best(&[mk(0.0, 0.1, 0.5, false, 1)]).is_none());
    }

    #[test]
    fn superset_grid_never_does_worse() {
        let traces = vec![synth_trace(200, 0.02, 0.18, 100, 0.1, 11).unwrap()];
        let profile = profile();
        let small = GridSpec {
            beta1: AxisSpec::new(-0.8, -0.2, 2).unwrap(),
            beta2: AxisSpec::new(0.2, 0.8, 2).unwrap(),
            gamma: AxisSpec::new(0.6, 0.8, 2).unwrap(),
        };
        // Doubling density (2n-1 points) keeps every old point on the grid.
        let big = GridSpec {
            beta1: AxisSpec::new(-0.8, -0.2, 3).unwrap(),
            beta2: AxisSpec::new(0.2, 0.8, 3).unwrap(),
            gamma: AxisSpec::new(0.6, 0.8, 3).unwrap(),
        };
        let small_out = grid_search(&small, &traces, &profile, 1.0, 24).unwrap();
        let big_out = grid_search(&big, &traces, &profile, 1.0, 24).unwrap();
        assert!(big_out.best_total >= small_out.best_total);
        assert_eq!(big_out.report.len(), 27);
    }

    #[test]
    fn report_csv_has_expected_shape() {
        let traces = vec![synth_trace(60, 0.02, 0.18, 30, 0.0, 2).unwrap()];
        let grid = GridSpec {
            beta1: AxisSpec::new(-0.5, -0.2, 2).unwrap(),
            beta2: AxisSpec::new(0.2, 0.5, 2).unwrap(),
            gamma: AxisSpec::new(0.6, 0.8, 2).unwrap(),
        };
        let out = grid_search(&grid, &traces, &profile(), 1.0, 24).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.csv");
        write_report_csv(&out.report, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("beta1,beta2,gamma,feasible,J_total"));
        assert_eq!(lines.count(), out.report.len());
    }
}
