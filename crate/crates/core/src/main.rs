//! Command-line front end for the adaptive sampling toolkit.
//!
//! Exit codes: 0 success, 2 usage or input error, 3 infeasible run,
//! 4 no feasible parameters.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};

use suncycle::baselines::{
    fhc_total_localizations, optimize_constant_rate, solve_fhc, write_fhc_csv, FhcStatus,
};
use suncycle::controller::TuningParams;
use suncycle::energy::DeviceEnergyProfile;
use suncycle::plot::write_simulation_svg;
use suncycle::sim::{run_simulation, write_result_csv};
use suncycle::solar::{evaluate_model, fit_ridge, CalibrationSet};
use suncycle::trace::{irradiance_to_harvest, load_irradiance_csv, synth_trace, HarvestTrace};
use suncycle::tuner::{grid_search, write_report_csv, AxisSpec, GridSpec};
use suncycle::{Error, HOURS_PER_DAY};

const EXIT_INPUT: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_NO_FEASIBLE_PARAMS: u8 = 4;

#[derive(Parser)]
#[command(
    name = "suncycle",
    version,
    about = "Energy-aware adaptive sampling: solar model fitting, harvest traces, \
             closed-loop simulation, threshold tuning and baselines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the irradiance-to-power ridge model on a calibration CSV and
    /// report holdout RMSE/MAE.
    FitSolar {
        /// Calibration CSV with header `irradiance_wm2,power_w`.
        #[arg(long)]
        calib: PathBuf,
        /// Ridge regularization strength.
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        /// Fraction of samples used for training.
        #[arg(long = "train-frac", default_value_t = 0.8)]
        train_frac: f64,
        /// Seed for the random train/test split.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Drop calibration rows at or above this irradiance (sensor
        /// saturation).
        #[arg(long, default_value_t = suncycle::solar::SENSOR_SATURATION_WM2)]
        saturation: f64,
        /// Output model file (`key=value` lines).
        #[arg(long)]
        out: PathBuf,
    },
    /// Produce a per-day harvest trace, either from an irradiance CSV and a
    /// fitted model or synthetically.
    #[command(group(
        ArgGroup::new("source").required(true).args(["irradiance", "synth"])
    ))]
    MakeTrace {
        /// Irradiance CSV with header `timestamp_s,irradiance_wm2`.
        #[arg(long, requires = "model")]
        irradiance: Option<PathBuf>,
        /// Model file produced by fit-solar.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Sample interval in seconds; inferred from the first two rows
        /// when omitted.
        #[arg(long)]
        interval: Option<u32>,
        /// Synthetic spec `days,min_mw,max_mw,peak_day,noise,seed`.
        #[arg(long)]
        synth: Option<String>,
        /// Output harvest CSV with header `day_index,energy_j`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the adaptive controller over a harvest trace.
    Simulate {
        /// Harvest CSV with header `day_index,energy_j`.
        #[arg(long)]
        trace: PathBuf,
        /// Controller thresholds `beta1,beta2,gamma,B`.
        #[arg(
            long,
            default_value = "-0.203,0.468,0.67,3.0",
            allow_hyphen_values = true
        )]
        params: String,
        /// Device profile `eloc_j,idle_w,cap_mah,volt`.
        #[arg(long, default_value = "5.1,0.019,3000,3.8")]
        profile: String,
        /// Battery floor fraction.
        #[arg(long, default_value_t = 0.05)]
        floor: f64,
        /// Initial battery fraction.
        #[arg(long, default_value_t = 1.0)]
        b0: f64,
        /// Repeat the trace cyclically this many times.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        years: u32,
        /// Minimum samplings per day.
        #[arg(long = "k-min", default_value_t = 24)]
        k_min: u32,
        /// Additive increase per day in the increase state.
        #[arg(long = "increase-step", default_value_t = 24)]
        increase_step: u32,
        /// Output trajectory CSV.
        #[arg(long)]
        out: PathBuf,
        /// Optional three-panel SVG of the trajectory (best effort).
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Grid-search the controller thresholds over training traces.
    Tune {
        /// One or more harvest CSVs.
        #[arg(long, num_args = 1.., required = true)]
        traces: Vec<PathBuf>,
        /// Grid `b1min:b1max:n,b2min:b2max:n,gmin:gmax:n`.
        #[arg(
            long,
            default_value = "-1:0:21,0:1:21,0.5:1:11",
            allow_hyphen_values = true
        )]
        grid: String,
        #[arg(long, default_value = "5.1,0.019,3000,3.8")]
        profile: String,
        #[arg(long, default_value_t = 0.05)]
        floor: f64,
        #[arg(long, default_value_t = 1.0)]
        b0: f64,
        #[arg(long = "k-min", default_value_t = 24)]
        k_min: u32,
        /// Output report CSV `beta1,beta2,gamma,feasible,J_total`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the adaptive controller against the optimized constant rate
    /// and the clairvoyant finite-horizon optimum on one trace.
    Compare {
        #[arg(long)]
        trace: PathBuf,
        #[arg(
            long,
            default_value = "-0.203,0.468,0.67,3.0",
            allow_hyphen_values = true
        )]
        params: String,
        #[arg(long, default_value = "5.1,0.019,3000,3.8")]
        profile: String,
        #[arg(long, default_value_t = 0.05)]
        floor: f64,
        #[arg(long, default_value_t = 1.0)]
        b0: f64,
        #[arg(long = "k-min", default_value_t = 24)]
        k_min: u32,
        /// Minimum localizations per hour for the finite-horizon baseline.
        #[arg(long = "min-hourly-rate", default_value_t = 1.0)]
        min_hourly_rate: f64,
        /// Output CSV `method,total_localizations,aimd_ratio`.
        #[arg(long)]
        out: PathBuf,
        /// Optional CSV of the finite-horizon solution
        /// (`hour,rate,battery_frac,spill_j`).
        #[arg(long = "fhc-out")]
        fhc_out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn run(command: Command) -> suncycle::Result<ExitCode> {
    match command {
        Command::FitSolar {
            calib,
            alpha,
            train_frac,
            seed,
            saturation,
            out,
        } => {
            let data = CalibrationSet::load_csv(&calib, Some(saturation))?;
            let (model, holdout) = fit_ridge(&data, alpha, seed, train_frac)?;
            let (rmse, mae) = evaluate_model(&model, &holdout);
            model.save(&out)?;
            println!("slope_w_per_wm2={}", model.slope);
            println!("intercept_w={}", model.intercept);
            println!("rmse_w={rmse}");
            println!("mae_w={mae}");
            Ok(ExitCode::SUCCESS)
        }

        Command::MakeTrace {
            irradiance,
            model,
            interval,
            synth,
            out,
        } => {
            let trace = match (irradiance, synth) {
                (Some(irr_path), None) => {
                    let model_path = model.expect("clap enforces --model");
                    let model = suncycle::solar::SolarModel::load(&model_path)?;
                    let interval = match interval {
                        Some(i) => i,
                        None => infer_interval(&irr_path)?,
                    };
                    let irr = load_irradiance_csv(&irr_path, interval)?;
                    irradiance_to_harvest(&irr, &model)?
                }
                (None, Some(spec)) => parse_synth_spec(&spec)?,
                // clap's arg group guarantees exactly one source.
                _ => unreachable!(),
            };
            trace.write_csv(&out)?;
            println!("wrote {} days to {}", trace.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }

        Command::Simulate {
            trace,
            params,
            profile,
            floor,
            b0,
            years,
            k_min,
            increase_step,
            out,
            plot,
        } => {
            let params = parse_params(&params)?;
            let profile = parse_profile(&profile, floor)?;
            let trace = HarvestTrace::load_csv(&trace)?;
            let trace = if years > 1 {
                trace.cycle_to(trace.len() * years as usize)?
            } else {
                trace
            };
            let result = run_simulation(&trace, &profile, &params, b0, k_min, increase_step)?;
            write_result_csv(&result, &out)?;
            if let Some(plot_path) = plot {
                // Plotting never changes the outcome of the run.
                if let Err(e) = write_simulation_svg(&result, &plot_path) {
                    eprintln!("warning: could not write plot: {e}");
                }
            }
            println!(
                "days={} total_localizations={} min_battery={:.4} feasible={}",
                result.days.len(),
                result.total_localizations,
                result.min_battery,
                result.feasible
            );
            if result.feasible {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!(
                    "battery floor violated (min battery {:.4} < {})",
                    result.min_battery,
                    profile.battery_floor()
                );
                Ok(ExitCode::from(EXIT_INFEASIBLE))
            }
        }

        Command::Tune {
            traces,
            grid,
            profile,
            floor,
            b0,
            k_min,
            out,
        } => {
            let grid = parse_grid_spec(&grid)?;
            let profile = parse_profile(&profile, floor)?;
            let loaded: Vec<HarvestTrace> = traces
                .iter()
                .map(HarvestTrace::load_csv)
                .collect::<suncycle::Result<_>>()?;
            match grid_search(&grid, &loaded, &profile, b0, k_min) {
                Ok(outcome) => {
                    write_report_csv(&outcome.report, &out)?;
                    println!(
                        "best beta1={} beta2={} gamma={} J={}",
                        outcome.best.beta1,
                        outcome.best.beta2,
                        outcome.best.gamma,
                        outcome.best_total
                    );
                    Ok(ExitCode::SUCCESS)
                }
                Err(Error::NoFeasibleParameters) => {
                    eprintln!("no feasible parameters in the search grid");
                    Ok(ExitCode::from(EXIT_NO_FEASIBLE_PARAMS))
                }
                Err(e) => Err(e),
            }
        }

        Command::Compare {
            trace,
            params,
            profile,
            floor,
            b0,
            k_min,
            min_hourly_rate,
            out,
            fhc_out,
        } => {
            let params = parse_params(&params)?;
            let profile = parse_profile(&profile, floor)?;
            let trace = HarvestTrace::load_csv(&trace)?;

            let aimd = run_simulation(&trace, &profile, &params, b0, k_min, 24)?;
            if !aimd.feasible {
                eprintln!("adaptive run violates the battery floor on this trace");
                return Ok(ExitCode::from(EXIT_INFEASIBLE));
            }
            let k_const = match optimize_constant_rate(&trace, &profile, b0, k_min) {
                Ok(k) => k,
                Err(Error::UnsustainableTrace) => {
                    eprintln!("trace cannot sustain the minimum constant rate");
                    return Ok(ExitCode::from(EXIT_INFEASIBLE));
                }
                Err(e) => return Err(e),
            };
            let fhc = solve_fhc(
                &trace,
                &profile,
                profile.battery_floor(),
                trace.len() * HOURS_PER_DAY,
                min_hourly_rate,
            )?;
            if fhc.status != FhcStatus::Optimal {
                eprintln!("finite-horizon problem is infeasible on this trace");
                return Ok(ExitCode::from(EXIT_INFEASIBLE));
            }
            if let Some(fhc_path) = fhc_out {
                write_fhc_csv(&fhc, &fhc_path)?;
            }

            let aimd_total = aimd.total_localizations as f64;
            let const_total = f64::from(k_const) * trace.len() as f64;
            let fhc_total = fhc_total_localizations(&fhc)?;

            let mut csv = String::from("method,total_localizations,aimd_ratio\n");
            for (name, total) in [
                ("aimd", aimd_total),
                ("constant", const_total),
                ("fhc", fhc_total),
            ] {
                csv.push_str(&format!("{name},{total},{:.6}\n", aimd_total / total));
            }
            std::fs::write(&out, csv).map_err(|e| Error::Io {
                path: out.clone(),
                source: e,
            })?;

            println!("aimd_total={aimd_total}");
            println!("constant_total={const_total} (k={k_const}/day)");
            println!("fhc_total={fhc_total}");
            println!("aimd/fhc={:.3}", aimd_total / fhc_total);
            println!("aimd/const={:.3}", aimd_total / const_total);
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Infer the sample interval from the first two data rows of an irradiance
/// CSV.
fn infer_interval(path: &Path) -> suncycle::Result<u32> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut stamps = text
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .filter_map(|l| l.split(',').next())
        .filter_map(|s| s.trim().parse::<i64>().ok());
    match (stamps.next(), stamps.next()) {
        (Some(a), Some(b)) if b > a => Ok((b - a) as u32),
        _ => Err(Error::InvalidParameter(format!(
            "cannot infer sample interval from {}; pass --interval",
            path.display()
        ))),
    }
}

fn parse_floats(spec: &str, expected: usize, what: &str) -> suncycle::Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != expected {
        return Err(Error::InvalidParameter(format!(
            "{what} needs {expected} comma-separated values, got {}",
            parts.len()
        )));
    }
    parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad number `{p}` in {what}")))
        })
        .collect()
}

fn parse_params(spec: &str) -> suncycle::Result<TuningParams> {
    let v = parse_floats(spec, 4, "--params")?;
    TuningParams::new(v[0], v[1], v[2], v[3])
}

fn parse_profile(spec: &str, floor: f64) -> suncycle::Result<DeviceEnergyProfile> {
    let v = parse_floats(spec, 4, "--profile")?;
    DeviceEnergyProfile::new(v[0], v[1], v[2], v[3], floor)
}

fn parse_synth_spec(spec: &str) -> suncycle::Result<HarvestTrace> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 6 {
        return Err(Error::InvalidParameter(format!(
            "--synth needs `days,min_mw,max_mw,peak_day,noise,seed`, got `{spec}`"
        )));
    }
    let bad = |what: &str, s: &str| Error::InvalidParameter(format!("bad {what} `{s}` in --synth"));
    let days: usize = parts[0].trim().parse().map_err(|_| bad("days", parts[0]))?;
    let min_mw: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| bad("min_mw", parts[1]))?;
    let max_mw: f64 = parts[2]
        .trim()
        .parse()
        .map_err(|_| bad("max_mw", parts[2]))?;
    let peak: u32 = parts[3]
        .trim()
        .parse()
        .map_err(|_| bad("peak_day", parts[3]))?;
    let noise: f64 = parts[4]
        .trim()
        .parse()
        .map_err(|_| bad("noise", parts[4]))?;
    let seed: u64 = parts[5].trim().parse().map_err(|_| bad("seed", parts[5]))?;
    synth_trace(days, min_mw / 1000.0, max_mw / 1000.0, peak, noise, seed)
}

fn parse_grid_spec(spec: &str) -> suncycle::Result<GridSpec> {
    let axes: Vec<&str> = spec.split(',').collect();
    if axes.len() != 3 {
        return Err(Error::InvalidParameter(format!(
            "--grid needs three `min:max:steps` axes, got `{spec}`"
        )));
    }
    let mut parsed = Vec::with_capacity(3);
    for axis in axes {
        let fields: Vec<&str> = axis.split(':').collect();
        if fields.len() != 3 {
            return Err(Error::InvalidParameter(format!(
                "grid axis `{axis}` must be `min:max:steps`"
            )));
        }
        let min: f64 = fields[0]
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad axis minimum `{}`", fields[0])))?;
        let max: f64 = fields[1]
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad axis maximum `{}`", fields[1])))?;
        let steps: usize = fields[2]
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad axis steps `{}`", fields[2])))?;
        parsed.push(AxisSpec::new(min, max, steps)?);
    }
    Ok(GridSpec {
        beta1: parsed[0],
        beta2: parsed[1],
        gamma: parsed[2],
    })
}
