//! Energy-aware adaptive sampling rate control for solar-harvesting sensor
//! nodes.
//!
//! The crate models a battery-powered tracker that must choose how many
//! sensor acquisitions (e.g. GNSS fixes) to perform per day given an
//! uncertain energy income. The centerpiece is a TCP-Reno-style
//! additive-increase/multiplicative-decrease controller driven only by the
//! battery state of charge; around it sit the pieces needed to evaluate it
//! offline:
//!
//! * [`controller`] — the metric function and AIMD finite state machine,
//!   stepped once per day.
//! * [`energy`] — per-day battery and device energy accounting.
//! * [`solar`] — a one-dimensional ridge regression mapping solar irradiance
//!   to harvested power, with RMSE/MAE evaluation.
//! * [`trace`] — irradiance ingestion, conversion to per-day harvest energy,
//!   and synthetic seasonal trace generation.
//! * [`sim`] — the closed simulation loop over a multi-year horizon.
//! * [`tuner`] — exhaustive grid search for the controller thresholds.
//! * [`baselines`] — an optimized constant rate and a clairvoyant
//!   finite-horizon optimizer, for comparison.
//!
//! The `suncycle` binary exposes the pipeline as CLI subcommands; see the
//! repository README for file formats and examples.
//!
//! The embedded-facing core is tiny:
//!
//! ```
//! use suncycle::controller::{Controller, TuningParams};
//!
//! // Seed the previous-day reading with the first battery observation.
//! let mut ctrl = Controller::new(TuningParams::tuned(), 24, 24, 0.80).unwrap();
//!
//! // Once per day, feed the end-of-day battery fraction and get the
//! // sampling rate for the next day. 0.80 is above gamma, so ramp up.
//! let next_rate = ctrl.step(0.80).unwrap();
//! assert_eq!(next_rate, 48);
//! ```

pub mod baselines;
pub mod controller;
pub mod energy;
mod error;
pub mod plot;
pub mod sim;
pub mod solar;
pub mod trace;
pub mod tuner;

pub use error::{Error, Result};

/// Seconds in one simulated day.
pub const SECONDS_PER_DAY: f64 = 86_400.0;

/// Hours in one simulated day (the finite-horizon baseline works hourly).
pub const HOURS_PER_DAY: usize = 24;
