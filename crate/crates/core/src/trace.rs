//! Harvest-energy traces: ingestion of irradiance time series, conversion to
//! per-day harvested energy through a solar model, and a seeded synthetic
//! seasonal generator for testing.
//!
//! Days are plain blocks of `86400 / sample_interval` consecutive samples
//! counted from the trace start; there is no timezone or DST handling, since
//! the controller only ever sees per-day aggregates.

use std::path::Path;

use chrono::NaiveDate;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::solar::SolarModel;
use crate::{Error, Result, SECONDS_PER_DAY};

/// Uniformly sampled irradiance time series for one location.
#[derive(Debug, Clone, PartialEq)]
pub struct IrradianceTrace {
    pub location_name: String,
    /// (seconds since epoch, W/m²) pairs, strictly increasing timestamps at
    /// a fixed spacing.
    samples: Vec<(i64, f64)>,
    sample_interval_s: u32,
}

impl IrradianceTrace {
    pub fn new(
        location_name: impl Into<String>,
        samples: Vec<(i64, f64)>,
        sample_interval_s: u32,
    ) -> Result<Self> {
        if sample_interval_s == 0 {
            return Err(Error::InvalidParameter(
                "sample interval must be positive".into(),
            ));
        }
        if samples.is_empty() {
            return Err(Error::NotEnoughSamples { needed: 1, got: 0 });
        }
        for pair in samples.windows(2) {
            if pair[1].0 - pair[0].0 != i64::from(sample_interval_s) {
                return Err(Error::InvalidParameter(format!(
                    "non-uniform sample spacing: {} then {}",
                    pair[0].0, pair[1].0
                )));
            }
        }
        if let Some(&(t, v)) = samples.iter().find(|&&(_, v)| !(v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "irradiance must be non-negative and finite, got {v} at t={t}"
            )));
        }
        Ok(Self {
            location_name: location_name.into(),
            samples,
            sample_interval_s,
        })
    }

    pub fn samples(&self) -> &[(i64, f64)] {
        &self.samples
    }

    pub fn sample_interval_s(&self) -> u32 {
        self.sample_interval_s
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Per-day harvested energy series for one location, in joules per day.
#[derive(Debug, Clone, PartialEq)]
pub struct HarvestTrace {
    pub location_name: String,
    pub start_day: NaiveDate,
    daily_energy_j: Vec<f64>,
}

impl HarvestTrace {
    pub fn new(
        location_name: impl Into<String>,
        start_day: NaiveDate,
        daily_energy_j: Vec<f64>,
    ) -> Result<Self> {
        if daily_energy_j.is_empty() {
            return Err(Error::NotEnoughSamples { needed: 1, got: 0 });
        }
        if let Some(&v) = daily_energy_j
            .iter()
            .find(|&&v| !(v >= 0.0 && v.is_finite()))
        {
            return Err(Error::InvalidParameter(format!(
                "daily energy must be non-negative and finite, got {v}"
            )));
        }
        Ok(Self {
            location_name: location_name.into(),
            start_day,
            daily_energy_j,
        })
    }

    /// A constant-energy trace; mostly useful in tests and toy setups.
    pub fn constant(energy_j_per_day: f64, days: usize) -> Result<Self> {
        Self::new(
            "constant",
            default_start_day(),
            vec![energy_j_per_day; days.max(1)],
        )
    }

    pub fn daily_energy_j(&self) -> &[f64] {
        &self.daily_energy_j
    }

    pub fn len(&self) -> usize {
        self.daily_energy_j.len()
    }

    pub fn is_empty(&self) -> bool {
        self.daily_energy_j.is_empty()
    }

    /// Extend (or truncate) to `days` by wrapping the series cyclically,
    /// for multi-year runs over a one-year trace.
    pub fn cycle_to(&self, days: usize) -> Result<Self> {
        if days == 0 {
            return Err(Error::InvalidParameter("cannot cycle to zero days".into()));
        }
        let daily = (0..days)
            .map(|d| self.daily_energy_j[d % self.daily_energy_j.len()])
            .collect();
        Self::new(self.location_name.clone(), self.start_day, daily)
    }

    /// Write as CSV with header `day_index,energy_j`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::from("day_index,energy_j\n");
        for (d, e) in self.daily_energy_j.iter().enumerate() {
            out.push_str(&format!("{d},{e}\n"));
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// Read back a CSV written by [`HarvestTrace::write_csv`]. The location
    /// name is taken from the file stem; the start day is the default.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut daily = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if i == 0 {
                if line != "day_index,energy_j" {
                    return Err(Error::malformed(
                        path,
                        line_no,
                        format!("expected header `day_index,energy_j`, got `{line}`"),
                    ));
                }
                continue;
            }
            let mut fields = line.split(',');
            let (Some(day), Some(energy), None) = (fields.next(), fields.next(), fields.next())
            else {
                return Err(Error::malformed(path, line_no, "expected 2 fields"));
            };
            let day: usize = day
                .trim()
                .parse()
                .map_err(|_| Error::malformed(path, line_no, format!("bad day index `{day}`")))?;
            if day != daily.len() {
                return Err(Error::malformed(
                    path,
                    line_no,
                    format!("day indices must be consecutive from 0, got {day}"),
                ));
            }
            let energy: f64 = energy.trim().parse().map_err(|_| {
                Error::malformed(path, line_no, format!("bad energy value `{energy}`"))
            })?;
            if !(energy >= 0.0 && energy.is_finite()) {
                return Err(Error::malformed(
                    path,
                    line_no,
                    format!("energy must be non-negative, got {energy}"),
                ));
            }
            daily.push(energy);
        }
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "trace".to_string());
        Self::new(name, default_start_day(), daily)
    }
}

/// Default calendar anchor for traces that carry no date of their own.
pub fn default_start_day() -> NaiveDate {
    NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date")
}

/// Load an irradiance CSV with header `timestamp_s,irradiance_wm2`.
///
/// Every row must parse, spacing must equal `sample_interval_s` throughout,
/// and irradiance must be non-negative; violations report the 1-based line
/// number.
pub fn load_irradiance_csv(
    path: impl AsRef<Path>,
    sample_interval_s: u32,
) -> Result<IrradianceTrace> {
    let path = path.as_ref();
    if sample_interval_s == 0 {
        return Err(Error::InvalidParameter(
            "sample interval must be positive".into(),
        ));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut samples: Vec<(i64, f64)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if i == 0 {
            if line != "timestamp_s,irradiance_wm2" {
                return Err(Error::malformed(
                    path,
                    line_no,
                    format!("expected header `timestamp_s,irradiance_wm2`, got `{line}`"),
                ));
            }
            continue;
        }
        let mut fields = line.split(',');
        let (Some(ts), Some(irr), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::malformed(path, line_no, "expected 2 fields"));
        };
        let ts: i64 = ts
            .trim()
            .parse()
            .map_err(|_| Error::malformed(path, line_no, format!("bad timestamp `{ts}`")))?;
        let irr = irr.trim();
        if irr.is_empty() {
            return Err(Error::malformed(path, line_no, "missing irradiance value"));
        }
        let irr: f64 = irr
            .parse()
            .map_err(|_| Error::malformed(path, line_no, format!("bad irradiance `{irr}`")))?;
        if !irr.is_finite() || irr < 0.0 {
            return Err(Error::malformed(
                path,
                line_no,
                format!("irradiance must be non-negative and finite, got {irr}"),
            ));
        }
        if let Some(&(prev, _)) = samples.last() {
            if ts - prev != i64::from(sample_interval_s) {
                return Err(Error::malformed(
                    path,
                    line_no,
                    format!(
                        "non-uniform spacing: expected step of {sample_interval_s} s, got {} s",
                        ts - prev
                    ),
                ));
            }
        }
        samples.push((ts, irr));
    }
    if samples.is_empty() {
        return Err(Error::malformed(path, 1, "no samples"));
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "trace".to_string());
    IrradianceTrace::new(name, samples, sample_interval_s)
}

/// Convert irradiance to per-day harvested energy by mapping each sample
/// through the solar model and rectangle-rule integrating over the day.
/// Partial trailing days are dropped; the trace must span at least one full
/// day and the interval must divide 86 400 s.
pub fn irradiance_to_harvest(trace: &IrradianceTrace, model: &SolarModel) -> Result<HarvestTrace> {
    let interval = f64::from(trace.sample_interval_s);
    let per_day = SECONDS_PER_DAY / interval;
    if per_day.fract() != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "sample interval {} s does not divide a day",
            trace.sample_interval_s
        )));
    }
    let per_day = per_day as usize;
    let full_days = trace.samples.len() / per_day;
    if full_days == 0 {
        return Err(Error::NotEnoughSamples {
            needed: per_day,
            got: trace.samples.len(),
        });
    }
    let daily = (0..full_days)
        .map(|d| {
            trace.samples[d * per_day..(d + 1) * per_day]
                .iter()
                .map(|&(_, irr)| model.predict_power(irr) * interval)
                .sum()
        })
        .collect();
    HarvestTrace::new(trace.location_name.clone(), default_start_day(), daily)
}

/// Generate a seeded synthetic seasonal trace.
///
/// The daily average power follows a cosine annual cycle peaking at
/// `peak_day`:
///
/// ```text
/// p(d) = min + (max - min) * (1 + cos(2π (d - peak_day) / 365)) / 2
/// ```
///
/// and each day's energy is `86400 * max(0, p(d) * (1 + u_d))` with `u_d`
/// uniform in `[-noise_fraction, +noise_fraction]` from a ChaCha8 stream, so
/// the same seed always reproduces the same trace.
pub fn synth_trace(
    days: usize,
    min_avg_power_w: f64,
    max_avg_power_w: f64,
    peak_day: u32,
    noise_fraction: f64,
    seed: u64,
) -> Result<HarvestTrace> {
    if days == 0 {
        return Err(Error::InvalidParameter("days must be positive".into()));
    }
    if !(min_avg_power_w > 0.0 && min_avg_power_w <= max_avg_power_w) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < min {min_avg_power_w} <= max {max_avg_power_w}"
        )));
    }
    if !(noise_fraction >= 0.0 && noise_fraction.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise fraction must be non-negative, got {noise_fraction}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = if noise_fraction > 0.0 {
        Some(Uniform::new_inclusive(-noise_fraction, noise_fraction))
    } else {
        None
    };
    let span = max_avg_power_w - min_avg_power_w;
    let daily = (0..days)
        .map(|d| {
            let phase = 2.0 * std::f64::consts::PI * (d as f64 - f64::from(peak_day)) / 365.0;
            let p = min_avg_power_w + span * (1.0 + phase.cos()) / 2.0;
            let u = noise.map_or(0.0, |n| n.sample(&mut rng));
            SECONDS_PER_DAY * (p * (1.0 + u)).max(0.0)
        })
        .collect();
    HarvestTrace::new(format!("synth-{seed}"), default_start_day(), daily)
}
