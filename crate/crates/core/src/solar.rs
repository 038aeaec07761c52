//! Solar harvest model: a one-dimensional ridge regression from irradiance
//! (W/m²) to harvested power (W), fit on a seeded random train/test split,
//! plus RMSE/MAE evaluation of the holdout.
//!
//! The fitted slope absorbs the cell area and harvesting-circuit efficiency
//! of the characterized assembly, so predictions are for that assembly as a
//! whole. Predictions clamp to zero: harvested power cannot be negative.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Irradiance above which the reference light sensor saturates; calibration
/// samples at or above it carry a clipped irradiance reading and should be
/// excluded from fitting.
pub const SENSOR_SATURATION_WM2: f64 = 100.0;

/// Linear irradiance-to-power model with non-negative output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolarModel {
    /// Watts of harvested power per W/m² of irradiance.
    pub slope: f64,
    /// Watts at zero irradiance (before the non-negativity clamp).
    pub intercept: f64,
    /// Ridge regularization strength the model was fit with.
    pub alpha: f64,
}

impl SolarModel {
    /// Closed-form ridge fit on the whole set: slope
    /// `Σ(x−x̄)(y−ȳ) / (Σ(x−x̄)² + α)` with an unpenalized intercept
    /// `ȳ − slope·x̄`.
    pub fn fit(data: &CalibrationSet, alpha: f64) -> Result<Self> {
        if alpha < 0.0 || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "ridge alpha must be non-negative and finite, got {alpha}"
            )));
        }
        let n = data.samples.len();
        if n < 2 {
            return Err(Error::NotEnoughSamples { needed: 2, got: n });
        }
        let nf = n as f64;
        let x_mean = data.samples.iter().map(|s| s.0).sum::<f64>() / nf;
        let y_mean = data.samples.iter().map(|s| s.1).sum::<f64>() / nf;
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        for &(x, y) in &data.samples {
            sxx += (x - x_mean) * (x - x_mean);
            sxy += (x - x_mean) * (y - y_mean);
        }
        if sxx == 0.0 {
            return Err(Error::SingularDesign);
        }
        let slope = sxy / (sxx + alpha);
        Ok(Self {
            slope,
            intercept: y_mean - slope * x_mean,
            alpha,
        })
    }

    /// Predicted harvested power in watts, clamped to be non-negative.
    pub fn predict_power(&self, irradiance_wm2: f64) -> f64 {
        (self.slope * irradiance_wm2 + self.intercept).max(0.0)
    }

    /// Serialize as `key=value` lines (slope, intercept, alpha).
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::new();
        writeln!(out, "slope={}", self.slope).expect("string write");
        writeln!(out, "intercept={}", self.intercept).expect("string write");
        writeln!(out, "alpha={}", self.alpha).expect("string write");
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut slope = None;
        let mut intercept = None;
        let mut alpha = None;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::malformed(path, i + 1, "expected key=value"))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::malformed(path, i + 1, format!("bad number `{value}`")))?;
            match key.trim() {
                "slope" => slope = Some(value),
                "intercept" => intercept = Some(value),
                "alpha" => alpha = Some(value),
                other => {
                    return Err(Error::malformed(
                        path,
                        i + 1,
                        format!("unknown key `{other}`"),
                    ))
                }
            }
        }
        match (slope, intercept, alpha) {
            (Some(slope), Some(intercept), Some(alpha)) => Ok(Self {
                slope,
                intercept,
                alpha,
            }),
            _ => Err(Error::malformed(
                path,
                0,
                "missing slope, intercept or alpha",
            )),
        }
    }
}

/// Measured (irradiance, power) pairs from a calibration campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSet {
    samples: Vec<(f64, f64)>,
}

impl CalibrationSet {
    /// Non-empty set of non-negative, finite samples.
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::NotEnoughSamples { needed: 1, got: 0 });
        }
        for &(x, y) in &samples {
            if !(x >= 0.0 && x.is_finite() && y >= 0.0 && y.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "calibration samples must be non-negative and finite, got ({x}, {y})"
                )));
            }
        }
        Ok(Self { samples })
    }

    /// Load from CSV with header `irradiance_wm2,power_w`. When
    /// `saturation_cutoff` is given, samples at or above it are dropped
    /// (the sensor clips there, so those rows carry no slope information).
    pub fn load_csv(path: impl AsRef<Path>, saturation_cutoff: Option<f64>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut samples = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if i == 0 {
                if line != "irradiance_wm2,power_w" {
                    return Err(Error::malformed(
                        path,
                        line_no,
                        format!("expected header `irradiance_wm2,power_w`, got `{line}`"),
                    ));
                }
                continue;
            }
            let mut fields = line.split(',');
            let (Some(x), Some(y), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(Error::malformed(path, line_no, "expected 2 fields"));
            };
            let x: f64 = x
                .trim()
                .parse()
                .map_err(|_| Error::malformed(path, line_no, format!("bad irradiance `{x}`")))?;
            let y: f64 = y
                .trim()
                .parse()
                .map_err(|_| Error::malformed(path, line_no, format!("bad power `{y}`")))?;
            if !(x >= 0.0 && x.is_finite()) || !(y >= 0.0 && y.is_finite()) {
                return Err(Error::malformed(
                    path,
                    line_no,
                    format!("samples must be non-negative, got ({x}, {y})"),
                ));
            }
            if let Some(cutoff) = saturation_cutoff {
                if x >= cutoff {
                    continue;
                }
            }
            samples.push((x, y));
        }
        Self::new(samples)
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Fit on a seeded random split and return the model together with the
/// holdout. `train_fraction` must leave at least 2 training samples and at
/// least 1 holdout sample.
pub fn fit_ridge(
    data: &CalibrationSet,
    alpha: f64,
    split_seed: u64,
    train_fraction: f64,
) -> Result<(SolarModel, CalibrationSet)> {
    if !(train_fraction > 0.0 && train_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction must lie in (0, 1], got {train_fraction}"
        )));
    }
    let n = data.samples.len();
    let n_train = (n as f64 * train_fraction).floor() as usize;
    if n_train >= n {
        return Err(Error::EmptyHoldout);
    }
    if n_train < 2 {
        return Err(Error::NotEnoughSamples {
            needed: 2,
            got: n_train,
        });
    }

    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(split_seed);
    indices.shuffle(&mut rng);

    let train: Vec<(f64, f64)> = indices[..n_train]
        .iter()
        .map(|&i| data.samples[i])
        .collect();
    let holdout: Vec<(f64, f64)> = indices[n_train..]
        .iter()
        .map(|&i| data.samples[i])
        .collect();

    let model = SolarModel::fit(&CalibrationSet::new(train)?, alpha)?;
    Ok((model, CalibrationSet::new(holdout)?))
}

/// Root-mean-square and mean-absolute error of the model on a holdout set,
/// both in watts.
pub fn evaluate_model(model: &SolarModel, holdout: &CalibrationSet) -> (f64, f64) {
    let n = holdout.samples.len() as f64;
    let mut sq = 0.0;
    let mut abs = 0.0;
    for &(x, y) in &holdout.samples {
        let err = model.predict_power(x) - y;
        sq += err * err;
        abs += err.abs();
    }
    ((sq / n).sqrt(), abs / n)
}
