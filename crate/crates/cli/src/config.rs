//! Flat `key = value` run configuration.
//!
//! ```text
//! # spin system
//! j_hz = 138            # scalar coupling J/2π, Hz
//! b_tesla = 11.7
//! temperature_k = 298
//! linewidth1_hz = 3     # ¹H line width
//! linewidth2_hz = 3     # ¹³C line width
//! # acquisition
//! points = 4096
//! dwell_s = 0.001
//! # relaxation rates, 1/s (defaults: calibrated set)
//! mu1 = 0.3
//! mu12 = 0.375
//! # rf errors
//! rf_spread = 0.05
//! ensemble_size = 200
//! amplitude_step_hz = 10
//! seed = 1
//! # decay grid and fit
//! tau_max = 16
//! tau_step = 0.5
//! window = 6
//! ```

use std::f64::consts::PI;
use std::path::Path;

use spinpair::relax::RateMatrix;
use spinpair::spectra::{nyquist_dwell, Acquisition};
use spinpair::tomo::RfErrorModel;
use spinpair::SpinSystem;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: SpinSystem,
    pub acquisition: Acquisition,
    /// Explicit rate entries; unset entries fall back to the calibrated set.
    pub rate_overrides: Vec<(String, f64)>,
    pub rf_spread: f64,
    pub ensemble_size: usize,
    pub amplitude_step_hz: Option<f64>,
    pub seed: u64,
    pub tau_max: f64,
    pub tau_step: f64,
    pub window: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: SpinSystem::default(),
            acquisition: Acquisition::default(),
            rate_overrides: Vec::new(),
            rf_spread: 0.0,
            ensemble_size: 200,
            amplitude_step_hz: None,
            seed: 0,
            tau_max: 16.0,
            tau_step: 0.5,
            window: 6.0,
        }
    }
}

fn number<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| CliError::Validation(format!("config line {line}: `{key}` has invalid value `{value}`")))
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut cfg = RunConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let n = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Validation(format!("config line {n}: expected key = value")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "j_hz" => cfg.system = cfg.system.with_j_hz(number(n, key, value)?),
                "b_tesla" => cfg.system.b_field = number(n, key, value)?,
                "temperature_k" => cfg.system.temperature = number(n, key, value)?,
                "linewidth1_hz" => cfg.system.linewidth1 = number(n, key, value)?,
                "linewidth2_hz" => cfg.system.linewidth2 = number(n, key, value)?,
                "points" => cfg.acquisition.points = number(n, key, value)?,
                "dwell_s" => cfg.acquisition.dwell = number(n, key, value)?,
                "mu1" | "mu2" | "mu12" | "sigma12" | "delta1" | "delta2" => {
                    let v = number(n, key, value)?;
                    cfg.rate_overrides.retain(|(k, _)| k != key);
                    cfg.rate_overrides.push((key.to_string(), v));
                }
                "rf_spread" => cfg.rf_spread = number(n, key, value)?,
                "ensemble_size" => cfg.ensemble_size = number(n, key, value)?,
                "amplitude_step_hz" => cfg.amplitude_step_hz = Some(number(n, key, value)?),
                "seed" => cfg.seed = number(n, key, value)?,
                "tau_max" => cfg.tau_max = number(n, key, value)?,
                "tau_step" => cfg.tau_step = number(n, key, value)?,
                "window" => cfg.window = number(n, key, value)?,
                _ => return Err(CliError::Validation(format!("config line {n}: unknown key `{key}`"))),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    /// Calibrated rates for this system with the configured entries applied.
    pub fn rates(&self) -> RateMatrix {
        let mut r = RateMatrix::calibrated(&self.system);
        for (k, v) in &self.rate_overrides {
            r.set(k, *v);
        }
        r
    }

    pub fn rf_model(&self) -> RfErrorModel {
        let spread = self.rf_spread;
        RfErrorModel {
            amplitude_spread: spread,
            ensemble_size: if spread > 0.0 { self.ensemble_size } else { 1 },
            amplitude_step: self.amplitude_step_hz.map(|hz| 2.0 * PI * hz),
            seed: self.seed,
        }
    }

    pub fn taus(&self) -> Vec<f64> {
        let n = (self.tau_max / self.tau_step + 1e-9).floor() as usize;
        (0..=n).map(|k| k as f64 * self.tau_step).collect()
    }

    /// Checks every parameter before any computation starts.
    pub fn validate(&self) -> CliResult<()> {
        self.system.validate()?;
        let acq = &self.acquisition;
        if acq.points < 2 {
            return Err(CliError::Validation(format!("points must be at least 2, got {}", acq.points)));
        }
        if !(acq.dwell > 0.0 && acq.dwell.is_finite()) {
            return Err(CliError::Validation(format!("dwell_s must be positive, got {}", acq.dwell)));
        }
        let limit = nyquist_dwell(&self.system);
        if acq.dwell > limit {
            return Err(spinpair::Error::Nyquist { dwell: acq.dwell, limit }.into());
        }
        self.rates().validate()?;
        self.rf_model().validate()?;
        if self.ensemble_size == 0 {
            return Err(CliError::Validation("ensemble_size must be at least 1".into()));
        }
        if !(self.tau_step > 0.0 && self.tau_step.is_finite()) {
            return Err(CliError::Validation(format!("tau_step must be positive, got {}", self.tau_step)));
        }
        if !(self.tau_max >= 0.0 && self.tau_max.is_finite()) {
            return Err(CliError::Validation(format!("tau_max must be non-negative, got {}", self.tau_max)));
        }
        if !(self.window > 0.0 && self.window.is_finite()) {
            return Err(CliError::Validation(format!("window must be positive, got {}", self.window)));
        }
        Ok(())
    }
}
