//! Fractional pump-power fluctuations: Ornstein-Uhlenbeck plus linear drift.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseProcess {
    /// Stationary RMS of the fractional deviation.
    pub relative_sigma: f64,
    /// Seconds.
    pub correlation_time: f64,
    /// Fractional change per hour.
    pub drift_rate: f64,
}

impl Default for NoiseProcess {
    fn default() -> Self {
        Self {
            relative_sigma: 0.015,
            correlation_time: 300.0,
            drift_rate: 0.002,
        }
    }
}

impl NoiseProcess {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("noise.relative_sigma", self.relative_sigma)?;
        ensure_finite("noise.correlation_time", self.correlation_time)?;
        ensure_finite("noise.drift_rate", self.drift_rate)?;
        if self.relative_sigma < 0.0 {
            return Err(Error::invalid(
                "noise.relative_sigma",
                "must be non-negative",
            ));
        }
        if self.correlation_time <= 0.0 {
            return Err(Error::invalid("noise.correlation_time", "must be positive"));
        }
        Ok(())
    }
}

/// Running state of a [`NoiseProcess`]. Starts in the stationary law.
#[derive(Debug, Clone)]
pub struct NoiseState {
    process: NoiseProcess,
    ou: f64,
    time: f64,
    rng: ChaCha8Rng,
}

impl NoiseState {
    pub fn new(process: NoiseProcess, mut rng: ChaCha8Rng) -> Result<Self> {
        process.validate()?;
        let xi: f64 = rng.sample(StandardNormal);
        Ok(Self {
            process,
            ou: process.relative_sigma * xi,
            time: 0.0,
            rng,
        })
    }

    /// Deviation at the current time, before stepping.
    pub fn current(&self) -> f64 {
        self.ou + self.process.drift_rate * self.time / 3600.0
    }

    /// Advances by `dt` seconds with the exact OU transition and returns the
    /// new deviation.
    pub fn noise_step(&mut self, dt: f64) -> Result<f64> {
        ensure_finite("dt", dt)?;
        if dt <= 0.0 {
            return Err(Error::invalid("dt", "must be positive"));
        }
        let decay = (-dt / self.process.correlation_time).exp();
        let spread = self.process.relative_sigma * (1.0 - decay * decay).sqrt();
        let xi: f64 = self.rng.sample(StandardNormal);
        self.ou = self.ou * decay + spread * xi;
        self.time += dt;
        Ok(self.current())
    }
}
