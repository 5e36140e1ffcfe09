//! Mach-Zehnder pump stabilizer as a block-wise frequency-domain filter.
//!
//! The open-loop gain is a real integrator `G(f) = f_UG / f`, so the residual
//! transfer is `1 / (1 + G) = f / (f + f_UG)`.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StabilizerLoop {
    /// Hz.
    pub unity_gain_frequency: f64,
    pub enabled: bool,
    /// Largest fractional power correction before the actuator saturates.
    pub actuator_range: f64,
    /// Seconds of data filtered per FFT block.
    pub block_duration: f64,
}

impl Default for StabilizerLoop {
    fn default() -> Self {
        Self {
            unity_gain_frequency: 1000.0,
            enabled: true,
            actuator_range: 0.2,
            block_duration: 900.0,
        }
    }
}

/// Residual deviation and per-sample saturation flags.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopOutput {
    pub residual: Vec<f64>,
    pub saturated: Vec<bool>,
}

impl StabilizerLoop {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("loop.unity_gain_frequency", self.unity_gain_frequency)?;
        ensure_finite("loop.actuator_range", self.actuator_range)?;
        ensure_finite("loop.block_duration", self.block_duration)?;
        if self.unity_gain_frequency <= 0.0 {
            return Err(Error::invalid(
                "loop.unity_gain_frequency",
                "must be positive",
            ));
        }
        if self.actuator_range <= 0.0 {
            return Err(Error::invalid("loop.actuator_range", "must be positive"));
        }
        if self.block_duration <= 0.0 {
            return Err(Error::invalid("loop.block_duration", "must be positive"));
        }
        Ok(())
    }

    /// `|1 / (1 + G(f))|`; 1 everywhere when disabled.
    pub fn suppression(&self, f: f64) -> f64 {
        if !self.enabled {
            return 1.0;
        }
        let f = f.abs();
        f / (f + self.unity_gain_frequency)
    }

    /// Filters a uniformly sampled deviation record.
    pub fn loop_residual(&self, raw: &[f64], dt: f64) -> Result<LoopOutput> {
        self.validate()?;
        ensure_finite("dt", dt)?;
        if dt <= 0.0 {
            return Err(Error::invalid("dt", "must be positive"));
        }
        if !self.enabled {
            return Ok(LoopOutput {
                residual: raw.to_vec(),
                saturated: vec![false; raw.len()],
            });
        }
        let block = ((self.block_duration / dt).round() as usize).max(1);
        let mut planner = FftPlanner::<f64>::new();
        let mut residual = Vec::with_capacity(raw.len());
        let mut buf = Vec::with_capacity(block);
        for chunk in raw.chunks(block) {
            let n = chunk.len();
            let forward = planner.plan_fft_forward(n);
            let inverse = planner.plan_fft_inverse(n);
            buf.clear();
            buf.extend(chunk.iter().map(|&v| Complex64::new(v, 0.0)));
            forward.process(&mut buf);
            let df = 1.0 / (n as f64 * dt);
            for (k, c) in buf.iter_mut().enumerate() {
                let bin = k.min(n - k) as f64;
                *c *= self.suppression(bin * df) / n as f64;
            }
            inverse.process(&mut buf);
            residual.extend(buf.iter().map(|c| c.re));
        }
        let saturated = raw
            .iter()
            .zip(&residual)
            .map(|(r, e)| (r - e).abs() > self.actuator_range)
            .collect();
        Ok(LoopOutput {
            residual,
            saturated,
        })
    }
}
