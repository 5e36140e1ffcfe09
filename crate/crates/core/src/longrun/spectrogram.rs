//! Time-binned squeezing spectrogram.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Narrowband electronic disturbance that limits squeezing near `frequency`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PickupLine {
    /// Hz.
    pub frequency: f64,
    /// Best achievable level inside the line, dB.
    pub level_db: f64,
    /// Hz either side of `frequency`.
    pub half_width: f64,
}

impl PickupLine {
    pub fn covers(&self, f: f64) -> bool {
        (f - self.frequency).abs() <= self.half_width
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrogramConfig {
    /// Seconds per spectrogram row.
    pub bin_duration: f64,
    /// Seconds of data averaged at the start of each bin.
    pub fft_segment: f64,
    pub f_min: f64,
    pub f_max: f64,
    /// Log-spaced grid points before pickup-line centres are merged in.
    pub n_frequencies: usize,
    /// Frequency at which the run-average squeezing is reported, Hz.
    pub reference_frequency: f64,
    pub pickup_lines: Vec<PickupLine>,
}

impl Default for SpectrogramConfig {
    fn default() -> Self {
        Self {
            bin_duration: 900.0,
            fft_segment: 60.0,
            f_min: 10.0,
            f_max: 10_000.0,
            n_frequencies: 64,
            reference_frequency: 1000.0,
            pickup_lines: vec![PickupLine {
                frequency: 6000.0,
                level_db: -7.0,
                half_width: 100.0,
            }],
        }
    }
}

impl SpectrogramConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("spectrogram.bin_duration", self.bin_duration),
            ("spectrogram.fft_segment", self.fft_segment),
            ("spectrogram.f_min", self.f_min),
            ("spectrogram.f_max", self.f_max),
            ("spectrogram.reference_frequency", self.reference_frequency),
        ] {
            ensure_finite(name, v)?;
        }
        if self.fft_segment <= 0.0 || self.bin_duration < self.fft_segment {
            return Err(Error::invalid(
                "spectrogram.bin_duration",
                "need bin_duration >= fft_segment > 0",
            ));
        }
        if !(self.f_min > 0.0 && self.f_max > self.f_min) {
            return Err(Error::invalid(
                "spectrogram.f_min",
                "need 0 < f_min < f_max",
            ));
        }
        if self.n_frequencies < 2 {
            return Err(Error::invalid(
                "spectrogram.n_frequencies",
                "must be at least 2",
            ));
        }
        if self.reference_frequency < 0.0 {
            return Err(Error::invalid(
                "spectrogram.reference_frequency",
                "must be non-negative",
            ));
        }
        for line in &self.pickup_lines {
            ensure_finite("pickup_lines.frequency", line.frequency)?;
            ensure_finite("pickup_lines.level_db", line.level_db)?;
            ensure_finite("pickup_lines.half_width", line.half_width)?;
            if line.frequency <= 0.0 || line.half_width < 0.0 {
                return Err(Error::invalid(
                    "pickup_lines",
                    "frequency must be positive and half_width non-negative",
                ));
            }
        }
        Ok(())
    }

    /// Log-spaced grid with pickup-line centres inside the band merged in.
    pub fn frequency_grid(&self) -> Vec<f64> {
        let n = self.n_frequencies;
        let ratio = (self.f_max / self.f_min).ln();
        let mut grid: Vec<f64> = (0..n)
            .map(|i| self.f_min * (ratio * i as f64 / (n - 1) as f64).exp())
            .collect();
        grid[n - 1] = self.f_max;
        for line in &self.pickup_lines {
            if (self.f_min..=self.f_max).contains(&line.frequency) {
                grid.push(line.frequency);
            }
        }
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        grid
    }

    /// Applies pickup-line ceilings to a level in dB.
    pub fn cap(&self, f: f64, level_db: f64) -> f64 {
        self.pickup_lines
            .iter()
            .filter(|line| line.covers(f))
            .fold(level_db, |acc, line| acc.max(line.level_db))
    }
}

/// Squeezing level in dB per time bin (rows) and frequency (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrogram {
    pub bin_duration: f64,
    pub fft_segment: f64,
    /// Start time of each row, seconds.
    pub bin_starts: Vec<f64>,
    /// Hz.
    pub frequencies: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl Spectrogram {
    pub fn is_empty(&self) -> bool {
        self.bin_starts.is_empty()
    }
}
