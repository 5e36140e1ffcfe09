use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lock::{LockParams, LockState, LockStateMachine, LockTransition};
use super::noise::{NoiseProcess, NoiseState};
use super::spectrogram::{Spectrogram, SpectrogramConfig};
use super::stabilizer::StabilizerLoop;
use crate::control::SqueezingChain;
use crate::error::{ensure_finite, Error, Result};
use crate::opo::{from_decibel, to_decibel};

const NOISE_STREAM: u64 = 0;
const LOCK_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct LongRunConfig {
    pub seed: u64,
    /// Seconds.
    pub duration: f64,
    /// Seconds.
    pub dt: f64,
    pub noise: NoiseProcess,
    pub stabilizer: StabilizerLoop,
    pub lock: LockParams,
    pub spectrogram: SpectrogramConfig,
}

impl Default for LongRunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            duration: 72_000.0,
            dt: 1.0,
            noise: NoiseProcess::default(),
            stabilizer: StabilizerLoop::default(),
            lock: LockParams::default(),
            spectrogram: SpectrogramConfig::default(),
        }
    }
}

impl LongRunConfig {
    pub fn validate(&self) -> Result<usize> {
        ensure_finite("duration", self.duration)?;
        ensure_finite("dt", self.dt)?;
        if self.dt <= 0.0 {
            return Err(Error::invalid("dt", "must be positive"));
        }
        if self.duration < 0.0 {
            return Err(Error::invalid("duration", "must be non-negative"));
        }
        let steps = (self.duration / self.dt).round();
        if (steps * self.dt - self.duration).abs() > 1e-9 * self.duration.max(self.dt) {
            return Err(Error::invalid(
                "duration",
                "must be a whole number of dt steps",
            ));
        }
        self.noise.validate()?;
        self.stabilizer.validate()?;
        self.lock.validate()?;
        self.spectrogram.validate()?;
        Ok(steps as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    /// Start of the step, seconds.
    pub time: f64,
    pub raw_deviation: f64,
    pub residual_deviation: f64,
    pub pump_power: f64,
    pub detuning_hz: f64,
    pub state: LockState,
    /// Level at the reference frequency; 0 dB while not locked.
    pub squeezing_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Lockloss,
    Relock,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LockEvent {
    pub time: f64,
    pub kind: EventKind,
    pub cause: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub duration: f64,
    pub locked_time: f64,
    pub duty_cycle: f64,
    pub n_locklosses: usize,
    pub n_saturations: usize,
    /// Seconds.
    pub longest_lock: f64,
    /// Time average at the reference frequency, counting unlocked time as 0 dB.
    pub mean_squeezing_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub seed: u64,
    pub spectrogram: Spectrogram,
    pub stats: RunStats,
    pub samples: Vec<Sample>,
    pub events: Vec<LockEvent>,
    pub warnings: Vec<String>,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Simulates one run. The readout mode is taken from the chain's control
/// settings.
pub fn run(chain: &SqueezingChain, cfg: &LongRunConfig) -> Result<RunOutput> {
    let n = cfg.validate()?;
    let dt = cfg.dt;
    let mode = chain.control.readout_mode;
    let set_point = chain.thermal.set_point_power;
    let reference = cfg.spectrogram.reference_frequency;

    let mut noise = NoiseState::new(cfg.noise, stream_rng(cfg.seed, NOISE_STREAM))?;
    let mut raw = Vec::with_capacity(n);
    if n > 0 {
        raw.push(noise.current());
        for _ in 1..n {
            raw.push(noise.noise_step(dt)?);
        }
    }
    let filtered = cfg.stabilizer.loop_residual(&raw, dt)?;

    let mut lock = LockStateMachine::new(cfg.lock, stream_rng(cfg.seed, LOCK_STREAM))?;
    let mut samples = Vec::with_capacity(n);
    let mut events = Vec::new();
    let mut n_locklosses = 0;
    let mut n_saturations = 0;
    let (mut locked_steps, mut run_len, mut longest) = (0usize, 0usize, 0usize);
    let mut db_sum = 0.0;

    let steps = raw.iter().zip(&filtered.residual).zip(&filtered.saturated);
    for (i, ((&raw_deviation, &residual), &saturated)) in steps.enumerate() {
        let time = i as f64 * dt;
        n_saturations += usize::from(saturated);
        let pump_power = set_point * (1.0 + residual);
        let detected = chain.detected_squeezing_at(pump_power, mode, reference);
        let (state, transition) = lock.lock_step(dt, saturated || detected.is_err())?;
        match transition {
            LockTransition::Lost => {
                n_locklosses += 1;
                let cause = match (&detected, saturated) {
                    (_, true) => "actuator saturation".to_string(),
                    (Err(e), false) => e.to_string(),
                    (Ok(_), false) => "random".to_string(),
                };
                events.push(LockEvent {
                    time,
                    kind: EventKind::Lockloss,
                    cause,
                });
            }
            LockTransition::Relocked => events.push(LockEvent {
                time,
                kind: EventKind::Relock,
                cause: String::new(),
            }),
            LockTransition::None => {}
        }
        let squeezing_db = if state == LockState::Locked {
            locked_steps += 1;
            run_len += 1;
            longest = longest.max(run_len);
            detected?.squeezing_db
        } else {
            run_len = 0;
            0.0
        };
        db_sum += squeezing_db;
        samples.push(Sample {
            time,
            raw_deviation,
            residual_deviation: residual,
            pump_power,
            detuning_hz: chain.thermal.detuning_at(pump_power).hz(),
            state,
            squeezing_db,
        });
    }

    let mut warnings = Vec::new();
    let (duty_cycle, mean_squeezing_db) = if n == 0 {
        warnings
            .push("duration is zero: spectrogram is empty and duty cycle is reported as 1".into());
        (1.0, 0.0)
    } else {
        (locked_steps as f64 / n as f64, db_sum / n as f64)
    };
    let spectrogram = build_spectrogram(chain, cfg, &samples)?;
    Ok(RunOutput {
        seed: cfg.seed,
        spectrogram,
        stats: RunStats {
            duration: n as f64 * dt,
            locked_time: locked_steps as f64 * dt,
            duty_cycle,
            n_locklosses,
            n_saturations,
            longest_lock: longest as f64 * dt,
            mean_squeezing_db,
        },
        samples,
        events,
        warnings,
    })
}

/// Each row averages linear variance over the first `fft_segment` seconds of
/// its bin; unlocked samples contribute shot noise.
fn build_spectrogram(
    chain: &SqueezingChain,
    cfg: &LongRunConfig,
    samples: &[Sample],
) -> Result<Spectrogram> {
    let spec = &cfg.spectrogram;
    let frequencies = spec.frequency_grid();
    let per_bin = ((spec.bin_duration / cfg.dt).round() as usize).max(1);
    let per_segment = ((spec.fft_segment / cfg.dt).round() as usize).clamp(1, per_bin);
    let mode = chain.control.readout_mode;
    let mut bin_starts = Vec::new();
    let mut values = Vec::new();
    for bin in samples.chunks(per_bin) {
        let segment = &bin[..per_segment.min(bin.len())];
        let row = frequencies
            .iter()
            .map(|&f| {
                let mut total = 0.0;
                for s in segment {
                    total += if s.state == LockState::Locked {
                        from_decibel(
                            chain
                                .detected_squeezing_at(s.pump_power, mode, f)?
                                .squeezing_db,
                        )
                    } else {
                        1.0
                    };
                }
                Ok(spec.cap(f, to_decibel(total / segment.len() as f64)?))
            })
            .collect::<Result<Vec<f64>>>()?;
        bin_starts.push(bin[0].time);
        values.push(row);
    }
    Ok(Spectrogram {
        bin_duration: spec.bin_duration,
        fft_segment: spec.fft_segment,
        bin_starts,
        frequencies,
        values,
    })
}

/// Runs the same configuration for each seed in parallel; results follow the
/// order of `seeds`.
pub fn sweep(chain: &SqueezingChain, cfg: &LongRunConfig, seeds: &[u64]) -> Result<Vec<RunOutput>> {
    seeds
        .par_iter()
        .map(|&seed| {
            let cfg = LongRunConfig {
                seed,
                ..cfg.clone()
            };
            run(chain, &cfg)
        })
        .collect()
}
