//! Homodyne lock with exogenous Poisson losses and fixed reacquisition time.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Slack when comparing accumulated step times against the reacquisition time.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LockParams {
    /// Losses per hour while locked.
    pub lockloss_rate: f64,
    /// Seconds from a loss until squeezing is delivered again.
    pub reacquisition_time: f64,
}

impl Default for LockParams {
    fn default() -> Self {
        Self {
            lockloss_rate: 8.0 / 20.0,
            reacquisition_time: 15.0,
        }
    }
}

impl LockParams {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("lock.lockloss_rate", self.lockloss_rate)?;
        ensure_finite("lock.reacquisition_time", self.reacquisition_time)?;
        if self.lockloss_rate < 0.0 {
            return Err(Error::invalid("lock.lockloss_rate", "must be non-negative"));
        }
        if self.reacquisition_time < 0.0 {
            return Err(Error::invalid(
                "lock.reacquisition_time",
                "must be non-negative",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LockState {
    Locked,
    Unlocked,
    Acquiring,
}

/// What happened during one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LockTransition {
    None,
    Lost,
    Relocked,
}

#[derive(Debug, Clone)]
pub struct LockStateMachine {
    params: LockParams,
    state: LockState,
    remaining: f64,
    rng: ChaCha8Rng,
}

impl LockStateMachine {
    pub fn new(params: LockParams, rng: ChaCha8Rng) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            state: LockState::Locked,
            remaining: 0.0,
            rng,
        })
    }

    pub fn state(&self) -> LockState {
        self.state
    }

    /// Advances one step of length `dt`; the returned state holds for that
    /// whole step. `forced` is an external lock-loss trigger (saturation or a
    /// lost lock point).
    ///
    /// A uniform variate is consumed every step, so runs sharing a seed stay
    /// aligned whatever the triggers do.
    pub fn lock_step(&mut self, dt: f64, forced: bool) -> Result<(LockState, LockTransition)> {
        ensure_finite("dt", dt)?;
        if dt <= 0.0 {
            return Err(Error::invalid("dt", "must be positive"));
        }
        let u: f64 = self.rng.random();
        let p_loss = -(-self.params.lockloss_rate * dt / 3600.0).exp_m1();
        let transition = match self.state {
            LockState::Locked if forced || u < p_loss => {
                self.state = LockState::Unlocked;
                self.remaining = self.params.reacquisition_time - dt;
                LockTransition::Lost
            }
            LockState::Locked => LockTransition::None,
            LockState::Unlocked | LockState::Acquiring => {
                if self.remaining <= TIME_EPS {
                    self.state = LockState::Locked;
                    LockTransition::Relocked
                } else {
                    self.state = LockState::Acquiring;
                    self.remaining -= dt;
                    LockTransition::None
                }
            }
        };
        Ok((self.state, transition))
    }
}
