//! Long-run operation: pump noise, power stabilizer, lock state machine and
//! spectrogram statistics.

pub mod lock;
pub mod noise;
pub mod run;
pub mod spectrogram;
pub mod stabilizer;

pub use lock::{LockParams, LockState, LockStateMachine, LockTransition};
pub use noise::{NoiseProcess, NoiseState};
pub use run::{run, sweep, EventKind, LockEvent, LongRunConfig, RunOutput, RunStats, Sample};
pub use spectrogram::{PickupLine, Spectrogram, SpectrogramConfig};
pub use stabilizer::{LoopOutput, StabilizerLoop};
