//! Simulation of an audio-band squeezed-light source under coherent control:
//! cavity optics, OPO variances, the pump-to-squeezing control chain and a
//! long-run stabilized-operation model.

pub mod commands;
pub mod config;
pub mod control;
pub mod error;
pub mod longrun;
pub mod opo;
pub mod optics;
pub mod table;

pub use error::{Error, ErrorKind, Result};
