//! Deterministic virtual bench: lamp, monochromator, splitter, photocathode,
//! stage and the four instruments, all driven by one virtual clock.

mod bench;
mod cathode;
mod config;
mod lamp;
mod link;
mod optics;
mod server;
mod stage;

use std::io;

use thiserror::Error;

use crate::model::ModelError;

pub use bench::{Bench, Mount};
pub use cathode::{builtin_spectral, CathodeMap, Structure, MAX_QE};
pub use config::{
    BenchConfig, CathodeConfig, FaultConfig, LampConfig, MonoConfig, NoiseConfig, SplitterConfig, StageConfig,
    TimingConfig,
};
pub use lamp::LampModel;
pub use link::{BenchClock, LocalLink, SharedBench};
pub use optics::{interpolate, total_watts, Arm, Component, MonoModel, SplitterModel};
pub use server::{serve, BenchServer};
pub use stage::StageAxis;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid bench config: {0}")]
    InvalidConfig(String),
    #[error("cathode map: {0}")]
    MapFormat(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("tick must be positive and finite, got {0}")]
    NonPositiveTick(f64),
    #[error("cannot listen on {address}: {source}")]
    Bind { address: String, source: io::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
}
