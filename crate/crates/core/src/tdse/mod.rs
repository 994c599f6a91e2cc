//! Split-operator propagation of the electron on a uniform 3D grid in the
//! velocity gauge.

mod fft;
mod grid;
mod ground;
pub mod observables;
mod propagator;
mod run;
mod wavefunction;

pub use fft::Fft3;
pub use grid::GridSpec;
pub use ground::{init_ground_state, init_ground_state_with, GroundState, GroundStateOptions};
pub use propagator::{
    ponderomotive_profile, soft_core_potential, AbsorberConfig, AbsorberKind, Gauge, GridField,
    Propagator, PropagatorConfig,
};
pub use run::{
    propagate, run, steps_for, Observation, RunOptions, RunOutput, TrajectoryRecord,
    TrajectorySample,
};
pub use wavefunction::{CheckpointMeta, Wavefunction};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TdseError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("wavefunctions live on different grids")]
    GridMismatch,
    #[error("{stage} did not converge: {detail}")]
    NotConverged { stage: &'static str, detail: String },
    #[error("propagation diverged at t = {t}: norm {norm}")]
    Diverged { t: f64, norm: f64 },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad checkpoint: {0}")]
    Format(String),
    #[error("{0}")]
    Observer(String),
}
