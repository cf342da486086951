//! Simulation laboratory for stationary light pulses in a Λ-type atomic
//! ensemble.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod io;
pub mod params;
pub mod polariton;
pub mod scenario;
pub mod sequence;
pub mod units;

pub use error::{Error, Result};

pub use analysis::{DecayFit, End, Report, Trace};
pub use config::{parse_params, ParamSet};
pub use dynamics::{
    ChannelParams, DissipationLedger, Grid, RunOptions, SimState, SolverKind, TraceSet,
};
pub use geometry::{BeamFrequencies, PhaseMatchSolution, WaveVector};
pub use params::{CavityAnalogyParams, ControlParams, EnsembleParams, PhysicalConstants};
pub use polariton::MixingAngles;
pub use scenario::{builtin, execute, Outcome, Scenario};
pub use sequence::{parse_timeline, CompiledSequence, ControlWaveform, Event, Time, Timeline};
