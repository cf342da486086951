//! One-dimensional field/atom dynamics of a Λ ensemble driven by forward and
//! backward control fields.
//!
//! With photon-flux amplitudes `a±`, coherences `P±` and spin wave `S`:
//!
//! ```text
//! ∂z a⁺ =  iηP⁺
//! ∂z a⁻ = −iηP⁻
//! ∂t P⁺ = −(Γ/2)P⁺      + iηa⁺ + iΩ_F S
//! ∂t P⁻ = −(Γ/2 + iΔ)P⁻ + iηa⁻ + iΩ_B S e^{iΔk z}
//! ∂t S  = −γ_S S + iΩ_F P⁺ + iΩ_B P⁻ e^{−iΔk z}
//! ```
//!
//! with η² = OD·Γ/(4L). Fields are quasi-static (the transit time L/c0 is
//! picoseconds) and are re-solved along z whenever the atoms are evaluated:
//! `a⁺` from z = 0 with the probe as boundary value, `a⁻` from z = L with
//! zero input.
//!
//! The default integrator eliminates `P±` adiabatically. Each field sweep is
//! then a linear ODE `a' = −κa − cS(z)` that is integrated exactly per cell
//! for piecewise-linear `S`, and `S` is advanced with RK4. The full
//! integrator keeps `P±` dynamical and integrates the fields by the
//! trapezoid rule.

mod grid;
mod model;
mod run;
mod state;

use serde::{Deserialize, Serialize};

pub use grid::Grid;
pub use model::{Inputs, Model, SolverKind, Stepper};
pub use run::{
    centroid_velocity, run, run_channel, CentroidSample, ChannelRun, InitialSpinWave, LedgerSample,
    RunOptions, TraceSet,
};
pub use state::{DissipationLedger, SimState};

use crate::error::{Error, Result};

/// Per-channel medium and coupling parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub od_eff: f64,
    /// Fraction of the nominal control Rabi frequencies seen by this channel.
    pub overlap: f64,
    /// Injection angle tag (rad), informational.
    pub angle: f64,
    pub delta_k_l: f64,
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.od_eff > 0.0) || !(self.overlap > 0.0 && self.overlap <= 1.0) {
            return Err(Error::Config(format!(
                "channel needs od_eff > 0 and 0 < overlap <= 1 (got {self:?})"
            )));
        }
        if !self.delta_k_l.is_finite() || !self.angle.is_finite() {
            return Err(Error::Config(
                "channel delta_k_l and angle must be finite".into(),
            ));
        }
        Ok(())
    }
}
