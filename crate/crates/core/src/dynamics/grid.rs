use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform space/time discretization of one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n_z: usize,
    pub length: f64,
    pub dz: f64,
    pub dt: f64,
}

impl Grid {
    pub const DEFAULT_NZ: usize = 256;
    pub const DEFAULT_DT: f64 = 1e-9;

    pub fn new(n_z: usize, length: f64, dt: f64) -> Result<Self> {
        if n_z < 16 {
            return Err(Error::Config(format!("grid needs n_z >= 16 (got {n_z})")));
        }
        if !(length > 0.0) || !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Config(format!(
                "grid needs length > 0 and dt > 0 (got {length}, {dt})"
            )));
        }
        Ok(Self {
            n_z,
            length,
            dz: length / (n_z - 1) as f64,
            dt,
        })
    }

    pub fn z(&self, j: usize) -> f64 {
        j as f64 * self.dz
    }

    /// Trapezoid weights for integrals over z.
    pub fn weights(&self) -> Vec<f64> {
        let mut w = vec![self.dz; self.n_z];
        w[0] *= 0.5;
        w[self.n_z - 1] *= 0.5;
        w
    }

    /// Enforces `dt <= min(0.05/Γ_eff, 0.01·τ_pulse)`.
    pub fn check_stability(&self, gamma_eff: f64, tau_pulse: Option<f64>) -> Result<()> {
        let mut limit = 0.05 / gamma_eff;
        if let Some(tau) = tau_pulse {
            limit = limit.min(0.01 * tau);
        }
        if self.dt > limit * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "dt = {:.3e} s exceeds the stability bound {limit:.3e} s (Γ_eff = {gamma_eff:.3e} rad/s)",
                self.dt
            )));
        }
        Ok(())
    }
}
