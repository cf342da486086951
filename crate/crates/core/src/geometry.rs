//! Phase matching for two counter-propagating coupling beams.
//!
//! The FWC propagates along +z. A probe at polar angle θ writes a spin wave
//! `k_s = k_p − k_FWC`; the forward read-out is `k_s + k_FWC = k_p` and the
//! backward read-out is `k_s + k_BWC`. Trapping requires both read-outs to
//! have the same magnitude, which fixes θ. All such probe directions form a
//! cone around the FWC axis.

use std::f64::consts::TAU;

use nalgebra::{Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::PhysicalConstants;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveVector(pub Vector3<f64>);

impl WaveVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self(Vector3::new(x, y, z))
    }

    pub fn magnitude(&self) -> f64 {
        self.0.norm()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl std::ops::Add for WaveVector {
    type Output = WaveVector;
    fn add(self, rhs: Self) -> Self {
        WaveVector(self.0 + rhs.0)
    }
}

impl std::ops::Sub for WaveVector {
    type Output = WaveVector;
    fn sub(self, rhs: Self) -> Self {
        WaveVector(self.0 - rhs.0)
    }
}

/// Optical angular frequencies of the three beams (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamFrequencies {
    pub omega_probe: f64,
    pub omega_fwc: f64,
    pub omega_bwc: f64,
}

impl BeamFrequencies {
    /// Probe on the given line, FWC one hyperfine splitting below it, BWC a
    /// further `delta` below the FWC.
    pub fn from_constants(constants: &PhysicalConstants, delta: f64) -> Self {
        let omega_probe = constants.probe_angular_frequency();
        let omega_fwc = omega_probe - constants.omega_hf;
        Self {
            omega_probe,
            omega_fwc,
            omega_bwc: omega_fwc - delta,
        }
    }

    /// Checks positivity and two-photon resonance against `omega_hf`.
    pub fn validate(&self, omega_hf: f64, rel_tol: f64) -> Result<()> {
        if !(self.omega_probe > 0.0 && self.omega_fwc > 0.0 && self.omega_bwc > 0.0) {
            return Err(Error::Domain(format!(
                "beam frequencies must be positive: {self:?}"
            )));
        }
        let defect = self.omega_probe - self.omega_fwc - omega_hf;
        if defect.abs() > rel_tol * self.omega_probe {
            return Err(Error::Domain(format!(
                "probe and FWC are off two-photon resonance by {defect:.3e} rad/s"
            )));
        }
        Ok(())
    }
}

/// Probe/FWC angle that equalizes the two read-out magnitudes for an exactly
/// counter-propagating BWC of the same magnitude as the FWC.
pub fn probe_angle(freqs: &BeamFrequencies, c0: f64) -> Result<f64> {
    if !(c0 > 0.0) || !(freqs.omega_fwc > 0.0) || !(freqs.omega_probe > 0.0) {
        return Err(Error::Domain(format!("invalid frequencies {freqs:?}")));
    }
    let kc = freqs.omega_fwc / c0;
    let kp = freqs.omega_probe / c0;
    if kc > kp {
        return Err(Error::NoSolution(format!(
            "|k_FWC| = {kc:.6e} exceeds |k_probe| = {kp:.6e}"
        )));
    }
    Ok((kc / kp).acos())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMatchSolution {
    /// Signed probe/FWC angle in the probe's azimuthal half-plane (rad).
    pub angle: f64,
    /// Azimuth of the probe about the FWC axis, in [0, 2π).
    pub azimuth: f64,
    pub k_probe: WaveVector,
    pub k_fwc: WaveVector,
    pub k_bwc: WaveVector,
    pub k_spin: WaveVector,
    pub k_fwd: WaveVector,
    pub k_bwd: WaveVector,
    pub delta_k: f64,
    pub delta_k_l: f64,
    /// Medium length used for `delta_k_l` (m).
    pub length: f64,
}

impl PhaseMatchSolution {
    pub fn angle_deg(&self) -> f64 {
        self.angle.to_degrees()
    }
}

/// Direction of the BWC: anti-parallel to the FWC, tilted by `tilt` about y.
pub fn bwc_direction(tilt: f64) -> Vector3<f64> {
    Vector3::new(tilt.sin(), 0.0, -tilt.cos())
}

/// Phase-matched probe on the cone at the given azimuth.
pub fn solution_cone(
    freqs: &BeamFrequencies,
    c0: f64,
    azimuth: f64,
    length: f64,
    bwc_tilt: f64,
) -> Result<PhaseMatchSolution> {
    let theta = probe_angle(freqs, c0)?;
    let azimuth = azimuth.rem_euclid(TAU);
    let kp = freqs.omega_probe / c0;
    let (st, ct) = theta.sin_cos();
    let (sa, ca) = azimuth.sin_cos();
    let k_probe = WaveVector::new(kp * st * ca, kp * st * sa, kp * ct);
    let k_fwc = WaveVector::new(0.0, 0.0, freqs.omega_fwc / c0);
    let k_bwc = WaveVector(bwc_direction(bwc_tilt) * (freqs.omega_bwc / c0));
    Ok(assemble(theta, azimuth, k_probe, k_fwc, k_bwc, length))
}

fn assemble(
    angle: f64,
    azimuth: f64,
    k_probe: WaveVector,
    k_fwc: WaveVector,
    k_bwc: WaveVector,
    length: f64,
) -> PhaseMatchSolution {
    let k_spin = k_probe - k_fwc;
    let k_fwd = k_spin + k_fwc;
    let k_bwd = k_spin + k_bwc;
    let delta_k = magnitude_gap(&k_spin, &k_fwc, &k_bwc);
    PhaseMatchSolution {
        angle,
        azimuth,
        k_probe,
        k_fwc,
        k_bwc,
        k_spin,
        k_fwd,
        k_bwd,
        delta_k,
        delta_k_l: delta_k * length,
        length,
    }
}

// | |s + b| − |s + f| | without subtracting two nearly equal norms.
fn magnitude_gap(s: &WaveVector, f: &WaveVector, b: &WaveVector) -> f64 {
    let num = (b.0 - f.0).dot(&(2.0 * s.0 + b.0 + f.0));
    let den = (s.0 + b.0).norm() + (s.0 + f.0).norm();
    if den == 0.0 {
        0.0
    } else {
        (num / den).abs()
    }
}

/// The in-plane solution (azimuth 0).
pub fn solve(
    freqs: &BeamFrequencies,
    c0: f64,
    length: f64,
    bwc_tilt: f64,
) -> Result<PhaseMatchSolution> {
    solution_cone(freqs, c0, 0.0, length, bwc_tilt)
}

/// Rotates the probe and spin wave by π about the FWC axis. The BWC is a
/// physical beam and keeps its direction.
pub fn mirror_solution(sol: &PhaseMatchSolution) -> PhaseMatchSolution {
    let flip = |k: WaveVector| WaveVector::new(-k.0.x, -k.0.y, k.0.z);
    let mut m = assemble(
        -sol.angle,
        sol.azimuth,
        flip(sol.k_probe),
        sol.k_fwc,
        sol.k_bwc,
        sol.length,
    );
    m.k_spin = flip(sol.k_spin);
    m.k_fwd = flip(sol.k_fwd);
    m
}

/// `| |k_s + k_BWC| − |k_fwd| | · L` for a BWC of frequency `freqs.omega_bwc`
/// along the direction stored in `sol`.
pub fn residual_mismatch(
    sol: &PhaseMatchSolution,
    freqs: &BeamFrequencies,
    c0: f64,
    length: f64,
) -> f64 {
    let k_bwc = WaveVector(sol.k_bwc.0.normalize() * (freqs.omega_bwc / c0));
    magnitude_gap(&sol.k_spin, &sol.k_fwc, &k_bwc) * length
}

/// Rotation about the FWC axis, used to place a solution elsewhere on the cone.
pub fn rotate_about_axis(k: &WaveVector, angle: f64) -> WaveVector {
    WaveVector(Rotation3::from_axis_angle(&Vector3::z_axis(), angle) * k.0)
}
