//! Dark-state polariton algebra for two counter-propagating control fields:
//!
//! ψ = (E⁺ cos φ + E⁻ sin φ) cos θ − S sin θ,
//! tan φ = Ω_BWC/Ω_FWC, tan²θ = g²N/Ω², Ω² = Ω²_FWC + Ω²_BWC,
//! v_g = c0 cos²θ cos 2φ.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixingAngles {
    pub phi: f64,
    pub theta: f64,
}

impl MixingAngles {
    pub fn new(phi: f64, theta: f64) -> Result<Self> {
        let q = std::f64::consts::FRAC_PI_2;
        if !(0.0..=q).contains(&phi) || !(0.0..=q).contains(&theta) {
            return Err(Error::Domain(format!(
                "mixing angles must lie in [0, π/2] (phi = {phi}, theta = {theta})"
            )));
        }
        Ok(Self { phi, theta })
    }
}

/// Mixing angles for control Rabi frequencies `omega_fwc`, `omega_bwc` and
/// collective coupling `g_n` (both in the same convention).
pub fn mixing_angles(omega_fwc: f64, omega_bwc: f64, g_n: f64) -> Result<MixingAngles> {
    if omega_fwc < 0.0 || omega_bwc < 0.0 || g_n < 0.0 {
        return Err(Error::Domain(
            "Rabi frequencies and g²N must be non-negative".into(),
        ));
    }
    let omega = omega_fwc.hypot(omega_bwc);
    if omega == 0.0 {
        return Err(Error::Domain(
            "no control field: θ is undefined (pure spin-wave limit)".into(),
        ));
    }
    Ok(MixingAngles {
        phi: omega_bwc.atan2(omega_fwc),
        theta: g_n.sqrt().atan2(omega),
    })
}

/// `c0 cos²θ cos 2φ`. Negative when the backward drive dominates.
pub fn group_velocity(angles: &MixingAngles, c0: f64) -> f64 {
    let phi = angles.phi;
    // cos2φ = (cos φ − sin φ)(cos φ + sin φ) is exactly zero at φ = π/4.
    let (s, c) = phi.sin_cos();
    let cos2phi = if phi == std::f64::consts::FRAC_PI_4 {
        0.0
    } else {
        (c - s) * (c + s)
    };
    c0 * angles.theta.cos().powi(2) * cos2phi
}

/// One sample of the field and spin amplitudes together with ψ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolaritonSample {
    pub e_plus: Complex64,
    pub e_minus: Complex64,
    pub spin: Complex64,
    pub psi: Complex64,
    pub angles: MixingAngles,
}

impl PolaritonSample {
    pub fn new(
        e_plus: Complex64,
        e_minus: Complex64,
        spin: Complex64,
        angles: MixingAngles,
    ) -> Self {
        Self {
            e_plus,
            e_minus,
            spin,
            psi: polariton_amplitude(e_plus, e_minus, spin, &angles),
            angles,
        }
    }
}

pub fn polariton_amplitude(
    e_plus: Complex64,
    e_minus: Complex64,
    spin: Complex64,
    angles: &MixingAngles,
) -> Complex64 {
    let (sp, cp) = angles.phi.sin_cos();
    let (st, ct) = angles.theta.sin_cos();
    (e_plus * cp + e_minus * sp) * ct - spin * st
}
