//! Physical constants, ensemble and laser parameters, and the closed-form
//! relations used to infer control Rabi frequencies, collective coupling,
//! Q-factor and N-atom cooperativity from measured quantities.
//!
//! # Conventions
//!
//! All angular frequencies are in rad/s. Two normalizations coexist:
//!
//! * **Solver convention.** `Ω` is the coefficient of the spin wave in the
//!   optical-coherence equation (`∂t P = … + iΩS`), i.e. half the full Rabi
//!   frequency, and the collective coupling obeys `g²N = OD·c0·Γ/(4L)` with
//!   OD the intensity extinction exponent of the bare medium. With these
//!   definitions the slow-light delay is `τ_g = OD·Γ/(4Ω²)`.
//! * **Delay-formula convention.** The relations `τ_g = OD·Γ/|Ω|²` and
//!   `v_g = c0·Ω²/(Ω² + g²N)` are used verbatim by [`infer_rabi_from_delay`]
//!   and [`infer_gn_from_vg`]. They agree with the solver when `Ω` and
//!   `g√N` are both twice their solver values; see [`convention`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Speed of light in vacuum (m/s).
    pub c0: f64,
    /// Probe wavelength (m).
    pub lambda_p: f64,
    /// Ground-state hyperfine splitting (rad/s).
    pub omega_hf: f64,
}

impl Default for PhysicalConstants {
    /// Rubidium-87 D1 line.
    fn default() -> Self {
        Self {
            c0: SPEED_OF_LIGHT,
            lambda_p: 795e-9,
            omega_hf: 2.0 * PI * 6.835e9,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        if !(self.c0 > 0.0) || !(self.lambda_p > 0.0) || !(self.omega_hf >= 0.0) {
            return Err(Error::Domain(format!(
                "physical constants must satisfy c0 > 0, lambda_p > 0, omega_hf >= 0 (got {self:?})"
            )));
        }
        Ok(())
    }

    /// Optical frequency of the probe (Hz).
    pub fn probe_frequency(&self) -> f64 {
        self.c0 / self.lambda_p
    }

    /// Angular frequency of the probe (rad/s).
    pub fn probe_angular_frequency(&self) -> f64 {
        2.0 * PI * self.probe_frequency()
    }
}

/// The atomic medium. `g_n` is stored in the solver convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    /// Resonant optical depth (intensity exponent).
    pub od: f64,
    /// Medium length L (m).
    pub length: f64,
    /// Ground-state coherence decay rate γ_S (rad/s, amplitude rate).
    pub gamma_s: f64,
    /// Excited-state decay rate Γ (rad/s).
    pub gamma_e: f64,
    /// Collective coupling g²N (rad²/s², solver convention).
    pub g_n: f64,
    /// Atom number N.
    pub n_atoms: f64,
}

impl EnsembleParams {
    /// Builds an ensemble whose `g_n` is fixed by the OD convention.
    pub fn from_od(
        od: f64,
        length: f64,
        gamma_s: f64,
        gamma_e: f64,
        n_atoms: f64,
        c0: f64,
    ) -> Result<Self> {
        let e = Self {
            od,
            length,
            gamma_s,
            gamma_e,
            g_n: convention::solver_gn_from_od(od, c0, gamma_e, length),
            n_atoms,
        };
        e.validate(c0)?;
        Ok(e)
    }

    pub fn validate(&self, c0: f64) -> Result<()> {
        if !(self.od > 0.0)
            || !(self.length > 0.0)
            || !(self.gamma_s >= 0.0)
            || !(self.gamma_e > 0.0)
            || !(self.g_n >= 0.0)
            || !(self.n_atoms >= 0.0)
        {
            return Err(Error::Domain(format!(
                "invalid ensemble parameters {self:?}"
            )));
        }
        let expected = convention::solver_gn_from_od(self.od, c0, self.gamma_e, self.length);
        if ((self.g_n - expected) / expected).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "g_n = {} inconsistent with OD convention (expected {expected})",
                self.g_n
            )));
        }
        Ok(())
    }

    /// Same medium with a different optical depth (per-channel OD).
    pub fn with_od(&self, od: f64, c0: f64) -> Self {
        Self {
            od,
            g_n: convention::solver_gn_from_od(od, c0, self.gamma_e, self.length),
            ..*self
        }
    }
}

/// Driving lasers. Rabi frequencies are in the solver convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlParams {
    pub omega_fwc: f64,
    pub omega_bwc: f64,
    /// FWC–BWC frequency offset Δ (rad/s); the BWC sits Δ below the FWC.
    pub delta: f64,
    /// Default duration of a control switching ramp (s).
    pub ramp_time: f64,
}

impl ControlParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_fwc >= 0.0) || !(self.omega_bwc >= 0.0) || !(self.ramp_time > 0.0) {
            return Err(Error::Domain(format!(
                "invalid control parameters {self:?}"
            )));
        }
        if !self.delta.is_finite() {
            return Err(Error::Domain("detuning must be finite".into()));
        }
        Ok(())
    }
}

/// Parameters of the cavity analogy used to express the trapping lifetime.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CavityAnalogyParams {
    /// Single-atom coupling g (rad/s).
    pub g_single: f64,
    /// Effective linewidth κ (rad/s). Taken as an input.
    pub kappa: f64,
    pub q_factor: Option<f64>,
    /// Characteristic dissipation time τ (s).
    pub tau_diss: Option<f64>,
    /// Resonant optical frequency f0 (Hz).
    pub f0: Option<f64>,
    /// Stored energy E (J), bookkeeping only.
    pub energy: Option<f64>,
    /// Dissipation rate P (W), bookkeeping only.
    pub power: Option<f64>,
}

impl CavityAnalogyParams {
    pub fn validate(&self) -> Result<()> {
        let rates = [
            Some(self.g_single),
            Some(self.kappa),
            self.tau_diss,
            self.f0,
        ];
        if rates.iter().flatten().any(|&v| !(v >= 0.0)) {
            return Err(Error::Domain(format!(
                "negative cavity parameter in {self:?}"
            )));
        }
        if let (Some(q), Some(f0), Some(tau)) = (self.q_factor, self.f0, self.tau_diss) {
            let expected = 2.0 * PI * f0 * tau;
            if (q - expected).abs() > 1e-9 * expected.abs().max(f64::MIN_POSITIVE) {
                return Err(Error::Domain(format!(
                    "q_factor {q} differs from 2π·f0·τ = {expected}"
                )));
            }
        }
        Ok(())
    }
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive (got {v})")))
    }
}

/// Control Rabi frequency implied by a slow-light delay, `Ω = sqrt(OD·Γ/τ_g)`.
pub fn infer_rabi_from_delay(od: f64, gamma_e: f64, tau_g: f64) -> Result<f64> {
    require_positive("od", od)?;
    require_positive("gamma_e", gamma_e)?;
    require_positive("tau_g", tau_g)?;
    Ok((od * gamma_e / tau_g).sqrt())
}

/// Collective coupling implied by `L/τ_g = c0·Ω²/(Ω² + g²N)`.
pub fn infer_gn_from_vg(tau_g: f64, length: f64, omega: f64, c0: f64) -> Result<f64> {
    require_positive("length", length)?;
    require_positive("c0", c0)?;
    if !(tau_g >= 0.0) || !omega.is_finite() {
        return Err(Error::Domain(
            "tau_g and omega must be finite, tau_g >= 0".into(),
        ));
    }
    let ratio = c0 * tau_g / length;
    if ratio < 1.0 {
        return Err(Error::Domain(format!(
            "group velocity L/tau_g = {} m/s exceeds c0",
            length / tau_g
        )));
    }
    Ok(omega * omega * (ratio - 1.0))
}

/// N-atom cooperativity `C_N = 4g²N/(κΓ)`.
pub fn cooperativity(g_single: f64, n_atoms: f64, kappa: f64, gamma_e: f64) -> Result<f64> {
    if !(kappa > 0.0) || !(gamma_e > 0.0) {
        return Err(Error::Domain(format!(
            "cooperativity needs kappa > 0 and gamma_e > 0 (got {kappa}, {gamma_e})"
        )));
    }
    Ok(4.0 * g_single * g_single * n_atoms / (kappa * gamma_e))
}

/// Cavity-analogy quality factor `Q = 2π·f0·τ`.
pub fn q_factor(f0: f64, tau_diss: f64) -> Result<f64> {
    require_positive("f0", f0)?;
    if !(tau_diss >= 0.0) {
        return Err(Error::Domain(format!(
            "tau_diss must be >= 0 (got {tau_diss})"
        )));
    }
    Ok(2.0 * PI * f0 * tau_diss)
}

/// Result of chaining the delay formulas into an atom number and cooperativity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CooperativityEstimate {
    /// Control Rabi frequency in the delay-formula convention (rad/s).
    pub omega: f64,
    /// Collective coupling in the delay-formula convention (rad²/s²).
    pub g_n: f64,
    pub n_atoms: f64,
    pub c_n: f64,
}

/// OD and a measured delay → Ω → g²N → N = g²N/g² → C_N.
pub fn estimate_cooperativity(
    od: f64,
    gamma_e: f64,
    tau_g: f64,
    length: f64,
    c0: f64,
    g_single: f64,
    kappa: f64,
) -> Result<CooperativityEstimate> {
    let omega = infer_rabi_from_delay(od, gamma_e, tau_g)?;
    let g_n = infer_gn_from_vg(tau_g, length, omega, c0)?;
    require_positive("g_single", g_single)?;
    let n_atoms = g_n / (g_single * g_single);
    let c_n = cooperativity(g_single, n_atoms, kappa, gamma_e)?;
    Ok(CooperativityEstimate {
        omega,
        g_n,
        n_atoms,
        c_n,
    })
}

/// Conversions between the solver convention and the delay-formula
/// convention. The mixing angle θ (ratio g²N/Ω²) is the same in both.
pub mod convention {
    /// `g²N = OD·c0·Γ/(4L)`.
    pub fn solver_gn_from_od(od: f64, c0: f64, gamma_e: f64, length: f64) -> f64 {
        od * c0 * gamma_e / (4.0 * length)
    }

    /// EIT delay of the solver model deep in the slow-light regime.
    pub fn solver_delay(od: f64, gamma_e: f64, omega: f64) -> f64 {
        od * gamma_e / (4.0 * omega * omega)
    }

    /// Solver Rabi frequency that produces the delay `tau_g`.
    pub fn solver_rabi_for_delay(od: f64, gamma_e: f64, tau_g: f64) -> f64 {
        0.5 * (od * gamma_e / tau_g).sqrt()
    }

    pub fn rabi_to_solver(omega_formula: f64) -> f64 {
        0.5 * omega_formula
    }

    pub fn rabi_from_solver(omega_solver: f64) -> f64 {
        2.0 * omega_solver
    }

    pub fn gn_to_solver(g_n_formula: f64) -> f64 {
        0.25 * g_n_formula
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const MHZ: f64 = 2.0 * PI * 1e6;

    #[test]
    fn rabi_from_reported_delay() {
        // 60 · 2π·5.8 MHz / 2 µs, square-rooted by hand: 3.3066e7 rad/s.
        let om = infer_rabi_from_delay(60.0, 5.8 * MHZ, 2e-6).unwrap();
        assert_relative_eq!(om / MHZ, 5.2626, max_relative = 1e-3);
        let om4 = infer_rabi_from_delay(240.0, 5.8 * MHZ, 2e-6).unwrap();
        assert_relative_eq!(om4, 2.0 * om, max_relative = 1e-14);
        assert_eq!(infer_rabi_from_delay(1.0, 1.0, 1.0).unwrap(), 1.0);
        assert!(infer_rabi_from_delay(0.0, 1.0, 1.0).is_err());
        assert!(infer_rabi_from_delay(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn rabi_round_trip() {
        for &(od, g, t) in &[(60.0, 3.6e7, 2e-6), (3.0, 1.0, 0.1), (400.0, 1e8, 1e-7)] {
            let om = infer_rabi_from_delay(od, g, t).unwrap();
            assert_relative_eq!(od * g / (om * om), t, max_relative = 1e-12);
        }
    }

    #[test]
    fn gn_from_group_velocity() {
        let om = 5.26 * MHZ;
        let gn = infer_gn_from_vg(2e-6, 10e-3, om, 3e8).unwrap();
        // Ω²·(c0 τ_g/L − 1) = (3.305e7)²·59999 = 6.554e19.
        assert_relative_eq!(gn, om * om * 59_999.0, max_relative = 1e-12);
        assert_relative_eq!(gn, 6.554e19, max_relative = 2e-3);
        let vg = 3e8 * om * om / (om * om + gn);
        assert_relative_eq!(vg, 10e-3 / 2e-6, max_relative = 1e-12);

        assert_eq!(infer_gn_from_vg(10e-3 / 3e8, 10e-3, om, 3e8).unwrap(), 0.0);
        assert!(infer_gn_from_vg(1e-12, 10e-3, om, 3e8).is_err());

        let g1 = infer_gn_from_vg(2e-6, 10e-3, om, 3e8).unwrap();
        let g2 = infer_gn_from_vg(4e-6, 10e-3, om, 3e8).unwrap();
        assert_relative_eq!(g2 / g1, 2.0, max_relative = 1e-4);
    }

    #[test]
    fn cooperativity_chain_matches_reported_scale() {
        let est = estimate_cooperativity(60.0, 5.8 * MHZ, 2e-6, 10e-3, 3e8, 0.24 * MHZ, 0.13 * MHZ)
            .unwrap();
        assert!(
            est.c_n > 8e6 / 1.2 && est.c_n < 8e6 * 1.2,
            "C_N = {}",
            est.c_n
        );
        let c1 = cooperativity(0.24 * MHZ, 1.0, 0.13 * MHZ, 5.8 * MHZ).unwrap();
        assert_relative_eq!(c1, 4.0 * 0.24 * 0.24 / (0.13 * 5.8), max_relative = 1e-12);
        assert!((c1 - 0.31).abs() < 0.01);
        assert_eq!(cooperativity(0.0, 1e7, 1.0, 1.0).unwrap(), 0.0);
        assert!(cooperativity(1.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn cooperativity_scaling() {
        let base = cooperativity(1.3, 7.0, 0.4, 2.0).unwrap();
        assert_relative_eq!(
            cooperativity(1.3, 21.0, 0.4, 2.0).unwrap(),
            3.0 * base,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            cooperativity(2.6, 7.0, 0.4, 2.0).unwrap(),
            4.0 * base,
            max_relative = 1e-14
        );
    }

    #[test]
    fn q_factor_values() {
        let f0 = PhysicalConstants::default().probe_frequency();
        let q = q_factor(f0, 1.22e-6).unwrap();
        assert!((q / 2.9e9 - 1.0).abs() < 0.02, "Q = {q}");
        assert_eq!(q_factor(f0, 0.0).unwrap(), 0.0);
        assert_relative_eq!(
            q_factor(1.0 / (2.0 * PI), 1.0).unwrap(),
            1.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            q_factor(3.0 * f0, 1.22e-6).unwrap(),
            3.0 * q,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            q_factor(f0, 2.44e-6).unwrap(),
            2.0 * q,
            max_relative = 1e-14
        );
        assert!(q_factor(0.0, 1.0).is_err());
    }

    #[test]
    fn conventions_agree_on_delay() {
        let (od, gamma, tau) = (60.0, 5.8 * MHZ, 2e-6);
        let formula = infer_rabi_from_delay(od, gamma, tau).unwrap();
        let solver = convention::solver_rabi_for_delay(od, gamma, tau);
        assert_relative_eq!(
            convention::rabi_to_solver(formula),
            solver,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            convention::solver_delay(od, gamma, solver),
            tau,
            max_relative = 1e-12
        );

        let l = 10e-3;
        let gn_formula = infer_gn_from_vg(tau, l, formula, SPEED_OF_LIGHT).unwrap();
        let gn_solver = convention::solver_gn_from_od(od, SPEED_OF_LIGHT, gamma, l);
        // Equal up to the Ω² term dropped in the slow-light limit.
        assert_relative_eq!(
            convention::gn_to_solver(gn_formula),
            gn_solver,
            max_relative = 1e-4
        );
    }

    #[test]
    fn ensemble_enforces_od_convention() {
        let c0 = SPEED_OF_LIGHT;
        let e = EnsembleParams::from_od(60.0, 0.01, 1.0, 3.6e7, 1e7, c0).unwrap();
        assert!(e.validate(c0).is_ok());
        let bad = EnsembleParams {
            g_n: e.g_n * 1.001,
            ..e
        };
        assert!(bad.validate(c0).is_err());
        assert!(EnsembleParams::from_od(-1.0, 0.01, 1.0, 1.0, 0.0, c0).is_err());
    }

    #[test]
    fn cavity_q_consistency() {
        let mut cav = CavityAnalogyParams {
            g_single: 1.0,
            kappa: 1.0,
            f0: Some(10.0),
            tau_diss: Some(2.0),
            q_factor: Some(2.0 * PI * 20.0),
            ..Default::default()
        };
        assert!(cav.validate().is_ok());
        cav.q_factor = Some(1.0);
        assert!(cav.validate().is_err());
    }
}
