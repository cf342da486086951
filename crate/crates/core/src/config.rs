//! Parameter files: flat `key = value` documents with unit-suffixed values.
//!
//! | key | unit | meaning |
//! |-----|------|---------|
//! | `lambda_p` | length | probe wavelength |
//! | `omega_hf` | angular frequency | ground hyperfine splitting |
//! | `c0` | speed | speed of light |
//! | `od` | 1 | resonant optical depth |
//! | `length` | length | medium length |
//! | `gamma_e` | angular frequency | excited-state decay Γ |
//! | `gamma_s` | angular frequency | spin-wave amplitude decay γ_S |
//! | `n_atoms` | 1 | atom number (default: inferred from `tau_g_ref`) |
//! | `omega_fwc`, `omega_bwc` | angular frequency | nominal control Rabi frequencies (solver convention) |
//! | `delta` | angular frequency | FWC–BWC offset Δ |
//! | `ramp_time` | time | default control ramp |
//! | `delta_k_l` | 1 | default ΔkL for every channel |
//! | `bwc_tilt` | angle | BWC misalignment about y |
//! | `g_single`, `kappa` | angular frequency | cavity-analogy couplings |
//! | `tau_g_ref` | time | measured delay used to infer N |
//! | `chN.od`, `chN.overlap`, `chN.delta_k_l`, `chN.angle` | | per-channel overrides, N = 1, 2, … |
//!
//! Keys not listed keep their defaults; unknown keys are an error.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::ChannelParams;
use crate::error::{Error, Result};
use crate::params::{
    estimate_cooperativity, CavityAnalogyParams, ControlParams, EnsembleParams, PhysicalConstants,
};
use crate::units::{parse_quantity, Dimension};

const MHZ: f64 = 2.0 * PI * 1e6;

/// Everything a simulation needs besides the timeline and grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub constants: PhysicalConstants,
    pub ensemble: EnsembleParams,
    pub controls: ControlParams,
    pub cavity: CavityAnalogyParams,
    pub channels: Vec<ChannelParams>,
    pub bwc_tilt: f64,
    pub tau_g_ref: f64,
}

/// Flat values before derived quantities are filled in.
#[derive(Debug, Clone, PartialEq)]
struct Raw {
    c0: f64,
    lambda_p: f64,
    omega_hf: f64,
    od: f64,
    length: f64,
    gamma_e: f64,
    gamma_s: f64,
    n_atoms: Option<f64>,
    omega_fwc: f64,
    omega_bwc: f64,
    delta: f64,
    ramp_time: f64,
    delta_k_l: f64,
    bwc_tilt: f64,
    g_single: f64,
    kappa: f64,
    tau_g_ref: f64,
    channels: Vec<ChannelOverride>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct ChannelOverride {
    od: Option<f64>,
    overlap: Option<f64>,
    delta_k_l: Option<f64>,
    angle: Option<f64>,
}

impl Default for Raw {
    fn default() -> Self {
        let constants = PhysicalConstants::default();
        Self {
            c0: constants.c0,
            lambda_p: constants.lambda_p,
            omega_hf: constants.omega_hf,
            od: 60.0,
            length: 10e-3,
            gamma_e: 5.8 * MHZ,
            gamma_s: 0.06 * MHZ,
            n_atoms: None,
            // Solver convention; sets the EIT delay OD·Γ/(4Ω²) to 4 µs.
            omega_fwc: 1.86 * MHZ,
            omega_bwc: 1.86 * MHZ,
            delta: 4.0 * MHZ,
            ramp_time: 100e-9,
            delta_k_l: 0.05,
            bwc_tilt: 0.0,
            g_single: 0.24 * MHZ,
            kappa: 0.13 * MHZ,
            tau_g_ref: 2e-6,
            channels: vec![
                ChannelOverride {
                    od: Some(60.0),
                    overlap: Some(1.0),
                    ..Default::default()
                },
                ChannelOverride {
                    od: Some(47.5),
                    overlap: Some(0.79),
                    ..Default::default()
                },
            ],
        }
    }
}

impl Default for ParamSet {
    /// The shipped reference parameter file.
    fn default() -> Self {
        parse_params(crate::scenario::DEFAULT_PARAMS).expect("shipped parameters are valid")
    }
}

impl Raw {
    fn build(&self) -> Result<ParamSet> {
        let constants = PhysicalConstants {
            c0: self.c0,
            lambda_p: self.lambda_p,
            omega_hf: self.omega_hf,
        };
        constants.validate()?;
        let n_atoms = match self.n_atoms {
            Some(n) => n,
            None => {
                estimate_cooperativity(
                    self.od,
                    self.gamma_e,
                    self.tau_g_ref,
                    self.length,
                    self.c0,
                    self.g_single,
                    self.kappa,
                )?
                .n_atoms
            }
        };
        let ensemble = EnsembleParams::from_od(
            self.od,
            self.length,
            self.gamma_s,
            self.gamma_e,
            n_atoms,
            self.c0,
        )?;
        let controls = ControlParams {
            omega_fwc: self.omega_fwc,
            omega_bwc: self.omega_bwc,
            delta: self.delta,
            ramp_time: self.ramp_time,
        };
        controls.validate()?;
        let cavity = CavityAnalogyParams {
            g_single: self.g_single,
            kappa: self.kappa,
            f0: Some(constants.probe_frequency()),
            ..Default::default()
        };
        cavity.validate()?;
        let channels = self
            .channels
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let ch = ChannelParams {
                    od_eff: c.od.unwrap_or(self.od),
                    overlap: c.overlap.unwrap_or(1.0),
                    angle: c.angle.unwrap_or(0.0),
                    delta_k_l: c.delta_k_l.unwrap_or(self.delta_k_l),
                };
                ch.validate()
                    .map_err(|e| Error::Config(format!("channel {}: {e}", i + 1)))?;
                Ok(ch)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ParamSet {
            constants,
            ensemble,
            controls,
            cavity,
            channels,
            bwc_tilt: self.bwc_tilt,
            tau_g_ref: self.tau_g_ref,
        })
    }
}

/// Parses a parameter document on top of the built-in defaults.
pub fn parse_params(text: &str) -> Result<ParamSet> {
    let mut raw = Raw::default();
    let mut seen = std::collections::HashSet::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let content = line.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let eq = content
            .find('=')
            .ok_or_else(|| Error::parse(lineno, 1, "expected `key = value`"))?;
        let key = content[..eq].trim();
        let key_col = content.len() - content.trim_start().len() + 1;
        let value = &content[eq + 1..];
        let value_col = eq + 2;
        if !seen.insert(key.to_string()) {
            return Err(Error::parse(
                lineno,
                key_col,
                format!("duplicate key `{key}`"),
            ));
        }
        let q = |dim| {
            parse_quantity(value, dim)
                .map_err(|e| Error::parse(lineno, value_col + e.offset, e.message))
        };
        use Dimension::*;
        match key {
            "c0" => raw.c0 = q(Speed)?,
            "lambda_p" => raw.lambda_p = q(Length)?,
            "omega_hf" => raw.omega_hf = q(AngularFrequency)?,
            "od" => raw.od = q(Dimensionless)?,
            "length" => raw.length = q(Length)?,
            "gamma_e" => raw.gamma_e = q(AngularFrequency)?,
            "gamma_s" => raw.gamma_s = q(AngularFrequency)?,
            "n_atoms" => raw.n_atoms = Some(q(Dimensionless)?),
            "omega_fwc" => raw.omega_fwc = q(AngularFrequency)?,
            "omega_bwc" => raw.omega_bwc = q(AngularFrequency)?,
            "delta" => raw.delta = q(AngularFrequency)?,
            "ramp_time" => raw.ramp_time = q(Time)?,
            "delta_k_l" => raw.delta_k_l = q(Dimensionless)?,
            "bwc_tilt" => raw.bwc_tilt = q(Angle)?,
            "g_single" => raw.g_single = q(AngularFrequency)?,
            "kappa" => raw.kappa = q(AngularFrequency)?,
            "tau_g_ref" => raw.tau_g_ref = q(Time)?,
            _ => {
                let (ch, field) = key
                    .strip_prefix("ch")
                    .and_then(|rest| rest.split_once('.'))
                    .and_then(|(n, f)| n.parse::<usize>().ok().filter(|&n| n >= 1).map(|n| (n, f)))
                    .ok_or_else(|| Error::parse(lineno, key_col, format!("unknown key `{key}`")))?;
                if ch > raw.channels.len() {
                    raw.channels.resize(ch, ChannelOverride::default());
                }
                let slot = &mut raw.channels[ch - 1];
                match field {
                    "od" => slot.od = Some(q(Dimensionless)?),
                    "overlap" => slot.overlap = Some(q(Dimensionless)?),
                    "delta_k_l" => slot.delta_k_l = Some(q(Dimensionless)?),
                    "angle" => slot.angle = Some(q(Angle)?),
                    _ => {
                        return Err(Error::parse(
                            lineno,
                            key_col,
                            format!("unknown key `{key}`"),
                        ))
                    }
                }
            }
        }
    }
    raw.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn defaults_are_consistent() {
        let p = ParamSet::default();
        assert_eq!(p.ensemble.od, 60.0);
        assert_eq!(p.channels.len(), 2);
        assert!(p.ensemble.validate(p.constants.c0).is_ok());
        // N from the delay chain, roughly 3e7.
        assert!(p.ensemble.n_atoms > 2.5e7 && p.ensemble.n_atoms < 3.2e7);
    }

    #[test]
    fn builtin_fallbacks_match_shipped_file() {
        let a = serde_json::to_value(parse_params("").unwrap()).unwrap();
        let b = serde_json::to_value(ParamSet::default()).unwrap();
        fn close(a: &serde_json::Value, b: &serde_json::Value) -> bool {
            use serde_json::Value::*;
            match (a, b) {
                (Number(x), Number(y)) => {
                    let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
                    (x - y).abs() <= 1e-12 * x.abs().max(y.abs())
                }
                (Array(x), Array(y)) => {
                    x.len() == y.len() && x.iter().zip(y).all(|(x, y)| close(x, y))
                }
                (Object(x), Object(y)) => {
                    x.len() == y.len()
                        && x.iter().all(|(k, v)| y.get(k).is_some_and(|w| close(v, w)))
                }
                _ => a == b,
            }
        }
        assert!(close(&a, &b), "{a}\n{b}");
    }

    #[test]
    fn overrides_and_units() {
        let p = parse_params(
            "# test\nod = 10\nlength = 5 mm\ngamma_s = 30 kHz_x2pi\nch2.overlap = 0.5\nch3.od = 8\n",
        )
        .unwrap();
        assert_eq!(p.ensemble.od, 10.0);
        assert_relative_eq!(p.ensemble.length, 5e-3);
        assert_relative_eq!(p.ensemble.gamma_s, 2.0 * PI * 30e3);
        assert_eq!(p.channels[1].overlap, 0.5);
        assert_eq!(p.channels.len(), 3);
        assert_eq!(p.channels[2].od_eff, 8.0);
        assert_eq!(p.channels[2].overlap, 1.0);
        assert_eq!(p.channels[2].delta_k_l, 0.05);
    }

    #[test]
    fn errors() {
        let pos = |t: &str| match parse_params(t).unwrap_err() {
            Error::Parse {
                line,
                column,
                message,
            } => (line, column, message),
            e => panic!("{e:?}"),
        };
        let (l, c, m) = pos("od = 60\nfoo = 1");
        assert_eq!((l, c), (2, 1));
        assert!(m.contains("unknown key"));
        let (_, c, m) = pos("gamma_s = 60 kHz");
        assert_eq!(c, 14);
        assert!(m.contains("ambiguous"));
        assert!(pos("od = 1\nod = 2").2.contains("duplicate"));
        assert!(pos("ch1.color = 2").2.contains("unknown key"));
        assert!(matches!(
            parse_params("ch1.overlap = 1.5"),
            Err(Error::Config(_))
        ));
        assert!(parse_params("od = -1").is_err());
    }
}
