use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use super::{ControlField, Timeline, UNIT_PROBE_FLUX};
use crate::error::Result;
use crate::params::ControlParams;

/// A raised-cosine transition between two levels over `[t0, t1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ramp {
    pub t0: f64,
    pub t1: f64,
    pub from: f64,
    pub to: f64,
}

impl Ramp {
    fn eval(&self, t: f64) -> f64 {
        let x = ((t - self.t0) / (self.t1 - self.t0)).clamp(0.0, 1.0);
        self.from + (self.to - self.from) * 0.5 * (1.0 - (PI * x).cos())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Schedule {
    nominal: f64,
    initial: f64,
    ramps: Vec<Ramp>,
}

impl Schedule {
    fn level(&self, t: f64) -> f64 {
        let idx = self.ramps.partition_point(|r| r.t0 <= t);
        if idx == 0 {
            return self.initial;
        }
        let r = &self.ramps[idx - 1];
        if t >= r.t1 {
            r.to
        } else {
            r.eval(t)
        }
    }

    fn max_level(&self) -> f64 {
        self.ramps.iter().map(|r| r.to).fold(self.initial, f64::max)
    }
}

/// Time-dependent control Rabi frequencies (rad/s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlWaveform {
    fwc: Schedule,
    bwc: Schedule,
}

impl ControlWaveform {
    pub fn omega_fwc(&self, t: f64) -> f64 {
        self.fwc.nominal * self.fwc.level(t)
    }

    pub fn omega_bwc(&self, t: f64) -> f64 {
        self.bwc.nominal * self.bwc.level(t)
    }

    pub fn omega(&self, field: ControlField, t: f64) -> f64 {
        match field {
            ControlField::Fwc => self.omega_fwc(t),
            ControlField::Bwc => self.omega_bwc(t),
        }
    }

    /// Largest value either waveform reaches.
    pub fn max_omega(&self, field: ControlField) -> f64 {
        match field {
            ControlField::Fwc => self.fwc.nominal * self.fwc.max_level(),
            ControlField::Bwc => self.bwc.nominal * self.bwc.max_level(),
        }
    }

    pub fn ramps(&self, field: ControlField) -> &[Ramp] {
        match field {
            ControlField::Fwc => &self.fwc.ramps,
            ControlField::Bwc => &self.bwc.ramps,
        }
    }

    pub fn shortest_ramp(&self) -> Option<f64> {
        self.fwc
            .ramps
            .iter()
            .chain(&self.bwc.ramps)
            .map(|r| r.t1 - r.t0)
            .reduce(f64::min)
    }
}

/// Truncated Gaussian probe injected at z = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeDrive {
    pub channel: usize,
    pub t_center: f64,
    /// Intensity FWHM (s).
    pub fwhm: f64,
    /// Peak photon flux (s⁻¹).
    pub peak_flux: f64,
}

impl ProbeDrive {
    /// Standard deviation of the intensity profile.
    pub fn sigma(&self) -> f64 {
        self.fwhm / (2.0 * (2.0 * LN_2).sqrt())
    }

    /// Photon flux at time `t`; zero beyond ±3σ.
    pub fn flux(&self, t: f64) -> f64 {
        let dt = t - self.t_center;
        if dt.abs() > 3.0 * self.sigma() {
            return 0.0;
        }
        self.peak_flux * (-4.0 * LN_2 * dt * dt / (self.fwhm * self.fwhm)).exp()
    }

    /// Field amplitude whose squared modulus is the flux.
    pub fn amplitude(&self, t: f64) -> f64 {
        self.flux(t).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompiledSequence {
    pub controls: ControlWaveform,
    pub probes: Vec<ProbeDrive>,
    pub duration: f64,
}

impl CompiledSequence {
    /// Sum of the field amplitudes of every probe on `channel`.
    pub fn drive(&self, channel: usize, t: f64) -> f64 {
        self.probes
            .iter()
            .filter(|p| p.channel == channel)
            .map(|p| p.amplitude(t))
            .sum()
    }

    pub fn drive_flux(&self, channel: usize, t: f64) -> f64 {
        let a = self.drive(channel, t);
        a * a
    }

    pub fn shortest_pulse(&self) -> Option<f64> {
        self.probes.iter().map(|p| p.fwhm).reduce(f64::min)
    }
}

/// Turns a validated timeline into waveforms. Fails on overlapping ramps.
pub fn compile(timeline: &Timeline, controls: &ControlParams) -> Result<CompiledSequence> {
    timeline.validate()?;
    let schedule = |field: ControlField, nominal: f64| {
        let mut level = timeline.initial_level(field);
        let ramps = timeline
            .set_events(field)
            .map(|s| {
                let r = Ramp {
                    t0: s.t_start.secs(),
                    t1: (s.t_start + s.ramp).secs(),
                    from: level,
                    to: s.level,
                };
                level = s.level;
                r
            })
            .collect();
        Schedule {
            nominal,
            initial: timeline.initial_level(field),
            ramps,
        }
    };
    let probes = timeline
        .probes()
        .map(|p| ProbeDrive {
            channel: p.channel,
            t_center: p.t_center().secs(),
            fwhm: p.fwhm.secs(),
            peak_flux: p.amplitude * UNIT_PROBE_FLUX,
        })
        .collect();
    Ok(CompiledSequence {
        controls: ControlWaveform {
            fwc: schedule(ControlField::Fwc, controls.omega_fwc),
            bwc: schedule(ControlField::Bwc, controls.omega_bwc),
        },
        probes,
        duration: timeline.duration.secs(),
    })
}
