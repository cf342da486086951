//! Experiment timelines: probe injections and control-field switching.
//!
//! # Format
//!
//! One statement per line; `#` starts a comment. Times carry a unit
//! (`ps`, `ns`, `us`, `ms`, `s`).
//!
//! ```text
//! duration 12us
//! init FWC 1
//! at 1.6us probe ch=1 fwhm=2us amp=1
//! at 3.6us set FWC 0 ramp=100ns
//! at 5.6us set FWC 1
//! at 5.6us set BWC 1
//! at 6.6us set BWC 0
//! sweep BWC at=6.6us from=6.4us to=7.6us step=0.2us
//! ```
//!
//! * `duration <t>`: total simulated window. Defaults to the latest event
//!   time; an empty document has duration 0.
//! * `init <FWC|BWC> <level>`: level at t = 0 (default 0).
//! * `at <t> probe ch=<n> fwhm=<t> amp=<x>`: Gaussian probe on channel `n`
//!   whose intensity first crosses half maximum at `t`, so the peak sits at
//!   `t + fwhm/2`. `amp = 1` is a peak photon flux of 10⁶ s⁻¹.
//! * `at <t> set <FWC|BWC> <level> [ramp=<t>]`: raised-cosine ramp from the
//!   current level to `level` (a fraction of nominal Ω) over `[t, t + ramp]`.
//!   The ramp defaults to 100 ns.
//! * `sweep <FWC|BWC> at=<t> from=<t> to=<t> step=<t>`: marks the `set`
//!   event of that field at `at` as a parameter; [`Timeline::sweep_family`]
//!   expands it into one timeline per value in the inclusive range.

mod compile;
mod parse;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use compile::{compile, CompiledSequence, ControlWaveform, ProbeDrive, Ramp};
pub use parse::{parse_timeline, parse_timeline_with_ramp};

use crate::error::{Error, Result};

/// Default control switching ramp.
pub const DEFAULT_RAMP: Time = Time(100_000);

/// Peak photon flux (s⁻¹) of a probe with `amp = 1`.
pub const UNIT_PROBE_FLUX: f64 = 1e6;

/// A point in time with picosecond resolution. Keeping timelines on an
/// integer lattice makes printing and re-parsing exact.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
pub struct Time(pub i64);

impl Time {
    pub const ZERO: Time = Time(0);

    pub fn from_secs(s: f64) -> Time {
        Time((s * 1e12).round() as i64)
    }

    pub fn from_us(us: f64) -> Time {
        Time((us * 1e6).round() as i64)
    }

    pub fn secs(self) -> f64 {
        self.0 as f64 * 1e-12
    }

    pub fn ps(self) -> i64 {
        self.0
    }
}

impl std::ops::Add for Time {
    type Output = Time;
    fn add(self, rhs: Time) -> Time {
        Time(self.0 + rhs.0)
    }
}

impl std::ops::Sub for Time {
    type Output = Time;
    fn sub(self, rhs: Time) -> Time {
        Time(self.0 - rhs.0)
    }
}

impl fmt::Display for Time {
    /// Microseconds with only as many decimals as needed.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let whole = abs / 1_000_000;
        let frac = abs % 1_000_000;
        if frac == 0 {
            write!(f, "{sign}{whole}us")
        } else {
            let digits = format!("{frac:06}");
            write!(f, "{sign}{whole}.{}us", digits.trim_end_matches('0'))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ControlField {
    Fwc,
    Bwc,
}

impl ControlField {
    pub fn name(self) -> &'static str {
        match self {
            ControlField::Fwc => "FWC",
            ControlField::Bwc => "BWC",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ControlField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbePulse {
    /// Channel id, starting at 1.
    pub channel: usize,
    /// Leading half-maximum crossing.
    pub at: Time,
    /// Intensity FWHM.
    pub fwhm: Time,
    pub amplitude: f64,
}

impl ProbePulse {
    pub fn t_center(&self) -> Time {
        Time(self.at.0 + self.fwhm.0 / 2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetControl {
    pub field: ControlField,
    /// Target level as a fraction of the nominal Rabi frequency.
    pub level: f64,
    pub t_start: Time,
    pub ramp: Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Event {
    Probe(ProbePulse),
    Set(SetControl),
}

impl Event {
    pub fn time(&self) -> Time {
        match self {
            Event::Probe(p) => p.at,
            Event::Set(s) => s.t_start,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub field: ControlField,
    pub at: Time,
    pub from: Time,
    pub to: Time,
    pub step: Time,
}

impl Sweep {
    pub fn values(&self) -> Vec<Time> {
        let mut out = Vec::new();
        let mut t = self.from;
        while t <= self.to {
            out.push(t);
            t = t + self.step;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    /// Sorted by time; ties keep their source order.
    pub events: Vec<Event>,
    pub duration: Time,
    /// Control levels at t = 0, indexed FWC then BWC.
    pub initial_levels: [f64; 2],
    pub sweep: Option<Sweep>,
}

impl Default for Timeline {
    fn default() -> Self {
        Self {
            events: Vec::new(),
            duration: Time::ZERO,
            initial_levels: [0.0, 0.0],
            sweep: None,
        }
    }
}

impl Timeline {
    pub fn initial_level(&self, field: ControlField) -> f64 {
        self.initial_levels[field.index()]
    }

    pub fn set_events(&self, field: ControlField) -> impl Iterator<Item = &SetControl> + '_ {
        self.events.iter().filter_map(move |e| match e {
            Event::Set(s) if s.field == field => Some(s),
            _ => None,
        })
    }

    pub fn probes(&self) -> impl Iterator<Item = &ProbePulse> + '_ {
        self.events.iter().filter_map(|e| match e {
            Event::Probe(p) => Some(p),
            _ => None,
        })
    }

    pub fn channels(&self) -> Vec<usize> {
        let mut ch: Vec<usize> = self.probes().map(|p| p.channel).collect();
        ch.sort_unstable();
        ch.dedup();
        ch
    }

    /// First time `field` starts ramping towards a level different from
    /// its current one, searching from `after` onwards.
    pub fn switch_time(&self, field: ControlField, after: Time, on: bool) -> Option<Time> {
        self.set_events(field)
            .filter(|s| s.t_start >= after && (s.level > 0.0) == on)
            .map(|s| s.t_start)
            .next()
    }

    /// Checks ordering, bounds, levels and ramp overlaps.
    pub fn validate(&self) -> Result<()> {
        for w in self.events.windows(2) {
            if w[1].time() < w[0].time() {
                return Err(Error::Config("events are not sorted by time".into()));
            }
        }
        for e in &self.events {
            if e.time() < Time::ZERO || e.time() > self.duration {
                return Err(Error::Config(format!(
                    "event at {} lies outside [0, {}]",
                    e.time(),
                    self.duration
                )));
            }
            match e {
                Event::Probe(p) => {
                    if p.fwhm <= Time::ZERO
                        || !(p.amplitude >= 0.0)
                        || !p.amplitude.is_finite()
                        || p.channel == 0
                    {
                        return Err(Error::Config(format!("invalid probe {p:?}")));
                    }
                }
                Event::Set(s) => {
                    if !(0.0..=1.0).contains(&s.level) || s.ramp <= Time::ZERO {
                        return Err(Error::Config(format!("invalid control event {s:?}")));
                    }
                }
            }
        }
        if self.initial_levels.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(Error::Config("initial levels must lie in [0, 1]".into()));
        }
        for field in [ControlField::Fwc, ControlField::Bwc] {
            let sets: Vec<_> = self.set_events(field).collect();
            for w in sets.windows(2) {
                if w[0].t_start + w[0].ramp > w[1].t_start {
                    return Err(Error::Config(format!(
                        "{field} ramps at {} and {} overlap",
                        w[0].t_start, w[1].t_start
                    )));
                }
            }
        }
        if let Some(sw) = &self.sweep {
            self.sweep_target(sw)?;
            if sw.step <= Time::ZERO || sw.from > sw.to {
                return Err(Error::Config("sweep needs step > 0 and from <= to".into()));
            }
        }
        Ok(())
    }

    fn sweep_target(&self, sw: &Sweep) -> Result<usize> {
        self.events
            .iter()
            .position(|e| matches!(e, Event::Set(s) if s.field == sw.field && s.t_start == sw.at))
            .ok_or_else(|| {
                Error::Config(format!(
                    "sweep refers to no {} event at {}",
                    sw.field, sw.at
                ))
            })
    }

    /// Copy of this timeline with the `field` event at `at` moved to `to`.
    pub fn with_event_moved(&self, field: ControlField, at: Time, to: Time) -> Result<Timeline> {
        let sw = Sweep {
            field,
            at,
            from: to,
            to,
            step: Time(1),
        };
        let idx = self.sweep_target(&sw)?;
        let mut out = self.clone();
        out.sweep = None;
        if let Event::Set(s) = &mut out.events[idx] {
            s.t_start = to;
        }
        out.events.sort_by_key(|e| e.time());
        out.validate()?;
        Ok(out)
    }

    /// One timeline per sweep value, paired with that value. A timeline
    /// without a sweep yields itself.
    pub fn sweep_family(&self) -> Result<Vec<(Time, Timeline)>> {
        match &self.sweep {
            None => Ok(vec![(Time::ZERO, self.clone())]),
            Some(sw) => sw
                .values()
                .into_iter()
                .map(|v| Ok((v, self.with_event_moved(sw.field, sw.at, v)?)))
                .collect(),
        }
    }

    /// Canonical text form; `parse_timeline` of the output reproduces `self`.
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        writeln!(s, "duration {}", self.duration).unwrap();
        for f in [ControlField::Fwc, ControlField::Bwc] {
            let l = self.initial_level(f);
            if l != 0.0 {
                writeln!(s, "init {f} {l}").unwrap();
            }
        }
        for e in &self.events {
            match e {
                Event::Probe(p) => writeln!(
                    s,
                    "at {} probe ch={} fwhm={} amp={}",
                    p.at, p.channel, p.fwhm, p.amplitude
                ),
                Event::Set(c) => writeln!(
                    s,
                    "at {} set {} {} ramp={}",
                    c.t_start, c.field, c.level, c.ramp
                ),
            }
            .unwrap();
        }
        if let Some(sw) = &self.sweep {
            writeln!(
                s,
                "sweep {} at={} from={} to={} step={}",
                sw.field, sw.at, sw.from, sw.to, sw.step
            )
            .unwrap();
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_display() {
        assert_eq!(Time::from_us(1.6).to_string(), "1.6us");
        assert_eq!(Time::from_us(12.0).to_string(), "12us");
        assert_eq!(Time(100_000).to_string(), "0.1us");
        assert_eq!(Time(1).to_string(), "0.000001us");
        assert_eq!(Time(0).to_string(), "0us");
    }

    #[test]
    fn sweep_values_inclusive() {
        let sw = Sweep {
            field: ControlField::Bwc,
            at: Time::from_us(6.6),
            from: Time::from_us(6.4),
            to: Time::from_us(7.6),
            step: Time::from_us(0.2),
        };
        let v: Vec<String> = sw.values().iter().map(|t| t.to_string()).collect();
        assert_eq!(
            v,
            ["6.4us", "6.6us", "6.8us", "7us", "7.2us", "7.4us", "7.6us"]
        );
    }
}
