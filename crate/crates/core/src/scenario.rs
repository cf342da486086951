//! Built-in scenarios and the driver that runs a timeline (or a sweep of
//! timelines) and extracts the standard observables.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    fit_exponential, group_delay, pulse_energy, release_window, retrieval_window, summarize,
    DecayFit, Report,
};
use crate::config::ParamSet;
use crate::dynamics::{run, Grid, InitialSpinWave, RunOptions, TraceSet};
use crate::error::{Error, Result};
use crate::sequence::{compile, parse_timeline_with_ramp, ControlField, Event, Time, Timeline};

pub const FIG3_EIT: &str = include_str!("../data/sequences/fig3_eit.seq");
pub const FIG3_SLP: &str = include_str!("../data/sequences/fig3_slp.seq");
pub const FIG4_SWEEP: &str = include_str!("../data/sequences/fig4_sweep.seq");
pub const DEFAULT_PARAMS: &str = include_str!("../data/rb87_d1.params");

const SLOW_LIGHT: &str = "\
# FWC-only slow light without ground-state dephasing.
duration 12us
init FWC 1
at 1us probe ch=1 fwhm=2us amp=1
";

const STORAGE_DECAY: &str = "\
# A stored spin wave read out after a variable dark time.
duration 8us
at 1us set FWC 1
sweep FWC at=1us from=0.5us to=3.5us step=0.5us
";

const SLP_BALANCED: &str = "\
# A centred spin wave held by balanced control beams for 2 us, then released.
duration 5us
init FWC 1
init BWC 1
at 2us set BWC 0
";

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 6] = [
    "fig3-eit",
    "fig3-slp",
    "fig4-sweep",
    "slow-light",
    "storage-decay",
    "slp-balanced",
];

/// A timeline with the parameters and initial condition it runs under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub timeline: Timeline,
    pub params: ParamSet,
    pub initial_spin: Option<InitialSpinWave>,
}

impl Scenario {
    pub fn from_text(name: &str, text: &str, params: ParamSet) -> Result<Self> {
        let ramp = Time::from_secs(params.controls.ramp_time);
        Ok(Self {
            name: name.to_string(),
            timeline: parse_timeline_with_ramp(text, ramp)?,
            params,
            initial_spin: None,
        })
    }
}

/// Looks up a built-in scenario, applied on top of `params`.
pub fn builtin(name: &str, params: &ParamSet) -> Result<Scenario> {
    let centred = |params: &ParamSet, width: f64| InitialSpinWave {
        center: 0.5 * params.ensemble.length,
        fwhm: width * params.ensemble.length,
        excitation: 1.0,
    };
    let mut p = params.clone();
    let sc = match name {
        "fig3-eit" => Scenario::from_text(name, FIG3_EIT, p)?,
        "fig3-slp" => Scenario::from_text(name, FIG3_SLP, p)?,
        "fig4-sweep" => Scenario::from_text(name, FIG4_SWEEP, p)?,
        "slow-light" => {
            p.ensemble.gamma_s = 0.0;
            p.channels.truncate(1);
            Scenario::from_text(name, SLOW_LIGHT, p)?
        }
        "storage-decay" => {
            p.channels.truncate(1);
            let spin = centred(&p, 0.25);
            Scenario {
                initial_spin: Some(spin),
                ..Scenario::from_text(name, STORAGE_DECAY, p)?
            }
        }
        "slp-balanced" => {
            p.channels.truncate(1);
            let spin = centred(&p, 0.25);
            Scenario {
                initial_spin: Some(spin),
                ..Scenario::from_text(name, SLP_BALANCED, p)?
            }
        }
        other => {
            return Err(Error::Config(format!(
                "unknown scenario `{other}` (known: {})",
                BUILTIN_NAMES.join(", ")
            )))
        }
    };
    Ok(sc)
}

/// Observables of one channel in one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelMetrics {
    pub channel: usize,
    /// Energy injected, or the initial excitation when nothing is injected.
    pub reference_energy: f64,
    /// Forward-end energy over the whole run, relative to the reference.
    pub transmission: f64,
    /// Forward-end energy in the retrieval window.
    pub retrieval_efficiency: Option<f64>,
    /// Forward-end energy in the release window.
    pub release_efficiency: Option<f64>,
    /// Energy leaving both ends while both controls are on, relative to the
    /// energy leaving both ends in the release window.
    pub trapped_emission_ratio: Option<f64>,
    /// Same ratio for the forward end only.
    pub trapped_emission_ratio_fwd: Option<f64>,
    /// Peak delay of the retrieved (or transmitted) pulse minus the dark time.
    pub group_delay: Option<f64>,
    pub max_closure_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    /// Swept event time (s), if the timeline has a sweep.
    pub value: Option<f64>,
    /// Interval closed by the swept event (s): trapping or storage time.
    pub interval: Option<f64>,
    pub traces: TraceSet,
    pub metrics: Vec<ChannelMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFit {
    pub channel: usize,
    pub points: Vec<(f64, f64)>,
    pub fit: DecayFit,
    pub report: Report,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub scenario: Scenario,
    pub grid: Grid,
    pub points: Vec<SweepPoint>,
    pub fits: Vec<ChannelFit>,
}

fn both_on_window(tl: &Timeline) -> Option<(f64, f64)> {
    let bwc_on = tl
        .switch_time(ControlField::Bwc, Time::ZERO, true)
        .or_else(|| (tl.initial_level(ControlField::Bwc) > 0.0).then_some(Time::ZERO))?;
    let bwc_off = tl.switch_time(ControlField::Bwc, bwc_on, false)?;
    Some((bwc_on.secs(), bwc_off.secs()))
}

/// Time the FWC spends off before coming back on.
fn dark_time(tl: &Timeline) -> f64 {
    let off = tl.switch_time(ControlField::Fwc, Time::ZERO, false);
    match (off, retrieval_window(tl)) {
        (Some(off), Some((on, _))) => on - off.secs(),
        _ => 0.0,
    }
}

/// Interval closed by the swept event: time since the previous event of the
/// same field, or since t = 0.
fn swept_interval(tl: &Timeline, field: ControlField, at: Time) -> f64 {
    let prev = tl
        .events
        .iter()
        .filter_map(|e| match e {
            Event::Set(s) if s.field == field && s.t_start < at => Some(s.t_start),
            _ => None,
        })
        .next_back()
        .unwrap_or(Time::ZERO);
    (at - prev).secs()
}

fn metrics(tl: &Timeline, traces: &TraceSet) -> Result<Vec<ChannelMetrics>> {
    let span = (0.0, tl.duration.secs());
    traces
        .runs
        .iter()
        .map(|r| {
            let injected = pulse_energy(&r.input, r.input.span())?;
            let reference = if injected > 0.0 {
                injected
            } else {
                r.ledger.first().map(|l| l.ledger.initial).unwrap_or(0.0)
            };
            let rel = |w: (f64, f64)| -> Result<f64> {
                if reference > 0.0 {
                    Ok(pulse_energy(&r.forward, w)? / reference)
                } else {
                    Ok(0.0)
                }
            };
            let retrieval = retrieval_window(tl)
                .filter(|w| w.1 > w.0)
                .map(rel)
                .transpose()?;
            let release = release_window(tl).map(rel).transpose()?;
            let both = |w: (f64, f64)| -> Result<(f64, f64)> {
                Ok((pulse_energy(&r.forward, w)?, pulse_energy(&r.backward, w)?))
            };
            let (trapped, trapped_fwd) = match (both_on_window(tl), release_window(tl)) {
                (Some(on), Some(off)) => {
                    let (wf, wb) = both(on)?;
                    let (rf, rb) = both(off)?;
                    (
                        (rf + rb > 0.0).then(|| (wf + wb) / (rf + rb)),
                        (rf > 0.0).then(|| wf / rf),
                    )
                }
                _ => (None, None),
            };
            let delay = if injected > 0.0 {
                let window = release_window(tl)
                    .or_else(|| retrieval_window(tl).filter(|w| w.1 > w.0))
                    .unwrap_or(span);
                let held = dark_time(tl) + both_on_window(tl).map_or(0.0, |w| w.1 - w.0);
                r.forward
                    .window(window.0, window.1)
                    .and_then(|out| group_delay(&out, &r.input, held).ok())
            } else {
                None
            };
            Ok(ChannelMetrics {
                channel: r.channel,
                reference_energy: reference,
                transmission: rel(r.forward.span())?,
                retrieval_efficiency: retrieval,
                release_efficiency: release,
                trapped_emission_ratio: trapped,
                trapped_emission_ratio_fwd: trapped_fwd,
                group_delay: delay,
                max_closure_error: r.max_closure_error(),
            })
        })
        .collect()
}

/// Runs a scenario on `grid`. Sweeps are expanded and run in parallel; each
/// channel's efficiency after the swept event is then fitted to an
/// exponential in the swept interval.
pub fn execute(scenario: &Scenario, grid: &Grid, opts: &RunOptions) -> Result<Outcome> {
    let p = &scenario.params;
    let opts = RunOptions {
        initial_spin: scenario.initial_spin.or(opts.initial_spin),
        ..*opts
    };
    let family = scenario.timeline.sweep_family()?;
    let sweep = scenario.timeline.sweep;
    let points = family
        .par_iter()
        .map(|(value, tl)| {
            let seq = compile(tl, &p.controls)?;
            let traces = run(&seq, &p.ensemble, &p.controls, &p.channels, grid, &opts)?;
            let metrics = metrics(tl, &traces)?;
            let (value, interval) = match &sweep {
                Some(sw) => (
                    Some(value.secs()),
                    Some(swept_interval(tl, sw.field, *value)),
                ),
                None => (None, None),
            };
            Ok(SweepPoint {
                value,
                interval,
                traces,
                metrics,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut fits = Vec::new();
    if let Some(sw) = &sweep {
        for i in 0..p.channels.len() {
            let pts: Vec<(f64, f64)> = points
                .iter()
                .map(|pt| {
                    let x = pt.interval.unwrap_or(0.0);
                    let m = &pt.metrics[i];
                    let y = match sw.field {
                        ControlField::Bwc => m.release_efficiency,
                        ControlField::Fwc => m.retrieval_efficiency,
                    }
                    .unwrap_or(0.0);
                    (x, y)
                })
                .collect();
            let fit = fit_exponential(&pts)?;
            let report = summarize(&fit, &p.constants, &p.cavity, &p.ensemble)?;
            fits.push(ChannelFit {
                channel: i + 1,
                points: pts,
                fit,
                report,
            });
        }
    }
    Ok(Outcome {
        scenario: scenario.clone(),
        grid: *grid,
        points,
        fits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_parse() {
        let p = ParamSet::default();
        for name in BUILTIN_NAMES {
            let sc = builtin(name, &p).unwrap();
            assert!(sc.timeline.validate().is_ok(), "{name}");
        }
        assert!(builtin("nope", &p).is_err());
    }

    #[test]
    fn fig4_family_has_seven_members() {
        let sc = builtin("fig4-sweep", &ParamSet::default()).unwrap();
        let fam = sc.timeline.sweep_family().unwrap();
        assert_eq!(fam.len(), 7);
        for (v, tl) in &fam {
            assert_eq!(
                tl.switch_time(ControlField::Bwc, Time::from_us(5.7), false),
                Some(*v)
            );
            let interval = swept_interval(tl, ControlField::Bwc, *v);
            assert!(interval > 0.79e-6 && interval < 2.01e-6);
        }
    }

    #[test]
    fn windows_of_fig3() {
        let sc = builtin("fig3-slp", &ParamSet::default()).unwrap();
        let (a, b) = both_on_window(&sc.timeline).unwrap();
        assert!((a - 5.6e-6).abs() < 1e-15 && (b - 6.6e-6).abs() < 1e-15);
        assert!((dark_time(&sc.timeline) - 2e-6).abs() < 1e-15);
    }
}
