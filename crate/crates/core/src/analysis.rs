//! Observables extracted from detector traces: pulse energies, efficiencies,
//! group delays, exponential decay fits and the cavity-analogy summary.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{
    cooperativity, q_factor, CavityAnalogyParams, EnsembleParams, PhysicalConstants,
};
use crate::sequence::{ControlField, Time, Timeline};

/// Where a trace is recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum End {
    /// Transmitted end, z = L.
    #[serde(rename = "fwd")]
    Forward,
    /// Input face, z = 0, light travelling backwards.
    #[serde(rename = "bwd")]
    Backward,
    /// Injected probe.
    #[serde(rename = "in")]
    Input,
}

impl End {
    pub fn as_str(self) -> &'static str {
        match self {
            End::Forward => "fwd",
            End::Backward => "bwd",
            End::Input => "in",
        }
    }

    pub fn parse(s: &str) -> Option<End> {
        match s {
            "fwd" => Some(End::Forward),
            "bwd" => Some(End::Backward),
            "in" => Some(End::Input),
            _ => None,
        }
    }
}

impl fmt::Display for End {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Photon flux (s⁻¹) versus time (s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub t: Vec<f64>,
    pub intensity: Vec<f64>,
    pub channel: usize,
    pub end: End,
}

impl Trace {
    pub fn new(t: Vec<f64>, intensity: Vec<f64>, channel: usize, end: End) -> Result<Self> {
        let tr = Self {
            t,
            intensity,
            channel,
            end,
        };
        tr.validate()?;
        Ok(tr)
    }

    pub fn validate(&self) -> Result<()> {
        if self.t.len() != self.intensity.len() || self.t.len() < 2 {
            return Err(Error::Measurement(
                "trace needs at least two samples of matching length".into(),
            ));
        }
        if self.t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Measurement(
                "trace times must be strictly increasing".into(),
            ));
        }
        if self
            .intensity
            .iter()
            .any(|&v| !(v >= 0.0) || !v.is_finite())
        {
            return Err(Error::Measurement(
                "trace intensities must be finite and >= 0".into(),
            ));
        }
        Ok(())
    }

    pub fn span(&self) -> (f64, f64) {
        (self.t[0], self.t[self.t.len() - 1])
    }

    pub fn scaled(&self, k: f64) -> Trace {
        Trace {
            intensity: self.intensity.iter().map(|v| v * k).collect(),
            ..self.clone()
        }
    }

    /// Samples with `t0 <= t <= t1`, or `None` if fewer than three remain.
    pub fn window(&self, t0: f64, t1: f64) -> Option<Trace> {
        let (a, b) = (
            self.t.partition_point(|&x| x < t0),
            self.t.partition_point(|&x| x <= t1),
        );
        (b >= a + 3).then(|| Trace {
            t: self.t[a..b].to_vec(),
            intensity: self.intensity[a..b].to_vec(),
            channel: self.channel,
            end: self.end,
        })
    }

    pub fn shifted(&self, dt: f64) -> Trace {
        Trace {
            t: self.t.iter().map(|t| t + dt).collect(),
            ..self.clone()
        }
    }

    fn at(&self, t: f64) -> f64 {
        let i = self.t.partition_point(|&x| x <= t);
        if i == 0 {
            return self.intensity[0];
        }
        if i == self.t.len() {
            return self.intensity[i - 1];
        }
        let (t0, t1) = (self.t[i - 1], self.t[i]);
        let (y0, y1) = (self.intensity[i - 1], self.intensity[i]);
        y0 + (y1 - y0) * (t - t0) / (t1 - t0)
    }
}

/// Trapezoidal integral of the trace over `window`, with linear
/// interpolation at the window edges.
pub fn pulse_energy(trace: &Trace, window: (f64, f64)) -> Result<f64> {
    let (t0, t1) = window;
    if t1 < t0 {
        return Err(Error::Measurement(format!(
            "inverted window [{t0:.4e}, {t1:.4e}]"
        )));
    }
    let (a, b) = trace.span();
    let tol = 1e-9 * (b - a);
    if t0 < a - tol || t1 > b + tol {
        return Err(Error::Measurement(format!(
            "window [{t0:.4e}, {t1:.4e}] exceeds trace span [{a:.4e}, {b:.4e}]"
        )));
    }
    let (t0, t1) = (t0.max(a), t1.min(b));
    if t1 <= t0 {
        return Ok(0.0);
    }
    let lo = trace.t.partition_point(|&x| x <= t0);
    let hi = trace.t.partition_point(|&x| x < t1);
    let mut knots: Vec<(f64, f64)> = Vec::with_capacity(hi - lo + 2);
    knots.push((t0, trace.at(t0)));
    knots.extend((lo..hi).map(|i| (trace.t[i], trace.intensity[i])));
    knots.push((t1, trace.at(t1)));
    Ok(knots
        .windows(2)
        .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
        .sum())
}

pub fn full_window(trace: &Trace) -> (f64, f64) {
    trace.span()
}

/// Ratio of the output energy in `out_window` to the reference energy in
/// `ref_window`.
pub fn efficiency(
    out: &Trace,
    reference: &Trace,
    out_window: (f64, f64),
    ref_window: (f64, f64),
) -> Result<f64> {
    let e_ref = pulse_energy(reference, ref_window)?;
    if !(e_ref > 0.0) {
        return Err(Error::Measurement("reference pulse energy is zero".into()));
    }
    Ok(pulse_energy(out, out_window)? / e_ref)
}

/// Sub-sample peak time by 3-point quadratic interpolation.
pub fn peak_time(trace: &Trace) -> Result<f64> {
    let y = &trace.intensity;
    let (imax, &ymax) = y
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |acc, (i, v)| {
            if *v > *acc.1 {
                (i, v)
            } else {
                acc
            }
        });
    if !(ymax > 0.0) {
        return Err(Error::Measurement("trace has no positive peak".into()));
    }
    // A second maximum separated from the first by a dip below half height
    // and nearly as tall makes the peak ambiguous.
    let mut lobe_max = 0.0f64;
    for dir in [-1isize, 1] {
        let mut i = imax as isize;
        let mut dipped = false;
        while i >= 0 && (i as usize) < y.len() {
            let v = y[i as usize];
            if v < 0.5 * ymax {
                dipped = true;
            } else if dipped {
                lobe_max = lobe_max.max(v);
            }
            i += dir;
        }
    }
    if lobe_max > 0.9 * ymax {
        return Err(Error::Measurement(format!(
            "ambiguous peak: secondary maximum at {:.1}% of the main one",
            100.0 * lobe_max / ymax
        )));
    }
    if imax == 0 || imax == y.len() - 1 {
        return Ok(trace.t[imax]);
    }
    let (ym, y0, yp) = (y[imax - 1], y[imax], y[imax + 1]);
    let denom = ym - 2.0 * y0 + yp;
    if denom == 0.0 {
        return Err(Error::Measurement("flat-topped peak".into()));
    }
    let (tm, t0, tp) = (trace.t[imax - 1], trace.t[imax], trace.t[imax + 1]);
    let h = 0.5 * (tp - tm);
    let offset = 0.5 * (ym - yp) / denom;
    // Non-uniform spacing is rare (final partial step); fall back to the sample.
    if ((tp - t0) - (t0 - tm)).abs() > 1e-6 * h {
        return Ok(t0);
    }
    Ok(t0 + offset * h)
}

/// Peak-to-peak delay between `out` and `input`, minus `storage_time`.
pub fn group_delay(out: &Trace, input: &Trace, storage_time: f64) -> Result<f64> {
    Ok(peak_time(out)? - peak_time(input)? - storage_time)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub amplitude: f64,
    pub tau: f64,
    /// RMS residual of the log-domain fit.
    pub residual: f64,
}

impl DecayFit {
    pub fn eval(&self, t: f64) -> f64 {
        self.amplitude * (-t / self.tau).exp()
    }
}

/// Least-squares fit of `ln η = ln A − t/τ`.
pub fn fit_exponential(points: &[(f64, f64)]) -> Result<DecayFit> {
    if points.len() < 3 {
        return Err(Error::Measurement(format!(
            "need at least 3 points (got {})",
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|p| !(p.1 > 0.0) || !p.0.is_finite()) {
        return Err(Error::Measurement(format!(
            "non-positive or non-finite point {p:?}"
        )));
    }
    let n = points.len() as f64;
    let mt = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mt).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Measurement("all points share the same time".into()));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mt) * (p.1.ln() - my)).sum();
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return Err(Error::Measurement(format!(
            "data do not decay (log slope {slope:.3e} per s)"
        )));
    }
    let intercept = my - slope * mt;
    let ss: f64 = points
        .iter()
        .map(|p| (p.1.ln() - intercept - slope * p.0).powi(2))
        .sum();
    Ok(DecayFit {
        amplitude: intercept.exp(),
        tau: -1.0 / slope,
        residual: (ss / n).sqrt(),
    })
}

/// Integration window for light released after the BWC is switched off.
pub fn release_window(timeline: &Timeline) -> Option<(f64, f64)> {
    let off = timeline
        .set_events(ControlField::Bwc)
        .filter(|s| s.level == 0.0)
        .last()?;
    Some((off.t_start.secs(), timeline.duration.secs()))
}

/// Integration window for light retrieved when the FWC comes back on:
/// from the FWC-on time to the BWC-on time (if later) or the end.
pub fn retrieval_window(timeline: &Timeline) -> Option<(f64, f64)> {
    let mut fwc_was_off = timeline.initial_level(ControlField::Fwc) == 0.0;
    let mut on = None;
    for s in timeline.set_events(ControlField::Fwc) {
        if s.level == 0.0 {
            fwc_was_off = true;
        } else if fwc_was_off && s.t_start > Time::ZERO {
            on = Some(s.t_start);
            break;
        }
    }
    let on = on?;
    let end = timeline
        .switch_time(ControlField::Bwc, on, true)
        .unwrap_or(timeline.duration);
    Some((on.secs(), end.secs()))
}

/// Decay time with its cavity-analogy figures of merit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tau: f64,
    pub amplitude: f64,
    pub fit_residual: f64,
    pub f0: f64,
    pub q_factor: f64,
    pub g_single: f64,
    pub kappa: f64,
    pub gamma_e: f64,
    pub n_atoms: f64,
    pub c_n: f64,
}

/// Assembles the decay report; `Q = 2πf₀τ` and `C_N = 4g²N/(κΓ)`.
pub fn summarize(
    fit: &DecayFit,
    constants: &PhysicalConstants,
    cavity: &CavityAnalogyParams,
    ensemble: &EnsembleParams,
) -> Result<Report> {
    let f0 = cavity.f0.unwrap_or_else(|| constants.probe_frequency());
    let tau = fit.tau.max(0.0);
    Ok(Report {
        tau,
        amplitude: fit.amplitude,
        fit_residual: fit.residual,
        f0,
        q_factor: q_factor(f0, tau)?,
        g_single: cavity.g_single,
        kappa: cavity.kappa,
        gamma_e: ensemble.gamma_e,
        n_atoms: ensemble.n_atoms,
        c_n: cooperativity(
            cavity.g_single,
            ensemble.n_atoms,
            cavity.kappa,
            ensemble.gamma_e,
        )?,
    })
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serializable")
    }

    pub fn to_table(&self) -> String {
        format!(
            "tau        {:>12.4} us\nQ          {:>12.4e}\nC_N        {:>12.4e}\nN          {:>12.4e}\nfit rms    {:>12.3e}\n",
            self.tau * 1e6,
            self.q_factor,
            self.c_n,
            self.n_atoms,
            self.fit_residual
        )
    }
}
