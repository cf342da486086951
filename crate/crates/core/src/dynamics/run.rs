use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use super::model::{Inputs, Model, SolverKind, Stepper};
use super::state::{DissipationLedger, SimState};
use super::ChannelParams;
use crate::analysis::{End, Trace};
use crate::error::{Error, Result};
use crate::params::{ControlParams, EnsembleParams};
use crate::sequence::{CompiledSequence, ControlField};

/// Gaussian spin wave present at t = 0, for storage-type scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialSpinWave {
    /// Centre position (m).
    pub center: f64,
    /// FWHM of |S|² (m).
    pub fwhm: f64,
    /// Total excitation ∫|S|² dz.
    pub excitation: f64,
}

const RUNAWAY_CLOSURE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub solver: SolverKind,
    /// Spacing of recorded samples (s).
    pub sample_interval: f64,
    pub initial_spin: Option<InitialSpinWave>,
    /// Step even when `dt` exceeds the stability bound.
    pub unchecked: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            solver: SolverKind::Adiabatic,
            sample_interval: 10e-9,
            initial_spin: None,
            unchecked: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerSample {
    pub t: f64,
    pub ledger: DissipationLedger,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentroidSample {
    pub t: f64,
    /// Centroid of the excitation density (m).
    pub position: f64,
    /// Excitation inside the medium.
    pub excitation: f64,
}

/// Output of one channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRun {
    pub channel: usize,
    pub params: ChannelParams,
    /// Flux leaving z = L.
    pub forward: Trace,
    /// Flux leaving z = 0.
    pub backward: Trace,
    /// Probe flux injected at z = 0.
    pub input: Trace,
    pub ledger: Vec<LedgerSample>,
    pub centroid: Vec<CentroidSample>,
    #[serde(skip)]
    pub final_state: Option<SimState>,
}

impl ChannelRun {
    pub fn max_closure_error(&self) -> f64 {
        self.ledger
            .iter()
            .map(|s| s.ledger.closure_error())
            .fold(0.0, f64::max)
    }

    pub fn final_ledger(&self) -> DissipationLedger {
        self.ledger.last().map(|s| s.ledger).unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSet {
    pub grid: Grid,
    pub solver: SolverKind,
    pub runs: Vec<ChannelRun>,
}

impl TraceSet {
    pub fn channel(&self, id: usize) -> Option<&ChannelRun> {
        self.runs.iter().find(|r| r.channel == id)
    }
}

/// Simulates every channel in `channels` (ids 1, 2, …) under the shared
/// control timeline. Channels are independent and run in parallel; results
/// come back in channel order.
pub fn run(
    seq: &CompiledSequence,
    ensemble: &EnsembleParams,
    controls: &ControlParams,
    channels: &[ChannelParams],
    grid: &Grid,
    opts: &RunOptions,
) -> Result<TraceSet> {
    if let Some(p) = seq
        .probes
        .iter()
        .find(|p| p.channel == 0 || p.channel > channels.len())
    {
        return Err(Error::Config(format!(
            "timeline references channel {} but only {} channel(s) are defined",
            p.channel,
            channels.len()
        )));
    }
    let runs = channels
        .par_iter()
        .enumerate()
        .map(|(i, ch)| run_channel(seq, ensemble, controls, i + 1, ch, grid, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(TraceSet {
        grid: *grid,
        solver: opts.solver,
        runs,
    })
}

fn inputs_at(seq: &CompiledSequence, channel: usize, t: f64) -> Inputs {
    Inputs {
        omega_fwc: seq.controls.omega_fwc(t),
        omega_bwc: seq.controls.omega_bwc(t),
        drive: seq.drive(channel, t),
    }
}

struct Recorder {
    t: Vec<f64>,
    fwd: Vec<f64>,
    bwd: Vec<f64>,
    input: Vec<f64>,
    ledger: Vec<LedgerSample>,
    centroid: Vec<CentroidSample>,
}

impl Recorder {
    fn record(&mut self, state: &SimState, model: &Model) {
        let n = state.n_z();
        self.t.push(state.t);
        self.fwd.push(state.e_plus[n - 1].norm_sqr());
        self.bwd.push(state.e_minus[0].norm_sqr());
        self.input.push(state.e_plus[0].norm_sqr());
        self.ledger.push(LedgerSample {
            t: state.t,
            ledger: state.ledger,
        });
        let density = state.excitation_density();
        let w = model.weights();
        let total: f64 = density.iter().zip(w).map(|(d, w)| d * w).sum();
        let moment: f64 = density
            .iter()
            .zip(w)
            .enumerate()
            .map(|(j, (d, w))| d * w * model.grid.z(j))
            .sum();
        self.centroid.push(CentroidSample {
            t: state.t,
            position: if total > 0.0 {
                moment / total
            } else {
                f64::NAN
            },
            excitation: total,
        });
    }
}

/// Simulates a single channel. `channel` selects which probes drive it.
pub fn run_channel(
    seq: &CompiledSequence,
    ensemble: &EnsembleParams,
    controls: &ControlParams,
    channel: usize,
    params: &ChannelParams,
    grid: &Grid,
    opts: &RunOptions,
) -> Result<ChannelRun> {
    let model = Model::new(ensemble, params, controls.delta, grid, opts.solver)?;
    let gamma_eff = model.gamma_eff(
        seq.controls.max_omega(ControlField::Fwc),
        seq.controls.max_omega(ControlField::Bwc),
    );
    if !opts.unchecked {
        grid.check_stability(gamma_eff, seq.shortest_pulse())?;
    }
    if !(opts.sample_interval > 0.0) {
        return Err(Error::Config("sample interval must be positive".into()));
    }

    let dt = grid.dt;
    let mut stepper = Stepper::new(model);
    let mut state = SimState::zeros(grid.n_z);
    if let Some(sw) = &opts.initial_spin {
        let w = grid.weights();
        let shape: Vec<f64> = (0..grid.n_z)
            .map(|j| {
                let x = (grid.z(j) - sw.center) / sw.fwhm;
                (-2.0 * std::f64::consts::LN_2 * x * x).exp()
            })
            .collect();
        let norm: f64 = shape.iter().zip(&w).map(|(s, w)| s * s * w).sum();
        if !(norm > 0.0) || !(sw.excitation >= 0.0) {
            return Err(Error::Config(format!("invalid initial spin wave {sw:?}")));
        }
        let scale = (sw.excitation / norm).sqrt();
        for (s, v) in state.spin.iter_mut().zip(&shape) {
            s.re = v * scale;
        }
    }
    stepper.refresh(&mut state, &inputs_at(seq, channel, 0.0));
    state.ledger.initial = state.ledger.stored;

    let n_steps = ((seq.duration / dt) - 1e-9).ceil().max(0.0) as usize;
    let stride = ((opts.sample_interval / dt).round() as usize).max(1);
    let mut rec = Recorder {
        t: Vec::new(),
        fwd: Vec::new(),
        bwd: Vec::new(),
        input: Vec::new(),
        ledger: Vec::new(),
        centroid: Vec::new(),
    };
    rec.record(&state, stepper.model());
    for n in 0..n_steps {
        let t = n as f64 * dt;
        let inputs = [
            inputs_at(seq, channel, t),
            inputs_at(seq, channel, t + 0.5 * dt),
            inputs_at(seq, channel, t + dt),
        ];
        stepper.step(&mut state, &inputs, dt)?;
        state.t = (n + 1) as f64 * dt;
        // Finite but runaway states break the excitation balance long before
        // they overflow.
        if state.ledger.closure_error() > RUNAWAY_CLOSURE {
            return Err(Error::NumericalBlowUp {
                array: "ledger",
                t: state.t,
            });
        }
        if (n + 1) % stride == 0 || n + 1 == n_steps {
            rec.record(&state, stepper.model());
        }
    }

    let trace = |v: Vec<f64>, end| Trace {
        t: rec.t.clone(),
        intensity: v,
        channel,
        end,
    };
    Ok(ChannelRun {
        channel,
        params: *params,
        forward: trace(rec.fwd, End::Forward),
        backward: trace(rec.bwd, End::Backward),
        input: trace(rec.input, End::Input),
        ledger: rec.ledger,
        centroid: rec.centroid,
        final_state: Some(state),
    })
}

/// Least-squares slope of the excitation centroid over `[t0, t1]` (m/s).
/// Fails if any sample in the window holds less than `threshold` excitation.
pub fn centroid_velocity(
    samples: &[CentroidSample],
    t0: f64,
    t1: f64,
    threshold: f64,
) -> Result<f64> {
    let pts: Vec<&CentroidSample> = samples.iter().filter(|s| s.t >= t0 && s.t <= t1).collect();
    if pts.len() < 2 {
        return Err(Error::Measurement(format!(
            "fewer than two centroid samples in [{t0:.3e}, {t1:.3e}] s"
        )));
    }
    if let Some(s) = pts.iter().find(|s| !(s.excitation > threshold)) {
        return Err(Error::Measurement(format!(
            "excitation {:.3e} at t = {:.3e} s is below threshold {threshold:.3e}",
            s.excitation, s.t
        )));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|s| s.t).sum::<f64>() / n;
    let mz = pts.iter().map(|s| s.position).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|s| (s.t - mt) * (s.position - mz)).sum();
    let sxx: f64 = pts.iter().map(|s| (s.t - mt).powi(2)).sum();
    Ok(sxy / sxx)
}
