use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use super::state::{Rates, SimState};
use super::ChannelParams;
use crate::error::{Error, Result};
use crate::params::EnsembleParams;

const I: C64 = C64::new(0.0, 1.0);

/// Which atomic integrator to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    /// Coherences slaved to the spin wave and fields; RK4 on the spin wave.
    #[default]
    Adiabatic,
    /// Coherences kept as dynamical variables; needs a much smaller dt.
    Full,
}

/// Control and probe values at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Inputs {
    /// Nominal-scaled FWC Rabi frequency before the channel overlap (rad/s).
    pub omega_fwc: f64,
    pub omega_bwc: f64,
    /// Probe field amplitude at z = 0 (√s⁻¹).
    pub drive: f64,
}

/// Exact one-cell solution of `a' = −κa − c·s(z)` with `s` linear in the cell:
/// `a₁ = e^{−κh}a₀ − c(s₀φ₁ + mφ₂)`, `m = (s₁ − s₀)/h`.
#[derive(Debug, Clone, Copy)]
struct Propagator {
    decay: C64,
    phi1: C64,
    phi2: C64,
}

impl Propagator {
    fn new(kappa: C64, h: f64) -> Self {
        let x = kappa * h;
        let (phi1, phi2) = if x.norm() < 0.05 {
            // φ₁ = hΣ(−x)ⁿ/(n+1)!, φ₂ = h²Σ(−x)ⁿ/(n+2)!
            let (mut s1, mut s2) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
            let mut p = C64::new(1.0, 0.0);
            let mut f1 = 1.0;
            for n in 0..16 {
                f1 *= (n + 1) as f64;
                let f2 = f1 * (n + 2) as f64;
                s1 += p / f1;
                s2 += p / f2;
                p *= -x;
            }
            (s1 * h, s2 * h * h)
        } else {
            let e = (-x).exp();
            ((1.0 - e) / x * h, (x - 1.0 + e) / (x * x) * h * h)
        };
        Self {
            decay: (-x).exp(),
            phi1,
            phi2,
        }
    }
}

/// Precomputed coefficients for one channel.
#[derive(Debug, Clone)]
pub struct Model {
    pub grid: Grid,
    /// Field–coherence coupling η = sqrt(OD·Γ/(4L)) (m⁻¹/² s⁻¹/²).
    pub eta: f64,
    pub gamma_e: f64,
    pub gamma_s: f64,
    pub delta: f64,
    pub overlap: f64,
    pub solver: SolverKind,
    g_plus: C64,
    g_minus: C64,
    phase: Vec<C64>,
    weights: Vec<f64>,
    fwd: Propagator,
    bwd: Propagator,
}

impl Model {
    pub fn new(
        ensemble: &EnsembleParams,
        channel: &ChannelParams,
        delta: f64,
        grid: &Grid,
        solver: SolverKind,
    ) -> Result<Self> {
        channel.validate()?;
        if (grid.length - ensemble.length).abs() > 1e-12 * ensemble.length {
            return Err(Error::Config(format!(
                "grid length {} differs from medium length {}",
                grid.length, ensemble.length
            )));
        }
        let eta = (channel.od_eff * ensemble.gamma_e / (4.0 * ensemble.length)).sqrt();
        let g_plus = C64::new(0.5 * ensemble.gamma_e, 0.0);
        let g_minus = C64::new(0.5 * ensemble.gamma_e, delta);
        let dk = channel.delta_k_l / ensemble.length;
        let phase = (0..grid.n_z).map(|j| (I * dk * grid.z(j)).exp()).collect();
        let eta2 = C64::new(eta * eta, 0.0);
        Ok(Self {
            grid: *grid,
            eta,
            gamma_e: ensemble.gamma_e,
            gamma_s: ensemble.gamma_s,
            delta,
            overlap: channel.overlap,
            solver,
            g_plus,
            g_minus,
            phase,
            weights: grid.weights(),
            fwd: Propagator::new(eta2 / g_plus, grid.dz),
            bwd: Propagator::new(eta2 / g_minus, grid.dz),
        })
    }

    /// Fastest rate the chosen integrator has to resolve, given the largest
    /// nominal control Rabi frequencies.
    pub fn gamma_eff(&self, omega_fwc_max: f64, omega_bwc_max: f64) -> f64 {
        let of = self.overlap * omega_fwc_max;
        let ob = self.overlap * omega_bwc_max;
        match self.solver {
            SolverKind::Adiabatic => (of * of + ob * ob) / (0.5 * self.gamma_e) + self.gamma_s,
            SolverKind::Full => {
                0.5 * self.gamma_e
                    + self.delta.abs()
                    + of.hypot(ob)
                    + self.eta * self.eta * self.grid.length
                    + self.gamma_s
            }
        }
    }

    pub(crate) fn n_dyn(&self) -> usize {
        match self.solver {
            SolverKind::Adiabatic => self.grid.n_z,
            SolverKind::Full => 3 * self.grid.n_z,
        }
    }

    fn integral(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.weights.iter().enumerate().map(|(j, w)| w * f(j)).sum()
    }

    /// Time derivative of the dynamical vector `y`; fills `aux` with the
    /// fields and coherences at this instant.
    pub(crate) fn eval(&self, y: &[C64], inp: &Inputs, dy: &mut [C64], aux: &mut Aux) -> Rates {
        match self.solver {
            SolverKind::Adiabatic => self.eval_adiabatic(y, inp, dy, aux),
            SolverKind::Full => self.eval_full(y, inp, dy, aux),
        }
    }

    fn eval_adiabatic(&self, s: &[C64], inp: &Inputs, ds: &mut [C64], aux: &mut Aux) -> Rates {
        let n = self.grid.n_z;
        let h = self.grid.dz;
        let of = self.overlap * inp.omega_fwc;
        let ob = self.overlap * inp.omega_bwc;
        let eta = self.eta;

        let cf = eta * of / self.g_plus;
        let a = &mut aux.e_plus;
        a[0] = C64::new(inp.drive, 0.0);
        for j in 0..n - 1 {
            let m = (s[j + 1] - s[j]) / h;
            a[j + 1] = self.fwd.decay * a[j] - cf * (s[j] * self.fwd.phi1 + m * self.fwd.phi2);
        }

        let cb = eta * ob / self.g_minus;
        let b = &mut aux.e_minus;
        b[n - 1] = C64::new(0.0, 0.0);
        for j in (1..n).rev() {
            let u1 = s[j] * self.phase[j];
            let u0 = s[j - 1] * self.phase[j - 1];
            let m = (u0 - u1) / h;
            b[j - 1] = self.bwd.decay * b[j] - cb * (u1 * self.bwd.phi1 + m * self.bwd.phi2);
        }

        for j in 0..n {
            let pp = I * (eta * aux.e_plus[j] + of * s[j]) / self.g_plus;
            let pm = I * (eta * aux.e_minus[j] + ob * s[j] * self.phase[j]) / self.g_minus;
            aux.p_plus[j] = pp;
            aux.p_minus[j] = pm;
            ds[j] = -self.gamma_s * s[j] + I * of * pp + I * ob * pm * self.phase[j].conj();
        }

        Rates {
            input: inp.drive * inp.drive,
            fwd: aux.e_plus[n - 1].norm_sqr(),
            bwd: aux.e_minus[0].norm_sqr(),
            diss_e: self.gamma_e
                * self.integral(|j| aux.p_plus[j].norm_sqr() + aux.p_minus[j].norm_sqr()),
            diss_s: 2.0 * self.gamma_s * self.integral(|j| s[j].norm_sqr()),
        }
    }

    fn eval_full(&self, y: &[C64], inp: &Inputs, dy: &mut [C64], aux: &mut Aux) -> Rates {
        let n = self.grid.n_z;
        let half = 0.5 * self.grid.dz;
        let (s, rest) = y.split_at(n);
        let (pp, pm) = rest.split_at(n);
        let of = self.overlap * inp.omega_fwc;
        let ob = self.overlap * inp.omega_bwc;
        let ieta = I * self.eta;

        aux.e_plus[0] = C64::new(inp.drive, 0.0);
        for j in 1..n {
            aux.e_plus[j] = aux.e_plus[j - 1] + ieta * half * (pp[j - 1] + pp[j]);
        }
        aux.e_minus[n - 1] = C64::new(0.0, 0.0);
        for j in (0..n - 1).rev() {
            aux.e_minus[j] = aux.e_minus[j + 1] + ieta * half * (pm[j] + pm[j + 1]);
        }

        let (ds, drest) = dy.split_at_mut(n);
        let (dpp, dpm) = drest.split_at_mut(n);
        for j in 0..n {
            let ph = self.phase[j];
            ds[j] = -self.gamma_s * s[j] + I * of * pp[j] + I * ob * pm[j] * ph.conj();
            dpp[j] = -self.g_plus * pp[j] + ieta * aux.e_plus[j] + I * of * s[j];
            dpm[j] = -self.g_minus * pm[j] + ieta * aux.e_minus[j] + I * ob * s[j] * ph;
            aux.p_plus[j] = pp[j];
            aux.p_minus[j] = pm[j];
        }

        Rates {
            input: inp.drive * inp.drive,
            fwd: aux.e_plus[n - 1].norm_sqr(),
            bwd: aux.e_minus[0].norm_sqr(),
            diss_e: self.gamma_e * self.integral(|j| pp[j].norm_sqr() + pm[j].norm_sqr()),
            diss_s: 2.0 * self.gamma_s * self.integral(|j| s[j].norm_sqr()),
        }
    }

    /// Excitation held in the medium. Slaved coherences carry no independent
    /// excitation in the adiabatic model.
    pub fn stored(&self, state: &SimState) -> f64 {
        match self.solver {
            SolverKind::Adiabatic => self.integral(|j| state.spin[j].norm_sqr()),
            SolverKind::Full => self.integral(|j| {
                state.spin[j].norm_sqr() + state.p_plus[j].norm_sqr() + state.p_minus[j].norm_sqr()
            }),
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Field and coherence buffers filled by [`Model::eval`].
#[derive(Debug, Clone)]
pub(crate) struct Aux {
    pub e_plus: Vec<C64>,
    pub e_minus: Vec<C64>,
    pub p_plus: Vec<C64>,
    pub p_minus: Vec<C64>,
}

impl Aux {
    pub fn new(n: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); n];
        Self {
            e_plus: z.clone(),
            e_minus: z.clone(),
            p_plus: z.clone(),
            p_minus: z,
        }
    }
}

/// Classical RK4 stepper with reusable buffers.
#[derive(Debug, Clone)]
pub struct Stepper {
    model: Model,
    y: Vec<C64>,
    tmp: Vec<C64>,
    k: [Vec<C64>; 4],
    aux: Aux,
}

impl Stepper {
    pub fn new(model: Model) -> Self {
        let n = model.n_dyn();
        let nz = model.grid.n_z;
        Self {
            y: vec![C64::new(0.0, 0.0); n],
            tmp: vec![C64::new(0.0, 0.0); n],
            k: std::array::from_fn(|_| vec![C64::new(0.0, 0.0); n]),
            aux: Aux::new(nz),
            model,
        }
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    fn load(&mut self, state: &SimState) {
        let n = self.model.grid.n_z;
        self.y[..n].copy_from_slice(&state.spin);
        if self.model.solver == SolverKind::Full {
            self.y[n..2 * n].copy_from_slice(&state.p_plus);
            self.y[2 * n..].copy_from_slice(&state.p_minus);
        }
    }

    fn store(&self, state: &mut SimState) {
        let n = self.model.grid.n_z;
        state.spin.copy_from_slice(&self.y[..n]);
        state.e_plus.copy_from_slice(&self.aux.e_plus);
        state.e_minus.copy_from_slice(&self.aux.e_minus);
        state.p_plus.copy_from_slice(&self.aux.p_plus);
        state.p_minus.copy_from_slice(&self.aux.p_minus);
        state.ledger.stored = self.model.stored(state);
    }

    /// Recomputes fields and slaved quantities of `state` for the given inputs.
    pub fn refresh(&mut self, state: &mut SimState, inp: &Inputs) {
        self.load(state);
        let Self {
            model, y, k, aux, ..
        } = self;
        model.eval(y, inp, &mut k[0], aux);
        self.store(state);
    }

    /// Advances `state` by `dt` given inputs at `t`, `t + dt/2` and `t + dt`.
    pub fn step(&mut self, state: &mut SimState, inputs: &[Inputs; 3], dt: f64) -> Result<()> {
        self.load(state);
        let Self {
            model,
            y,
            tmp,
            k,
            aux,
        } = self;
        let [k1, k2, k3, k4] = k;
        let r1 = model.eval(y, &inputs[0], k1, aux);
        axpy(tmp, y, 0.5 * dt, k1);
        let r2 = model.eval(tmp, &inputs[1], k2, aux);
        axpy(tmp, y, 0.5 * dt, k2);
        let r3 = model.eval(tmp, &inputs[1], k3, aux);
        axpy(tmp, y, dt, k3);
        let r4 = model.eval(tmp, &inputs[2], k4, aux);
        let w = dt / 6.0;
        for i in 0..y.len() {
            y[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let rates = Rates::combine(
            [&r1, &r2, &r3, &r4],
            [1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
        );
        state.ledger.accumulate(&rates, dt);
        model.eval(y, &inputs[2], k1, aux);
        self.store(state);
        state.t += dt;
        if let Some(array) = state.first_non_finite() {
            return Err(Error::NumericalBlowUp { array, t: state.t });
        }
        Ok(())
    }
}

fn axpy(out: &mut [C64], y: &[C64], a: f64, k: &[C64]) {
    for ((o, y), k) in out.iter_mut().zip(y).zip(k) {
        *o = y + a * k;
    }
}
