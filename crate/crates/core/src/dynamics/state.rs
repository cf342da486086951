use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Excitation bookkeeping, in photons.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DissipationLedger {
    /// Excitation present at t = 0.
    pub initial: f64,
    pub input_ex: f64,
    pub emitted_fwd: f64,
    pub emitted_bwd: f64,
    /// Lost through the excited-state decay Γ.
    pub dissipated_e: f64,
    /// Lost through ground-state dephasing γ_S.
    pub dissipated_s: f64,
    pub stored: f64,
}

impl DissipationLedger {
    pub fn total_in(&self) -> f64 {
        self.initial + self.input_ex
    }

    pub fn total_out(&self) -> f64 {
        self.emitted_fwd + self.emitted_bwd + self.dissipated_e + self.dissipated_s + self.stored
    }

    /// Relative mismatch between injected and accounted excitation.
    pub fn closure_error(&self) -> f64 {
        let scale = self.total_in();
        if scale <= 0.0 {
            return if self.total_out() == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
        }
        (self.total_in() - self.total_out()).abs() / scale
    }

    pub(crate) fn accumulate(&mut self, r: &Rates, dt: f64) {
        self.input_ex += r.input * dt;
        self.emitted_fwd += r.fwd * dt;
        self.emitted_bwd += r.bwd * dt;
        self.dissipated_e += r.diss_e * dt;
        self.dissipated_s += r.diss_s * dt;
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            initial: self.initial * k,
            input_ex: self.input_ex * k,
            emitted_fwd: self.emitted_fwd * k,
            emitted_bwd: self.emitted_bwd * k,
            dissipated_e: self.dissipated_e * k,
            dissipated_s: self.dissipated_s * k,
            stored: self.stored * k,
        }
    }
}

/// Instantaneous excitation fluxes (photons/s).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct Rates {
    pub input: f64,
    pub fwd: f64,
    pub bwd: f64,
    pub diss_e: f64,
    pub diss_s: f64,
}

impl Rates {
    pub fn combine(parts: [&Rates; 4], w: [f64; 4]) -> Rates {
        let mut out = Rates::default();
        for (r, w) in parts.iter().zip(w) {
            out.input += w * r.input;
            out.fwd += w * r.fwd;
            out.bwd += w * r.bwd;
            out.diss_e += w * r.diss_e;
            out.diss_s += w * r.diss_s;
        }
        out
    }
}

/// Fields, coherences and spin wave of one channel on the z grid.
///
/// Field amplitudes are normalized so that `|e|²` is a photon flux (s⁻¹);
/// `|p|²` and `|spin|²` are excitation densities (m⁻¹).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub e_plus: Vec<Complex64>,
    pub e_minus: Vec<Complex64>,
    pub p_plus: Vec<Complex64>,
    pub p_minus: Vec<Complex64>,
    pub spin: Vec<Complex64>,
    pub t: f64,
    pub ledger: DissipationLedger,
}

impl SimState {
    pub fn zeros(n_z: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); n_z];
        Self {
            e_plus: z.clone(),
            e_minus: z.clone(),
            p_plus: z.clone(),
            p_minus: z.clone(),
            spin: z,
            t: 0.0,
            ledger: DissipationLedger::default(),
        }
    }

    pub fn n_z(&self) -> usize {
        self.spin.len()
    }

    /// Name of the first array holding a non-finite value.
    pub fn first_non_finite(&self) -> Option<&'static str> {
        let bad = |v: &[Complex64]| v.iter().any(|c| !c.re.is_finite() || !c.im.is_finite());
        [
            ("e_plus", &self.e_plus),
            ("e_minus", &self.e_minus),
            ("p_plus", &self.p_plus),
            ("p_minus", &self.p_minus),
            ("spin", &self.spin),
        ]
        .into_iter()
        .find(|(_, v)| bad(v))
        .map(|(n, _)| n)
    }

    /// Excitation density `|S|² + |P⁺|² + |P⁻|²` at each grid point.
    pub fn excitation_density(&self) -> Vec<f64> {
        (0..self.n_z())
            .map(|j| {
                self.spin[j].norm_sqr() + self.p_plus[j].norm_sqr() + self.p_minus[j].norm_sqr()
            })
            .collect()
    }
}
