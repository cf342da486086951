//! Benchmark fixtures.

use slp_core::dynamics::{Inputs, Model, SimState, SolverKind, Stepper};
use slp_core::sequence::compile;
use slp_core::{CompiledSequence, Grid, ParamSet, Scenario};

pub fn params() -> ParamSet {
    ParamSet::default()
}

pub fn grid(p: &ParamSet, n_z: usize, dt: f64) -> Grid {
    Grid::new(n_z, p.ensemble.length, dt).expect("valid benchmark grid")
}

pub fn stepper(p: &ParamSet, grid: &Grid, solver: SolverKind) -> Stepper {
    let model = Model::new(&p.ensemble, &p.channels[0], p.controls.delta, grid, solver)
        .expect("valid benchmark model");
    Stepper::new(model)
}

/// Both controls on and the probe at its nominal peak.
pub fn inputs(p: &ParamSet) -> [Inputs; 3] {
    let i = Inputs {
        omega_fwc: p.controls.omega_fwc,
        omega_bwc: p.controls.omega_bwc,
        drive: 1e3,
    };
    [i, i, i]
}

pub fn state(grid: &Grid) -> SimState {
    SimState::zeros(grid.n_z)
}

pub fn compiled(scenario: &Scenario) -> CompiledSequence {
    compile(&scenario.timeline, &scenario.params.controls).expect("built-in timelines compile")
}
