//! Inner optimization layer: the optimal converter power at every time step.
//!
//! With both co-states at zero the Hamiltonian equals the stage cost, so the
//! split minimizes the instantaneous cost subject to the pack limits.

mod cost;
mod domain;
mod simulate;
mod solver;

pub use cost::{
    hamiltonian, hamiltonian_of, soc_rates, stage_cost, stage_cost_of, tco_value, Costates,
    Objective, TcoParams,
};
pub use domain::{
    branch_currents, bus_voltage, demand_window, feasible_domain, BranchCurrents, DomainBounds,
    Interval, PackState, SplitContext,
};
pub use simulate::{
    simulate, InitialState, SimConfig, SimulationLog, StepTrace, ThermalConfig, Totals,
};
pub use solver::{golden_section, optimal_u, SolverConfig};

/// Soc pair of the two packs.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ControlState {
    /// High-energy pack soc.
    pub soc_he: f64,
    /// High-power pack soc.
    pub soc_hp: f64,
}
