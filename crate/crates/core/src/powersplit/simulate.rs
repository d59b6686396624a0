//! Full-cycle simulation of one sized system under the per-step optimal split.

use serde::{Deserialize, Serialize};

use super::cost::{tco_value, Costates, Objective};
use super::domain::{branch_currents, demand_window, PackState, SplitContext};
use super::solver::{optimal_u, SolverConfig};
use crate::aging::DegradationAccumulator;
use crate::cell::SOC_FLOOR;
use crate::drivetrain::{power_trace, DriveCycle, VehicleParams};
use crate::error::{Error, Result};
use crate::pack::{HessDesign, PackDesign};
use crate::thermal::{check_stability, step_temperature};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialState {
    pub soc0_hp: f64,
    pub soc0_he: f64,
    /// Initial cell temperature; ambient when absent.
    pub t0: Option<f64>,
}

impl Default for InitialState {
    fn default() -> Self {
        Self {
            soc0_hp: 0.9,
            soc0_he: 0.9,
            t0: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThermalConfig {
    pub t_amb: f64,
    /// When false, cell temperatures stay at ambient.
    pub coupled: bool,
    /// Overrides the per-cell heat transfer coefficient of both cell files.
    pub kappa_tot: Option<f64>,
}

impl Default for ThermalConfig {
    fn default() -> Self {
        Self {
            t_amb: 25.0,
            coupled: true,
            kappa_tot: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub solver: SolverConfig,
    pub thermal: ThermalConfig,
}

/// Per-step records. Electrical quantities belong to the interval starting at
/// `t_s`; soc and temperature are the values at its start.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StepTrace {
    pub t_s: Vec<f64>,
    pub v_mps: Vec<f64>,
    pub p_em: Vec<f64>,
    pub u: Vec<f64>,
    pub v_dc: Vec<f64>,
    pub i_hp: Vec<f64>,
    pub i_he: Vec<f64>,
    pub v_hp: Vec<f64>,
    pub v_he: Vec<f64>,
    pub soc_hp: Vec<f64>,
    pub soc_he: Vec<f64>,
    pub t_hp: Vec<f64>,
    pub t_he: Vec<f64>,
    pub p_loss_hp: Vec<f64>,
    pub p_loss_he: Vec<f64>,
    pub p_loss_dc: Vec<f64>,
}

impl StepTrace {
    pub fn len(&self) -> usize {
        self.t_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_s.is_empty()
    }
}

/// Cycle totals. Energies in Wh.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub e_ec_hp: f64,
    pub e_ec_he: f64,
    pub e_t_hp: f64,
    pub e_t_he: f64,
    pub e_l_hp: f64,
    pub e_l_he: f64,
    pub e_l_dc: f64,
    pub e_s_em: f64,
    /// Motor loss plus auxiliaries plus braking energy the packs could not absorb.
    pub e_l_em: f64,
    /// Part of `e_l_em` dissipated by friction brakes.
    pub e_friction: f64,
    pub delta_soc_hp: f64,
    pub delta_soc_he: f64,
    pub delta_deg_hp: f64,
    pub delta_deg_he: f64,
    pub q_deg_hp: f64,
    pub q_deg_he: f64,
    pub soc_final_hp: f64,
    pub soc_final_he: f64,
    pub t_max_hp: f64,
    pub t_max_he: f64,
    pub distance_km: f64,
    pub duration_s: f64,
    pub vehicle_mass_kg: f64,
    pub j_value: f64,
}

impl Totals {
    pub fn j_e(&self) -> f64 {
        self.e_ec_hp + self.e_ec_he
    }

    /// Sum of shaft energy and every loss term.
    pub fn breakdown_sum(&self) -> f64 {
        self.e_s_em + self.e_l_em + self.e_l_hp + self.e_l_he + self.e_l_dc
    }

    /// Terminal over chemical energy of a pack; 1 when the pack is idle.
    pub fn efficiency_hp(&self) -> f64 {
        ratio(self.e_t_hp, self.e_ec_hp)
    }

    pub fn efficiency_he(&self) -> f64 {
        ratio(self.e_t_he, self.e_ec_he)
    }

    pub fn motor_efficiency(&self) -> f64 {
        ratio(self.e_s_em, self.e_s_em + self.e_l_em)
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        1.0
    } else {
        num / den
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationLog {
    pub trace: StepTrace,
    pub totals: Totals,
}

fn kappa_for(pack: &PackDesign, cfg: &ThermalConfig) -> f64 {
    cfg.kappa_tot.unwrap_or(pack.cell.kappa_tot)
}

fn next_temperature(pack: &PackDesign, t: f64, p_loss_pack: f64, dt: f64, cfg: &ThermalConfig) -> f64 {
    if !cfg.coupled || pack.is_empty() {
        return t;
    }
    let per_cell = p_loss_pack / pack.cell_count() as f64;
    step_temperature(t, per_cell, dt, pack.cell.m_c, pack.cell.c_p_c, kappa_for(pack, cfg), cfg.t_amb)
}

pub fn simulate(
    hess: &HessDesign,
    cycle: &DriveCycle,
    vehicle: &VehicleParams,
    objective: &Objective,
    costates: &Costates,
    init: &InitialState,
    cfg: &SimConfig,
) -> Result<SimulationLog> {
    if !hess.feasible {
        return Err(Error::InfeasibleDesign {
            gamma: hess.gamma,
            p_em_max: hess.p_em_max,
            p_available: hess.p_available(),
        });
    }
    let th = &cfg.thermal;
    if th.coupled {
        for pack in [&hess.hp, &hess.he] {
            if !pack.is_empty() {
                check_stability(cycle.dt, pack.cell.m_c, pack.cell.c_p_c, kappa_for(pack, th))?;
            }
        }
    }

    let vehicle_mass = vehicle.m_base + hess.mass();
    let demand = power_trace(cycle, vehicle, vehicle_mass);
    let dt = cycle.dt;
    let h = dt / 3600.0;
    let n = cycle.steps();

    let mut soc_hp = init.soc0_hp;
    let mut soc_he = init.soc0_he;
    let t0 = init.t0.unwrap_or(th.t_amb);
    let (mut t_hp, mut t_he) = (t0, t0);
    let mut deg_hp = DegradationAccumulator::default();
    let mut deg_he = DegradationAccumulator::default();
    let mut tot = Totals {
        t_max_hp: t0,
        t_max_he: t0,
        ..Totals::default()
    };
    let mut trace = StepTrace::default();

    for k in 0..n {
        let ctx = SplitContext {
            hp: PackState::of(&hess.hp, soc_hp, t_hp),
            he: PackState::of(&hess.he, soc_he, t_he),
            eta_dc: hess.eta_dc,
        };
        let p_request = demand.p_em[k];
        let window = demand_window(&ctx);
        // braking the packs cannot absorb goes to the friction brakes
        let p_em = if p_request < window.lo && window.lo <= 0.0 {
            window.lo
        } else {
            p_request
        };

        let u = optimal_u(&ctx, p_em, objective, costates, &cfg.solver).map_err(|e| match e {
            Error::InfeasibleStep { p_em, u_lo, u_hi, .. } => Error::InfeasibleStep {
                step: Some(k),
                p_em,
                u_lo,
                u_hi,
            },
            other => other,
        })?;
        let currents = branch_currents(&ctx, u, p_em).map_err(|_| Error::InfeasibleStep {
            step: Some(k),
            p_em,
            u_lo: u,
            u_hi: u,
        })?;

        let (i_hp, i_he) = (currents.i_hp, currents.i_he);
        let (v_oc_hp, r_hp) = ctx.hp.map_or((0.0, 0.0), |p| (p.v_oc, p.r));
        let (v_oc_he, r_he) = ctx.he.map_or((0.0, 0.0), |p| (p.v_oc, p.r));
        let v_hp = v_oc_hp - r_hp * i_hp;
        let v_he = v_oc_he - r_he * i_he;
        let p_loss_hp = r_hp * i_hp * i_hp;
        let p_loss_he = r_he * i_he * i_he;
        let p_loss_dc = if ctx.he.is_some() { ctx.converter_loss(u) } else { 0.0 };
        let v_dc = if ctx.hp.is_some() { v_hp } else { v_he };

        trace.t_s.push(k as f64 * dt);
        trace.v_mps.push(demand.v_mean[k]);
        trace.p_em.push(p_em);
        trace.u.push(u);
        trace.v_dc.push(v_dc);
        trace.i_hp.push(i_hp);
        trace.i_he.push(i_he);
        trace.v_hp.push(v_hp);
        trace.v_he.push(v_he);
        trace.soc_hp.push(soc_hp);
        trace.soc_he.push(soc_he);
        trace.t_hp.push(t_hp);
        trace.t_he.push(t_he);
        trace.p_loss_hp.push(p_loss_hp);
        trace.p_loss_he.push(p_loss_he);
        trace.p_loss_dc.push(p_loss_dc);

        tot.e_ec_hp += v_oc_hp * i_hp * h;
        tot.e_ec_he += v_oc_he * i_he * h;
        tot.e_t_hp += v_hp * i_hp * h;
        tot.e_t_he += v_he * i_he * h;
        tot.e_l_hp += p_loss_hp * h;
        tot.e_l_he += p_loss_he * h;
        tot.e_l_dc += p_loss_dc * h;
        tot.e_s_em += demand.p_s_em[k] * h;
        tot.e_l_em += (p_em - demand.p_s_em[k]) * h;
        tot.e_friction += (p_em - p_request) * h;

        if let Some(hp) = &ctx.hp {
            soc_hp -= i_hp * dt / (3600.0 * hp.q_pack);
            deg_hp = deg_hp.accumulate(i_hp / hp.n_p, dt, &hp.aging);
        }
        if let Some(he) = &ctx.he {
            soc_he -= i_he * dt / (3600.0 * he.q_pack);
            deg_he = deg_he.accumulate(i_he / he.n_p, dt, &he.aging);
        }
        for (pack, soc) in [("hp", soc_hp), ("he", soc_he)] {
            if soc < SOC_FLOOR {
                return Err(Error::Depletion {
                    pack,
                    step: k,
                    soc,
                    floor: SOC_FLOOR,
                });
            }
        }
        t_hp = next_temperature(&hess.hp, t_hp, p_loss_hp, dt, th);
        t_he = next_temperature(&hess.he, t_he, p_loss_he, dt, th);
        tot.t_max_hp = tot.t_max_hp.max(t_hp);
        tot.t_max_he = tot.t_max_he.max(t_he);
    }

    tot.delta_soc_hp = init.soc0_hp - soc_hp;
    tot.delta_soc_he = init.soc0_he - soc_he;
    tot.soc_final_hp = soc_hp;
    tot.soc_final_he = soc_he;
    tot.delta_deg_hp = deg_hp.delta_deg;
    tot.delta_deg_he = deg_he.delta_deg;
    tot.q_deg_hp = deg_hp.q_deg;
    tot.q_deg_he = deg_he.q_deg;
    tot.distance_km = cycle.distance_km;
    tot.duration_s = cycle.duration();
    tot.vehicle_mass_kg = vehicle_mass;
    tot.j_value = match objective {
        Objective::Energy => tot.j_e(),
        Objective::Tco(p) => tco_value(p, tot.delta_deg_hp, tot.delta_deg_he, tot.j_e()),
    };
    Ok(SimulationLog { trace, totals: tot })
}
