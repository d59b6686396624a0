//! Per-step electrical snapshot of both packs, the feasible converter-power
//! window and the branch currents it implies.
//!
//! The high-energy pack sits behind the DC-DC converter; `u` is the converter
//! power on the bus side. Discharging (`u > 0`) the battery supplies `u / eta`,
//! charging (`u < 0`) it receives `u * eta`. At `u = 0` no power flows.

use serde::{Deserialize, Serialize};

use crate::aging::AgingParams;
use crate::cell::current_from_power;
use crate::error::{Error, Result};
use crate::pack::{pack_limits, PackDesign};

/// Pack-level quantities frozen for one time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PackState {
    pub v_oc: f64,
    pub r: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub i_min: f64,
    pub i_max: f64,
    /// Pack capacity [Ah].
    pub q_pack: f64,
    pub n_p: f64,
    pub aging: AgingParams,
}

impl PackState {
    /// `None` for an empty pack.
    pub fn of(pack: &PackDesign, soc: f64, temp: f64) -> Option<Self> {
        if pack.is_empty() {
            return None;
        }
        let limits = pack_limits(pack);
        Some(Self {
            v_oc: pack.ocv(soc, temp),
            r: pack.resistance(soc, temp),
            v_min: limits.v_min,
            v_max: limits.v_max,
            i_min: limits.i_min,
            i_max: limits.i_max,
            q_pack: pack.q_pack,
            n_p: f64::from(pack.n_p),
            aging: AgingParams {
                a_cy: pack.cell.a_cy,
                b_cy: pack.cell.b_cy,
                soh_eol: pack.cell.soh_eol,
                q0: pack.cell.q_nom,
            },
        })
    }

    /// Battery-side power `v_oc i - r i^2` for a pack current.
    pub fn power(&self, current: f64) -> f64 {
        self.v_oc * current - self.r * current * current
    }

    pub fn terminal_voltage(&self, current: f64) -> f64 {
        self.v_oc - self.r * current
    }

    fn peak_current(&self) -> f64 {
        self.v_oc / (2.0 * self.r)
    }

    /// Largest power with `i <= i_max`.
    pub fn p_current_max(&self) -> f64 {
        self.power(self.i_max.min(self.peak_current()))
    }

    /// Largest power with terminal voltage `>= v_min`.
    pub fn p_voltage_min(&self) -> f64 {
        self.power(((self.v_oc - self.v_min) / self.r).min(self.peak_current()))
    }

    /// Smallest (most negative) power with `i >= i_min`.
    pub fn p_current_min(&self) -> f64 {
        self.power(self.i_min)
    }

    /// Smallest power with terminal voltage `<= v_max`.
    pub fn p_voltage_max(&self) -> f64 {
        self.power(((self.v_oc - self.v_max) / self.r).min(self.peak_current()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitContext {
    pub hp: Option<PackState>,
    pub he: Option<PackState>,
    pub eta_dc: f64,
}

impl SplitContext {
    /// Bus-side converter power for a battery-side high-energy power.
    pub fn converter_from_battery(&self, p_he: f64) -> f64 {
        if p_he >= 0.0 {
            p_he * self.eta_dc
        } else {
            p_he / self.eta_dc
        }
    }

    /// Battery-side high-energy power for a bus-side converter power.
    pub fn battery_from_converter(&self, u: f64) -> f64 {
        if u >= 0.0 {
            u / self.eta_dc
        } else {
            u * self.eta_dc
        }
    }

    /// Converter loss at `u`, non-negative in both directions.
    pub fn converter_loss(&self, u: f64) -> f64 {
        self.battery_from_converter(u) - u
    }
}

/// The eight converter-power bounds, in bus-side watts.
///
/// Bounds of an absent pack are `None`; an absent high-energy pack pins
/// `u = 0` and an absent high-power pack pins `u = p_em`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DomainBounds {
    /// he current at most i_max
    pub he_current_max: Option<f64>,
    /// he terminal voltage at least v_min
    pub he_voltage_min: Option<f64>,
    /// hp current at least i_min (charge limit)
    pub hp_current_min: Option<f64>,
    /// hp terminal voltage at most v_max
    pub hp_voltage_max: Option<f64>,
    /// he current at least i_min (charge limit)
    pub he_current_min: Option<f64>,
    /// he terminal voltage at most v_max
    pub he_voltage_max: Option<f64>,
    /// hp current at most i_max
    pub hp_current_max: Option<f64>,
    /// hp terminal voltage at least v_min
    pub hp_voltage_min: Option<f64>,
}

impl DomainBounds {
    pub fn new(ctx: &SplitContext, p_em: f64) -> Self {
        let mut b = DomainBounds::default();
        if let Some(he) = &ctx.he {
            b.he_current_max = Some(ctx.converter_from_battery(he.p_current_max()));
            b.he_voltage_min = Some(ctx.converter_from_battery(he.p_voltage_min()));
            b.he_current_min = Some(ctx.converter_from_battery(he.p_current_min()));
            b.he_voltage_max = Some(ctx.converter_from_battery(he.p_voltage_max()));
        }
        if let Some(hp) = &ctx.hp {
            b.hp_current_min = Some(p_em - hp.p_current_min());
            b.hp_voltage_max = Some(p_em - hp.p_voltage_max());
            b.hp_current_max = Some(p_em - hp.p_current_max());
            b.hp_voltage_min = Some(p_em - hp.p_voltage_min());
        }
        b
    }

    pub fn upper(&self) -> [Option<f64>; 4] {
        [
            self.he_current_max,
            self.he_voltage_min,
            self.hp_current_min,
            self.hp_voltage_max,
        ]
    }

    pub fn lower(&self) -> [Option<f64>; 4] {
        [
            self.he_current_min,
            self.he_voltage_max,
            self.hp_current_max,
            self.hp_voltage_min,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Relative amount by which the bounds may cross before a step is infeasible.
pub const DOMAIN_TOL: f64 = 1e-9;

pub fn feasible_domain(ctx: &SplitContext, p_em: f64) -> Result<Interval> {
    let bounds = DomainBounds::new(ctx, p_em);
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for b in bounds.upper().into_iter().flatten() {
        hi = hi.min(b);
    }
    for b in bounds.lower().into_iter().flatten() {
        lo = lo.max(b);
    }
    if ctx.he.is_none() {
        lo = lo.max(0.0);
        hi = hi.min(0.0);
    }
    if ctx.hp.is_none() {
        lo = lo.max(p_em);
        hi = hi.min(p_em);
    }
    // the regen clip lands exactly on the charge limit, where rounding can
    // leave the two bounds crossed by a few ulps
    let scale = 1.0 + lo.abs().max(hi.abs()).max(p_em.abs());
    if lo > hi && lo - hi <= DOMAIN_TOL * scale {
        let mid = 0.5 * (lo + hi);
        lo = mid;
        hi = mid;
    }
    if lo > hi || lo.is_nan() || hi.is_nan() {
        return Err(Error::InfeasibleStep {
            step: None,
            p_em,
            u_lo: lo,
            u_hi: hi,
        });
    }
    Ok(Interval { lo, hi })
}

/// Range of motor demand the two packs can serve together at this state.
pub fn demand_window(ctx: &SplitContext) -> Interval {
    let (mut lo, mut hi) = (0.0, 0.0);
    if let Some(he) = &ctx.he {
        lo += ctx.converter_from_battery(he.p_current_min().max(he.p_voltage_max()));
        hi += ctx.converter_from_battery(he.p_current_max().min(he.p_voltage_min()));
    }
    if let Some(hp) = &ctx.hp {
        lo += hp.p_current_min().max(hp.p_voltage_max());
        hi += hp.p_current_max().min(hp.p_voltage_min());
    }
    Interval { lo, hi }
}

/// Bus voltage set by the high-power pack delivering `p_em - p_dc`.
pub fn bus_voltage(v_oc_hp: f64, r_hp: f64, p_em: f64, p_dc: f64) -> Result<f64> {
    let p_hp = p_em - p_dc;
    let disc = v_oc_hp * v_oc_hp - 4.0 * p_hp * r_hp;
    if disc < 0.0 {
        return Err(Error::PowerExceedsCapability {
            power: p_hp,
            max_power: crate::cell::max_power(v_oc_hp, r_hp),
        });
    }
    Ok(0.5 * (v_oc_hp + disc.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchCurrents {
    pub i_he: f64,
    pub i_hp: f64,
}

pub fn branch_currents(ctx: &SplitContext, u: f64, p_em: f64) -> Result<BranchCurrents> {
    let infeasible = || Error::InfeasibleStep {
        step: None,
        p_em,
        u_lo: u,
        u_hi: u,
    };
    let i_he = match &ctx.he {
        Some(he) => current_from_power(he.v_oc, he.r, ctx.battery_from_converter(u))
            .map_err(|_| infeasible())?,
        None if u == 0.0 => 0.0,
        None => return Err(infeasible()),
    };
    let i_hp = match &ctx.hp {
        Some(hp) => current_from_power(hp.v_oc, hp.r, p_em - u).map_err(|_| infeasible())?,
        None if p_em - u == 0.0 => 0.0,
        None => return Err(infeasible()),
    };
    Ok(BranchCurrents { i_he, i_hp })
}
