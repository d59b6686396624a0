//! Stage cost and Hamiltonian of the power-split problem.

use serde::{Deserialize, Serialize};

use super::domain::{branch_currents, BranchCurrents, PackState, SplitContext};
use crate::aging::degradation_rate;
use crate::error::Result;

/// Lifetime cost weights of the total-cost-of-ownership objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TcoParams {
    /// Purchase cost of the high-power pack.
    pub j_b_hp: f64,
    /// Purchase cost of the high-energy pack.
    pub j_b_he: f64,
    /// Energy price [currency/Wh].
    pub j_q: f64,
    /// Vehicle lifetime distance [km].
    pub d_l: f64,
    /// Drive-cycle distance [km].
    pub d_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Objective {
    Energy,
    Tco(TcoParams),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Costates {
    /// Weight on the high-energy soc rate.
    pub lambda1: f64,
    /// Weight on the high-power soc rate.
    pub lambda2: f64,
}

/// Lifetime cost from one cycle's normalized degradation and chemical energy.
pub fn tco_value(p: &TcoParams, delta_deg_hp: f64, delta_deg_he: f64, e_ec_total_wh: f64) -> f64 {
    p.j_b_hp * (p.d_l * delta_deg_hp / p.d_c + 1.0)
        + p.j_b_he * (p.d_l * delta_deg_he / p.d_c + 1.0)
        + p.j_q * e_ec_total_wh / p.d_c * p.d_l
}

fn chemical_power(pack: Option<&PackState>, current: f64) -> f64 {
    pack.map_or(0.0, |p| p.v_oc * current)
}

fn fade_rate(pack: Option<&PackState>, current: f64) -> f64 {
    pack.map_or(0.0, |p| {
        let a = &p.aging;
        degradation_rate(a.a_cy, a.b_cy, current / p.n_p, a.soh_eol, a.q0)
    })
}

/// Stage cost for known branch currents.
///
/// Energy: chemical power `V_oc,he I_he + V_oc,hp I_hp` [W]. TCO: degradation
/// cost rate plus priced chemical power, in currency per hour.
pub fn stage_cost_of(ctx: &SplitContext, currents: &BranchCurrents, objective: &Objective) -> f64 {
    let p_ec = chemical_power(ctx.he.as_ref(), currents.i_he) + chemical_power(ctx.hp.as_ref(), currents.i_hp);
    match objective {
        Objective::Energy => p_ec,
        Objective::Tco(p) => {
            p.j_b_hp * fade_rate(ctx.hp.as_ref(), currents.i_hp)
                + p.j_b_he * fade_rate(ctx.he.as_ref(), currents.i_he)
                + p.j_q * p_ec
        }
    }
}

pub fn stage_cost(ctx: &SplitContext, u: f64, p_em: f64, objective: &Objective) -> Result<f64> {
    let currents = branch_currents(ctx, u, p_em)?;
    Ok(stage_cost_of(ctx, &currents, objective))
}

/// Soc rates `[d soc_he/dt, d soc_hp/dt]` [1/s]; discharge lowers soc.
pub fn soc_rates(ctx: &SplitContext, currents: &BranchCurrents) -> [f64; 2] {
    let rate = |pack: Option<&PackState>, i: f64| pack.map_or(0.0, |p| -i / (3600.0 * p.q_pack));
    [rate(ctx.he.as_ref(), currents.i_he), rate(ctx.hp.as_ref(), currents.i_hp)]
}

pub fn hamiltonian_of(
    ctx: &SplitContext,
    currents: &BranchCurrents,
    costates: &Costates,
    objective: &Objective,
) -> f64 {
    let l = stage_cost_of(ctx, currents, objective);
    if costates.lambda1 == 0.0 && costates.lambda2 == 0.0 {
        return l;
    }
    let [x1, x2] = soc_rates(ctx, currents);
    l + costates.lambda1 * x1 + costates.lambda2 * x2
}

pub fn hamiltonian(
    ctx: &SplitContext,
    costates: &Costates,
    u: f64,
    p_em: f64,
    objective: &Objective,
) -> Result<f64> {
    let currents = branch_currents(ctx, u, p_em)?;
    Ok(hamiltonian_of(ctx, &currents, costates, objective))
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::{ctx, pack, typical};
    use super::*;

    fn tco(j_b: f64, j_q: f64) -> Objective {
        Objective::Tco(TcoParams {
            j_b_hp: j_b,
            j_b_he: 2.0 * j_b,
            j_q,
            d_l: 200_000.0,
            d_c: 23.0,
        })
    }

    #[test]
    fn idle_step_costs_nothing() {
        assert_eq!(stage_cost(&typical(), 0.0, 0.0, &Objective::Energy).unwrap(), 0.0);
    }

    #[test]
    fn energy_cost_is_chemical_power() {
        let c = ctx(Some(pack(400.0, 0.1, -50.0, 50.0)), Some(pack(350.0, 0.1, -50.0, 50.0)), 0.98);
        let i = BranchCurrents { i_he: 0.0, i_hp: 10.0 };
        assert_eq!(stage_cost_of(&c, &i, &Objective::Energy), 4000.0);
    }

    #[test]
    fn tco_cost_splits_linearly() {
        let c = typical();
        let i = branch_currents(&c, 6000.0, 25_000.0).unwrap();
        let energy = stage_cost_of(&c, &i, &Objective::Energy);
        let both = stage_cost_of(&c, &i, &tco(500.0, 3e-4));
        let fade_only = stage_cost_of(&c, &i, &tco(500.0, 0.0));
        let energy_only = stage_cost_of(&c, &i, &tco(0.0, 3e-4));
        assert!((energy_only - 3e-4 * energy).abs() < 1e-12 * energy);
        assert!(fade_only > 0.0);
        assert!((both - fade_only - energy_only).abs() < 1e-12 * both);
    }

    #[test]
    fn tco_value_worked_example() {
        let p = TcoParams {
            j_b_hp: 5000.0,
            j_b_he: 0.0,
            j_q: 0.0,
            d_l: 100_000.0,
            d_c: 10.0,
        };
        // replacement fraction 1e-5 per cycle over 10 000 cycles plus purchase
        assert!((tco_value(&p, 1e-5, 0.0, 1234.0) - 5500.0).abs() < 1e-9);
    }

    #[test]
    fn zero_costates_give_stage_cost() {
        let c = typical();
        for u in [-20_000.0, -1000.0, 0.0, 3000.0, 30_000.0] {
            let h = hamiltonian(&c, &Costates::default(), u, 15_000.0, &Objective::Energy).unwrap();
            assert_eq!(h, stage_cost(&c, u, 15_000.0, &Objective::Energy).unwrap());
        }
    }

    #[test]
    fn costate_term_is_linear_in_soc_rate() {
        let c = typical();
        let (u, p_em) = (8000.0, 15_000.0);
        let i = branch_currents(&c, u, p_em).unwrap();
        let l = stage_cost(&c, u, p_em, &Objective::Energy).unwrap();
        let [x1, x2] = soc_rates(&c, &i);
        assert!(x1 < 0.0 && x2 < 0.0);
        let h1 = hamiltonian(&c, &Costates { lambda1: 7.5, lambda2: 0.0 }, u, p_em, &Objective::Energy).unwrap();
        assert!((h1 - l - 7.5 * x1).abs() < 1e-12 * l);
        let h2 = hamiltonian(&c, &Costates { lambda1: 0.0, lambda2: -3.0 }, u, p_em, &Objective::Energy).unwrap();
        assert!((h2 - l + 3.0 * x2).abs() < 1e-12 * l);
    }
}
