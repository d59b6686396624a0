//! Cell-to-pack scaling and two-pack sizing from the capacity split.

use serde::{Deserialize, Serialize};

use crate::cell::{CellParams, REFERENCE_TEMP_C};

/// A homogeneous pack of `n_s` series by `n_p` parallel cells.
///
/// `n_p == 0` is a valid, empty pack (single-chemistry designs at the ends of
/// the gamma range). Empty packs carry no current and no mass.
#[derive(Debug, Clone, PartialEq)]
pub struct PackDesign {
    pub cell: CellParams,
    pub n_s: u32,
    pub n_p: u32,
    /// Energy assigned before ceiling quantization [Wh].
    pub e_designed: f64,
    pub mass: f64,
    pub q_pack: f64,
    /// Pack resistance is `r_scale * R_c`.
    pub r_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PackLimits {
    pub v_max: f64,
    pub v_min: f64,
    pub i_max: f64,
    pub i_min: f64,
    pub p_max: f64,
}

impl PackDesign {
    pub fn new(cell: CellParams, n_s: u32, n_p: u32, e_designed: f64) -> Self {
        let cells = f64::from(n_s) * f64::from(n_p);
        let mass = cells * cell.m_c;
        let q_pack = f64::from(n_p) * cell.q_nom;
        let r_scale = if n_p == 0 {
            f64::INFINITY
        } else {
            f64::from(n_s) / f64::from(n_p)
        };
        Self {
            cell,
            n_s,
            n_p,
            e_designed,
            mass,
            q_pack,
            r_scale,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.n_p == 0 || self.n_s == 0
    }

    pub fn cell_count(&self) -> u64 {
        u64::from(self.n_s) * u64::from(self.n_p)
    }

    /// Installed energy at nominal voltage [Wh]; never below `e_designed`.
    pub fn e_actual(&self) -> f64 {
        self.cell_count() as f64 * self.cell.nominal_energy()
    }

    pub fn ocv(&self, soc: f64, temp: f64) -> f64 {
        f64::from(self.n_s) * self.cell.ocv(soc, temp)
    }

    pub fn resistance(&self, soc: f64, temp: f64) -> f64 {
        self.r_scale * self.cell.internal_resistance(soc, temp)
    }

    /// Purchase cost of all cells in the pack.
    pub fn cost(&self) -> f64 {
        self.cell_count() as f64 * self.cell.cost_per_cell
    }
}

pub fn split_capacity(gamma: f64, e_tot: f64) -> (f64, f64) {
    let e_hp = gamma * e_tot;
    (e_hp, e_tot - e_hp)
}

pub fn series_count(v_design: f64, v_c_max: f64) -> u32 {
    (v_design / v_c_max).ceil() as u32
}

pub fn parallel_count(e_target: f64, n_s: u32, v_c_nom: f64, q_c: f64) -> u32 {
    if e_target <= 0.0 {
        return 0;
    }
    (e_target / (f64::from(n_s) * v_c_nom * q_c)).ceil() as u32
}

/// Pack-level voltage, current and power limits.
///
/// `p_max` is evaluated at full charge and the reference temperature: the
/// resistance-limited power at the minimum voltage, capped by the current
/// limit at that voltage.
pub fn pack_limits(pack: &PackDesign) -> PackLimits {
    let ns = f64::from(pack.n_s);
    let np = f64::from(pack.n_p);
    let cell = &pack.cell;
    let v_max = ns * cell.v_c_max;
    let v_min = ns * cell.v_c_min;
    let i_max = np * cell.i_c_max;
    let i_min = np * cell.i_c_min;
    let p_max = if pack.is_empty() {
        0.0
    } else {
        let v_full = pack.ocv(1.0, REFERENCE_TEMP_C);
        let r = pack.resistance(1.0, REFERENCE_TEMP_C);
        let resistance_limited = (v_full - v_min) / r * v_min;
        resistance_limited.min(i_max * v_min).max(0.0)
    };
    PackLimits {
        v_max,
        v_min,
        i_max,
        i_min,
        p_max,
    }
}

/// Sized two-pack system for one capacity split.
#[derive(Debug, Clone, PartialEq)]
pub struct HessDesign {
    pub gamma: f64,
    pub e_tot: f64,
    pub v_design: f64,
    pub eta_dc: f64,
    pub p_em_max: f64,
    pub hp: PackDesign,
    pub he: PackDesign,
    pub feasible: bool,
}

impl HessDesign {
    pub fn mass(&self) -> f64 {
        self.hp.mass + self.he.mass
    }

    pub fn e_actual(&self) -> f64 {
        self.hp.e_actual() + self.he.e_actual()
    }

    /// Deliverable system power `eta_dc * P_he,max + P_hp,max` [W].
    pub fn p_available(&self) -> f64 {
        self.eta_dc * pack_limits(&self.he).p_max + pack_limits(&self.hp).p_max
    }

    pub fn energy_density(&self) -> f64 {
        self.e_actual() / self.mass()
    }

    pub fn power_density(&self) -> f64 {
        self.p_available() / self.mass()
    }

    pub fn summary(&self) -> DesignSummary {
        let pack = |p: &PackDesign| PackSummary {
            chemistry: p.cell.chemistry_id.to_string(),
            n_s: p.n_s,
            n_p: p.n_p,
            e_designed_wh: p.e_designed,
            e_actual_wh: p.e_actual(),
            mass_kg: p.mass,
            q_pack_ah: p.q_pack,
            cost: p.cost(),
            limits: pack_limits(p),
        };
        DesignSummary {
            gamma: self.gamma,
            e_tot_wh: self.e_tot,
            v_design_v: self.v_design,
            eta_dc: self.eta_dc,
            p_em_max_w: self.p_em_max,
            p_available_w: self.p_available(),
            mass_kg: self.mass(),
            energy_density_wh_kg: self.energy_density(),
            power_density_w_kg: self.power_density(),
            feasible: self.feasible,
            hp: pack(&self.hp),
            he: pack(&self.he),
        }
    }
}

/// Serializable view of a design without the full cell parameter sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSummary {
    pub gamma: f64,
    pub e_tot_wh: f64,
    pub v_design_v: f64,
    pub eta_dc: f64,
    pub p_em_max_w: f64,
    pub p_available_w: f64,
    pub mass_kg: f64,
    pub energy_density_wh_kg: f64,
    pub power_density_w_kg: f64,
    pub feasible: bool,
    pub hp: PackSummary,
    pub he: PackSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackSummary {
    pub chemistry: String,
    pub n_s: u32,
    pub n_p: u32,
    pub e_designed_wh: f64,
    pub e_actual_wh: f64,
    pub mass_kg: f64,
    pub q_pack_ah: f64,
    pub cost: f64,
    pub limits: PackLimits,
}

pub fn build_hess(
    gamma: f64,
    e_tot: f64,
    v_design: f64,
    hp_cell: &CellParams,
    he_cell: &CellParams,
    eta_dc: f64,
    p_em_max: f64,
) -> HessDesign {
    let (e_hp, e_he) = split_capacity(gamma, e_tot);
    let build = |cell: &CellParams, e: f64| {
        let n_s = series_count(v_design, cell.v_c_max);
        let n_p = parallel_count(e, n_s, cell.v_c_nom, cell.q_nom);
        PackDesign::new(cell.clone(), n_s, n_p, e)
    };
    let mut design = HessDesign {
        gamma,
        e_tot,
        v_design,
        eta_dc,
        p_em_max,
        hp: build(hp_cell, e_hp),
        he: build(he_cell, e_he),
        feasible: false,
    };
    design.feasible = p_em_max <= design.p_available();
    design
}
