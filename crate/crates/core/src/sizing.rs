//! Outer layers: exhaustive capacity-split sweep, chemistry enumeration and
//! the lossless-converter comparison.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cell::CellParams;
use crate::drivetrain::{DriveCycle, VehicleParams};
use crate::error::{Error, Result};
use crate::pack::{build_hess, DesignSummary, HessDesign};
use crate::powersplit::{simulate, tco_value, InitialState, Objective, SimConfig, TcoParams, Totals};

/// Economic inputs of the lifetime-cost objective. Pack purchase costs come
/// from the sized designs and the cycle distance from the drive cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TcoEconomics {
    /// Energy price [currency/Wh].
    pub j_q: f64,
    /// Vehicle lifetime distance [km].
    pub d_l: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ObjectiveSpec {
    Energy,
    Tco(TcoEconomics),
}

impl ObjectiveSpec {
    pub fn resolve(&self, hess: &HessDesign, d_c: f64) -> Objective {
        match self {
            ObjectiveSpec::Energy => Objective::Energy,
            ObjectiveSpec::Tco(econ) => Objective::Tco(tco_params(econ, hess, d_c)),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ObjectiveSpec::Energy => "energy",
            ObjectiveSpec::Tco(_) => "tco",
        }
    }
}

fn tco_params(econ: &TcoEconomics, hess: &HessDesign, d_c: f64) -> TcoParams {
    TcoParams {
        j_b_hp: hess.hp.cost(),
        j_b_he: hess.he.cost(),
        j_q: econ.j_q,
        d_l: econ.d_l,
        d_c,
    }
}

/// Lifetime cost of a simulated design: replacements, purchase and energy.
pub fn evaluate_tco(totals: &Totals, econ: &TcoEconomics, hess: &HessDesign) -> f64 {
    let p = tco_params(econ, hess, totals.distance_km);
    tco_value(&p, totals.delta_deg_hp, totals.delta_deg_he, totals.j_e())
}

/// Everything a sweep shares across grid points.
#[derive(Debug, Clone)]
pub struct SweepSetup {
    pub cycle: DriveCycle,
    pub vehicle: VehicleParams,
    pub e_tot: f64,
    pub v_design: f64,
    pub eta_dc: f64,
    pub objective: ObjectiveSpec,
    pub init: InitialState,
    pub sim: SimConfig,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChemistryPair {
    pub he: String,
    pub hp: String,
}

impl ChemistryPair {
    pub fn of(he: &CellParams, hp: &CellParams) -> Self {
        Self {
            he: he.chemistry_id.to_string(),
            hp: hp.chemistry_id.to_string(),
        }
    }

    pub fn label(&self) -> String {
        format!("{}-{}", self.he, self.hp)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub gamma: f64,
    pub design: DesignSummary,
    pub feasible: bool,
    pub infeasible_reason: Option<String>,
    pub totals: Option<Totals>,
    pub j_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestDesign {
    pub gamma: f64,
    pub j_value: f64,
    pub design: DesignSummary,
    pub totals: Totals,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub chemistry_pair: ChemistryPair,
    pub objective: String,
    pub gamma_grid: Vec<f64>,
    pub points: Vec<SweepPoint>,
    pub gamma_min_feasible: f64,
    pub best: BestDesign,
}

impl SweepResult {
    pub fn best_point(&self) -> &SweepPoint {
        self.points
            .iter()
            .find(|p| p.gamma == self.best.gamma)
            .expect("best gamma is a grid point")
    }

    pub fn feasible_points(&self) -> impl Iterator<Item = &SweepPoint> {
        self.points.iter().filter(|p| p.feasible)
    }
}

/// `n` uniform points on `[0, 1]`.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![1.0],
        _ => (0..n).map(|k| k as f64 / (n - 1) as f64).collect(),
    }
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("gamma grid is empty".into()));
    }
    if grid.iter().any(|g| !(0.0..=1.0).contains(g)) {
        return Err(Error::InvalidParameter("gamma grid values must lie in [0, 1]".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("gamma grid must be strictly increasing".into()));
    }
    Ok(())
}

fn evaluate_point(gamma: f64, he: &CellParams, hp: &CellParams, setup: &SweepSetup) -> Result<SweepPoint> {
    let hess = build_hess(
        gamma,
        setup.e_tot,
        setup.v_design,
        hp,
        he,
        setup.eta_dc,
        setup.vehicle.p_em_max,
    );
    let design = hess.summary();
    let infeasible = |reason: String| SweepPoint {
        gamma,
        design: design.clone(),
        feasible: false,
        infeasible_reason: Some(reason),
        totals: None,
        j_value: None,
    };
    if !hess.feasible {
        return Ok(infeasible("power_constraint".into()));
    }
    let objective = setup.objective.resolve(&hess, setup.cycle.distance_km);
    let costates = setup.sim.solver.costates();
    match simulate(&hess, &setup.cycle, &setup.vehicle, &objective, &costates, &setup.init, &setup.sim) {
        Ok(log) => Ok(SweepPoint {
            gamma,
            design: design.clone(),
            feasible: true,
            infeasible_reason: None,
            j_value: Some(log.totals.j_value),
            totals: Some(log.totals),
        }),
        Err(e @ (Error::InfeasibleStep { .. } | Error::Depletion { .. })) => Ok(infeasible(format!("{}: {e}", e.kind()))),
        Err(e) => Err(e),
    }
}

/// Builds and simulates every grid point for one chemistry pair.
///
/// Points are evaluated in parallel on the current rayon pool and gathered in
/// grid order, so the result does not depend on the thread count.
pub fn sweep(he: &CellParams, hp: &CellParams, gamma_grid: &[f64], setup: &SweepSetup) -> Result<SweepResult> {
    validate_grid(gamma_grid)?;
    if !(setup.e_tot > 0.0) {
        return Err(Error::InvalidParameter("e_tot must be positive".into()));
    }
    let pair = ChemistryPair::of(he, hp);
    let points = gamma_grid
        .par_iter()
        .map(|&g| evaluate_point(g, he, hp, setup))
        .collect::<Result<Vec<_>>>()?;

    let gamma_min_feasible = points
        .iter()
        .find(|p| p.feasible)
        .map(|p| p.gamma)
        .ok_or_else(|| Error::NoFeasibleDesign { pair: pair.label() })?;

    let mut best: Option<&SweepPoint> = None;
    for p in points.iter().filter(|p| p.feasible) {
        // strict comparison keeps the smaller gamma on ties
        if best.map_or(true, |b| p.j_value < b.j_value) {
            best = Some(p);
        }
    }
    let best = best.expect("at least one feasible point");
    let best = BestDesign {
        gamma: best.gamma,
        j_value: best.j_value.expect("feasible point has a value"),
        design: best.design.clone(),
        totals: best.totals.expect("feasible point has totals"),
    };
    Ok(SweepResult {
        chemistry_pair: pair,
        objective: setup.objective.name().into(),
        gamma_grid: gamma_grid.to_vec(),
        points,
        gamma_min_feasible,
        best,
    })
}

/// One sweep per high-power candidate, ordered by best objective value.
pub fn enumerate_chemistries(
    he: &CellParams,
    hp_candidates: &[CellParams],
    gamma_grid: &[f64],
    setup: &SweepSetup,
) -> Result<Vec<SweepResult>> {
    let mut results = hp_candidates
        .iter()
        .map(|hp| sweep(he, hp, gamma_grid, setup))
        .collect::<Result<Vec<_>>>()?;
    results.sort_by(|a, b| a.best.j_value.total_cmp(&b.best.j_value));
    Ok(results)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityPoint {
    pub gamma: f64,
    pub energy_density_wh_kg: f64,
    pub power_density_w_kg: f64,
}

impl DensityPoint {
    pub fn of(design: &DesignSummary) -> Self {
        Self {
            gamma: design.gamma,
            energy_density_wh_kg: design.energy_density_wh_kg,
            power_density_w_kg: design.power_density_w_kg,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LosslessComparison {
    pub lossy: SweepResult,
    pub lossless: SweepResult,
    pub lossy_optimum: DensityPoint,
    pub lossless_optimum: DensityPoint,
}

/// Sweeps the pair with the configured converter efficiency and again with an
/// ideal converter.
pub fn lossless_dcdc_experiment(
    he: &CellParams,
    hp: &CellParams,
    gamma_grid: &[f64],
    setup: &SweepSetup,
) -> Result<LosslessComparison> {
    let lossy = sweep(he, hp, gamma_grid, setup)?;
    let ideal = SweepSetup {
        eta_dc: 1.0,
        ..setup.clone()
    };
    let lossless = sweep(he, hp, gamma_grid, &ideal)?;
    Ok(LosslessComparison {
        lossy_optimum: DensityPoint::of(&lossy.best.design),
        lossless_optimum: DensityPoint::of(&lossless.best.design),
        lossy,
        lossless,
    })
}
