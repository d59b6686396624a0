//! Result emission: CSV tables, JSON summaries and the three CLI commands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::{PairSpec, RunConfig};
use crate::error::{Error, Result};
use crate::pack::{build_hess, DesignSummary};
use crate::powersplit::{simulate, StepTrace, Totals};
use crate::sizing::{lossless_dcdc_experiment, sweep, SweepPoint, SweepResult};

/// One row of `trace_<pair>_<gamma>.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t_s: f64,
    pub v_mps: f64,
    pub p_em_w: f64,
    pub u_w: f64,
    pub v_dc_v: f64,
    pub i_hp_a: f64,
    pub i_he_a: f64,
    pub soc_hp: f64,
    pub soc_he: f64,
    pub t_hp_c: f64,
    pub t_he_c: f64,
}

pub fn trace_rows(trace: &StepTrace) -> Vec<TraceRow> {
    (0..trace.len())
        .map(|k| TraceRow {
            t_s: trace.t_s[k],
            v_mps: trace.v_mps[k],
            p_em_w: trace.p_em[k],
            u_w: trace.u[k],
            v_dc_v: trace.v_dc[k],
            i_hp_a: trace.i_hp[k],
            i_he_a: trace.i_he[k],
            soc_hp: trace.soc_hp[k],
            soc_he: trace.soc_he[k],
            t_hp_c: trace.t_hp[k],
            t_he_c: trace.t_he[k],
        })
        .collect()
}

/// One row of `sweep_<pair>.csv`. Simulation columns are empty for
/// infeasible designs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub feasible: bool,
    pub j_value_wh: Option<f64>,
    pub e_s_em_wh: Option<f64>,
    pub e_l_hp_wh: Option<f64>,
    pub e_l_he_wh: Option<f64>,
    pub e_l_em_wh: Option<f64>,
    pub e_l_dc_wh: Option<f64>,
    pub dsoc_hp: Option<f64>,
    pub dsoc_he: Option<f64>,
    pub energy_density_wh_kg: f64,
    pub power_density_w_kg: f64,
}

impl SweepRow {
    pub fn of(point: &SweepPoint) -> Self {
        let t = point.totals.as_ref();
        Self {
            gamma: point.gamma,
            feasible: point.feasible,
            j_value_wh: t.map(Totals::j_e),
            e_s_em_wh: t.map(|t| t.e_s_em),
            e_l_hp_wh: t.map(|t| t.e_l_hp),
            e_l_he_wh: t.map(|t| t.e_l_he),
            e_l_em_wh: t.map(|t| t.e_l_em),
            e_l_dc_wh: t.map(|t| t.e_l_dc),
            dsoc_hp: t.map(|t| t.delta_soc_hp),
            dsoc_he: t.map(|t| t.delta_soc_he),
            energy_density_wh_kg: point.design.energy_density_wh_kg,
            power_density_w_kg: point.design.power_density_w_kg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    /// A point of the capacity-split sweep.
    Sweep,
    /// A single-chemistry cell.
    Reference,
    /// Optimum found with an ideal converter.
    LosslessOptimum,
}

/// One row of `density.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub pair: String,
    pub kind: DensityKind,
    pub gamma: Option<f64>,
    pub feasible: bool,
    pub energy_density_wh_kg: f64,
    pub power_density_w_kg: f64,
    pub optimum: bool,
}

pub fn density_rows(result: &SweepResult) -> Vec<DensityRow> {
    let pair = result.chemistry_pair.label();
    result
        .points
        .iter()
        .map(|p| DensityRow {
            pair: pair.clone(),
            kind: DensityKind::Sweep,
            gamma: Some(p.gamma),
            feasible: p.feasible,
            energy_density_wh_kg: p.design.energy_density_wh_kg,
            power_density_w_kg: p.design.power_density_w_kg,
            optimum: p.feasible && p.gamma == result.best.gamma,
        })
        .collect()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: e.to_string(),
    }
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    for row in rows {
        w.serialize(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    r.deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| csv_err(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    w.write_all(b"\n").map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Efficiencies {
    /// Terminal over chemical energy of the high-power pack.
    pub hp: f64,
    pub he: f64,
    pub dcdc: f64,
    /// Shaft energy over motor electrical energy.
    pub motor: f64,
}

impl Efficiencies {
    pub fn of(totals: &Totals, eta_dc: f64) -> Self {
        Self {
            hp: totals.efficiency_hp(),
            he: totals.efficiency_he(),
            dcdc: eta_dc,
            motor: totals.motor_efficiency(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LosslessSummary {
    pub gamma: f64,
    pub j_e_wh: f64,
    pub gamma_min_feasible: f64,
    pub energy_density_wh_kg: f64,
    pub power_density_w_kg: f64,
}

/// Optimum of one chemistry pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub pair: String,
    pub gamma: f64,
    pub j_value: f64,
    pub j_e_wh: f64,
    pub e_hp_wh: f64,
    pub e_he_wh: f64,
    pub gamma_min_feasible: f64,
    pub efficiencies: Efficiencies,
    pub design: DesignSummary,
    pub totals: Totals,
    pub lossless: Option<LosslessSummary>,
}

impl PairSummary {
    pub fn of(result: &SweepResult) -> Self {
        let best = &result.best;
        Self {
            pair: result.chemistry_pair.label(),
            gamma: best.gamma,
            j_value: best.j_value,
            j_e_wh: best.totals.j_e(),
            e_hp_wh: best.design.hp.e_designed_wh,
            e_he_wh: best.design.he.e_designed_wh,
            gamma_min_feasible: result.gamma_min_feasible,
            efficiencies: Efficiencies::of(&best.totals, best.design.eta_dc),
            design: best.design.clone(),
            totals: best.totals,
            lossless: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub objective: String,
    pub eta_dc: f64,
    pub cycle_distance_km: f64,
    pub cycle_duration_s: f64,
    pub pairs: Vec<PairSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub pair: String,
    pub gamma: f64,
    pub objective: String,
    pub j_e_wh: f64,
    pub efficiencies: Efficiencies,
    pub design: DesignSummary,
    pub totals: Totals,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}

impl ErrorReport {
    pub fn of(err: &Error) -> Self {
        Self {
            kind: err.kind().into(),
            message: err.to_string(),
            exit_code: err.exit_code(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

/// File-name form of a grid value, e.g. `0.64`.
pub fn gamma_tag(gamma: f64) -> String {
    format!("{gamma}")
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))
}

fn pair_spec(cfg: &RunConfig, pair: &str) -> Result<PairSpec> {
    let spec = PairSpec::parse(pair)?;
    for id in [&spec.he, &spec.hp] {
        if !cfg.cells.contains_key(id) {
            return Err(Error::Config(format!("chemistry `{id}` has no entry in [cells]")));
        }
    }
    Ok(spec)
}

/// Single-point run. Writes the totals JSON and the per-step trace.
pub fn cmd_simulate(cfg: &RunConfig, pair: &str, gamma: f64, out_dir: &Path) -> Result<Vec<PathBuf>> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Config(format!("--gamma must lie in [0, 1], got {gamma}")));
    }
    let spec = pair_spec(cfg, pair)?;
    let he = cfg.cell(&spec.he)?;
    let hp = cfg.cell(&spec.hp)?;
    let setup = cfg.sweep_setup()?;
    let hess = build_hess(gamma, setup.e_tot, setup.v_design, &hp, &he, setup.eta_dc, setup.vehicle.p_em_max);
    let objective = setup.objective.resolve(&hess, setup.cycle.distance_km);
    let log = simulate(
        &hess,
        &setup.cycle,
        &setup.vehicle,
        &objective,
        &setup.sim.solver.costates(),
        &setup.init,
        &setup.sim,
    )?;

    ensure_dir(out_dir)?;
    let label = spec.label();
    let tag = gamma_tag(gamma);
    let report = SimReport {
        pair: label.clone(),
        gamma,
        objective: setup.objective.name().into(),
        j_e_wh: log.totals.j_e(),
        efficiencies: Efficiencies::of(&log.totals, setup.eta_dc),
        design: hess.summary(),
        totals: log.totals,
    };
    let json = out_dir.join(format!("sim_{label}_{tag}.json"));
    let csv = out_dir.join(format!("trace_{label}_{tag}.csv"));
    write_json(&json, &report)?;
    write_csv(&csv, &trace_rows(&log.trace))?;
    Ok(vec![json, csv])
}

/// Runs every configured pair; with `lossless` also the ideal-converter sweep.
pub fn run_sweeps(cfg: &RunConfig, lossless: bool) -> Result<Vec<(SweepResult, Option<SweepResult>)>> {
    let setup = cfg.sweep_setup()?;
    let grid = cfg.gamma.values();
    cfg.pair_specs()?
        .iter()
        .map(|spec| {
            let he = cfg.cell(&spec.he)?;
            let hp = cfg.cell(&spec.hp)?;
            if lossless {
                let cmp = lossless_dcdc_experiment(&he, &hp, &grid, &setup)?;
                Ok((cmp.lossy, Some(cmp.lossless)))
            } else {
                Ok((sweep(&he, &hp, &grid, &setup)?, None))
            }
        })
        .collect()
}

fn lossless_summary(r: &SweepResult) -> LosslessSummary {
    LosslessSummary {
        gamma: r.best.gamma,
        j_e_wh: r.best.totals.j_e(),
        gamma_min_feasible: r.gamma_min_feasible,
        energy_density_wh_kg: r.best.design.energy_density_wh_kg,
        power_density_w_kg: r.best.design.power_density_w_kg,
    }
}

/// Writes `sweep_<pair>.csv` per pair and `summary.json`. The lossless sweep,
/// when requested, goes to `sweep_<pair>_lossless.csv`.
pub fn cmd_sweep(cfg: &RunConfig, lossless: bool, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let lossless = lossless || cfg.experiment.lossless_dcdc;
    let results = run_sweeps(cfg, lossless)?;
    ensure_dir(out_dir)?;
    let mut written = Vec::new();
    let mut pairs = Vec::new();
    for (lossy, ideal) in &results {
        let label = lossy.chemistry_pair.label();
        let path = out_dir.join(format!("sweep_{label}.csv"));
        write_csv(&path, &lossy.points.iter().map(SweepRow::of).collect::<Vec<_>>())?;
        written.push(path);
        let mut summary = PairSummary::of(lossy);
        if let Some(ideal) = ideal {
            let path = out_dir.join(format!("sweep_{label}_lossless.csv"));
            write_csv(&path, &ideal.points.iter().map(SweepRow::of).collect::<Vec<_>>())?;
            written.push(path);
            summary.lossless = Some(lossless_summary(ideal));
        }
        pairs.push(summary);
    }
    let cycle = &results[0].0.best.totals;
    let summary = SweepSummary {
        objective: cfg.objective.name().into(),
        eta_dc: cfg.eta_dc,
        cycle_distance_km: cycle.distance_km,
        cycle_duration_s: cycle.duration_s,
        pairs,
    };
    let path = out_dir.join("summary.json");
    write_json(&path, &summary)?;
    written.push(path);
    Ok(written)
}

/// Writes `density.csv`: every sweep point, one reference row per chemistry,
/// and the ideal-converter optima when that experiment is enabled.
pub fn cmd_density(cfg: &RunConfig, out_dir: &Path) -> Result<PathBuf> {
    let lossless = cfg.experiment.lossless_dcdc;
    let results = run_sweeps(cfg, lossless)?;
    let mut rows = Vec::new();
    for (lossy, ideal) in &results {
        rows.extend(density_rows(lossy));
        if let Some(ideal) = ideal {
            let d = &ideal.best.design;
            rows.push(DensityRow {
                pair: ideal.chemistry_pair.label(),
                kind: DensityKind::LosslessOptimum,
                gamma: Some(ideal.best.gamma),
                feasible: true,
                energy_density_wh_kg: d.energy_density_wh_kg,
                power_density_w_kg: d.power_density_w_kg,
                optimum: true,
            });
        }
    }
    for (id, _) in &cfg.cells {
        let cell = cfg.cell(id)?;
        rows.push(DensityRow {
            pair: id.clone(),
            kind: DensityKind::Reference,
            gamma: None,
            feasible: true,
            energy_density_wh_kg: cell.energy_density,
            power_density_w_kg: cell.power_density,
            optimum: false,
        });
    }
    ensure_dir(out_dir)?;
    let path = out_dir.join("density.csv");
    write_csv(&path, &rows)?;
    Ok(path)
}
