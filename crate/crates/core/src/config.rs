//! Run configuration: a TOML document naming cell files, the drive cycle,
//! vehicle parameters and solver settings.
//!
//! Relative paths resolve against the directory holding the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cell::CellParams;
use crate::drivetrain::{load_cycle, DriveCycle, VehicleParams};
use crate::error::{Error, Result};
use crate::powersplit::{InitialState, SimConfig, SolverConfig, ThermalConfig};
use crate::sizing::{uniform_grid, ObjectiveSpec, SweepSetup};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaGrid {
    /// Uniform point count on [0, 1]; ignored when `values` is given.
    #[serde(default = "default_gamma_points")]
    pub points: usize,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
}

fn default_gamma_points() -> usize {
    51
}

impl Default for GammaGrid {
    fn default() -> Self {
        Self {
            points: default_gamma_points(),
            values: None,
        }
    }
}

impl GammaGrid {
    pub fn values(&self) -> Vec<f64> {
        self.values.clone().unwrap_or_else(|| uniform_grid(self.points))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub lossless_dcdc: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleConfig {
    pub path: PathBuf,
    /// Resampling step [s]; the file's own step when absent.
    #[serde(default)]
    pub dt: Option<f64>,
    /// Number of back-to-back repetitions of the file.
    #[serde(default = "one")]
    pub repeat: usize,
}

fn one() -> usize {
    1
}

fn default_eta_dc() -> f64 {
    0.98
}

fn default_e_tot() -> f64 {
    60_000.0
}

fn default_v_design() -> f64 {
    400.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    pub cycle: CycleConfig,
    /// Chemistry id to cell parameter file.
    pub cells: BTreeMap<String, PathBuf>,
    /// Pairs as `<high-energy>-<high-power>`, e.g. `nca-nmc`.
    pub pairs: Vec<String>,
    #[serde(default = "default_e_tot")]
    pub e_tot_wh: f64,
    #[serde(default = "default_v_design")]
    pub v_design_v: f64,
    #[serde(default = "default_eta_dc")]
    pub eta_dc: f64,
    pub vehicle: VehicleParams,
    #[serde(default = "energy")]
    pub objective: ObjectiveSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub thermal: ThermalConfig,
    #[serde(default)]
    pub initial: InitialState,
    #[serde(default)]
    pub gamma: GammaGrid,
    #[serde(default)]
    pub experiment: ExperimentConfig,
}

fn energy() -> ObjectiveSpec {
    ObjectiveSpec::Energy
}

/// Parsed `<he>-<hp>` pair of chemistry ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSpec {
    pub he: String,
    pub hp: String,
}

impl PairSpec {
    pub fn parse(s: &str) -> Result<Self> {
        match s.split_once('-') {
            Some((he, hp)) if !he.is_empty() && !hp.is_empty() => Ok(Self {
                he: he.to_ascii_lowercase(),
                hp: hp.to_ascii_lowercase(),
            }),
            _ => Err(Error::Config(format!(
                "pair `{s}` must look like `<high-energy>-<high-power>`, e.g. `nca-nmc`"
            ))),
        }
    }

    pub fn label(&self) -> String {
        format!("{}-{}", self.he, self.hp)
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base_dir.join(p) };
        cfg.output_dir = resolve(&cfg.output_dir);
        cfg.cycle.path = resolve(&cfg.cycle.path);
        for path in cfg.cells.values_mut() {
            *path = resolve(path);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_toml_str(&text, base)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.pairs.is_empty() {
            return bad("`pairs` is empty; list at least one pair such as \"nca-nmc\"".into());
        }
        for p in &self.pairs {
            let pair = PairSpec::parse(p)?;
            for id in [&pair.he, &pair.hp] {
                if !self.cells.contains_key(id) {
                    return bad(format!("pair `{p}` uses chemistry `{id}` with no entry in [cells]"));
                }
            }
        }
        for (id, path) in &self.cells {
            if !path.is_file() {
                return bad(format!("cell parameter file for `{id}` not found: {}", path.display()));
            }
        }
        if !self.cycle.path.is_file() {
            return bad(format!("drive cycle not found: {}", self.cycle.path.display()));
        }
        if self.cycle.repeat == 0 {
            return bad("cycle.repeat must be at least 1".into());
        }
        if !(self.e_tot_wh > 0.0) {
            return bad(format!("e_tot_wh must be positive, got {}", self.e_tot_wh));
        }
        if !(self.v_design_v > 0.0) {
            return bad(format!("v_design_v must be positive, got {}", self.v_design_v));
        }
        if !(self.eta_dc > 0.0 && self.eta_dc <= 1.0) {
            return bad(format!("eta_dc must lie in (0, 1], got {}", self.eta_dc));
        }
        if self.solver.u_grid_points < 3 {
            return bad("solver.u_grid_points must be at least 3".into());
        }
        if !(self.solver.u_tol_w > 0.0) {
            return bad("solver.u_tol_w must be positive".into());
        }
        for (name, soc) in [("soc0_hp", self.initial.soc0_hp), ("soc0_he", self.initial.soc0_he)] {
            if !(soc > crate::cell::SOC_FLOOR && soc <= 1.0) {
                return bad(format!("initial.{name} must lie in ({}, 1], got {soc}", crate::cell::SOC_FLOOR));
            }
        }
        if let ObjectiveSpec::Tco(econ) = &self.objective {
            if !(econ.j_q >= 0.0 && econ.d_l > 0.0) {
                return bad("objective: tco needs j_q >= 0 and d_l > 0".into());
            }
        }
        let grid = self.gamma.values();
        if grid.is_empty() {
            return bad("gamma grid is empty".into());
        }
        if grid.iter().any(|g| !(0.0..=1.0).contains(g)) || grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad("gamma values must be strictly increasing within [0, 1]".into());
        }
        self.vehicle
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn pair_specs(&self) -> Result<Vec<PairSpec>> {
        self.pairs.iter().map(|p| PairSpec::parse(p)).collect()
    }

    pub fn cell(&self, id: &str) -> Result<CellParams> {
        let path = self
            .cells
            .get(id)
            .ok_or_else(|| Error::Config(format!("no cell parameter file for chemistry `{id}`")))?;
        CellParams::load(path)
    }

    pub fn load_cycle(&self) -> Result<DriveCycle> {
        load_cycle(&self.cycle.path, self.cycle.dt)?.repeated(self.cycle.repeat)
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            solver: self.solver,
            thermal: self.thermal,
        }
    }

    pub fn sweep_setup(&self) -> Result<SweepSetup> {
        Ok(SweepSetup {
            cycle: self.load_cycle()?,
            vehicle: self.vehicle.clone(),
            e_tot: self.e_tot_wh,
            v_design: self.v_design_v,
            eta_dc: self.eta_dc,
            objective: self.objective,
            init: self.initial,
            sim: self.sim_config(),
        })
    }
}
