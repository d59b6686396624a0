//! Single-cell Rint equivalent circuit with an exponential-zone open-circuit
//! voltage curve.
//!
//! Currents are discharge-positive throughout. The discharged capacity that
//! drives the voltage curve is `It = (1 - soc) * q_eff(T)`, where `q_eff` is
//! the fitted effective capacity (the product of the capacity and its
//! dimensionless multiplier; only the product is ever used).

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{Table1D, Table2D};

/// Lowest soc fed to the voltage curve; keeps `q_eff - It` away from zero.
pub const SOC_FLOOR: f64 = 0.01;

/// Reference state for design-time limits.
pub const REFERENCE_TEMP_C: f64 = 25.0;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum ChemistryId {
    Nca,
    Nmc,
    Lfp,
    Lto,
    Custom(String),
}

impl From<String> for ChemistryId {
    fn from(s: String) -> Self {
        match s.to_ascii_lowercase().as_str() {
            "nca" => ChemistryId::Nca,
            "nmc" => ChemistryId::Nmc,
            "lfp" => ChemistryId::Lfp,
            "lto" => ChemistryId::Lto,
            _ => ChemistryId::Custom(s),
        }
    }
}

impl From<ChemistryId> for String {
    fn from(id: ChemistryId) -> Self {
        id.to_string()
    }
}

impl fmt::Display for ChemistryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChemistryId::Nca => f.write_str("nca"),
            ChemistryId::Nmc => f.write_str("nmc"),
            ChemistryId::Lfp => f.write_str("lfp"),
            ChemistryId::Lto => f.write_str("lto"),
            ChemistryId::Custom(name) => f.write_str(name),
        }
    }
}

/// Full electro-thermal-aging parameter set of one cell chemistry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellParams {
    pub chemistry_id: ChemistryId,
    /// V_0(T) [V]
    pub v0_table: Table1D,
    /// Polarization constant K(T) [V]. Fitted curves use K <= 0 so the
    /// voltage collapses towards full depletion.
    pub k_table: Table1D,
    /// Exponential-zone amplitude A(T) [V]
    pub a_table: Table1D,
    /// Exponential-zone constant B [1/Ah]
    pub b_const: f64,
    /// Effective capacity m*Q(T) [Ah]
    pub q_eff_table: Table1D,
    /// R_c(soc, T) [ohm]
    pub r_table: Table2D,
    pub q_nom: f64,
    pub v_c_max: f64,
    pub v_c_nom: f64,
    pub v_c_min: f64,
    pub i_c_max: f64,
    pub i_c_min: f64,
    pub m_c: f64,
    pub c_p_c: f64,
    /// Cell-to-coolant heat transfer coefficient [W/K]
    pub kappa_tot: f64,
    /// Cyclic aging prefactor [1/Ah]
    pub a_cy: f64,
    /// Cyclic aging current exponent [1/A]
    pub b_cy: f64,
    pub soh_eol: f64,
    pub cost_per_cell: f64,
    /// Datasheet energy density [Wh/kg], metadata only.
    pub energy_density: f64,
    /// Datasheet power density [W/kg], metadata only.
    pub power_density: f64,
}

impl CellParams {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let params: CellParams =
            toml::from_str(s).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        params.validate()?;
        Ok(params)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::InvalidParameter(msg) => Error::Parse {
                path: path.to_path_buf(),
                line: 0,
                msg,
            },
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(format!("{}: {msg}", self.chemistry_id)));
        if !(self.v_c_min < self.v_c_nom && self.v_c_nom < self.v_c_max) {
            return bad(format!(
                "voltage limits must satisfy v_c_min < v_c_nom < v_c_max (got {}, {}, {})",
                self.v_c_min, self.v_c_nom, self.v_c_max
            ));
        }
        if !(self.i_c_min <= 0.0 && self.i_c_max > 0.0) {
            return bad("current limits must satisfy i_c_min <= 0 < i_c_max".into());
        }
        if !(self.q_nom > 0.0 && self.m_c > 0.0 && self.c_p_c > 0.0) {
            return bad("q_nom, m_c and c_p_c must be positive".into());
        }
        if self.kappa_tot < 0.0 {
            return bad("kappa_tot must be non-negative".into());
        }
        if self.r_table.min_value() <= 0.0 {
            return bad("r_table values must be strictly positive".into());
        }
        if self.q_eff_table.min_value() <= 0.0 {
            return bad("q_eff_table values must be strictly positive".into());
        }
        if !(self.soh_eol > 0.0 && self.soh_eol < 1.0) {
            return bad("soh_eol must lie in (0, 1)".into());
        }
        if self.a_cy < 0.0 {
            return bad("a_cy must be non-negative".into());
        }
        Ok(())
    }

    /// Discharged capacity It [Ah] at the given soc.
    pub fn discharged_capacity(&self, soc: f64, temp: f64) -> f64 {
        (1.0 - soc) * self.q_eff_table.eval(temp)
    }

    /// Open-circuit voltage with soc clamped to `[SOC_FLOOR, 1]`.
    pub fn ocv(&self, soc: f64, temp: f64) -> f64 {
        self.ocv_eval(soc.clamp(SOC_FLOOR, 1.0), temp)
    }

    /// Open-circuit voltage without soc clamping; fails at or past the pole.
    pub fn ocv_exact(&self, soc: f64, temp: f64) -> Result<f64> {
        if soc <= 0.0 {
            return Err(Error::OcvPole { soc });
        }
        Ok(self.ocv_eval(soc.min(1.0), temp))
    }

    fn ocv_eval(&self, soc: f64, temp: f64) -> f64 {
        let q = self.q_eff_table.eval(temp);
        let it = (1.0 - soc) * q;
        self.v0_table.eval(temp)
            + self.k_table.eval(temp) * q / (q - it)
            + self.a_table.eval(temp) * (-self.b_const * it).exp()
    }

    pub fn internal_resistance(&self, soc: f64, temp: f64) -> f64 {
        self.r_table.eval(soc.clamp(0.0, 1.0), temp)
    }

    pub fn terminal_voltage(&self, soc: f64, current: f64, temp: f64) -> f64 {
        self.ocv(soc, temp) - self.internal_resistance(soc, temp) * current
    }

    pub fn current_from_power(&self, soc: f64, power: f64, temp: f64) -> Result<f64> {
        current_from_power(self.ocv(soc, temp), self.internal_resistance(soc, temp), power)
    }

    pub fn cell_loss_power(&self, soc: f64, current: f64, temp: f64) -> f64 {
        self.internal_resistance(soc, temp) * current * current
    }

    /// Stored energy of one cell at nominal voltage [Wh].
    pub fn nominal_energy(&self) -> f64 {
        self.v_c_nom * self.q_nom
    }
}

/// Physical root of `v_oc * i - r * i^2 = power`.
///
/// Uses the cancellation-free form `2P / (V + sqrt(V^2 - 4PR))`, which is the
/// smaller-magnitude root and tends to zero with the power.
pub fn current_from_power(v_oc: f64, r: f64, power: f64) -> Result<f64> {
    let disc = v_oc * v_oc - 4.0 * power * r;
    if disc < 0.0 {
        return Err(Error::PowerExceedsCapability {
            power,
            max_power: max_power(v_oc, r),
        });
    }
    let denom = v_oc + disc.sqrt();
    if denom <= 0.0 {
        return Err(Error::PowerExceedsCapability {
            power,
            max_power: max_power(v_oc, r),
        });
    }
    Ok(2.0 * power / denom)
}

/// Matched-load power `v_oc^2 / (4 r)`.
pub fn max_power(v_oc: f64, r: f64) -> f64 {
    v_oc * v_oc / (4.0 * r)
}
