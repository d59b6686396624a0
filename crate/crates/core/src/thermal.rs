//! Lumped-mass cell temperature with liquid cooling to ambient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalState {
    pub t_hp: f64,
    pub t_he: f64,
    pub t_amb: f64,
    /// Per-cell heat transfer coefficient [W/K].
    pub kappa_tot: f64,
}

pub fn cooling_power(kappa_tot: f64, t_c: f64, t_amb: f64) -> f64 {
    kappa_tot * (t_c - t_amb)
}

/// One explicit-Euler step of `m c_p dT/dt = P_l - kappa (T - T_amb)`.
pub fn step_temperature(
    t_c: f64,
    p_loss_cell: f64,
    dt: f64,
    m_c: f64,
    c_p: f64,
    kappa: f64,
    t_amb: f64,
) -> f64 {
    t_c + dt * (p_loss_cell - cooling_power(kappa, t_c, t_amb)) / (m_c * c_p)
}

pub fn time_constant(m_c: f64, c_p: f64, kappa: f64) -> f64 {
    m_c * c_p / kappa
}

/// Explicit Euler is stable for `dt < 2 m c_p / kappa`.
pub fn check_stability(dt: f64, m_c: f64, c_p: f64, kappa: f64) -> Result<()> {
    if kappa <= 0.0 {
        return Ok(());
    }
    let limit = 2.0 * time_constant(m_c, c_p, kappa);
    if dt >= limit {
        return Err(Error::ThermalInstability { dt, limit });
    }
    Ok(())
}
