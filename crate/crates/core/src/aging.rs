//! Cyclic capacity fade driven by cell current magnitude and throughput.
//!
//! `q_deg = a_cy * exp(|I| b_cy) * |It|` with `I` the cell current in A and
//! `It` the throughput in Ah. The normalized degradation divides by the fade
//! allowed until end of life, `(1 - soh_eol) * q0`, so it reaches 1 at EoL.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgingParams {
    pub a_cy: f64,
    pub b_cy: f64,
    pub soh_eol: f64,
    pub q0: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DegradationAccumulator {
    pub delta_deg: f64,
    pub q_deg: f64,
    pub it_abs: f64,
}

/// Normalized degradation rate per hour of operation at constant cell current.
///
/// Integrating over seconds divides by 3600.
pub fn degradation_rate(a_cy: f64, b_cy: f64, current: f64, soh_eol: f64, q0: f64) -> f64 {
    let i = current.abs();
    a_cy * (i * b_cy).exp() * i / ((1.0 - soh_eol) * q0)
}

impl DegradationAccumulator {
    pub fn accumulate(self, current: f64, dt: f64, params: &AgingParams) -> Self {
        let i = current.abs();
        let throughput = i * dt / 3600.0;
        let q_deg = params.a_cy * (i * params.b_cy).exp() * throughput;
        Self {
            delta_deg: self.delta_deg + q_deg / ((1.0 - params.soh_eol) * params.q0),
            q_deg: self.q_deg + q_deg,
            it_abs: self.it_abs + throughput,
        }
    }
}
