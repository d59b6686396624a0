use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("open-circuit voltage pole: soc {soc} leaves no remaining capacity")]
    OcvPole { soc: f64 },

    #[error("power {power:.3} W exceeds cell capability (max deliverable {max_power:.3} W)")]
    PowerExceedsCapability { power: f64, max_power: f64 },

    #[error("infeasible step{}: motor demand {p_em:.1} W, converter window [{u_lo:.1}, {u_hi:.1}] W", step_suffix(.step))]
    InfeasibleStep {
        step: Option<usize>,
        p_em: f64,
        u_lo: f64,
        u_hi: f64,
    },

    #[error("{pack} pack depleted at step {step}: soc {soc:.4} below floor {floor}")]
    Depletion {
        pack: &'static str,
        step: usize,
        soc: f64,
        floor: f64,
    },

    #[error("explicit thermal step unstable: dt {dt} s must stay below {limit:.3} s")]
    ThermalInstability { dt: f64, limit: f64 },

    #[error("design at gamma {gamma} violates the motor power constraint ({p_em_max:.0} W > {p_available:.0} W)")]
    InfeasibleDesign {
        gamma: f64,
        p_em_max: f64,
        p_available: f64,
    },

    #[error("no feasible design on the gamma grid for pair {pair}")]
    NoFeasibleDesign { pair: String },

    #[error("{}:{line}: {msg}", .path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn step_suffix(step: &Option<usize>) -> String {
    step.map(|s| format!(" at step {s}")).unwrap_or_default()
}

impl Error {
    /// Stable machine-readable tag used in the CLI error document.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::OcvPole { .. } => "ocv_pole",
            Error::PowerExceedsCapability { .. } => "power_exceeds_capability",
            Error::InfeasibleStep { .. } => "infeasible_step",
            Error::Depletion { .. } => "depletion",
            Error::ThermalInstability { .. } => "thermal_instability",
            Error::InfeasibleDesign { .. } => "infeasible_design",
            Error::NoFeasibleDesign { .. } => "no_feasible_design",
            Error::Parse { .. } => "parse",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
        }
    }

    /// CLI exit status: 1 usage/config, 2 infeasible, 3 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::InvalidParameter(_) | Error::Config(_) | Error::Io { .. } => 1,
            Error::InfeasibleStep { .. }
            | Error::Depletion { .. }
            | Error::InfeasibleDesign { .. }
            | Error::NoFeasibleDesign { .. } => 2,
            Error::OcvPole { .. }
            | Error::PowerExceedsCapability { .. }
            | Error::ThermalInstability { .. } => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
