//! Drive-cycle ingestion and the quasi-static backward road-load model.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::Table2D;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveCycle {
    pub dt: f64,
    pub speed: Vec<f64>,
    pub distance_km: f64,
}

impl DriveCycle {
    pub fn new(dt: f64, speed: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("cycle dt must be positive, got {dt}")));
        }
        if speed.len() < 2 {
            return Err(Error::InvalidParameter("cycle needs at least two samples".into()));
        }
        if let Some(v) = speed.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("negative or non-finite speed {v}")));
        }
        let distance_m: f64 = speed.windows(2).map(|w| 0.5 * (w[0] + w[1]) * dt).sum();
        Ok(Self {
            dt,
            speed,
            distance_km: distance_m / 1000.0,
        })
    }

    pub fn steps(&self) -> usize {
        self.speed.len() - 1
    }

    pub fn duration(&self) -> f64 {
        self.steps() as f64 * self.dt
    }

    /// The cycle driven `n` times back to back.
    pub fn repeated(&self, n: usize) -> Result<Self> {
        let mut speed = self.speed.clone();
        for _ in 1..n {
            speed.extend_from_slice(&self.speed[1..]);
        }
        Self::new(self.dt, speed)
    }
}

/// Reads a `t_s,v_mps` CSV, resampling onto a uniform grid when needed.
///
/// `dt_expected` forces the output step; otherwise the first sample interval
/// is used.
pub fn load_cycle(path: &Path, dt_expected: Option<f64>) -> Result<DriveCycle> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::Io {
                path: path.to_path_buf(),
                source,
            },
            other => parse_err(1, format!("{other:?}")),
        })?;
    let headers = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    if headers.len() < 2 || &headers[0] != "t_s" || &headers[1] != "v_mps" {
        return Err(parse_err(1, format!("expected header `t_s,v_mps`, found `{}`", headers.iter().collect::<Vec<_>>().join(","))));
    }

    let mut times = Vec::new();
    let mut speeds = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 2 {
            return Err(parse_err(line, format!("expected 2 fields, found {}", record.len())));
        }
        let field = |i: usize, name: &str| -> Result<f64> {
            record[i]
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| parse_err(line, format!("invalid {name} `{}`", &record[i])))
        };
        let t = field(0, "t_s")?;
        let v = field(1, "v_mps")?;
        if v < 0.0 {
            return Err(parse_err(line, format!("negative speed {v}")));
        }
        if let Some(&prev) = times.last() {
            if t <= prev {
                return Err(parse_err(line, format!("time {t} not after {prev}")));
            }
        }
        times.push(t);
        speeds.push(v);
    }
    if times.len() < 2 {
        return Err(parse_err(0, "cycle needs at least two samples".into()));
    }

    let dt = dt_expected.unwrap_or(times[1] - times[0]);
    let uniform = times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.max(1.0));
    let speed = if uniform {
        speeds
    } else {
        resample(&times, &speeds, dt)
    };
    DriveCycle::new(dt, speed)
}

fn resample(times: &[f64], values: &[f64], dt: f64) -> Vec<f64> {
    let t0 = times[0];
    let n = ((times[times.len() - 1] - t0) / dt + 1e-9).floor() as usize;
    let mut out = Vec::with_capacity(n + 1);
    let mut j = 0;
    for k in 0..=n {
        let t = t0 + k as f64 * dt;
        while j + 2 < times.len() && times[j + 1] < t {
            j += 1;
        }
        let w = ((t - times[j]) / (times[j + 1] - times[j])).clamp(0.0, 1.0);
        out.push(values[j] + w * (values[j + 1] - values[j]));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MotorEfficiency {
    Constant(f64),
    /// Rows keyed by speed [m/s], points keyed by |shaft power| [W].
    Map(Table2D),
}

impl MotorEfficiency {
    pub fn eval(&self, speed: f64, p_shaft: f64) -> f64 {
        match self {
            MotorEfficiency::Constant(eta) => *eta,
            MotorEfficiency::Map(table) => table.eval(p_shaft.abs(), speed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleParams {
    pub m_base: f64,
    pub c_d: f64,
    pub a_f: f64,
    pub c_r: f64,
    pub rho_air: f64,
    pub g: f64,
    pub lambda_rot: f64,
    pub p_aux: f64,
    pub p_em_max: f64,
    pub eta_em: MotorEfficiency,
    pub regen_limit: f64,
}

impl VehicleParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("m_base", self.m_base),
            ("c_d", self.c_d),
            ("a_f", self.a_f),
            ("c_r", self.c_r),
            ("rho_air", self.rho_air),
            ("g", self.g),
            ("lambda_rot", self.lambda_rot),
            ("p_em_max", self.p_em_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::InvalidParameter(format!("vehicle.{name} must be positive, got {v}")));
            }
        }
        if !(self.p_aux >= 0.0) {
            return Err(Error::InvalidParameter("vehicle.p_aux must be non-negative".into()));
        }
        if let MotorEfficiency::Constant(eta) = self.eta_em {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::InvalidParameter(format!("vehicle.eta_em must lie in (0, 1], got {eta}")));
            }
        }
        if !(0.0..=1.0).contains(&self.regen_limit) {
            return Err(Error::InvalidParameter("vehicle.regen_limit must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Shaft power for speed `v` and acceleration `a`; negative while braking.
pub fn shaft_power(vehicle: &VehicleParams, mass_total: f64, v: f64, a: f64) -> f64 {
    let rolling = if v > 0.0 {
        mass_total * vehicle.g * vehicle.c_r
    } else {
        0.0
    };
    let inertia = vehicle.lambda_rot * mass_total * a;
    let aero = 0.5 * vehicle.rho_air * vehicle.c_d * vehicle.a_f * v * v;
    (inertia + rolling + aero) * v
}

pub fn electrical_power(p_shaft: f64, eta_em: f64, p_aux: f64, regen_limit: f64) -> f64 {
    if p_shaft >= 0.0 {
        p_shaft / eta_em + p_aux
    } else {
        p_shaft * eta_em * regen_limit + p_aux
    }
}

/// Motor-side demand over the cycle, one entry per sample interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerTrace {
    /// Interval-mean speed [m/s].
    pub v_mean: Vec<f64>,
    pub p_s_em: Vec<f64>,
    pub p_em: Vec<f64>,
    pub e_s_em: f64,
    pub e_l_em: f64,
    /// Set when the trace peak exceeds the rated motor power.
    pub exceeds_p_em_max: bool,
}

pub fn power_trace(cycle: &DriveCycle, vehicle: &VehicleParams, mass_total: f64) -> PowerTrace {
    let n = cycle.steps();
    let mut v_mean = Vec::with_capacity(n);
    let mut p_s_em = Vec::with_capacity(n);
    let mut p_em = Vec::with_capacity(n);
    let mut e_s_em = 0.0;
    let mut e_l_em = 0.0;
    for w in cycle.speed.windows(2) {
        let v = 0.5 * (w[0] + w[1]);
        let a = (w[1] - w[0]) / cycle.dt;
        let ps = shaft_power(vehicle, mass_total, v, a);
        let pe = electrical_power(ps, vehicle.eta_em.eval(v, ps), vehicle.p_aux, vehicle.regen_limit);
        e_s_em += ps * cycle.dt / 3600.0;
        e_l_em += (pe - ps) * cycle.dt / 3600.0;
        v_mean.push(v);
        p_s_em.push(ps);
        p_em.push(pe);
    }
    let exceeds_p_em_max = p_em.iter().any(|&p| p > vehicle.p_em_max);
    PowerTrace {
        v_mean,
        p_s_em,
        p_em,
        e_s_em,
        e_l_em,
        exceeds_p_em_max,
    }
}
