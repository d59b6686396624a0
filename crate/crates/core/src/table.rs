//! Breakpoint tables with linear interpolation and boundary clamping.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint {
    pub breakpoint: f64,
    pub value: f64,
}

/// One-dimensional table, clamped outside its breakpoint range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Breakpoint>", into = "Vec<Breakpoint>")]
pub struct Table1D {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Table1D {
    pub fn new(points: Vec<Breakpoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("table needs at least one breakpoint".into()));
        }
        let mut xs = Vec::with_capacity(points.len());
        let mut ys = Vec::with_capacity(points.len());
        for p in &points {
            if !p.breakpoint.is_finite() || !p.value.is_finite() {
                return Err(Error::InvalidParameter("non-finite table entry".into()));
            }
            if let Some(&last) = xs.last() {
                if p.breakpoint <= last {
                    return Err(Error::InvalidParameter(format!(
                        "table breakpoints must be strictly increasing ({} after {last})",
                        p.breakpoint
                    )));
                }
            }
            xs.push(p.breakpoint);
            ys.push(p.value);
        }
        Ok(Self { xs, ys })
    }

    pub fn constant(value: f64) -> Self {
        Self {
            xs: vec![0.0],
            ys: vec![value],
        }
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(breakpoint, value)| Breakpoint { breakpoint, value })
                .collect(),
        )
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if n == 1 || x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        // first index with xs[i] > x; guaranteed in 1..n
        let i = self.xs.partition_point(|&b| b <= x);
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (y0, y1) = (self.ys[i - 1], self.ys[i]);
        if x == x0 {
            return y0;
        }
        let w = (x - x0) / (x1 - x0);
        y0 + w * (y1 - y0)
    }

    pub fn min_value(&self) -> f64 {
        self.ys.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }
}

impl TryFrom<Vec<Breakpoint>> for Table1D {
    type Error = Error;

    fn try_from(points: Vec<Breakpoint>) -> Result<Self> {
        Table1D::new(points)
    }
}

impl From<Table1D> for Vec<Breakpoint> {
    fn from(t: Table1D) -> Self {
        t.xs.into_iter()
            .zip(t.ys)
            .map(|(breakpoint, value)| Breakpoint { breakpoint, value })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub temp: f64,
    pub points: Table1D,
}

/// Table over (soc, temperature): one soc row per temperature breakpoint.
///
/// Evaluation interpolates each row in soc, then across temperature. When
/// every row shares the same soc breakpoints this is bilinear interpolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<TableRow>", into = "Vec<TableRow>")]
pub struct Table2D {
    rows: Vec<TableRow>,
}

impl Table2D {
    pub fn new(rows: Vec<TableRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParameter("2-D table needs at least one row".into()));
        }
        for w in rows.windows(2) {
            if w[1].temp <= w[0].temp {
                return Err(Error::InvalidParameter(
                    "2-D table temperatures must be strictly increasing".into(),
                ));
            }
        }
        Ok(Self { rows })
    }

    pub fn constant(value: f64) -> Self {
        Self {
            rows: vec![TableRow {
                temp: 25.0,
                points: Table1D::constant(value),
            }],
        }
    }

    pub fn eval(&self, soc: f64, temp: f64) -> f64 {
        let n = self.rows.len();
        if n == 1 || temp <= self.rows[0].temp {
            return self.rows[0].points.eval(soc);
        }
        if temp >= self.rows[n - 1].temp {
            return self.rows[n - 1].points.eval(soc);
        }
        let i = self.rows.partition_point(|r| r.temp <= temp);
        let (lo, hi) = (&self.rows[i - 1], &self.rows[i]);
        let y0 = lo.points.eval(soc);
        if temp == lo.temp {
            return y0;
        }
        let w = (temp - lo.temp) / (hi.temp - lo.temp);
        y0 + w * (hi.points.eval(soc) - y0)
    }

    pub fn min_value(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.points.min_value())
            .fold(f64::INFINITY, f64::min)
    }
}

impl TryFrom<Vec<TableRow>> for Table2D {
    type Error = Error;

    fn try_from(rows: Vec<TableRow>) -> Result<Self> {
        Table2D::new(rows)
    }
}

impl From<Table2D> for Vec<TableRow> {
    fn from(t: Table2D) -> Self {
        t.rows
    }
}
