//! Per-step minimization of the Hamiltonian over the feasible window.
//!
//! A uniform grid locates the best bracket (the cost need not be unimodal near
//! constraint corners), then golden-section search refines inside it.

use serde::{Deserialize, Serialize};

use super::cost::{hamiltonian, Costates, Objective};
use super::domain::{feasible_domain, SplitContext};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub u_grid_points: usize,
    pub u_tol_w: f64,
    pub costate_lambda1: f64,
    pub costate_lambda2: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            u_grid_points: 200,
            u_tol_w: 0.1,
            costate_lambda1: 0.0,
            costate_lambda2: 0.0,
        }
    }
}

impl SolverConfig {
    pub fn costates(&self) -> Costates {
        Costates {
            lambda1: self.costate_lambda1,
            lambda2: self.costate_lambda2,
        }
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimization of `f` on `[a, b]` down to width `tol`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Minimizer of the Hamiltonian over the feasible converter-power window.
///
/// Ties resolve to the smallest `u`.
pub fn optimal_u(
    ctx: &SplitContext,
    p_em: f64,
    objective: &Objective,
    costates: &Costates,
    cfg: &SolverConfig,
) -> Result<f64> {
    let domain = feasible_domain(ctx, p_em)?;
    let h = |u: f64| hamiltonian(ctx, costates, u, p_em, objective).unwrap_or(f64::INFINITY);
    if domain.width() <= cfg.u_tol_w {
        let (a, b) = (h(domain.lo), h(domain.hi));
        return Ok(if b < a { domain.hi } else { domain.lo });
    }

    let n = cfg.u_grid_points.max(3);
    let step = domain.width() / (n - 1) as f64;
    let grid_u = |k: usize| {
        if k == n - 1 {
            domain.hi
        } else {
            domain.lo + k as f64 * step
        }
    };
    let mut best_k = 0;
    let mut best_h = f64::INFINITY;
    for k in 0..n {
        let hk = h(grid_u(k));
        if hk < best_h {
            best_h = hk;
            best_k = k;
        }
    }
    let a = grid_u(best_k.saturating_sub(1));
    let b = grid_u((best_k + 1).min(n - 1));
    let (u_g, h_g) = golden_section(h, a, b, cfg.u_tol_w);
    let mut candidates = vec![(grid_u(best_k), best_h), (u_g, h_g)];
    // the converter loss has a kink at u = 0 that the smooth search can miss
    if domain.contains(0.0) {
        candidates.push((0.0, h(0.0)));
    }
    let best = candidates
        .into_iter()
        .min_by(|x, y| x.1.total_cmp(&y.1).then(x.0.total_cmp(&y.0)))
        .expect("non-empty");
    Ok(best.0)
}
