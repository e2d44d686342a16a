use std::io::Write;

use serde::Serialize;

use super::config::{step_count, Boundary, SolverConfig};
use crate::error::{Error, Result};
use crate::gfunction::GParams;
use crate::par;
use crate::scenario::TestFunction;

/// Grid values of `v(t, ·)` together with the configuration that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunction {
    pub values: Vec<f64>,
    pub t: f64,
    pub config: SolverConfig,
}

#[derive(Serialize)]
struct CsvRow {
    x: f64,
    v: f64,
}

impl ValueFunction {
    pub fn x(&self, j: usize) -> f64 {
        self.config.node(j)
    }

    /// Sup-norm distance over interior nodes.
    pub fn interior_distance(&self, other: &Self) -> f64 {
        let n = self.values.len().min(other.values.len());
        (1..n.saturating_sub(1))
            .map(|j| (self.values[j] - other.values[j]).abs())
            .fold(0.0, f64::max)
    }

    /// Writes `x,v` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for (j, &v) in self.values.iter().enumerate() {
            w.serialize(CsvRow { x: self.x(j), v })?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Solves `∂ₜv = G(∂ₓv, ∂²ₓₓv)` from `v(0, ·) = φ` up to `cfg.t_final`.
///
/// Each explicit step takes, node by node, the maximum over the four
/// corners `(q, σ²)` of `q·D_q v + ½σ²·D² v`, where `D²` is the centred
/// second difference. `D_q` is the centred first difference when
/// `dx·max|μ| ≤ σ̲²` and otherwise the one-sided difference upwinded on the
/// sign of `q`. Under the CFL bound every corner operator is monotone, so
/// their maximum is too.
pub fn solve(gp: &GParams, phi: &TestFunction, cfg: &SolverConfig) -> Result<ValueFunction> {
    if phi.dim() != 1 {
        return Err(Error::FunctionDimension {
            function: phi.dim(),
            set: 1,
        });
    }
    cfg.validate(gp)?;
    let initial: Vec<f64> = (0..cfg.num_nodes())
        .map(|j| phi.eval1(cfg.node(j)))
        .collect();
    let edges = (initial[0], initial[initial.len() - 1]);
    let values = march(gp, initial, edges, cfg, cfg.num_steps(), cfg.dt)?;
    Ok(ValueFunction {
        values,
        t: cfg.t_final,
        config: cfg.clone(),
    })
}

/// Continues an existing profile for `duration` more time units.
///
/// Uses the smallest number of uniform steps no longer than `cfg.dt`.
/// Clamped edges keep the values they hold in `start`.
pub fn solve_from(gp: &GParams, start: &ValueFunction, duration: f64) -> Result<ValueFunction> {
    let cfg = &start.config;
    cfg.validate(gp)?;
    let steps = step_count(duration, cfg.dt);
    let dt = if steps == 0 {
        0.0
    } else {
        duration / steps as f64
    };
    let edges = (start.values[0], start.values[start.values.len() - 1]);
    let values = march(gp, start.values.clone(), edges, cfg, steps, dt)?;
    Ok(ValueFunction {
        values,
        t: start.t + duration,
        config: cfg.clone(),
    })
}

/// Central drift differences keep every corner operator monotone once
/// `dx·|q| ≤ σ²` holds at all four corners; otherwise drift is upwinded.
pub(crate) fn centred_drift(gp: &GParams, dx: f64) -> bool {
    dx * gp.mu_abs_max() <= gp.sig2_lo()
}

fn march(
    gp: &GParams,
    mut v: Vec<f64>,
    edges: (f64, f64),
    cfg: &SolverConfig,
    steps: usize,
    dt: f64,
) -> Result<Vec<f64>> {
    let n = v.len();
    let corners = gp.corners();
    let inv_dx = 1.0 / cfg.dx;
    let inv_dx2 = inv_dx * inv_dx;
    let centred = centred_drift(gp, cfg.dx);
    let mut next = v.clone();
    for step in 0..steps {
        let cur = &v;
        par::fill_indexed(&mut next[1..n - 1], |k| {
            let j = k + 1;
            let (left, mid, right) = (cur[j - 1], cur[j], cur[j + 1]);
            let second = (right - 2.0 * mid + left) * inv_dx2;
            let forward = (right - mid) * inv_dx;
            let backward = (mid - left) * inv_dx;
            let central = 0.5 * (right - left) * inv_dx;
            let rate = corners
                .iter()
                .map(|&(q, s2)| {
                    let drift = if centred {
                        q * central
                    } else if q > 0.0 {
                        q * forward
                    } else if q < 0.0 {
                        q * backward
                    } else {
                        0.0
                    };
                    drift + 0.5 * s2 * second
                })
                .fold(f64::NEG_INFINITY, f64::max);
            mid + dt * rate
        });
        match cfg.boundary {
            Boundary::ClampPhi => {
                next[0] = edges.0;
                next[n - 1] = edges.1;
            }
            Boundary::LinearExtrapolate => {
                next[0] = 2.0 * next[1] - next[2];
                next[n - 1] = 2.0 * next[n - 2] - next[n - 3];
            }
        }
        if let Some(node) = next.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { step, node });
        }
        std::mem::swap(&mut v, &mut next);
    }
    Ok(v)
}

/// Piecewise-linear interpolation of the grid values at `x`.
pub fn value_at(vf: &ValueFunction, x: f64) -> Result<f64> {
    let cfg = &vf.config;
    if !(x >= cfg.x_lo && x <= cfg.x_hi) {
        return Err(Error::OutOfGrid {
            x,
            lo: cfg.x_lo,
            hi: cfg.x_hi,
        });
    }
    let t = (x - cfg.x_lo) / cfg.dx;
    let j = (t.floor() as usize).min(vf.values.len() - 2);
    let frac = t - j as f64;
    if frac == 0.0 {
        return Ok(vf.values[j]);
    }
    Ok((1.0 - frac) * vf.values[j] + frac * vf.values[j + 1])
}

/// Flow-property discrepancy behind the G-normal scaling identity.
///
/// `(aX + bX̄, a²Y + b²Ȳ)` has the law of `(√(a²+b²)X, (a²+b²)Y)` exactly when
/// evolving `φ` for `b²`, then restarting from that profile for `a²`, agrees
/// with a single evolution for `a² + b²`. Returns the interior sup-norm of
/// the difference.
pub fn semigroup_check(
    gp: &GParams,
    phi: &TestFunction,
    a: f64,
    b: f64,
    cfg: &SolverConfig,
) -> Result<f64> {
    if !(a >= 0.0 && b >= 0.0) {
        return Err(Error::InvalidParams(format!("need a, b ≥ 0, got {a}, {b}")));
    }
    let total = a * a + b * b;
    if total > cfg.t_final * (1.0 + 1e-12) {
        return Err(Error::InvalidParams(format!(
            "a² + b² = {total} exceeds t_final = {}",
            cfg.t_final
        )));
    }
    if phi.dim() != 1 {
        return Err(Error::FunctionDimension {
            function: phi.dim(),
            set: 1,
        });
    }
    cfg.validate(gp)?;
    let initial = ValueFunction {
        values: (0..cfg.num_nodes())
            .map(|j| phi.eval1(cfg.node(j)))
            .collect(),
        t: 0.0,
        config: cfg.clone(),
    };
    let single = solve_from(gp, &initial, total)?;
    let inner = solve_from(gp, &initial, b * b)?;
    let two_stage = solve_from(gp, &inner, a * a)?;
    Ok(two_stage.interior_distance(&single))
}
