use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfunction::GParams;

/// Treatment of the two edge nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Re-impose `φ` at both edges after every step.
    #[default]
    ClampPhi,
    /// Extrapolate the edges linearly from the two nearest interior nodes.
    LinearExtrapolate,
}

#[derive(Debug, Clone, Deserialize)]
struct RawSolverConfig {
    x_range: [f64; 2],
    dx: f64,
    #[serde(default)]
    dt: Option<f64>,
    t_final: f64,
    #[serde(default)]
    boundary: Boundary,
}

#[derive(Debug, Clone, Serialize)]
struct RawSolverConfigOut {
    x_range: [f64; 2],
    dx: f64,
    dt: f64,
    t_final: f64,
    boundary: Boundary,
}

/// Space-time grid for [`solve`](super::solve).
///
/// When read from JSON, `dt` may be omitted; the largest stable step that
/// divides `t_final` is then chosen once the generator is known (see
/// [`SolverConfig::resolve_dt`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSolverConfig", into = "RawSolverConfigOut")]
pub struct SolverConfig {
    pub x_lo: f64,
    pub x_hi: f64,
    pub dx: f64,
    /// `0.0` until resolved.
    pub dt: f64,
    pub t_final: f64,
    pub boundary: Boundary,
}

impl From<SolverConfig> for RawSolverConfigOut {
    fn from(c: SolverConfig) -> Self {
        Self {
            x_range: [c.x_lo, c.x_hi],
            dx: c.dx,
            dt: c.dt,
            t_final: c.t_final,
            boundary: c.boundary,
        }
    }
}

impl TryFrom<RawSolverConfig> for SolverConfig {
    type Error = Error;

    fn try_from(raw: RawSolverConfig) -> Result<Self> {
        let cfg = Self {
            x_lo: raw.x_range[0],
            x_hi: raw.x_range[1],
            dx: raw.dx,
            dt: raw.dt.unwrap_or(0.0),
            t_final: raw.t_final,
            boundary: raw.boundary,
        };
        cfg.check_shape()?;
        Ok(cfg)
    }
}

/// Relative slack when comparing grid ratios to integers.
const INTEGER_TOL: f64 = 1e-9;

fn near_integer(v: f64) -> Option<usize> {
    let r = v.round();
    ((v - r).abs() <= INTEGER_TOL * v.abs().max(1.0) && r >= 0.0).then_some(r as usize)
}

/// Number of uniform steps of size at most `dt_max` covering `duration`.
pub(crate) fn step_count(duration: f64, dt_max: f64) -> usize {
    if duration <= 0.0 {
        return 0;
    }
    (duration / dt_max * (1.0 - INTEGER_TOL)).ceil().max(1.0) as usize
}

impl SolverConfig {
    /// Explicit configuration; validated against `gp` (CFL included).
    pub fn new(
        gp: &GParams,
        x_range: (f64, f64),
        dx: f64,
        dt: f64,
        t_final: f64,
        boundary: Boundary,
    ) -> Result<Self> {
        let cfg = Self {
            x_lo: x_range.0,
            x_hi: x_range.1,
            dx,
            dt,
            t_final,
            boundary,
        };
        cfg.validate(gp)?;
        Ok(cfg)
    }

    /// Picks the largest `dt` satisfying the CFL bound with `t_final / dt` integral.
    pub fn with_cfl(
        gp: &GParams,
        x_range: (f64, f64),
        dx: f64,
        t_final: f64,
        boundary: Boundary,
    ) -> Result<Self> {
        let mut cfg = Self {
            x_lo: x_range.0,
            x_hi: x_range.1,
            dx,
            dt: 0.0,
            t_final,
            boundary,
        };
        cfg.check_shape()?;
        cfg.dt = t_final / step_count(t_final, cfg.cfl_bound(gp)) as f64;
        cfg.validate(gp)?;
        Ok(cfg)
    }

    /// Symmetric domain wide enough that boundary influence at the origin is
    /// negligible: `x_hi = -x_lo ≥ 6·σ̄·√T + |μ|·T`, rounded out to whole cells.
    pub fn symmetric_for(gp: &GParams, dx: f64, t_final: f64, boundary: Boundary) -> Result<Self> {
        let need = Self::required_half_width(gp, t_final);
        let cells = (need / dx - INTEGER_TOL).ceil().max(4.0);
        let half = cells * dx;
        Self::with_cfl(gp, (-half, half), dx, t_final, boundary)
    }

    pub fn required_half_width(gp: &GParams, t_final: f64) -> f64 {
        6.0 * gp.sigma_hi() * t_final.sqrt() + gp.mu_abs_max() * t_final
    }

    /// `dx² / (σ̄² + dx·max|μ|)`.
    pub fn cfl_bound(&self, gp: &GParams) -> f64 {
        self.dx * self.dx / (gp.sig2_hi() + self.dx * gp.mu_abs_max())
    }

    /// Fills in `dt` from the CFL bound if it was left unset.
    pub fn resolve_dt(mut self, gp: &GParams) -> Result<Self> {
        if self.dt == 0.0 {
            self.dt = self.t_final / step_count(self.t_final, self.cfl_bound(gp)) as f64;
        }
        self.validate(gp)?;
        Ok(self)
    }

    fn check_shape(&self) -> Result<()> {
        let finite = [self.x_lo, self.x_hi, self.dx, self.dt, self.t_final]
            .iter()
            .all(|v| v.is_finite());
        if !finite
            || self.x_lo >= self.x_hi
            || self.dx <= 0.0
            || self.t_final <= 0.0
            || self.dt < 0.0
        {
            return Err(Error::InvalidParams(format!(
                "malformed solver config {self:?}"
            )));
        }
        match near_integer((self.x_hi - self.x_lo) / self.dx) {
            Some(cells) if cells >= 8 => Ok(()),
            _ => Err(Error::InvalidParams(format!(
                "(x_hi - x_lo)/dx = {} must be an integer ≥ 8",
                (self.x_hi - self.x_lo) / self.dx
            ))),
        }
    }

    pub fn validate(&self, gp: &GParams) -> Result<()> {
        self.check_shape()?;
        if self.dt <= 0.0 {
            return Err(Error::InvalidParams("dt must be positive".into()));
        }
        if near_integer(self.t_final / self.dt).is_none() {
            return Err(Error::InvalidParams(format!(
                "t_final/dt = {} must be an integer",
                self.t_final / self.dt
            )));
        }
        let bound = self.cfl_bound(gp);
        if self.dt > bound * (1.0 + 1e-12) {
            return Err(Error::Cfl { dt: self.dt, bound });
        }
        Ok(())
    }

    pub fn num_nodes(&self) -> usize {
        near_integer((self.x_hi - self.x_lo) / self.dx).expect("validated") + 1
    }

    pub fn num_steps(&self) -> usize {
        near_integer(self.t_final / self.dt).expect("validated")
    }

    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        self.x_lo + j as f64 * self.dx
    }

    /// Same spatial grid and time step, halved `dx` and quartered `dt`.
    pub fn refined(&self, gp: &GParams) -> Result<Self> {
        Self::new(
            gp,
            (self.x_lo, self.x_hi),
            self.dx / 2.0,
            self.dt / 4.0,
            self.t_final,
            self.boundary,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cfl_choice() {
        let gp = GParams::new(-0.5, 0.5, 1.0, 4.0).unwrap();
        let cfg = SolverConfig::symmetric_for(&gp, 0.02, 1.0, Boundary::ClampPhi).unwrap();
        assert!(cfg.dt <= cfg.cfl_bound(&gp));
        assert!(cfg.x_hi >= 12.5);
        assert_eq!(
            cfg.num_nodes(),
            ((cfg.x_hi - cfg.x_lo) / 0.02).round() as usize + 1
        );
    }

    #[test]
    fn rejects_cfl_violation() {
        let gp = GParams::degenerate(0.0, 1.0).unwrap();
        let err = SolverConfig::new(&gp, (-1.0, 1.0), 0.1, 0.02, 1.0, Boundary::ClampPhi);
        assert!(matches!(err, Err(Error::Cfl { .. })));
    }

    #[test]
    fn rejects_bad_shapes() {
        let gp = GParams::degenerate(0.0, 1.0).unwrap();
        assert!(SolverConfig::new(&gp, (-1.0, 1.0), 0.3, 0.01, 1.0, Boundary::ClampPhi).is_err());
        assert!(SolverConfig::new(&gp, (-0.1, 0.1), 0.05, 0.001, 1.0, Boundary::ClampPhi).is_err());
        assert!(SolverConfig::new(&gp, (-1.0, 1.0), 0.1, 0.003, 1.0, Boundary::ClampPhi).is_err());
    }

    #[test]
    fn json_with_auto_dt() {
        let gp = GParams::degenerate(0.0, 1.0).unwrap();
        let cfg: SolverConfig = serde_json::from_str(
            r#"{"x_range": [-6, 6], "dx": 0.02, "t_final": 1, "boundary": "clamp_phi"}"#,
        )
        .unwrap();
        let cfg = cfg.resolve_dt(&gp).unwrap();
        assert_eq!(cfg.num_steps(), 2500);
    }
}
