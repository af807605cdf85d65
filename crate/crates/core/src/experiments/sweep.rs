//! ε-sweeps and the rate report.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::config::RunConfig;
use super::fit::{loglog_fit, LineFit};
use crate::engine::{lower_value_estimate, upper_value_estimate};
use crate::error::{Error, Result};
use crate::game::PlanarGame;
use crate::solver::{solve_micro, InitialData, MicroGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RateMethod {
    GameUpper,
    GameLower,
    Pde,
}

impl RateMethod {
    pub fn name(self) -> &'static str {
        match self {
            RateMethod::GameUpper => "game-upper",
            RateMethod::GameLower => "game-lower",
            RateMethod::Pde => "pde",
        }
    }
}

impl fmt::Display for RateMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RateMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "game-upper" => Ok(RateMethod::GameUpper),
            "game-lower" => Ok(RateMethod::GameLower),
            "pde" => Ok(RateMethod::Pde),
            other => Err(Error::Parse(format!("unknown method '{other}' (expected game-upper|game-lower|pde)"))),
        }
    }
}

/// Values of `u^ε(T, 0)` across ε with their log-log fit.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub method: RateMethod,
    pub profile: String,
    /// `(ε, value)`, ε descending.
    pub pairs: Vec<(f64, f64)>,
    /// Grid spacing per pair (PDE runs only).
    pub spacing: Vec<f64>,
    /// `None` when fewer than three usable pairs exist.
    pub fit: Option<LineFit>,
    /// ε values left out of the fit as pre-asymptotic.
    pub trimmed: Vec<f64>,
    /// ε values whose run failed, with the error.
    pub failures: Vec<(f64, String)>,
}

impl RateReport {
    pub fn empty(method: RateMethod, profile: &str) -> Self {
        Self {
            method,
            profile: profile.to_string(),
            pairs: Vec::new(),
            spacing: Vec::new(),
            fit: None,
            trimmed: Vec::new(),
            failures: Vec::new(),
        }
    }

    /// `(min, max)` of `value/ε^{1/2}`.
    pub fn bracket(&self) -> Option<(f64, f64)> {
        self.pairs.iter().map(|(e, v)| v / e.sqrt()).fold(None, |acc, r| match acc {
            None => Some((r, r)),
            Some((lo, hi)) => Some((lo.min(r), hi.max(r))),
        })
    }

    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }
}

/// Fits `pairs` (ε descending), dropping the largest ε once if `R² < 0.98`
/// and at least four pairs remain.
pub fn fit_with_trimming(pairs: &[(f64, f64)]) -> Result<(LineFit, Vec<f64>)> {
    let fit = loglog_fit(pairs)?;
    if fit.r_squared < 0.98 && pairs.len() >= 4 {
        return Ok((loglog_fit(&pairs[1..])?, vec![pairs[0].0]));
    }
    Ok((fit, Vec::new()))
}

/// One point of a sweep: the value and, for PDE runs, the coarser spacing.
pub fn sweep_point(method: RateMethod, cfg: &RunConfig, eps: f64) -> Result<(f64, Option<f64>)> {
    match method {
        RateMethod::GameUpper => {
            let game = PlanarGame::new(cfg.profile.planar());
            let est = upper_value_estimate(&game, eps, &cfg.family_ii(), cfg.horizon, cfg.dt(eps))?;
            Ok((est.value, None))
        }
        RateMethod::GameLower => {
            let game = PlanarGame::new(cfg.profile.planar());
            let est = lower_value_estimate(&game, eps, &cfg.family_i(), cfg.horizon, cfg.dt(eps))?;
            Ok((est.value, None))
        }
        RateMethod::Pde => {
            let mut grid = MicroGrid::standard(cfg.horizon, cfg.h1, cfg.grid)?;
            if let Some(l) = cfg.half_width {
                grid.half_width = l;
                grid.n1 = 2 * (l / cfg.h1).ceil() as usize;
            }
            let sol = solve_micro(cfg.profile.planar(), eps, cfg.horizon, &grid, &InitialData::Clamped)?;
            Ok((sol.value, Some(grid.max_spacing(eps))))
        }
    }
}

/// Runs `method` at every ε of the configuration in parallel. Failed points
/// are recorded; the sweep errors only if fewer than three points succeed.
pub fn rate_sweep(method: RateMethod, cfg: &RunConfig) -> Result<RateReport> {
    cfg.validate()?;
    let mut eps = cfg.eps.clone();
    eps.sort_by(|a, b| b.total_cmp(a));
    eps.dedup();
    let runs: Vec<(f64, Result<(f64, Option<f64>)>)> =
        eps.par_iter().map(|&e| (e, sweep_point(method, cfg, e))).collect();
    let mut report = RateReport::empty(method, cfg.profile.name());
    let mut first_err = None;
    for (e, r) in runs {
        match r {
            Ok((v, h)) => {
                report.pairs.push((e, v));
                report.spacing.push(h.unwrap_or(0.0));
            }
            Err(err) => {
                report.failures.push((e, err.to_string()));
                first_err.get_or_insert(err);
            }
        }
    }
    if report.pairs.len() < 3 {
        return Err(match first_err {
            Some(err) if report.pairs.is_empty() => err,
            _ => Error::Precondition(format!(
                "only {} of {} sweep points succeeded; a rate needs ≥ 3",
                report.pairs.len(),
                eps.len()
            )),
        });
    }
    let (fit, trimmed) = fit_with_trimming(&report.pairs)?;
    report.fit = Some(fit);
    report.trimmed = trimmed;
    Ok(report)
}
