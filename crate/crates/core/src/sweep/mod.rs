//! Exhaustive parameter searches.
//!
//! FSA-RD is optimized over frame size `M` and reservation probability `γ`
//! with the closed-form objective; slotted ALOHA over its transmission
//! probability `τ` with the simulator, using the same seed (common random
//! numbers) at every grid point.

mod table1;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::average_aoi;
use crate::config::{check_probability, SystemConfig};
use crate::error::{ConfigError, SweepError};
use crate::sim::{simulate_slotted_aloha, SimConfig};

pub use table1::{
    reference_cells, reproduce_table1, reproduce_table1_fsard, Panel, ReferenceCell, Scheme,
    Table1, Table1Row,
};

/// A list of probabilities, either explicit or `start, start + step, ..., stop`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueGrid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl ValueGrid {
    /// {0.005, 0.010, ..., 1.000}
    pub fn default_probabilities() -> Self {
        ValueGrid::Range {
            start: 0.005,
            stop: 1.0,
            step: 0.005,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            ValueGrid::List(values) => values.clone(),
            ValueGrid::Range { start, stop, step } => {
                if step.is_nan() || *step <= 0.0 || stop < start {
                    return Vec::new();
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..count)
                    // Snap to 12 decimals so 0.005 * 3 prints as 0.015.
                    .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
                    .collect()
            }
        }
    }
}

/// Fixed network parameters plus the grids to search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub users: u32,
    pub mini_slots: u32,
    pub rho: f64,
    pub min_frame: u32,
    pub max_frame: u32,
    pub gamma_grid: ValueGrid,
    pub tau_grid: ValueGrid,
}

impl GridSpec {
    /// Default grids: `M ∈ {2, ..., max(2V + 2, 40)}` and `γ, τ ∈ {0.005, ..., 1}`.
    pub fn new(users: u32, mini_slots: u32, rho: f64) -> Self {
        Self {
            users,
            mini_slots,
            rho,
            min_frame: 2,
            max_frame: (2 * mini_slots + 2).max(40),
            gamma_grid: ValueGrid::default_probabilities(),
            tau_grid: ValueGrid::default_probabilities(),
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.users < 1 {
            return Err(ConfigError::new("users", self.users, "[1, inf)").into());
        }
        if self.mini_slots < 1 {
            return Err(ConfigError::new("minislots", self.mini_slots, "[1, inf)").into());
        }
        check_probability("rho", self.rho)?;
        if self.min_frame < 2 {
            return Err(ConfigError::new("frame-min", self.min_frame, "[2, inf)").into());
        }
        if self.max_frame < self.min_frame {
            return Err(SweepError::EmptyGrid("frame"));
        }
        for (name, grid) in [("gamma", &self.gamma_grid), ("tau", &self.tau_grid)] {
            let values = grid.values();
            if values.is_empty() {
                return Err(SweepError::EmptyGrid(name));
            }
            for v in values {
                check_probability(name, v)?;
            }
        }
        Ok(())
    }

    /// All `(M, γ)` pairs, `M` outermost.
    pub fn fsard_points(&self) -> Vec<(u32, f64)> {
        let gammas = self.gamma_grid.values();
        (self.min_frame..=self.max_frame)
            .flat_map(|m| gammas.iter().map(move |&g| (m, g)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Analytic,
    Simulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "snake_case")]
pub enum SweepParams {
    Fsard { frame_size: u32, gamma: f64 },
    Aloha { tau: f64 },
}

impl SweepParams {
    pub fn source(&self) -> Source {
        match self {
            SweepParams::Fsard { .. } => Source::Analytic,
            SweepParams::Aloha { .. } => Source::Simulated,
        }
    }

    /// Tie-break order: smaller M first, then smaller probability.
    fn order_key(&self) -> (u32, f64) {
        match *self {
            SweepParams::Fsard { frame_size, gamma } => (frame_size, gamma),
            SweepParams::Aloha { tau } => (0, tau),
        }
    }
}

/// One grid point. `aaoi` is `None` when the point could not be evaluated;
/// `error` then says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub params: SweepParams,
    pub aaoi: Option<f64>,
    /// 95% half-width for simulated points.
    pub ci: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// Index into `points` of the minimizer.
    pub best: Option<usize>,
    /// Set when a simulated runner-up lies within the best point's CI.
    pub caveat: bool,
}

impl SweepResult {
    pub fn from_points(points: Vec<SweepPoint>) -> Self {
        let best = argmin(&points);
        let caveat = best.is_some_and(|b| runner_up_within_ci(&points, b));
        Self {
            points,
            best,
            caveat,
        }
    }

    pub fn best_point(&self) -> Option<&SweepPoint> {
        self.best.map(|i| &self.points[i])
    }
}

/// Index of the smallest objective among evaluated points; exact ties go
/// to the smallest `M`, then the smallest probability.
pub fn argmin(points: &[SweepPoint]) -> Option<usize> {
    points
        .iter()
        .enumerate()
        .filter_map(|(i, p)| {
            p.aaoi
                .filter(|v| v.is_finite())
                .map(|v| (i, v, p.params.order_key()))
        })
        .min_by(|a, b| {
            a.1.total_cmp(&b.1)
                .then(a.2 .0.cmp(&b.2 .0))
                .then(a.2 .1.total_cmp(&b.2 .1))
        })
        .map(|(i, _, _)| i)
}

fn runner_up_within_ci(points: &[SweepPoint], best: usize) -> bool {
    let (Some(best_value), Some(ci)) = (points[best].aaoi, points[best].ci) else {
        return false;
    };
    points
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != best)
        .filter_map(|(_, p)| p.aaoi)
        .any(|v| v - best_value <= ci)
}

/// Evaluates the closed-form average age at every `(M, γ)` of the grid.
///
/// Points whose configuration is degenerate are kept with their error and
/// left out of the argmin.
pub fn sweep_fsard(grid: &GridSpec) -> Result<SweepResult, SweepError> {
    grid.validate()?;
    let points = grid
        .fsard_points()
        .into_par_iter()
        .map(|(frame_size, gamma)| {
            let params = SweepParams::Fsard { frame_size, gamma };
            let outcome =
                SystemConfig::new(grid.users, frame_size, grid.mini_slots, grid.rho, gamma)
                    .map_err(crate::error::AnalyticError::from)
                    .and_then(|cfg| average_aoi(&cfg));
            match outcome {
                Ok(report) => SweepPoint {
                    params,
                    aaoi: Some(report.aaoi),
                    ci: None,
                    error: None,
                },
                Err(e) => SweepPoint {
                    params,
                    aaoi: None,
                    ci: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(SweepResult::from_points(points))
}

/// Simulates slotted ALOHA at every `τ` of `grid.tau_grid` for the grid's
/// `users` and `rho`, all with the seeds of `sim`.
pub fn optimize_aloha(grid: &GridSpec, sim: &SimConfig) -> Result<SweepResult, SweepError> {
    grid.validate()?;
    sim.validate()?;
    let points = grid
        .tau_grid
        .values()
        .into_par_iter()
        .map(|tau| {
            let stats = simulate_slotted_aloha(grid.users, grid.rho, tau, sim)?;
            Ok(SweepPoint {
                params: SweepParams::Aloha { tau },
                aaoi: Some(stats.mean_aoi),
                ci: Some(stats.ci_halfwidth),
                error: None,
            })
        })
        .collect::<Result<Vec<_>, SweepError>>()?;
    Ok(SweepResult::from_points(points))
}
