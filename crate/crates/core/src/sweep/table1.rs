//! Optimized FSA-RD versus optimized slotted ALOHA on the reference grid.
//!
//! Panel (a): N = 30, ρ ∈ {0.01, 0.02, 0.04, 0.08}.
//! Panel (b): ρ = 0.04, N ∈ {10, 20, 40, 50}.
//! FSA-RD is evaluated with V ∈ {4, 6}.

use serde::{Deserialize, Serialize};

use super::{optimize_aloha, sweep_fsard, GridSpec, SweepParams, ValueGrid};
use crate::error::SweepError;
use crate::sim::SimConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Panel {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Fsard,
    Aloha,
}

/// A reference cell: the optimized average age for one setup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCell {
    pub panel: Panel,
    pub scheme: Scheme,
    /// V for FSA-RD, `None` for ALOHA.
    pub mini_slots: Option<u32>,
    pub users: u32,
    pub rho: f64,
    pub value: f64,
}

const PANEL_A_RHO: [f64; 4] = [0.01, 0.02, 0.04, 0.08];
const PANEL_B_USERS: [u32; 4] = [10, 20, 40, 50];

const PANEL_A_V4: [f64; 4] = [131.16, 86.46, 70.74, 70.18];
const PANEL_A_V6: [f64; 4] = [124.06, 78.74, 60.42, 56.47];
const PANEL_A_ALOHA: [f64; 4] = [110.14, 82.55, 81.30, 80.22];
const PANEL_B_V4: [f64; 4] = [37.40, 52.12, 93.12, 116.04];
const PANEL_B_V6: [f64; 4] = [35.12, 46.63, 75.89, 92.90];
const PANEL_B_ALOHA: [f64; 4] = [31.63, 53.72, 107.66, 136.97];

/// All 24 reference cells: 16 FSA-RD, then 8 ALOHA.
pub fn reference_cells() -> Vec<ReferenceCell> {
    let mut cells = Vec::with_capacity(24);
    let fsard_rows = [(4, PANEL_A_V4, PANEL_B_V4), (6, PANEL_A_V6, PANEL_B_V6)];
    for (v, a, b) in fsard_rows {
        for i in 0..4 {
            cells.push(ReferenceCell {
                panel: Panel::A,
                scheme: Scheme::Fsard,
                mini_slots: Some(v),
                users: 30,
                rho: PANEL_A_RHO[i],
                value: a[i],
            });
        }
        for i in 0..4 {
            cells.push(ReferenceCell {
                panel: Panel::B,
                scheme: Scheme::Fsard,
                mini_slots: Some(v),
                users: PANEL_B_USERS[i],
                rho: 0.04,
                value: b[i],
            });
        }
    }
    for i in 0..4 {
        cells.push(ReferenceCell {
            panel: Panel::A,
            scheme: Scheme::Aloha,
            mini_slots: None,
            users: 30,
            rho: PANEL_A_RHO[i],
            value: PANEL_A_ALOHA[i],
        });
    }
    for i in 0..4 {
        cells.push(ReferenceCell {
            panel: Panel::B,
            scheme: Scheme::Aloha,
            mini_slots: None,
            users: PANEL_B_USERS[i],
            rho: 0.04,
            value: PANEL_B_ALOHA[i],
        });
    }
    cells
}

/// A reproduced cell next to its reference value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub panel: Panel,
    pub scheme: Scheme,
    pub mini_slots: Option<u32>,
    pub users: u32,
    pub rho: f64,
    /// Optimal M (FSA-RD only).
    pub best_frame: Option<u32>,
    /// Optimal γ (FSA-RD) or τ (ALOHA).
    pub best_prob: f64,
    pub aaoi: f64,
    pub ci: Option<f64>,
    pub reference: f64,
    /// (aaoi − reference) / reference.
    pub rel_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1 {
    pub rows: Vec<Table1Row>,
}

fn row_for(cell: &ReferenceCell, params: SweepParams, aaoi: f64, ci: Option<f64>) -> Table1Row {
    let (best_frame, best_prob) = match params {
        SweepParams::Fsard { frame_size, gamma } => (Some(frame_size), gamma),
        SweepParams::Aloha { tau } => (None, tau),
    };
    Table1Row {
        panel: cell.panel,
        scheme: cell.scheme,
        mini_slots: cell.mini_slots,
        users: cell.users,
        rho: cell.rho,
        best_frame,
        best_prob,
        aaoi,
        ci,
        reference: cell.value,
        rel_dev: (aaoi - cell.value) / cell.value,
    }
}

fn optimum(result: &super::SweepResult) -> Result<(SweepParams, f64, Option<f64>), SweepError> {
    let best = result
        .best_point()
        .ok_or(SweepError::EmptyGrid("evaluated points"))?;
    Ok((
        best.params,
        best.aaoi.expect("argmin is evaluated"),
        best.ci,
    ))
}

/// The 16 FSA-RD cells, optimized analytically on the default grids.
pub fn reproduce_table1_fsard() -> Result<Table1, SweepError> {
    let rows = reference_cells()
        .iter()
        .filter(|c| c.scheme == Scheme::Fsard)
        .map(|cell| {
            let v = cell.mini_slots.expect("FSA-RD cells carry V");
            let result = sweep_fsard(&GridSpec::new(cell.users, v, cell.rho))?;
            let (params, aaoi, ci) = optimum(&result)?;
            Ok(row_for(cell, params, aaoi, ci))
        })
        .collect::<Result<_, SweepError>>()?;
    Ok(Table1 { rows })
}

/// All 24 cells; the ALOHA cells are optimized by simulation over
/// `tau_grid` with the run length and seed of `sim`.
pub fn reproduce_table1(sim: &SimConfig, tau_grid: &ValueGrid) -> Result<Table1, SweepError> {
    let mut table = reproduce_table1_fsard()?;
    for cell in reference_cells()
        .iter()
        .filter(|c| c.scheme == Scheme::Aloha)
    {
        let grid = GridSpec {
            tau_grid: tau_grid.clone(),
            ..GridSpec::new(cell.users, 1, cell.rho)
        };
        let result = optimize_aloha(&grid, sim)?;
        let (params, aaoi, ci) = optimum(&result)?;
        table.rows.push(row_for(cell, params, aaoi, ci));
    }
    Ok(table)
}
