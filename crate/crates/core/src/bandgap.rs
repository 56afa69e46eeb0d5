//! Frequency band gaps: intervals of Re ω that no propagating branch point
//! reaches over the swept wavenumbers.

use serde::{Deserialize, Serialize};

use crate::branches::{cutoffs, sweep_with, BranchSet};
use crate::error::{Error, Result};
use crate::material::MaterialParams;
use crate::wave::SystemKind;

pub const DEFAULT_OMEGA_CELLS: usize = 1000;

/// Resolution of the frequency axis: `cells` equal cells on [0, max].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaGrid {
    pub max: f64,
    pub cells: usize,
}

impl OmegaGrid {
    /// Grid up to twice the largest cut-off of `p`.
    pub fn for_params(p: &MaterialParams, cells: usize) -> Result<Self> {
        let top = cutoffs(p)?.iter().map(|c| c.omega).fold(0.0, f64::max);
        Ok(Self { max: 2.0 * top, cells })
    }

    pub fn cell(&self) -> f64 {
        self.max / self.cells as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandGap {
    pub lo: f64,
    pub hi: f64,
    pub systems_covered: Vec<SystemKind>,
    pub tol_damping: f64,
}

impl BandGap {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Closed intervals of Re ω swept by the propagating parts of every branch,
/// consecutive propagating points joined by straight segments.
fn occupied(sets: &[&BranchSet]) -> Vec<(f64, f64)> {
    let mut spans = Vec::new();
    for bs in sets {
        for b in &bs.branches {
            let live: Vec<bool> = b.points.iter().map(|pt| b.is_propagating(pt, bs.tol_damping)).collect();
            for (i, pt) in b.points.iter().enumerate() {
                if !live[i] {
                    continue;
                }
                let w = pt.omega.re;
                spans.push((w, w));
                if i + 1 < b.points.len() && live[i + 1] {
                    let v = b.points[i + 1].omega.re;
                    spans.push((w.min(v), w.max(v)));
                }
            }
        }
    }
    spans
}

/// Largest propagating Re ω at the end of each sweep.
fn reach(sets: &[&BranchSet]) -> f64 {
    sets.iter()
        .flat_map(|bs| {
            bs.branches.iter().filter_map(move |b| {
                let pt = b.points.last()?;
                b.is_propagating(pt, bs.tol_damping).then_some(pt.omega.re)
            })
        })
        .fold(0.0, f64::max)
}

/// Band gaps of the union of the given sweeps on [0, grid.max]. Unoccupied
/// intervals no wider than two cells are treated as resolution artifacts.
///
/// The sweeps must reach past the top of the frequency window, otherwise a
/// gap could be an artifact of stopping the sweep too early.
pub fn detect_band_gaps(sets: &[&BranchSet], grid: &OmegaGrid) -> Result<Vec<BandGap>> {
    if sets.is_empty() || grid.cells == 0 || grid.max.is_nan() || grid.max <= 0.0 {
        return Err(Error::EmptyGrid);
    }
    let reached = reach(sets);
    if reached < grid.max {
        let k_max = sets
            .iter()
            .filter_map(|bs| bs.k_grid.last().copied())
            .fold(0.0, f64::max);
        return Err(Error::InsufficientKRange {
            k_max,
            reached,
            needed: grid.max,
        });
    }
    let tol_damping = sets[0].tol_damping;
    let mut systems: Vec<SystemKind> = sets.iter().map(|bs| bs.system).collect();
    systems.sort_by_key(|s| SystemKind::ALL.iter().position(|t| t == s));
    systems.dedup();

    let mut spans = occupied(sets);
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    let min_width = 2.0 * grid.cell();
    let mut gaps = Vec::new();
    let mut covered = 0.0_f64;
    for (lo, hi) in spans.into_iter().chain([(grid.max, grid.max)]) {
        let lo = lo.min(grid.max);
        if lo - covered > min_width {
            gaps.push(BandGap {
                lo: covered,
                hi: lo,
                systems_covered: systems.clone(),
                tol_damping,
            });
        }
        covered = covered.max(hi);
        if covered >= grid.max {
            break;
        }
    }
    Ok(gaps)
}

/// Joint gaps over every system plus the gaps of each system alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub omega_grid: OmegaGrid,
    pub joint: Vec<BandGap>,
    pub per_system: Vec<(SystemKind, Vec<BandGap>)>,
}

pub fn gap_report(sets: &[&BranchSet], grid: &OmegaGrid) -> Result<GapReport> {
    let joint = detect_band_gaps(sets, grid)?;
    let per_system = sets
        .iter()
        .map(|bs| Ok((bs.system, detect_band_gaps(&[*bs], grid)?)))
        .collect::<Result<_>>()?;
    Ok(GapReport {
        omega_grid: *grid,
        joint,
        per_system,
    })
}

/// Sweeps all three systems on `k_grid` and reports their band gaps on the
/// default frequency window.
pub fn analyze(p: &MaterialParams, k_grid: &[f64], tol_damping: f64, cells: usize) -> Result<GapReport> {
    let grid = OmegaGrid::for_params(p, cells)?;
    let sets = SystemKind::ALL
        .iter()
        .map(|&kind| sweep_with(p, kind, k_grid, tol_damping))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&BranchSet> = sets.iter().collect();
    gap_report(&refs, &grid)
}
