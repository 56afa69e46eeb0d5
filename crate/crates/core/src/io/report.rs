//! Self-describing sweep results that can be re-run from their own echo.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bandgap::{gap_report, GapReport, OmegaGrid, DEFAULT_OMEGA_CELLS};
use crate::branches::{
    cutoffs, hybrid_grid, linear_grid, sweep_with, Branch, BranchSet, Cutoff, LinkAmbiguity,
    ACOUSTIC_CUTOFF_TOLERANCE, DEFAULT_K_MAX, DEFAULT_POINTS, DEFAULT_TOL_DAMPING, TIE_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::material::{validate, MaterialParams};
use crate::polyeig::{CLUSTER_TOLERANCE, POLISH_TOLERANCE};
use crate::wave::SystemKind;

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    /// k = 0, a logarithmic segment, then linear spacing.
    Hybrid,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub systems: Vec<SystemKind>,
    pub grid: GridKind,
    pub k_max: f64,
    pub points: usize,
    pub tol_damping: f64,
    pub omega_cells: usize,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            systems: SystemKind::ALL.to_vec(),
            grid: GridKind::Hybrid,
            k_max: DEFAULT_K_MAX,
            points: DEFAULT_POINTS,
            tol_damping: DEFAULT_TOL_DAMPING,
            omega_cells: DEFAULT_OMEGA_CELLS,
        }
    }
}

impl SweepSettings {
    pub fn k_grid(&self) -> Result<Vec<f64>> {
        match self.grid {
            GridKind::Hybrid => hybrid_grid(self.k_max, self.points),
            GridKind::Linear => linear_grid(self.k_max, self.points),
        }
    }
}

/// Every numerical threshold that influenced the result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tol_damping: f64,
    pub link_tie: f64,
    pub acoustic_cutoff: f64,
    pub root_polish: f64,
    pub root_cluster: f64,
    pub omega_cells: usize,
}

impl Tolerances {
    fn from_settings(s: &SweepSettings) -> Self {
        Self {
            tol_damping: s.tol_damping,
            link_tie: TIE_TOLERANCE,
            acoustic_cutoff: ACOUSTIC_CUTOFF_TOLERANCE,
            root_polish: POLISH_TOLERANCE,
            root_cluster: CLUSTER_TOLERANCE,
            omega_cells: s.omega_cells,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemAmbiguity {
    pub system: SystemKind,
    #[serde(flatten)]
    pub ambiguity: LinkAmbiguity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub tool: String,
    pub version: String,
    /// Where the parameters came from (preset name or config path).
    pub source: String,
    pub params: MaterialParams,
    pub settings: SweepSettings,
    pub tolerances: Tolerances,
    pub k_grid: Vec<f64>,
    pub cutoffs: Vec<Cutoff>,
    pub branches: Vec<Branch>,
    pub ambiguities: Vec<SystemAmbiguity>,
    /// Present when all three systems were swept far enough.
    pub band_gaps: Option<GapReport>,
    pub notes: Vec<String>,
}

impl SweepReport {
    pub fn run(source: impl Into<String>, params: &MaterialParams, settings: &SweepSettings) -> Result<Self> {
        let k_grid = settings.k_grid()?;
        Self::run_on_grid(source.into(), params, settings, k_grid)
    }

    fn run_on_grid(
        source: String,
        params: &MaterialParams,
        settings: &SweepSettings,
        k_grid: Vec<f64>,
    ) -> Result<Self> {
        let report = validate(params);
        if !report.passed() {
            return Err(Error::Validation(report));
        }
        let cut = cutoffs(params)?;
        let sets = settings
            .systems
            .iter()
            .map(|&kind| sweep_with(params, kind, &k_grid, settings.tol_damping))
            .collect::<Result<Vec<BranchSet>>>()?;

        let mut notes = Vec::new();
        let all = SystemKind::ALL.iter().all(|s| settings.systems.contains(s));
        let band_gaps = if all {
            let refs: Vec<&BranchSet> = sets.iter().collect();
            let grid = OmegaGrid::for_params(params, settings.omega_cells)?;
            match gap_report(&refs, &grid) {
                Ok(r) => Some(r),
                Err(e @ Error::InsufficientKRange { .. }) => {
                    notes.push(format!("band gaps not computed: {e}"));
                    None
                }
                Err(e) => return Err(e),
            }
        } else {
            notes.push("band gaps need all three systems".into());
            None
        };

        let ambiguities = sets
            .iter()
            .flat_map(|bs| {
                bs.ambiguities.iter().map(|a| SystemAmbiguity {
                    system: bs.system,
                    ambiguity: *a,
                })
            })
            .collect();
        let branches = sets.into_iter().flat_map(|bs| bs.branches).collect();
        Ok(Self {
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
            source,
            params: *params,
            settings: settings.clone(),
            tolerances: Tolerances::from_settings(settings),
            k_grid,
            cutoffs: cut,
            branches,
            ambiguities,
            band_gaps,
            notes,
        })
    }

    /// Repeats the computation from the echoed parameters, settings and grid.
    pub fn rerun(&self) -> Result<Self> {
        Self::run_on_grid(self.source.clone(), &self.params, &self.settings, self.k_grid.clone())
    }

    /// Largest relative difference between corresponding branch points, or
    /// `None` if the two reports do not have the same branch structure.
    pub fn max_point_deviation(&self, other: &Self) -> Option<f64> {
        if self.branches.len() != other.branches.len() {
            return None;
        }
        let mut worst = 0.0_f64;
        for (a, b) in self.branches.iter().zip(&other.branches) {
            if (a.system, a.label, a.index, a.points.len()) != (b.system, b.label, b.index, b.points.len()) {
                return None;
            }
            for (p, q) in a.points.iter().zip(&b.points) {
                if p.k != q.k {
                    return None;
                }
                let d = (p.omega - q.omega).norm();
                if d > 0.0 {
                    worst = worst.max(d / p.omega.norm().max(q.omega.norm()));
                }
            }
        }
        Some(worst)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: Self = serde_json::from_str(text)?;
        if report.tool != TOOL_NAME {
            return Err(Error::Report(format!("written by `{}`, not `{TOOL_NAME}`", report.tool)));
        }
        Ok(report)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
