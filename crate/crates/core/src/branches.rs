//! Wavenumber sweeps: per-k roots linked into continuous, labeled branches.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::material::{derived_speeds, MaterialParams, SquaredSpeeds};
use crate::polyeig::representative_roots;
use crate::wave::{pencil, SystemKind, UncoupledBranch};

pub const DEFAULT_TOL_DAMPING: f64 = 1e-3;
pub const DEFAULT_K_MAX: f64 = 1.0e4;
pub const DEFAULT_POINTS: usize = 400;

/// Two candidate distances closer than this (relative to ω_s) count as a
/// linking tie.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// A branch whose k = 0 value is below this fraction of ω_s is acoustic.
pub const ACOUSTIC_CUTOFF_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "LA")]
    La,
    #[serde(rename = "LO")]
    Lo,
    #[serde(rename = "TA")]
    Ta,
    #[serde(rename = "TO")]
    To,
    #[serde(rename = "TSO_TCVO")]
    TsoTcvo,
    #[serde(rename = "THERMAL")]
    Thermal,
}

impl Label {
    pub const ALL: [Label; 6] = [
        Label::La,
        Label::Lo,
        Label::Ta,
        Label::To,
        Label::TsoTcvo,
        Label::Thermal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::La => "LA",
            Label::Lo => "LO",
            Label::Ta => "TA",
            Label::To => "TO",
            Label::TsoTcvo => "TSO_TCVO",
            Label::Thermal => "THERMAL",
        }
    }

    pub fn is_acoustic(self) -> bool {
        matches!(self, Label::La | Label::Ta)
    }

    pub fn is_optic(self) -> bool {
        matches!(self, Label::Lo | Label::To | Label::TsoTcvo)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Label::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown branch label `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub k: f64,
    pub omega: Complex64,
    /// Normalized determinant residual at (k, ω).
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub system: SystemKind,
    pub label: Label,
    /// 1-based ordinal within the label.
    pub index: usize,
    pub points: Vec<BranchPoint>,
    /// Re ω at k = 0.
    pub cutoff: Option<f64>,
}

impl Branch {
    pub fn name(&self) -> String {
        format!("{}{}", self.label, self.index)
    }

    /// Whether a point carries a propagating wave: |Im ω| ≤ tol·|Re ω| on a
    /// branch that is not thermal.
    pub fn is_propagating(&self, point: &BranchPoint, tol_damping: f64) -> bool {
        self.label != Label::Thermal && point.omega.im.abs() <= tol_damping * point.omega.re.abs()
    }

    pub fn max_residual(&self) -> f64 {
        self.points.iter().map(|pt| pt.residual).fold(0.0, f64::max)
    }
}

/// Two candidates at (nearly) the same distance from a branch's predicted
/// continuation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkAmbiguity {
    pub k: f64,
    /// Position of the branch in the unsorted linking order.
    pub branch: usize,
    /// Difference between the two smallest candidate distances.
    pub separation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchSet {
    pub system: SystemKind,
    pub params: MaterialParams,
    pub k_grid: Vec<f64>,
    pub tol_damping: f64,
    pub branches: Vec<Branch>,
    pub ambiguities: Vec<LinkAmbiguity>,
}

impl BranchSet {
    pub fn count(&self, label: Label) -> usize {
        self.branches.iter().filter(|b| b.label == label).count()
    }

    pub fn find(&self, label: Label, index: usize) -> Option<&Branch> {
        self.branches.iter().find(|b| b.label == label && b.index == index)
    }

    /// Branch values at grid position `i`.
    pub fn values_at(&self, i: usize) -> Vec<Complex64> {
        self.branches.iter().map(|b| b.points[i].omega).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.branches.iter().map(Branch::max_residual).fold(0.0, f64::max)
    }
}

/// Default grid: k = 0, a logarithmic segment resolving the long-wave
/// region, then linear spacing up to `k_max`.
pub fn hybrid_grid(k_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(k_max.is_finite() && k_max > 0.0) {
        return Err(if k_max == 0.0 { Error::EmptyGrid } else { Error::InvalidKMax(k_max) });
    }
    if points < 2 {
        return Err(Error::TooFewPoints(points));
    }
    if points < 8 {
        return Ok((0..points).map(|i| k_max * i as f64 / (points - 1) as f64).collect());
    }
    let n_log = points / 4;
    let n_lin = points - 1 - n_log;
    let (lo, knee) = (k_max * 1e-4, k_max * 0.1);
    let mut grid = Vec::with_capacity(points);
    grid.push(0.0);
    let ratio = (knee / lo).ln() / n_log as f64;
    grid.extend((0..n_log).map(|i| lo * (ratio * i as f64).exp()));
    grid.extend((0..n_lin).map(|i| knee + (k_max - knee) * i as f64 / (n_lin - 1) as f64));
    *grid.last_mut().unwrap() = k_max;
    Ok(grid)
}

/// Uniform grid on [0, k_max].
pub fn linear_grid(k_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(k_max.is_finite() && k_max > 0.0) {
        return Err(if k_max == 0.0 { Error::EmptyGrid } else { Error::InvalidKMax(k_max) });
    }
    if points < 2 {
        return Err(Error::TooFewPoints(points));
    }
    Ok((0..points).map(|i| k_max * i as f64 / (points - 1) as f64).collect())
}

pub fn check_grid(k_grid: &[f64]) -> Result<()> {
    match k_grid.len() {
        0 => return Err(Error::EmptyGrid),
        1 => return Err(Error::TooFewPoints(1)),
        _ => {}
    }
    for (i, &k) in k_grid.iter().enumerate() {
        if !k.is_finite() || k < 0.0 {
            return Err(Error::NegativeWavenumber(k));
        }
        if i > 0 && k <= k_grid[i - 1] {
            return Err(Error::GridNotIncreasing { index: i });
        }
    }
    Ok(())
}

/// Root representatives at one k. The uncoupled relation is solved in
/// closed form.
fn roots_at(kind: SystemKind, p: &MaterialParams, k: f64) -> Result<Vec<Complex64>> {
    match kind {
        SystemKind::Uncoupled => Ok(vec![Complex64::new(UncoupledBranch::new(p).omega(k), 0.0)]),
        _ => representative_roots(kind, p, k),
    }
}

pub fn sweep(p: &MaterialParams, kind: SystemKind, k_grid: &[f64]) -> Result<BranchSet> {
    sweep_with(p, kind, k_grid, DEFAULT_TOL_DAMPING)
}

/// Solves the dispersion relation at every grid point (in parallel) and
/// links the roots into branches (sequentially). When the grid does not
/// start at k = 0 an extra solve there supplies the cut-offs.
pub fn sweep_with(
    p: &MaterialParams,
    kind: SystemKind,
    k_grid: &[f64],
    tol_damping: f64,
) -> Result<BranchSet> {
    check_grid(k_grid)?;
    let omega_s = SquaredSpeeds::new(p).omega_s2.sqrt();
    let head = k_grid[0] > 0.0;
    let mut ks = Vec::with_capacity(k_grid.len() + 1);
    if head {
        ks.push(0.0);
    }
    ks.extend_from_slice(k_grid);

    let solved: Vec<Vec<Complex64>> = ks
        .par_iter()
        .map(|&k| roots_at(kind, p, k))
        .collect::<Result<_>>()?;

    let n = solved[0].len();
    for (k, roots) in ks.iter().zip(&solved) {
        if roots.len() != n {
            return Err(Error::BranchCountMismatch {
                k: *k,
                expected: n,
                found: roots.len(),
            });
        }
    }

    let (tracks, ambiguities) = link(&ks, &solved, omega_s);

    let mut branches: Vec<Branch> = tracks
        .into_iter()
        .map(|track| {
            let cutoff = Some(track[0].re);
            let skip = usize::from(head);
            let points = ks[skip..]
                .par_iter()
                .zip(&track[skip..])
                .map(|(&k, &omega)| BranchPoint {
                    k,
                    omega,
                    residual: pencil(kind, p, k).residual(omega),
                })
                .collect();
            let mut b = Branch {
                system: kind,
                label: Label::La,
                index: 0,
                points,
                cutoff,
            };
            b.label = classify(&b, omega_s, tol_damping);
            b
        })
        .collect();
    assign_indices(&mut branches);

    Ok(BranchSet {
        system: kind,
        params: *p,
        k_grid: k_grid.to_vec(),
        tol_damping,
        branches,
        ambiguities,
    })
}

/// Greedy nearest-neighbour continuation with linear slope prediction.
/// Candidate pairs are taken in order of distance to the prediction, ties
/// broken by the change in Im ω.
fn link(ks: &[f64], solved: &[Vec<Complex64>], omega_s: f64) -> (Vec<Vec<Complex64>>, Vec<LinkAmbiguity>) {
    let n = solved[0].len();
    let mut tracks: Vec<Vec<Complex64>> = solved[0].iter().map(|&w| vec![w]).collect();
    let mut ambiguities = Vec::new();
    let tie = TIE_TOLERANCE * omega_s;

    for j in 1..ks.len() {
        let predictions: Vec<Complex64> = tracks
            .iter()
            .map(|t| {
                let last = t[j - 1];
                if j >= 2 {
                    let slope = (last - t[j - 2]) / (ks[j - 1] - ks[j - 2]);
                    last + slope * (ks[j] - ks[j - 1])
                } else {
                    last
                }
            })
            .collect();
        let candidates = &solved[j];

        let mut pairs = Vec::with_capacity(n * n);
        for (b, pred) in predictions.iter().enumerate() {
            let mut dists: Vec<f64> = candidates.iter().map(|c| (c - pred).norm()).collect();
            for (c, cand) in candidates.iter().enumerate() {
                pairs.push((dists[c], (cand.im - pred.im).abs(), b, c));
            }
            if n >= 2 {
                dists.sort_by(f64::total_cmp);
                let separation = dists[1] - dists[0];
                if separation <= tie {
                    ambiguities.push(LinkAmbiguity {
                        k: ks[j],
                        branch: b,
                        separation,
                    });
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

        let mut taken_branch = vec![false; n];
        let mut taken_cand = vec![false; n];
        let mut next = vec![Complex64::new(0.0, 0.0); n];
        for (_, _, b, c) in pairs {
            if !taken_branch[b] && !taken_cand[c] {
                taken_branch[b] = true;
                taken_cand[c] = true;
                next[b] = candidates[c];
            }
        }
        for (t, w) in tracks.iter_mut().zip(next) {
            t.push(w);
        }
    }
    (tracks, ambiguities)
}

/// Labels a branch from its damping and its value at k = 0.
///
/// Thermal if |Im ω| > tol·max(|Re ω|, ω_s) on most points, or if the branch
/// is identically zero (the diffusive root once heat conduction is switched
/// off). Otherwise acoustic when the cut-off vanishes, optic when it does
/// not. Uncoupled branches are always TSO–TCVO.
pub fn classify(b: &Branch, omega_s: f64, tol_damping: f64) -> Label {
    if b.system == SystemKind::Uncoupled {
        return Label::TsoTcvo;
    }
    let damped = b
        .points
        .iter()
        .filter(|pt| pt.omega.im.abs() > tol_damping * pt.omega.re.abs().max(omega_s))
        .count();
    let identically_zero = b.points.iter().all(|pt| pt.omega == Complex64::new(0.0, 0.0));
    if 2 * damped > b.points.len() || identically_zero {
        return Label::Thermal;
    }
    let cutoff = b.cutoff.unwrap_or_else(|| b.points[0].omega.re);
    let acoustic = cutoff.abs() <= ACOUSTIC_CUTOFF_TOLERANCE * omega_s;
    match (b.system, acoustic) {
        (SystemKind::Longitudinal, true) => Label::La,
        (SystemKind::Longitudinal, false) => Label::Lo,
        (_, true) => Label::Ta,
        (_, false) => Label::To,
    }
}

fn mean_abs(b: &Branch) -> f64 {
    b.points.iter().map(|pt| pt.omega.norm()).sum::<f64>() / b.points.len() as f64
}

/// Orders branches and numbers them within each label: optic branches by
/// cut-off, the others by mean |ω|.
fn assign_indices(branches: &mut [Branch]) {
    let key = |b: &Branch| {
        let primary = if b.label.is_optic() { b.cutoff.unwrap_or(0.0) } else { 0.0 };
        (b.label.as_str(), primary, mean_abs(b))
    };
    branches.sort_by(|a, b| {
        let (ka, kb) = (key(a), key(b));
        ka.0.cmp(kb.0)
            .then(ka.1.total_cmp(&kb.1))
            .then(ka.2.total_cmp(&kb.2))
    });
    let mut counter = std::collections::HashMap::new();
    for b in branches.iter_mut() {
        let c = counter.entry(b.label).or_insert(0);
        *c += 1;
        b.index = *c;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub system: SystemKind,
    pub label: Label,
    pub index: usize,
    pub omega: f64,
}

impl Cutoff {
    pub fn name(&self) -> String {
        format!("{}{}", self.label, self.index)
    }
}

/// Closed-form cut-off frequencies of the optic branches of every system.
///
/// Longitudinal: ω_s, √(2μ_c/ζ₀) and ω_p shifted by the thermal coupling,
/// ω_p′² = ω_p² + 3(C₂ − C₁)²θ₀/(ρC₀ζ₀). Transverse: ω_s and √(2μ_c/ζ₀).
/// Uncoupled: ω_s. A vanishing couple modulus removes its cut-off (the
/// branch becomes acoustic).
pub fn cutoffs(p: &MaterialParams) -> Result<Vec<Cutoff>> {
    let speeds = derived_speeds(p)?;
    let omega_s = speeds.omega_s;
    let omega_c = (2.0 * p.mu_c / p.zeta0).sqrt();
    let shift = 3.0 * (p.c2 - p.c1).powi(2) * p.theta0 / (p.rho * p.c0 * p.zeta0);
    let omega_p = (speeds.omega_p * speeds.omega_p + shift).sqrt();

    let mut out = Vec::new();
    let mut push = |system, label, mut values: Vec<f64>| {
        values.retain(|&w| w > 0.0);
        values.sort_by(f64::total_cmp);
        for (i, omega) in values.into_iter().enumerate() {
            out.push(Cutoff {
                system,
                label,
                index: i + 1,
                omega,
            });
        }
    };
    push(SystemKind::Longitudinal, Label::Lo, vec![omega_s, omega_c, omega_p]);
    push(SystemKind::Transverse, Label::To, vec![omega_s, omega_c]);
    push(SystemKind::Uncoupled, Label::TsoTcvo, vec![omega_s]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{preset, thermal_off, ModelId};

    fn default_grid() -> Vec<f64> {
        hybrid_grid(DEFAULT_K_MAX, DEFAULT_POINTS).unwrap()
    }

    fn counts(bs: &BranchSet) -> Vec<(Label, usize)> {
        Label::ALL
            .into_iter()
            .map(|l| (l, bs.count(l)))
            .filter(|&(_, c)| c > 0)
            .collect()
    }

    #[test]
    fn hybrid_grid_shape() {
        let g = default_grid();
        assert_eq!(g.len(), 400);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 1e4);
        check_grid(&g).unwrap();
        assert!(g[1] <= 1.0 + 1e-12);
    }

    #[test]
    fn grid_errors() {
        assert!(matches!(hybrid_grid(0.0, 10), Err(Error::EmptyGrid)));
        assert!(matches!(hybrid_grid(-1.0, 10), Err(Error::InvalidKMax(_))));
        assert!(matches!(hybrid_grid(10.0, 1), Err(Error::TooFewPoints(1))));
        assert!(matches!(check_grid(&[]), Err(Error::EmptyGrid)));
        assert!(matches!(check_grid(&[0.0, 2.0, 2.0]), Err(Error::GridNotIncreasing { index: 2 })));
        assert!(matches!(check_grid(&[-1.0, 2.0]), Err(Error::NegativeWavenumber(_))));
        assert_eq!(linear_grid(3.0, 4).unwrap(), vec![0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn branch_counts_preset_one() {
        let g = default_grid();
        let p = preset(ModelId::I);
        let long = sweep(&p, SystemKind::Longitudinal, &g).unwrap();
        assert_eq!(counts(&long), vec![(Label::La, 2), (Label::Lo, 3)]);
        let trans = sweep(&p, SystemKind::Transverse, &g).unwrap();
        assert_eq!(counts(&trans), vec![(Label::Ta, 1), (Label::To, 2)]);
        let unc = sweep(&p, SystemKind::Uncoupled, &g).unwrap();
        assert_eq!(counts(&unc), vec![(Label::TsoTcvo, 1)]);
    }

    #[test]
    fn branch_counts_without_couple_modulus() {
        let g = default_grid();
        let p = preset(ModelId::II);
        let long = sweep(&p, SystemKind::Longitudinal, &g).unwrap();
        assert_eq!(counts(&long), vec![(Label::La, 3), (Label::Lo, 2)]);
        let trans = sweep(&p, SystemKind::Transverse, &g).unwrap();
        assert_eq!(counts(&trans), vec![(Label::Ta, 2), (Label::To, 1)]);
    }

    #[test]
    fn optic_cutoffs_match_closed_form() {
        let p = preset(ModelId::I);
        let bs = sweep(&p, SystemKind::Longitudinal, &default_grid()).unwrap();
        let cut = cutoffs(&p).unwrap();
        for c in cut.iter().filter(|c| c.system == SystemKind::Longitudinal) {
            let b = bs.find(c.label, c.index).unwrap();
            let got = b.cutoff.unwrap();
            assert!((got - c.omega).abs() <= 1e-10 * c.omega, "{}: {got} vs {}", c.name(), c.omega);
        }
        assert_eq!(bs.find(Label::Lo, 3).map(|b| classify(b, 2.449e5, 1e-3)), Some(Label::Lo));
    }

    #[test]
    fn cutoff_values() {
        let cut = cutoffs(&preset(ModelId::I)).unwrap();
        let long: Vec<f64> = cut
            .iter()
            .filter(|c| c.system == SystemKind::Longitudinal)
            .map(|c| c.omega)
            .collect();
        for (got, want) in long.iter().zip([2.4495e5, 2.9665e5, 4.5826e5]) {
            assert!((got - want).abs() / want < 1e-4, "{got} vs {want}");
        }
        let two = cutoffs(&preset(ModelId::II)).unwrap();
        assert!(two.iter().all(|c| (c.omega - 2.9665e5).abs() > 1e2));
        assert_eq!(two.iter().filter(|c| c.system == SystemKind::Transverse).count(), 1);
    }

    #[test]
    fn headless_grid_still_finds_cutoffs() {
        let p = preset(ModelId::I);
        let g: Vec<f64> = (1..=50).map(|i| 200.0 * i as f64).collect();
        let bs = sweep(&p, SystemKind::Transverse, &g).unwrap();
        assert_eq!(bs.k_grid, g);
        assert_eq!(counts(&bs), vec![(Label::Ta, 1), (Label::To, 2)]);
        assert!(bs.branches.iter().all(|b| b.points.len() == 50 && b.points[0].k == 200.0));
    }

    #[test]
    fn thermal_off_zero_line_is_thermal() {
        let p = thermal_off(&preset(ModelId::I));
        let bs = sweep(&p, SystemKind::Longitudinal, &default_grid()).unwrap();
        assert_eq!(counts(&bs), vec![(Label::La, 1), (Label::Lo, 3), (Label::Thermal, 1)]);
    }

    #[test]
    fn uncoupled_is_closed_form() {
        let p = preset(ModelId::III);
        let bs = sweep(&p, SystemKind::Uncoupled, &default_grid()).unwrap();
        let b = &bs.branches[0];
        assert_eq!(b.label, Label::TsoTcvo);
        let u = UncoupledBranch::new(&p);
        assert_eq!(b.cutoff, Some(u.omega_s));
        for pt in &b.points {
            assert_eq!(pt.omega.re, u.omega(pt.k));
        }
    }

    #[test]
    fn sweep_points_are_roots() {
        let g = default_grid();
        for m in ModelId::ALL {
            for kind in SystemKind::ALL {
                let bs = sweep(&preset(m), kind, &g).unwrap();
                assert!(bs.max_residual() <= 1e-8, "{m} {kind}: {:e}", bs.max_residual());
            }
        }
    }

    #[test]
    fn branches_are_continuous() {
        let g = default_grid();
        let p = preset(ModelId::I);
        let c_p = crate::material::DerivedSpeeds::unchecked(&p).c_p;
        for kind in [SystemKind::Longitudinal, SystemKind::Transverse] {
            let bs = sweep(&p, kind, &g).unwrap();
            for b in &bs.branches {
                for w in b.points.windows(2) {
                    let slope = (w[1].omega - w[0].omega).norm() / (w[1].k - w[0].k);
                    assert!(slope <= 1.5 * c_p, "{} at k={}: slope {slope}", b.name(), w[1].k);
                }
            }
        }
    }

    #[test]
    fn labels_parse_and_print() {
        for l in Label::ALL {
            assert_eq!(l.as_str().parse::<Label>().unwrap(), l);
            assert_eq!(serde_json::to_string(&l).unwrap(), format!("\"{l}\""));
        }
    }
}
