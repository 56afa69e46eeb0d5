//! Dispersion relations det A(k, ω) = 0 as polynomial root problems.
//!
//! At fixed real k the determinant is a polynomial in ω: degree 9 for the
//! longitudinal system (degree 8 once the thermal row degenerates), degree 6
//! and even for the transverse one, degree 2 for the uncoupled relation.

mod poly;

pub use poly::{
    cluster_roots, real_polynomial_roots, ComplexPolynomial, Root, RootCluster, CLUSTER_TOLERANCE,
    POLISH_MAX_ITER, POLISH_TOLERANCE,
};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::material::{MaterialParams, SquaredSpeeds};
use crate::wave::{pencil, SystemKind};

/// Imaginary parts of the rotated coefficients above this (relative to the
/// largest coefficient) mean the root set has lost its ω ↦ −ω* symmetry.
const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Polynomial q with q(ω) = det A(k, ω).
pub fn det_poly(kind: SystemKind, p: &MaterialParams, k: f64) -> ComplexPolynomial {
    pencil(kind, p, k).determinant_polynomial()
}

/// |det A| divided by the product of the row max-norms of a plain numeric
/// matrix. Invariant under rescaling of any row.
pub fn normalized_residual(a: &DMatrix<Complex64>) -> f64 {
    let mut scale = 1.0;
    for row in a.row_iter() {
        let m = row.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if m == 0.0 {
            return 0.0;
        }
        scale *= m;
    }
    a.clone().determinant().norm() / scale
}

/// Scale-invariant determinant residual of a system at (k, ω): |det A|
/// divided by the product of row max-norms, each entry's magnitude taken
/// term by term so that entries cancelling at a root do not shrink the
/// normalization.
pub fn residual(kind: SystemKind, p: &MaterialParams, k: f64, omega: Complex64) -> f64 {
    pencil(kind, p, k).residual(omega)
}

/// Every root of det A(k, ·) = 0 with multiplicity, from the general complex
/// companion solve with ω non-dimensionalized by ω_s.
pub fn dispersion_roots(kind: SystemKind, p: &MaterialParams, k: f64) -> Result<Vec<Root>> {
    let q = det_poly(kind, p, k);
    q.roots_scaled(SquaredSpeeds::new(p).omega_s2.sqrt())
}

/// The root set at fixed real k reduced modulo ω ↦ −ω*: one representative
/// with Re ω ≥ 0 per mirror pair, self-mirrored roots (Re ω = 0) kept as
/// they are, and ⌈m/2⌉ zeros for a zero root of multiplicity m.
///
/// Longitudinal roots come from the real polynomial f(s) = q(is); transverse
/// ones from the real cubic in ω².
pub fn representative_roots(kind: SystemKind, p: &MaterialParams, k: f64) -> Result<Vec<Complex64>> {
    let omega_s = SquaredSpeeds::new(p).omega_s2.sqrt();
    let q = det_poly(kind, p, k);
    match kind {
        SystemKind::Longitudinal => mirror_representatives(&q, omega_s),
        SystemKind::Transverse | SystemKind::Uncoupled => square_representatives(&q, omega_s),
    }
}

fn real_parts_checked(coeffs: &[Complex64]) -> Result<Vec<f64>> {
    let big = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let lead = coeffs
        .iter()
        .rev()
        .find(|c| c.norm() > 0.0)
        .copied()
        .ok_or(Error::DegreeTooLow(0))?;
    let phase = lead / lead.norm();
    let rotated: Vec<Complex64> = coeffs.iter().map(|c| c / phase).collect();
    let worst = rotated.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    if worst > SYMMETRY_TOLERANCE * big {
        return Err(Error::Report(format!(
            "determinant lost its real structure (imaginary part {:e} of {:e})",
            worst, big
        )));
    }
    Ok(rotated.iter().map(|c| c.re).collect())
}

fn mirror_representatives(q: &ComplexPolynomial, omega_s: f64) -> Result<Vec<Complex64>> {
    let (zeros, rest) = q.split_zero_roots();
    let mut reps = vec![Complex64::new(0.0, 0.0); zeros.div_ceil(2)];
    if rest.degree() == 0 {
        return Ok(reps);
    }
    // f(s) = q(is): ω ↦ −ω* becomes s ↦ s*, so f is real up to a phase
    let i = Complex64::new(0.0, 1.0);
    let mut power = Complex64::new(1.0, 0.0);
    let rotated: Vec<Complex64> = rest
        .coeffs()
        .iter()
        .map(|c| {
            let v = c * power;
            power *= i;
            v
        })
        .collect();
    let real = real_parts_checked(&rotated)?;
    for root in real_polynomial_roots(&real, omega_s)? {
        let s = root.value;
        // ω = is; real s is a self-mirrored root, a conjugate pair maps to a
        // mirror pair of which the member with Im s ≤ 0 has Re ω ≥ 0
        if s.im <= 0.0 {
            reps.push(i * s);
        }
    }
    // i·s for real s has an exact zero real part; keep the sign positive
    for r in &mut reps {
        if r.re == 0.0 {
            r.re = 0.0;
        }
    }
    Ok(reps)
}

fn square_representatives(q: &ComplexPolynomial, omega_s: f64) -> Result<Vec<Complex64>> {
    let even = q.even_part_in_square();
    let real = real_parts_checked(even.coeffs())?;
    let lambdas = real_polynomial_roots(&real, omega_s * omega_s)?;
    Ok(lambdas.iter().map(|r| r.value.sqrt()).collect())
}

/// Options for the brute-force real-frequency scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    /// A refined minimum counts as a root only below this residual.
    pub accept_residual: f64,
    /// Golden-section stops at this relative bracket width.
    pub refine_tolerance: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            accept_residual: 1e-5,
            refine_tolerance: 1e-12,
        }
    }
}

/// A real frequency where the residual has a deep local minimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRoot {
    pub omega: f64,
    pub residual: f64,
}

/// Locates real roots by scanning the residual over a real ω grid and
/// refining interior local minima by golden-section search. Independent of
/// the polynomial construction; meant for cross-checking [`dispersion_roots`].
pub fn scan_oracle(
    kind: SystemKind,
    p: &MaterialParams,
    k: f64,
    omega_grid: &[f64],
) -> Result<Vec<ScanRoot>> {
    scan_oracle_with(kind, p, k, omega_grid, ScanOptions::default())
}

pub fn scan_oracle_with(
    kind: SystemKind,
    p: &MaterialParams,
    k: f64,
    omega_grid: &[f64],
    options: ScanOptions,
) -> Result<Vec<ScanRoot>> {
    if omega_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if let Some(index) = omega_grid.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::GridNotIncreasing { index: index + 1 });
    }
    let system = pencil(kind, p, k);
    let f = |w: f64| system.residual(Complex64::new(w, 0.0));
    let values: Vec<f64> = omega_grid.iter().map(|&w| f(w)).collect();
    let mut found = Vec::new();
    for i in 1..omega_grid.len().saturating_sub(1) {
        if !(values[i] < values[i - 1] && values[i] <= values[i + 1]) {
            continue;
        }
        let (omega, residual) = golden_section(&f, omega_grid[i - 1], omega_grid[i + 1], options.refine_tolerance);
        if residual <= options.accept_residual {
            found.push(ScanRoot { omega, residual });
        }
    }
    Ok(found)
}

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= tol * (a.abs() + b.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{preset, thermal_off, ModelId};
    use crate::wave::{assemble, uncoupled_omega};

    fn omega_s(p: &MaterialParams) -> f64 {
        SquaredSpeeds::new(p).omega_s2.sqrt()
    }

    #[test]
    fn degrees_per_system() {
        for m in ModelId::ALL {
            let p = preset(m);
            assert_eq!(det_poly(SystemKind::Longitudinal, &p, 200.0).degree(), 9, "{m}");
            assert_eq!(det_poly(SystemKind::Transverse, &p, 200.0).degree(), 6, "{m}");
            assert_eq!(det_poly(SystemKind::Uncoupled, &p, 200.0).degree(), 2, "{m}");
        }
        let lead = det_poly(SystemKind::Longitudinal, &preset(ModelId::I), 200.0).leading();
        let p = preset(ModelId::I);
        assert!((lead - Complex64::new(0.0, -p.rho * p.c0)).norm() < 1e-12 * p.rho * p.c0);
    }

    #[test]
    fn transverse_polynomial_is_even() {
        for k in [0.0, 17.0, 950.0, 1e4] {
            let q = det_poly(SystemKind::Transverse, &preset(ModelId::V), k);
            assert!(q.odd_part_ratio() < 1e-15, "{k}");
        }
    }

    #[test]
    fn thermal_off_factors_out_zero_root() {
        let p = thermal_off(&preset(ModelId::I));
        let q = det_poly(SystemKind::Longitudinal, &p, 300.0);
        let (zeros, rest) = q.split_zero_roots();
        assert_eq!(zeros, 1);
        assert_eq!(rest.degree(), 8);
    }

    #[test]
    fn longitudinal_roots_at_zero_wavenumber() {
        let p = preset(ModelId::I);
        let sq = SquaredSpeeds::new(&p);
        let shift = 3.0 * (p.c2 - p.c1).powi(2) * p.theta0 / (p.rho * p.c0 * p.zeta0);
        let expected_positive = [
            sq.omega_s2.sqrt(),
            (2.0 * p.mu_c / p.zeta0).sqrt(),
            (sq.omega_p2 + shift).sqrt(),
        ];
        let roots = dispersion_roots(SystemKind::Longitudinal, &p, 0.0).unwrap();
        assert_eq!(roots.len(), 9);
        assert_eq!(roots.iter().filter(|r| r.value.norm() == 0.0).count(), 3);
        for e in expected_positive {
            for target in [e, -e] {
                let best = roots.iter().map(|r| (r.value.re - target).abs() + r.value.im.abs()).fold(f64::INFINITY, f64::min);
                assert!(best < 1e-10 * e, "{target}: {best}");
            }
        }
        assert!((shift / sq.omega_p2 - 3.5e-5).abs() < 0.1e-5, "{}", shift / sq.omega_p2);
    }

    #[test]
    fn residual_small_at_roots_large_elsewhere() {
        let p = preset(ModelId::I);
        for k in [0.0, 100.0, 2500.0] {
            for r in dispersion_roots(SystemKind::Longitudinal, &p, k).unwrap() {
                let res = residual(SystemKind::Longitudinal, &p, k, r.value);
                assert!(res <= 1e-8, "k={k} ω={} res={res}", r.value);
            }
        }
        let wp = SquaredSpeeds::new(&p).omega_p2.sqrt();
        let off = residual(SystemKind::Longitudinal, &p, 0.0, Complex64::new(2.0 * wp, 0.0));
        assert!(off > 1e-4, "{off}");
    }

    #[test]
    fn residual_is_row_scale_invariant() {
        let p = preset(ModelId::I);
        for kind in [SystemKind::Longitudinal, SystemKind::Transverse] {
            let root = dispersion_roots(kind, &p, 640.0).unwrap()[0].value;
            let system = pencil(kind, &p, 640.0);
            let scaled = system
                .with_row_scaled(0, Complex64::new(0.0, -3.0))
                .with_row_scaled(2, Complex64::new(2.5e-7, 0.0));
            let (ra, rb) = (system.residual(root), scaled.residual(root));
            assert!((ra - rb).abs() <= 1e-12, "{kind}: {ra} {rb}");
            let off = Complex64::new(1.7e5, 20.0);
            let (ra, rb) = (system.residual(off), scaled.residual(off));
            assert!((ra - rb).abs() <= 1e-12 * ra, "{kind}: {ra} {rb}");
        }
        let root = dispersion_roots(SystemKind::Transverse, &p, 640.0).unwrap()[0].value;
        let a = assemble(SystemKind::Transverse, &p, 640.0, root).entries;
        let mut b = a.clone();
        b.row_mut(1).scale_mut(-37.5);
        b.row_mut(2).scale_mut(1e-6);
        let (ra, rb) = (normalized_residual(&a), normalized_residual(&b));
        assert!((ra - rb).abs() <= 1e-12 * ra.max(1e-300) || (ra - rb).abs() < 1e-20, "{ra} {rb}");
    }

    #[test]
    fn longitudinal_mirror_symmetry() {
        let p = preset(ModelId::I);
        let roots: Vec<Complex64> = dispersion_roots(SystemKind::Longitudinal, &p, 100.0)
            .unwrap()
            .iter()
            .map(|r| r.value)
            .collect();
        assert_eq!(roots.len(), 9);
        let scale = omega_s(&p);
        for r in &roots {
            let mirror = -r.conj();
            let best = roots.iter().map(|s| (s - mirror).norm()).fold(f64::INFINITY, f64::min);
            assert!(best <= 1e-8 * r.norm().max(scale), "{r}: {best}");
        }
    }

    #[test]
    fn representatives_counts() {
        let p = preset(ModelId::I);
        for k in [0.0, 1e-3, 1.0, 100.0, 1e4] {
            let reps = representative_roots(SystemKind::Longitudinal, &p, k).unwrap();
            assert_eq!(reps.len(), 5, "k={k}: {reps:?}");
            assert!(reps.iter().all(|r| r.re >= 0.0));
            let reps = representative_roots(SystemKind::Transverse, &p, k).unwrap();
            assert_eq!(reps.len(), 3);
        }
        let q = preset(ModelId::II);
        let at0 = representative_roots(SystemKind::Longitudinal, &q, 0.0).unwrap();
        assert_eq!(at0.iter().filter(|r| r.norm() == 0.0).count(), 3);
        let off = thermal_off(&p);
        let reps = representative_roots(SystemKind::Longitudinal, &off, 50.0).unwrap();
        assert_eq!(reps.len(), 5);
        assert_eq!(reps.iter().filter(|r| r.norm() == 0.0).count(), 1);
    }

    #[test]
    fn representatives_are_roots() {
        for m in ModelId::ALL {
            let p = preset(m);
            for kind in SystemKind::ALL {
                for k in [0.0, 3.0, 700.0, 1e4] {
                    for r in representative_roots(kind, &p, k).unwrap() {
                        let res = residual(kind, &p, k, r);
                        assert!(res <= 1e-8, "{m} {kind} k={k} ω={r}: {res}");
                    }
                }
            }
        }
    }

    #[test]
    fn scan_matches_transverse_roots() {
        let p = preset(ModelId::I);
        let k = 100.0;
        let n = 4001;
        let grid: Vec<f64> = (0..n).map(|i| 8e5 * i as f64 / (n - 1) as f64).collect();
        let spacing = grid[1] - grid[0];
        let scanned = scan_oracle(SystemKind::Transverse, &p, k, &grid).unwrap();
        let roots: Vec<f64> = representative_roots(SystemKind::Transverse, &p, k)
            .unwrap()
            .iter()
            .filter(|r| r.re > grid[0] && r.re < grid[n - 1])
            .map(|r| r.re)
            .collect();
        assert_eq!(scanned.len(), roots.len(), "{scanned:?} vs {roots:?}");
        for r in &roots {
            assert!(scanned.iter().any(|s| (s.omega - r).abs() <= spacing), "{r}");
        }
    }

    #[test]
    fn scan_rejects_bad_grids_and_finds_nothing_between_roots() {
        let p = preset(ModelId::I);
        assert!(matches!(scan_oracle(SystemKind::Transverse, &p, 1.0, &[]), Err(Error::EmptyGrid)));
        assert!(matches!(
            scan_oracle(SystemKind::Transverse, &p, 1.0, &[1.0, 1.0]),
            Err(Error::GridNotIncreasing { index: 1 })
        ));
        // between the two optic cutoffs at k = 0 there is no root
        let grid: Vec<f64> = (0..200).map(|i| 2.5e5 + 40.0 * i as f64).collect();
        assert!(scan_oracle(SystemKind::Transverse, &p, 0.0, &grid).unwrap().is_empty());
    }

    #[test]
    fn scan_finds_uncoupled_closed_form() {
        let p = preset(ModelId::I);
        let k = 640.0;
        let grid: Vec<f64> = (0..1000).map(|i| 1e3 * i as f64).collect();
        let found = scan_oracle(SystemKind::Uncoupled, &p, k, &grid).unwrap();
        assert_eq!(found.len(), 1);
        let exact = uncoupled_omega(&p, k);
        assert!((found[0].omega - exact).abs() < 1e-6 * exact);
    }
}
