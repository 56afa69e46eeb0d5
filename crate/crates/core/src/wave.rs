//! Plane-wave systems for propagation along x.
//!
//! With the harmonic ansatz e^{i(kx − ωt)} the field equations reduce to
//!
//! * a 5×5 coupled longitudinal system in (u₁, P^D, P^S, P_[23], θ),
//! * two identical 3×3 transverse systems in (u_ξ, P_(1ξ), P_[1ξ]), ξ = 2, 3,
//! * a scalar relation shared by the uncoupled P_(23) and P^V fields.
//!
//! Every matrix entry is at most quadratic in ω, so each system is held as a
//! [`Pencil`]: a matrix of quadratic polynomials at fixed k. Assembling at a
//! given ω and building the determinant polynomial both go through it.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::material::{MaterialParams, SquaredSpeeds};
use crate::polyeig::ComplexPolynomial;

/// Which plane-wave system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SystemKind {
    /// 5×5 coupled longitudinal/thermal system.
    Longitudinal,
    /// 3×3 transverse system (ξ = 2 and ξ = 3 coincide).
    Transverse,
    /// Scalar uncoupled relation, treated as a 1×1 system.
    Uncoupled,
}

impl SystemKind {
    pub const ALL: [SystemKind; 3] = [
        SystemKind::Longitudinal,
        SystemKind::Transverse,
        SystemKind::Uncoupled,
    ];

    pub fn dimension(self) -> usize {
        match self {
            SystemKind::Longitudinal => 5,
            SystemKind::Transverse => 3,
            SystemKind::Uncoupled => 1,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            SystemKind::Longitudinal => "long",
            SystemKind::Transverse => "trans",
            SystemKind::Uncoupled => "uncoupled",
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SystemKind::Longitudinal => "longitudinal",
            SystemKind::Transverse => "transverse",
            SystemKind::Uncoupled => "uncoupled",
        })
    }
}

impl FromStr for SystemKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "long" | "longitudinal" => Ok(SystemKind::Longitudinal),
            "trans" | "transverse" => Ok(SystemKind::Transverse),
            "uncoupled" => Ok(SystemKind::Uncoupled),
            other => Err(format!("unknown system `{other}`")),
        }
    }
}

/// Entry c₀ + c₁ω + c₂ω².
pub type Quadratic = [Complex64; 3];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn im(x: f64) -> Complex64 {
    Complex64::new(0.0, x)
}

/// Matrix of quadratic polynomials in ω at a fixed wavenumber.
#[derive(Debug, Clone, PartialEq)]
pub struct Pencil {
    pub kind: SystemKind,
    pub k: f64,
    n: usize,
    entries: Vec<Quadratic>,
}

impl Pencil {
    fn zeros(kind: SystemKind, k: f64) -> Self {
        let n = kind.dimension();
        Self {
            kind,
            k,
            n,
            entries: vec![[ZERO; 3]; n * n],
        }
    }

    /// Sets entry (row, col), 1-based to match the usual a_ij numbering.
    fn set(&mut self, row: usize, col: usize, q: Quadratic) {
        self.entries[(row - 1) * self.n + (col - 1)] = q;
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    /// Coefficients of entry (row, col), 0-based.
    pub fn entry(&self, row: usize, col: usize) -> Quadratic {
        self.entries[row * self.n + col]
    }

    pub fn is_structural_zero(&self, row: usize, col: usize) -> bool {
        self.entry(row, col) == [ZERO; 3]
    }

    /// Evaluates every entry at ω.
    pub fn at(&self, omega: Complex64) -> WaveSystemMatrix {
        let w2 = omega * omega;
        let entries = DMatrix::from_fn(self.n, self.n, |i, j| {
            let [c0, c1, c2] = self.entry(i, j);
            if c1 == ZERO && c2 == ZERO {
                c0
            } else {
                c0 + c1 * omega + c2 * w2
            }
        });
        WaveSystemMatrix {
            kind: self.kind,
            k: self.k,
            omega,
            entries,
        }
    }

    /// Row scales at ω: for each row, the largest entry magnitude measured
    /// term by term, max_j Σ_t |c_ijt| |ω|^t. Unlike the entry values these
    /// do not cancel at a root.
    pub fn row_scales(&self, omega: Complex64) -> Vec<f64> {
        let r = omega.norm();
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| {
                        let [c0, c1, c2] = self.entry(i, j);
                        c0.norm() + c1.norm() * r + c2.norm() * r * r
                    })
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    /// |det A(k, ω)| over the product of [`Pencil::row_scales`].
    pub fn residual(&self, omega: Complex64) -> f64 {
        let scales = self.row_scales(omega);
        if scales.contains(&0.0) {
            return 0.0;
        }
        let det = self.at(omega).determinant().norm();
        scales.iter().fold(det, |acc, s| acc / s)
    }

    /// Copy with one row multiplied by `factor`.
    pub fn with_row_scaled(&self, row: usize, factor: Complex64) -> Self {
        let mut out = self.clone();
        for j in 0..self.n {
            let q = &mut out.entries[row * self.n + j];
            for c in q.iter_mut() {
                *c *= factor;
            }
        }
        out
    }

    /// det A(k, ω) as a polynomial in ω by cofactor expansion over the
    /// nonzero entries.
    pub fn determinant_polynomial(&self) -> ComplexPolynomial {
        let polys: Vec<Option<ComplexPolynomial>> = self
            .entries
            .iter()
            .map(|q| {
                if *q == [ZERO; 3] {
                    None
                } else {
                    Some(ComplexPolynomial::new(q.to_vec()))
                }
            })
            .collect();
        let mut memo = vec![None; 1 << self.n];
        laplace(&polys, self.n, 0, &mut memo)
    }
}

/// Minor of rows `used.count_ones()..n` over the columns not in `used`,
/// expanded along its first row.
fn laplace(
    polys: &[Option<ComplexPolynomial>],
    n: usize,
    used: usize,
    memo: &mut Vec<Option<ComplexPolynomial>>,
) -> ComplexPolynomial {
    let row = used.count_ones() as usize;
    if row == n {
        return ComplexPolynomial::one();
    }
    if let Some(p) = &memo[used] {
        return p.clone();
    }
    let mut acc = ComplexPolynomial::zero();
    let mut position = 0;
    for col in 0..n {
        if used & (1 << col) != 0 {
            continue;
        }
        if let Some(entry) = &polys[row * n + col] {
            let minor = laplace(polys, n, used | (1 << col), memo);
            if !minor.is_zero() {
                let term = entry * &minor;
                acc = if position % 2 == 0 { &acc + &term } else { &acc - &term };
            }
        }
        position += 1;
    }
    memo[used] = Some(acc.clone());
    acc
}

/// A wave-system matrix evaluated at (k, ω).
#[derive(Debug, Clone, PartialEq)]
pub struct WaveSystemMatrix {
    pub kind: SystemKind,
    pub k: f64,
    pub omega: Complex64,
    pub entries: DMatrix<Complex64>,
}

impl WaveSystemMatrix {
    pub fn determinant(&self) -> Complex64 {
        self.entries.clone().determinant()
    }
}

/// The coupled longitudinal system in (u₁, P^D, P^S, P_[23], θ).
pub fn longitudinal_pencil(p: &MaterialParams, k: f64) -> Pencil {
    let sq = SquaredSpeeds::new(p);
    let k2 = k * k;
    let z = p.zeta0;
    // t appears with factors −1, 2, 1, −2 in a22, a23, a32, a33
    let t = k2 * (p.alpha2_bar - p.alpha3_bar) / (3.0 * z);
    let bulk_e = 3.0 * p.lambda_e + 2.0 * p.mu_e;
    let dc = p.c2 - p.c1;
    let mut m = Pencil::zeros(SystemKind::Longitudinal, k);
    m.set(1, 1, [re(-sq.c_p2 * k2), ZERO, re(1.0)]);
    m.set(1, 2, [im(-2.0 * k * p.mu_e / p.rho), ZERO, ZERO]);
    m.set(1, 3, [im(-k * bulk_e / p.rho), ZERO, ZERO]);
    m.set(1, 5, [im(-k * p.c1 / p.rho), ZERO, ZERO]);
    m.set(2, 1, [im(4.0 * k * p.mu_e / (3.0 * z)), ZERO, ZERO]);
    m.set(2, 2, [re(-t - sq.omega_s2), ZERO, re(1.0)]);
    m.set(2, 3, [re(2.0 * t), ZERO, ZERO]);
    m.set(3, 1, [im(k * bulk_e / (3.0 * z)), ZERO, ZERO]);
    m.set(3, 2, [re(t), ZERO, ZERO]);
    m.set(3, 3, [re(-sq.omega_p2 - 2.0 * t), ZERO, re(1.0)]);
    m.set(3, 5, [re(dc / z), ZERO, ZERO]);
    let curl = p.alpha2_bar + p.alpha3_bar + 2.0 * p.alpha1_bar;
    m.set(4, 4, [re(-curl * k2 / z - 2.0 * p.mu_c / z), ZERO, re(1.0)]);
    m.set(4, 5, [im(-k * p.c3 / z), ZERO, ZERO]);
    m.set(5, 1, [ZERO, re(k * p.theta0 * p.c1), ZERO]);
    m.set(5, 3, [ZERO, im(-3.0 * dc * p.theta0), ZERO]);
    m.set(5, 4, [ZERO, re(2.0 * k * p.c3 * p.theta0), ZERO]);
    m.set(5, 5, [re(k2 * p.c4 / p.theta0), im(-p.rho * p.c0), ZERO]);
    m
}

/// The transverse system in (u_ξ, P_(1ξ), P_[1ξ]), rows scaled as printed
/// (the micro rows carry −2ω²). Independent of every thermal constant.
pub fn transverse_pencil(p: &MaterialParams, k: f64) -> Pencil {
    let sq = SquaredSpeeds::new(p);
    let k2 = k * k;
    let z = p.zeta0;
    let curv = k2 * p.alpha2_bar / z;
    let mut m = Pencil::zeros(SystemKind::Transverse, k);
    m.set(1, 1, [re(sq.c_s2 * k2), ZERO, re(-1.0)]);
    m.set(1, 2, [im(2.0 * k * p.mu_e / p.rho), ZERO, ZERO]);
    m.set(1, 3, [im(-2.0 * k * p.mu_c / p.rho), ZERO, ZERO]);
    m.set(2, 1, [im(-2.0 * k * p.mu_e / z), ZERO, ZERO]);
    m.set(2, 2, [re(curv + 2.0 * sq.omega_s2), ZERO, re(-2.0)]);
    m.set(2, 3, [re(curv), ZERO, ZERO]);
    m.set(3, 1, [im(2.0 * k * p.mu_c / z), ZERO, ZERO]);
    m.set(3, 2, [re(curv), ZERO, ZERO]);
    m.set(3, 3, [re(curv + 4.0 * p.mu_c / z), ZERO, re(-2.0)]);
    m
}

/// The uncoupled relation ω² − c_m²k² − ω_s² = 0 as a 1×1 system.
pub fn uncoupled_pencil(p: &MaterialParams, k: f64) -> Pencil {
    let sq = SquaredSpeeds::new(p);
    let mut m = Pencil::zeros(SystemKind::Uncoupled, k);
    m.set(1, 1, [re(-sq.c_m2 * k * k - sq.omega_s2), ZERO, re(1.0)]);
    m
}

pub fn pencil(kind: SystemKind, p: &MaterialParams, k: f64) -> Pencil {
    match kind {
        SystemKind::Longitudinal => longitudinal_pencil(p, k),
        SystemKind::Transverse => transverse_pencil(p, k),
        SystemKind::Uncoupled => uncoupled_pencil(p, k),
    }
}

pub fn assemble_longitudinal(p: &MaterialParams, k: f64, omega: Complex64) -> WaveSystemMatrix {
    longitudinal_pencil(p, k).at(omega)
}

pub fn assemble_transverse(p: &MaterialParams, k: f64, omega: Complex64) -> WaveSystemMatrix {
    transverse_pencil(p, k).at(omega)
}

pub fn assemble(kind: SystemKind, p: &MaterialParams, k: f64, omega: Complex64) -> WaveSystemMatrix {
    pencil(kind, p, k).at(omega)
}

/// Closed-form TSO–TCVO branch ω(k) = √(c_m²k² + ω_s²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncoupledBranch {
    pub c_m: f64,
    pub omega_s: f64,
}

impl UncoupledBranch {
    pub fn new(p: &MaterialParams) -> Self {
        let sq = SquaredSpeeds::new(p);
        Self {
            c_m: sq.c_m2.sqrt(),
            omega_s: sq.omega_s2.sqrt(),
        }
    }

    pub fn omega(&self, k: f64) -> f64 {
        (self.c_m * self.c_m * k * k + self.omega_s * self.omega_s).sqrt()
    }
}

pub fn uncoupled_omega(p: &MaterialParams, k: f64) -> f64 {
    let sq = SquaredSpeeds::new(p);
    (sq.c_m2 * k * k + sq.omega_s2).sqrt()
}

/// Parses the config-style system selector, where `all` means every system.
pub fn parse_system_selector(s: &str) -> Result<Vec<SystemKind>, Error> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(SystemKind::ALL.to_vec());
    }
    s.parse::<SystemKind>()
        .map(|k| vec![k])
        .map_err(|message| Error::Config {
            line: 0,
            key: "system".into(),
            message,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{preset, thermal_off, ModelId};

    const LONGITUDINAL_PATTERN: [(usize, usize); 17] = [
        (1, 1), (1, 2), (1, 3), (1, 5),
        (2, 1), (2, 2), (2, 3),
        (3, 1), (3, 2), (3, 3), (3, 5),
        (4, 4), (4, 5),
        (5, 1), (5, 3), (5, 4), (5, 5),
    ];

    fn w(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn longitudinal_sparsity_pattern() {
        let p = preset(ModelId::I);
        let m = longitudinal_pencil(&p, 150.0);
        for i in 1..=5 {
            for j in 1..=5 {
                let nonzero = !m.is_structural_zero(i - 1, j - 1);
                assert_eq!(nonzero, LONGITUDINAL_PATTERN.contains(&(i, j)), "({i},{j})");
            }
        }
        let t = transverse_pencil(&p, 150.0);
        for i in 0..3 {
            for j in 0..3 {
                assert!(!t.is_structural_zero(i, j));
            }
        }
    }

    #[test]
    fn longitudinal_at_zero_wavenumber() {
        let p = preset(ModelId::I);
        let omega = w(1.234e5);
        let a = assemble_longitudinal(&p, 0.0, omega).entries;
        for (i, j) in [(1, 2), (1, 3), (1, 5), (2, 1), (2, 3), (3, 1), (3, 2), (4, 5), (5, 1), (5, 4)] {
            assert_eq!(a[(i - 1, j - 1)], w(0.0), "a{i}{j}");
        }
        let w2 = omega * omega;
        assert_eq!(a[(0, 0)], w2);
        let ws2 = 2.0 * (p.mu_e + p.mu_micro) / p.zeta0;
        assert!((a[(1, 1)] - (w2 - ws2)).norm() <= 1e-15 * ws2);
        assert!((a[(3, 3)] - (w2 - 2.0 * p.mu_c / p.zeta0)).norm() <= 1e-15 * w2.norm());
    }

    #[test]
    fn thermal_off_decouples_last_row_and_column() {
        let p = thermal_off(&preset(ModelId::I));
        let omega = w(3.0e5);
        let a = assemble_longitudinal(&p, 250.0, omega).entries;
        for (i, j) in [(1, 5), (3, 5), (4, 5), (5, 1), (5, 3), (5, 4)] {
            assert_eq!(a[(i - 1, j - 1)], w(0.0), "a{i}{j}");
        }
        assert_eq!(a[(4, 4)], Complex64::new(0.0, -p.rho * p.c0) * omega);
    }

    #[test]
    fn a22_at_shear_cutoff() {
        let p = preset(ModelId::I);
        let ws = (2.0 * (p.mu_e + p.mu_micro) / p.zeta0).sqrt();
        let a = assemble_longitudinal(&p, 100.0, w(ws)).entries;
        // −k²(ᾱ₂ − ᾱ₃)/(3ζ₀) = −1e4 · 2e3 / 0.03
        let expected = -6.666_666_666_666_667e8;
        assert!((a[(1, 1)].re - expected).abs() < 1e-6 * expected.abs(), "{}", a[(1, 1)]);
        assert!(a[(1, 1)].im == 0.0);
    }

    #[test]
    fn transverse_ignores_thermal_constants() {
        let p = preset(ModelId::I);
        let mut q = thermal_off(&p);
        q.c0 *= 3.0;
        q.theta0 = 400.0;
        for k in [0.0, 1.0, 321.0, 1e4] {
            let omega = Complex64::new(2.1e5, -3.0);
            assert_eq!(assemble_transverse(&p, k, omega), assemble_transverse(&q, k, omega));
        }
    }

    #[test]
    fn transverse_at_zero_wavenumber() {
        let p = preset(ModelId::I);
        let omega = w(1.0e5);
        let a = assemble_transverse(&p, 0.0, omega).entries;
        assert_eq!(a[(2, 2)], -2.0 * omega * omega + w(4.0 * p.mu_c / p.zeta0));
        let cutoff = (2.0 * p.mu_c / p.zeta0).sqrt();
        assert!((cutoff - 2.9665e5).abs() / 2.9665e5 < 1e-4);

        let q = preset(ModelId::II);
        let b = assemble_transverse(&q, 0.0, omega).entries;
        for (i, j) in [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)] {
            assert_eq!(b[(i, j)], w(0.0));
        }
    }

    #[test]
    fn cosserat_entries_vanish_with_mu_c() {
        let p = preset(ModelId::II);
        let a = assemble_transverse(&p, 500.0, w(1e5)).entries;
        assert_eq!(a[(0, 2)], w(0.0));
        assert_eq!(a[(2, 0)], w(0.0));
    }

    #[test]
    fn uncoupled_closed_form() {
        let p = preset(ModelId::I);
        assert!((uncoupled_omega(&p, 0.0) - 2.4495e5).abs() / 2.4495e5 < 1e-4);
        let at500 = uncoupled_omega(&p, 500.0);
        assert!((at500 - 3.3166e5).abs() / 3.3166e5 < 1e-4, "{at500}");
        let b = UncoupledBranch::new(&p);
        assert_eq!(b.omega(500.0), at500);
        let k = 1e9;
        let slope = (b.omega(2.0 * k) - b.omega(k)) / k;
        assert!((slope - b.c_m).abs() / b.c_m < 1e-9);
        assert!((b.c_m - (2e3f64 / 0.01).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn determinant_polynomial_matches_direct_evaluation() {
        let p = preset(ModelId::III);
        let pencil = longitudinal_pencil(&p, 420.0);
        let q = pencil.determinant_polynomial();
        assert_eq!(q.degree(), 9);
        for omega in [Complex64::new(1.3e5, 2.0e3), Complex64::new(-4.0e5, -1.0e2)] {
            let direct = pencil.at(omega).determinant();
            let poly = q.eval(omega);
            assert!((direct - poly).norm() <= 1e-10 * direct.norm(), "{direct} vs {poly}");
        }
    }

    #[test]
    fn system_selector() {
        assert_eq!(parse_system_selector("all").unwrap().len(), 3);
        assert_eq!(parse_system_selector("trans").unwrap(), vec![SystemKind::Transverse]);
        assert!(parse_system_selector("sideways").is_err());
    }
}
