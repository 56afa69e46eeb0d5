//! Dense complex polynomials and their roots.
//!
//! Roots come from the eigenvalues of the (balanced) companion matrix of the
//! scaled monic polynomial and are then polished by Newton iteration on the
//! polynomial itself.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{ComplexField, DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polishing stops once |q(x)| / (‖q‖ max(1, |x|^deg)) falls below this.
pub const POLISH_TOLERANCE: f64 = 1e-10;
/// Newton iteration cap per root.
pub const POLISH_MAX_ITER: usize = 50;
/// Roots closer than this (relative) are grouped into one cluster.
pub const CLUSTER_TOLERANCE: f64 = 1e-6;

const SCHUR_MAX_ITER: usize = 10_000;

/// Polynomial with complex coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexPolynomial {
    coeffs: Vec<Complex64>,
}

impl ComplexPolynomial {
    /// Builds a polynomial, dropping exactly-zero leading coefficients.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut p = Self { coeffs };
        while p.coeffs.len() > 1 && p.coeffs.last() == Some(&Complex64::new(0.0, 0.0)) {
            p.coeffs.pop();
        }
        if p.coeffs.is_empty() {
            p.coeffs.push(Complex64::new(0.0, 0.0));
        }
        p
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    pub fn zero() -> Self {
        Self::constant(Complex64::new(0.0, 0.0))
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().unwrap()
    }

    /// Largest coefficient modulus.
    pub fn norm_max(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drops leading coefficients whose modulus is below `rel` times the
    /// largest coefficient.
    pub fn trimmed(&self, rel: f64) -> Self {
        let cut = rel * self.norm_max();
        let mut coeffs = self.coeffs.clone();
        while coeffs.len() > 1 && coeffs.last().unwrap().norm() <= cut {
            coeffs.pop();
        }
        Self::new(coeffs)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// Value and first derivative by Horner's scheme.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let mut p = zero;
        let mut dp = zero;
        for c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Self {
        if self.degree() == 0 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, c)| c * j as f64)
                .collect(),
        )
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * factor).collect())
    }

    /// q(σx) as a polynomial in x.
    pub fn substitute_scale(&self, sigma: Complex64) -> Self {
        let mut power = Complex64::new(1.0, 0.0);
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let v = c * power;
                power *= sigma;
                v
            })
            .collect();
        Self::new(coeffs)
    }

    /// Number of exactly-zero low-order coefficients, i.e. the multiplicity
    /// of the root ω = 0, and the quotient q(ω)/ω^m.
    pub fn split_zero_roots(&self) -> (usize, Self) {
        if self.is_zero() {
            return (0, self.clone());
        }
        let m = self
            .coeffs
            .iter()
            .take_while(|c| **c == Complex64::new(0.0, 0.0))
            .count();
        (m, Self::new(self.coeffs[m..].to_vec()))
    }

    /// Largest odd-degree coefficient relative to the largest coefficient.
    pub fn odd_part_ratio(&self) -> f64 {
        let odd = self
            .coeffs
            .iter()
            .skip(1)
            .step_by(2)
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        odd / self.norm_max()
    }

    /// Polynomial in λ = ω² built from the even coefficients.
    pub fn even_part_in_square(&self) -> Self {
        Self::new(self.coeffs.iter().step_by(2).copied().collect())
    }

    /// All roots with multiplicity, the variable scaled by a magnitude chosen
    /// from the coefficients.
    pub fn roots(&self) -> Result<Vec<Root>> {
        let (_, deflated) = self.split_zero_roots();
        let scale = root_scale(deflated.coeffs());
        self.roots_scaled(scale)
    }

    /// All roots with multiplicity, with ω = `scale`·x during the companion
    /// solve and the polishing.
    pub fn roots_scaled(&self, scale: f64) -> Result<Vec<Root>> {
        let n = self.degree();
        if n == 0 || self.is_zero() {
            return Err(Error::DegreeTooLow(n));
        }
        let (zeros, rest) = self.split_zero_roots();
        let mut roots: Vec<Root> = (0..zeros)
            .map(|_| Root {
                value: Complex64::new(0.0, 0.0),
                residual: 0.0,
                converged: true,
            })
            .collect();
        if rest.degree() == 0 {
            return Ok(roots);
        }
        let scaled = rest.substitute_scale(Complex64::new(scale, 0.0));
        let scaled = scaled.scale(Complex64::new(1.0 / scaled.norm_max(), 0.0));
        let lead = scaled.leading();
        let monic: Vec<Complex64> = scaled.coeffs[..scaled.degree()]
            .iter()
            .map(|c| c / lead)
            .collect();
        let estimates = companion_eigenvalues(&monic)?;
        for x in estimates {
            let polished = polish(&scaled, x);
            roots.push(Root {
                value: polished.value * scale,
                residual: polished.residual,
                converged: polished.converged,
            });
        }
        Ok(roots)
    }
}

/// A polished root with its final normalized polynomial residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub value: Complex64,
    /// |q(x)| / (‖q‖ max(1, |x|^deg)) in the scaled variable.
    pub residual: f64,
    /// False when polishing hit the iteration cap above tolerance.
    pub converged: bool,
}

/// Group of roots closer than [`CLUSTER_TOLERANCE`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootCluster {
    /// Mean of the member roots.
    pub center: Complex64,
    pub multiplicity: usize,
}

/// Groups roots closer than `rel_tol · max(|a|, |b|, floor)`.
pub fn cluster_roots(roots: &[Complex64], rel_tol: f64, floor: f64) -> Vec<RootCluster> {
    let mut members: Vec<Vec<Complex64>> = Vec::new();
    for &r in roots {
        let hit = members.iter_mut().find(|group| {
            group.iter().any(|&g| {
                let scale = r.norm().max(g.norm()).max(floor);
                (r - g).norm() <= rel_tol * scale
            })
        });
        match hit {
            Some(group) => group.push(r),
            None => members.push(vec![r]),
        }
    }
    members
        .into_iter()
        .map(|group| RootCluster {
            center: group.iter().sum::<Complex64>() / group.len() as f64,
            multiplicity: group.len(),
        })
        .collect()
}

/// Fujiwara-style magnitude bound used to non-dimensionalize the variable.
pub(crate) fn root_scale(coeffs: &[Complex64]) -> f64 {
    let n = coeffs.len() - 1;
    if n == 0 {
        return 1.0;
    }
    let lead = coeffs[n].norm();
    let bound = (0..n)
        .map(|j| (coeffs[j].norm() / lead).powf(1.0 / (n - j) as f64))
        .fold(0.0, f64::max);
    if bound > 0.0 && bound.is_finite() {
        bound
    } else {
        1.0
    }
}

struct Polished {
    value: Complex64,
    residual: f64,
    converged: bool,
}

fn normalized_value(p: &ComplexPolynomial, x: Complex64, value: Complex64) -> f64 {
    let growth = x.norm().powi(p.degree() as i32).max(1.0);
    value.norm() / (p.norm_max() * growth)
}

/// Newton refinement that only accepts steps decreasing |q|.
fn polish(p: &ComplexPolynomial, start: Complex64) -> Polished {
    let mut x = start;
    let (mut value, mut slope) = p.eval_with_derivative(x);
    let mut residual = normalized_value(p, x, value);
    let mut converged = residual <= POLISH_TOLERANCE;
    let mut extra = if converged { 1 } else { 2 };
    for _ in 0..POLISH_MAX_ITER {
        if value.norm() == 0.0 || slope.norm() == 0.0 {
            break;
        }
        let candidate = x - value / slope;
        let (cv, cs) = p.eval_with_derivative(candidate);
        if cv.norm().is_nan() || cv.norm() >= value.norm() {
            break;
        }
        x = candidate;
        value = cv;
        slope = cs;
        residual = normalized_value(p, x, value);
        if residual <= POLISH_TOLERANCE {
            converged = true;
        }
        if converged {
            // a couple of extra steps past the tolerance reach machine precision
            if extra == 0 {
                break;
            }
            extra -= 1;
        }
    }
    Polished {
        value: x,
        residual,
        converged,
    }
}

/// Eigenvalues of the companion matrix of the monic polynomial
/// x^n + a_{n-1} x^{n-1} + … + a_0 (`monic` holds a_0..a_{n-1}).
fn companion_eigenvalues(monic: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = monic.len();
    if n == 1 {
        return Ok(vec![-monic[0]]);
    }
    let mut c = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        c[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for (i, a) in monic.iter().enumerate() {
        c[(i, n - 1)] = -a;
    }
    balance(&mut c);
    let schur = Schur::try_new(c, f64::EPSILON, SCHUR_MAX_ITER).ok_or(Error::EigenFailure(n))?;
    let t = schur.unpack().1;
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// Eigenvalues of a real companion matrix. Complex eigenvalues come out in
/// exact conjugate pairs and real ones with zero imaginary part.
fn real_companion_eigenvalues(monic: &[f64]) -> Result<Vec<Complex64>> {
    let n = monic.len();
    if n == 1 {
        return Ok(vec![Complex64::new(-monic[0], 0.0)]);
    }
    let mut c = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        c[(i, i - 1)] = 1.0;
    }
    for (i, a) in monic.iter().enumerate() {
        c[(i, n - 1)] = -a;
    }
    balance(&mut c);
    let schur = Schur::try_new(c, f64::EPSILON, SCHUR_MAX_ITER).ok_or(Error::EigenFailure(n))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Diagonal similarity balancing by powers of two.
fn balance<T: ComplexField<RealField = f64>>(m: &mut DMatrix<T>) {
    const RADIX: f64 = 2.0;
    let n = m.nrows();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].clone().modulus();
                    r += m[(i, j)].clone().modulus();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let inv = T::from_real(1.0 / f);
                let fwd = T::from_real(f);
                for j in 0..n {
                    m[(i, j)] = m[(i, j)].clone() * inv.clone();
                    m[(j, i)] = m[(j, i)].clone() * fwd.clone();
                }
            }
        }
    }
}

/// Roots of a real polynomial (coefficients lowest first) that preserve the
/// real structure: real roots stay real, complex roots come in exact
/// conjugate pairs. Exactly-zero low-order coefficients give exact zero roots.
pub fn real_polynomial_roots(coeffs: &[f64], scale: f64) -> Result<Vec<Root>> {
    let mut coeffs = coeffs.to_vec();
    while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
        coeffs.pop();
    }
    let n = coeffs.len() - 1;
    if n == 0 {
        return Err(Error::DegreeTooLow(n));
    }
    let zeros = coeffs.iter().take_while(|c| **c == 0.0).count();
    let mut roots: Vec<Root> = (0..zeros)
        .map(|_| Root {
            value: Complex64::new(0.0, 0.0),
            residual: 0.0,
            converged: true,
        })
        .collect();
    let rest = &coeffs[zeros..];
    if rest.len() == 1 {
        return Ok(roots);
    }
    let mut power = 1.0;
    let mut scaled: Vec<f64> = rest
        .iter()
        .map(|c| {
            let v = c * power;
            power *= scale;
            v
        })
        .collect();
    let norm = scaled.iter().map(|c| c.abs()).fold(0.0, f64::max);
    scaled.iter_mut().for_each(|c| *c /= norm);
    let lead = *scaled.last().unwrap();
    let monic: Vec<f64> = scaled[..scaled.len() - 1].iter().map(|c| c / lead).collect();
    let poly = ComplexPolynomial::from_real(&scaled);
    for x in real_companion_eigenvalues(&monic)? {
        if x.im == 0.0 {
            let p = polish_real(&scaled, x.re);
            roots.push(Root {
                value: Complex64::new(p.value.re * scale, 0.0),
                residual: p.residual,
                converged: p.converged,
            });
        } else if x.im > 0.0 {
            let p = polish(&poly, x);
            // polishing must not pull the root onto the real axis
            let value = if p.value.im > 0.0 { p.value } else { x };
            let residual = normalized_value(&poly, value, poly.eval(value));
            for v in [value, value.conj()] {
                roots.push(Root {
                    value: v * scale,
                    residual,
                    converged: p.converged,
                });
            }
        }
    }
    Ok(roots)
}

fn polish_real(coeffs: &[f64], start: f64) -> Polished {
    let eval = |x: f64| {
        let mut p = 0.0;
        let mut dp = 0.0;
        for c in coeffs.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    };
    let norm = coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max);
    let deg = coeffs.len() as i32 - 1;
    let normalized = |x: f64, v: f64| v.abs() / (norm * x.abs().powi(deg).max(1.0));
    let mut x = start;
    let (mut value, mut slope) = eval(x);
    let mut residual = normalized(x, value);
    let mut converged = residual <= POLISH_TOLERANCE;
    let mut extra = if converged { 1 } else { 2 };
    for _ in 0..POLISH_MAX_ITER {
        if value == 0.0 || slope == 0.0 {
            break;
        }
        let candidate = x - value / slope;
        let (cv, cs) = eval(candidate);
        if cv.is_nan() || cv.abs() >= value.abs() {
            break;
        }
        x = candidate;
        value = cv;
        slope = cs;
        residual = normalized(x, value);
        if residual <= POLISH_TOLERANCE {
            converged = true;
        }
        if converged {
            if extra == 0 {
                break;
            }
            extra -= 1;
        }
    }
    Polished {
        value: Complex64::new(x, 0.0),
        residual,
        converged,
    }
}

impl Add for &ComplexPolynomial {
    type Output = ComplexPolynomial;

    fn add(self, rhs: Self) -> ComplexPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = Complex64::new(0.0, 0.0);
        ComplexPolynomial::new(
            (0..n)
                .map(|j| {
                    self.coeffs.get(j).copied().unwrap_or(zero)
                        + rhs.coeffs.get(j).copied().unwrap_or(zero)
                })
                .collect(),
        )
    }
}

impl Neg for &ComplexPolynomial {
    type Output = ComplexPolynomial;

    fn neg(self) -> ComplexPolynomial {
        ComplexPolynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Sub for &ComplexPolynomial {
    type Output = ComplexPolynomial;

    fn sub(self, rhs: Self) -> ComplexPolynomial {
        self + &(-rhs)
    }
}

impl Mul for &ComplexPolynomial {
    type Output = ComplexPolynomial;

    fn mul(self, rhs: Self) -> ComplexPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return ComplexPolynomial::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ComplexPolynomial::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted_by_re(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn quadratic_cutoff_roots() {
        let ws2 = 6.0e10;
        let q = ComplexPolynomial::from_real(&[-ws2, 0.0, 1.0]);
        let roots = sorted_by_re(q.roots().unwrap().iter().map(|r| r.value).collect());
        let ws = ws2.sqrt();
        assert!((roots[0] - c(-ws, 0.0)).norm() / ws < 1e-14);
        assert!((roots[1] - c(ws, 0.0)).norm() / ws < 1e-14);
        assert!((ws - 2.4495e5).abs() / 2.4495e5 < 1e-4);
    }

    #[test]
    fn linear_root_is_zero() {
        let q = ComplexPolynomial::from_real(&[0.0, 1.0]);
        let roots = q.roots().unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].value, c(0.0, 0.0));
    }

    #[test]
    fn constant_has_no_roots() {
        assert!(matches!(
            ComplexPolynomial::from_real(&[3.0]).roots(),
            Err(Error::DegreeTooLow(0))
        ));
    }

    #[test]
    fn complex_roots_of_product() {
        let targets = [c(1.0, 2.0), c(-3.0, 0.5), c(0.25, -1.0), c(10.0, 0.0), c(0.0, -7.0)];
        let mut q = ComplexPolynomial::one();
        for t in targets {
            q = &q * &ComplexPolynomial::new(vec![-t, c(1.0, 0.0)]);
        }
        let roots = q.roots().unwrap();
        assert_eq!(roots.len(), targets.len());
        for t in targets {
            let best = roots.iter().map(|r| (r.value - t).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-12 * t.norm().max(1.0), "{t}: {best}");
        }
        assert!(roots.iter().all(|r| r.converged));
    }

    #[test]
    fn wide_dynamic_range() {
        // roots spread over ten decades, as in the dispersion determinants
        let targets = [1e-3, 1.0, 2.5e2, 6.0e4, 2.4e5, 4.6e5, 7.0e6];
        let mut q = ComplexPolynomial::one();
        for t in targets {
            q = &q * &ComplexPolynomial::from_real(&[-t, 1.0]);
        }
        let roots = q.roots_scaled(2.4e5).unwrap();
        for t in targets {
            let best = roots.iter().map(|r| (r.value.re - t).abs() + r.value.im.abs()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-9 * t, "{t}: {best}");
        }
    }

    #[test]
    fn zero_roots_are_exact() {
        let q = ComplexPolynomial::from_real(&[0.0, 0.0, -4.0, 0.0, 1.0]);
        let roots = q.roots().unwrap();
        assert_eq!(roots.iter().filter(|r| r.value == c(0.0, 0.0)).count(), 2);
        assert_eq!(roots.len(), 4);
    }

    #[test]
    fn real_polynomial_keeps_structure() {
        // (s - 1)(s + 2)(s^2 + 2s + 5) s
        let p = ComplexPolynomial::from_real(&[-1.0, 1.0]);
        let p = &p * &ComplexPolynomial::from_real(&[2.0, 1.0]);
        let p = &p * &ComplexPolynomial::from_real(&[5.0, 2.0, 1.0]);
        let p = &p * &ComplexPolynomial::from_real(&[0.0, 1.0]);
        let coeffs: Vec<f64> = p.coeffs().iter().map(|c| c.re).collect();
        let roots = real_polynomial_roots(&coeffs, 1.0).unwrap();
        assert_eq!(roots.len(), 5);
        let real: Vec<f64> = roots.iter().filter(|r| r.value.im == 0.0).map(|r| r.value.re).collect();
        assert_eq!(real.len(), 3);
        let complex: Vec<Complex64> = roots.iter().filter(|r| r.value.im != 0.0).map(|r| r.value).collect();
        assert_eq!(complex.len(), 2);
        assert_eq!(complex[0], complex[1].conj());
        assert!((complex[0] - c(-1.0, 2.0)).norm() < 1e-13 || (complex[0] - c(-1.0, -2.0)).norm() < 1e-13);
    }

    #[test]
    fn clusters_group_close_roots() {
        let roots = [c(1.0, 0.0), c(1.0 + 1e-9, 0.0), c(2.0, 0.0)];
        let clusters = cluster_roots(&roots, CLUSTER_TOLERANCE, 1.0);
        assert_eq!(clusters.len(), 2);
        assert_eq!(clusters.iter().map(|c| c.multiplicity).max(), Some(2));
    }

    #[test]
    fn arithmetic_and_helpers() {
        let p = ComplexPolynomial::from_real(&[1.0, 2.0, 3.0]);
        let q = ComplexPolynomial::from_real(&[0.0, 1.0]);
        assert_eq!((&p * &q).coeffs().len(), 4);
        assert_eq!((&p - &p).degree(), 0);
        assert_eq!(p.derivative(), ComplexPolynomial::from_real(&[2.0, 6.0]));
        let z = c(0.5, -1.5);
        let (v, d) = p.eval_with_derivative(z);
        assert!((v - p.eval(z)).norm() < 1e-15);
        assert!((d - p.derivative().eval(z)).norm() < 1e-15);
        let s = p.substitute_scale(c(2.0, 0.0));
        assert!((s.eval(z) - p.eval(z * 2.0)).norm() < 1e-12);
        let even = ComplexPolynomial::from_real(&[1.0, 0.0, 3.0, 0.0, 5.0]);
        assert_eq!(even.odd_part_ratio(), 0.0);
        assert_eq!(even.even_part_in_square(), ComplexPolynomial::from_real(&[1.0, 3.0, 5.0]));
        let tiny = ComplexPolynomial::from_real(&[1.0, 1.0, 1e-20]);
        assert_eq!(tiny.trimmed(1e-14).degree(), 1);
    }
}
