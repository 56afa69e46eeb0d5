//! Constitutive constants of the isotropic thermoelastic relaxed micromorphic
//! solid, the curvature reparametrization, and the six named model presets.
//!
//! Everything is stored in SI units. Thermal constants quoted in calories are
//! converted at ingestion with a configurable joules-per-calorie factor (see
//! [`UnitConversion`]).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Pascals per megapascal.
pub const PA_PER_MPA: f64 = 1.0e6;
/// Default joules per calorie (thermochemical calorie).
pub const DEFAULT_CALORIE_JOULES: f64 = 4.184;
/// Offset between the Celsius and Kelvin scales.
pub const CELSIUS_TO_KELVIN: f64 = 273.15;

/// How the raw inputs were converted to SI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitConversion {
    /// Joules per calorie applied to every `Cal`-denominated constant.
    pub calorie_joules: f64,
    /// Whether the reference temperature was shifted to kelvin.
    pub theta0_absolute: bool,
}

impl Default for UnitConversion {
    fn default() -> Self {
        Self {
            calorie_joules: DEFAULT_CALORIE_JOULES,
            theta0_absolute: false,
        }
    }
}

/// All constitutive constants, SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    /// Macroscopic Lamé modulus λ_e (Pa).
    pub lambda_e: f64,
    /// Macroscopic shear modulus μ_e (Pa).
    pub mu_e: f64,
    /// Cosserat couple modulus μ_c (Pa).
    pub mu_c: f64,
    /// Micro-scale Lamé modulus λ_micro (Pa).
    pub lambda_micro: f64,
    /// Micro-scale shear modulus μ_micro (Pa).
    pub mu_micro: f64,
    /// Curvature parameter ᾱ₁ (Pa·m²).
    pub alpha1_bar: f64,
    /// Curvature parameter ᾱ₂ (Pa·m²).
    pub alpha2_bar: f64,
    /// Curvature parameter ᾱ₃ (Pa·m²).
    pub alpha3_bar: f64,
    /// Mass density ρ (kg/m³).
    pub rho: f64,
    /// Micro-inertia density ζ₀ = ρζ (kg/m).
    pub zeta0: f64,
    /// Heat capacity coefficient C₀ (J·kg⁻¹·K⁻¹).
    pub c0: f64,
    /// Thermoelastic coupling of the macroscopic strain C₁ (J·m⁻³·K⁻¹).
    pub c1: f64,
    /// Thermoelastic coupling of the micro-distortion C₂ (J·m⁻³·K⁻¹).
    pub c2: f64,
    /// Thermal coupling of the micro-curvature C₃ (J·m⁻²·K⁻¹).
    pub c3: f64,
    /// Conductivity coefficient C₄ (J·m⁻¹·s⁻¹).
    pub c4: f64,
    /// Reference temperature θ₀, used as the literal coefficient.
    pub theta0: f64,
    pub units: UnitConversion,
}

/// Curvature moduli in irreducible form: a₁ weights |dev sym α|², a₂ weights
/// |skew α|², a₃ weights (tr α)².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureModuli {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

/// Maps irreducible curvature moduli (a₁, a₂, a₃) to (ᾱ₁, ᾱ₂, ᾱ₃).
pub fn convert_curvature(a1: f64, a2: f64, a3: f64) -> (f64, f64, f64) {
    (a3 - a1 / 3.0, (a1 + a2) / 2.0, (a1 - a2) / 2.0)
}

/// Inverse of [`convert_curvature`].
pub fn curvature_moduli(alpha1: f64, alpha2: f64, alpha3: f64) -> CurvatureModuli {
    CurvatureModuli {
        a1: alpha2 + alpha3,
        a2: alpha2 - alpha3,
        a3: (3.0 * alpha1 + alpha2 + alpha3) / 3.0,
    }
}

/// Characteristic speeds and cut-off frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedSpeeds {
    /// Longitudinal Cauchy speed, c_p² = (λ_e + 2μ_e)/ρ.
    pub c_p: f64,
    /// Transverse Cauchy speed, c_s² = (μ_e + μ_c)/ρ.
    pub c_s: f64,
    /// Micro-curvature speed, c_m² = (ᾱ₂ + ᾱ₃)/ζ₀.
    pub c_m: f64,
    /// ω_s² = 2(μ_e + μ_micro)/ζ₀.
    pub omega_s: f64,
    /// ω_p² = (2(μ_e + μ_micro) + 3(λ_e + λ_micro))/ζ₀.
    pub omega_p: f64,
}

impl DerivedSpeeds {
    /// Computes the speeds without checking the parameters first. Negative
    /// squares produce NaN.
    pub fn unchecked(p: &MaterialParams) -> Self {
        let sq = SquaredSpeeds::new(p);
        Self {
            c_p: sq.c_p2.sqrt(),
            c_s: sq.c_s2.sqrt(),
            c_m: sq.c_m2.sqrt(),
            omega_s: sq.omega_s2.sqrt(),
            omega_p: sq.omega_p2.sqrt(),
        }
    }
}

/// Squared speeds, shared by every matrix assembly.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SquaredSpeeds {
    pub c_p2: f64,
    pub c_s2: f64,
    pub c_m2: f64,
    pub omega_s2: f64,
    pub omega_p2: f64,
}

impl SquaredSpeeds {
    pub(crate) fn new(p: &MaterialParams) -> Self {
        Self {
            c_p2: (p.lambda_e + 2.0 * p.mu_e) / p.rho,
            c_s2: (p.mu_e + p.mu_c) / p.rho,
            c_m2: (p.alpha2_bar + p.alpha3_bar) / p.zeta0,
            omega_s2: 2.0 * (p.mu_e + p.mu_micro) / p.zeta0,
            omega_p2: (2.0 * (p.mu_e + p.mu_micro) + 3.0 * (p.lambda_e + p.lambda_micro)) / p.zeta0,
        }
    }
}

/// Speeds of a validated parameter set.
pub fn derived_speeds(p: &MaterialParams) -> Result<DerivedSpeeds, Error> {
    let report = validate(p);
    if !report.passed() {
        return Err(Error::Validation(report));
    }
    Ok(DerivedSpeeds::unchecked(p))
}

/// One violated positivity condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// The condition that failed, e.g. `"mu_e > 0"`.
    pub rule: String,
    /// The offending value of the checked expression.
    pub value: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated (value {:e})", self.rule, self.value)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, rule: &str) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "pass");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

const CURVATURE_ROUNDOFF: f64 = 1e-12;

/// Checks positivity of the energy and the listed sign conditions. Never
/// fails; the caller decides whether violations are fatal.
pub fn validate(p: &MaterialParams) -> ValidationReport {
    let a = curvature_moduli(p.alpha1_bar, p.alpha2_bar, p.alpha3_bar);
    // the a-moduli are recovered from the ᾱ's, so exact zeros come back as ±ulp
    let a_floor = -CURVATURE_ROUNDOFF
        * p.alpha1_bar.abs().max(p.alpha2_bar.abs()).max(p.alpha3_bar.abs());
    let checks: [(&str, f64, bool); 13] = [
        ("mu_e > 0", p.mu_e, p.mu_e > 0.0),
        ("mu_micro > 0", p.mu_micro, p.mu_micro > 0.0),
        ("mu_c ≥ 0", p.mu_c, p.mu_c >= 0.0),
        ("rho > 0", p.rho, p.rho > 0.0),
        ("zeta0 > 0", p.zeta0, p.zeta0 > 0.0),
        ("theta0 > 0", p.theta0, p.theta0 > 0.0),
        ("c0 > 0", p.c0, p.c0 > 0.0),
        ("c4 ≥ 0", p.c4, p.c4 >= 0.0),
        (
            "3 lambda_e + 2 mu_e > 0",
            3.0 * p.lambda_e + 2.0 * p.mu_e,
            3.0 * p.lambda_e + 2.0 * p.mu_e > 0.0,
        ),
        (
            "3 lambda_micro + 2 mu_micro > 0",
            3.0 * p.lambda_micro + 2.0 * p.mu_micro,
            3.0 * p.lambda_micro + 2.0 * p.mu_micro > 0.0,
        ),
        ("a1 ≥ 0", a.a1, a.a1 >= a_floor),
        ("a2 ≥ 0", a.a2, a.a2 >= a_floor),
        ("a3 ≥ 0", a.a3, a.a3 >= a_floor),
    ];
    let violations = checks
        .iter()
        .filter(|(_, _, ok)| !ok)
        .map(|(rule, value, _)| Violation {
            rule: (*rule).to_string(),
            value: *value,
        })
        .collect();
    ValidationReport { violations }
}

/// Copy of `p` with every thermal coupling switched off (C₁ = C₂ = C₃ = C₄ = 0).
pub fn thermal_off(p: &MaterialParams) -> MaterialParams {
    MaterialParams {
        c1: 0.0,
        c2: 0.0,
        c3: 0.0,
        c4: 0.0,
        ..*p
    }
}

/// The six thermoelastic relaxed micromorphic model variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelId {
    I,
    II,
    III,
    IV,
    V,
    VI,
}

impl ModelId {
    pub const ALL: [ModelId; 6] = [
        ModelId::I,
        ModelId::II,
        ModelId::III,
        ModelId::IV,
        ModelId::V,
        ModelId::VI,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelId::I => "I",
            ModelId::II => "II",
            ModelId::III => "III",
            ModelId::IV => "IV",
            ModelId::V => "V",
            ModelId::VI => "VI",
        }
    }

    /// Whether the preset carries a positive Cosserat couple modulus.
    pub fn has_cosserat(self) -> bool {
        matches!(self, ModelId::I | ModelId::III | ModelId::V)
    }

    pub fn description(self) -> &'static str {
        match self {
            ModelId::I => "a1 = a2 > 0, a3 = a1/3, mu_c > 0",
            ModelId::II => "a1 = a2 > 0, a3 = a1/3, mu_c = 0",
            ModelId::III => "a1 > 0, a2 = 0, a3 = a1/3, mu_c > 0",
            ModelId::IV => "a1 > 0, a2 = 0, a3 = a1/3, mu_c = 0",
            ModelId::V => "a1 = a2 > 0, a3 = 0, mu_c > 0",
            ModelId::VI => "a1 = a2 > 0, a3 = 0, mu_c = 0",
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        let id = trimmed
            .strip_prefix("Model-")
            .or_else(|| trimmed.strip_prefix("model-"))
            .unwrap_or(trimmed);
        ModelId::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(id))
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// Parameter values in the units they are tabulated in (MPa, kg, Cal, °C).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableValues {
    pub lambda_e_mpa: f64,
    pub mu_e_mpa: f64,
    pub lambda_micro_mpa: f64,
    pub mu_micro_mpa: f64,
    pub mu_c_mpa: f64,
    pub rho: f64,
    pub zeta0: f64,
    pub c0_cal: f64,
    pub c1_cal: f64,
    pub c2_cal: f64,
    pub c3_cal: f64,
    pub c4_cal: f64,
    pub theta0_celsius: f64,
    pub a1_mpa_m2: f64,
    pub a2_mpa_m2: f64,
    pub a3_mpa_m2: f64,
}

/// Reference table of the numerical study.
pub const REFERENCE_TABLE: TableValues = TableValues {
    lambda_e_mpa: 400.0,
    mu_e_mpa: 200.0,
    lambda_micro_mpa: 100.0,
    mu_micro_mpa: 100.0,
    mu_c_mpa: 440.0,
    rho: 2000.0,
    zeta0: 0.01,
    c0_cal: 206.0,
    c1_cal: 84.0e3,
    c2_cal: 95.0e3,
    c3_cal: 152.0,
    c4_cal: 16.0,
    theta0_celsius: 20.0,
    a1_mpa_m2: 2.0e-3,
    a2_mpa_m2: 2.0e-3,
    a3_mpa_m2: 2.0e-3,
};

impl TableValues {
    /// Converts to SI with the given unit conventions.
    pub fn to_params(&self, units: UnitConversion) -> MaterialParams {
        let cal = units.calorie_joules;
        let (alpha1_bar, alpha2_bar, alpha3_bar) = convert_curvature(
            self.a1_mpa_m2 * PA_PER_MPA,
            self.a2_mpa_m2 * PA_PER_MPA,
            self.a3_mpa_m2 * PA_PER_MPA,
        );
        let theta0 = if units.theta0_absolute {
            self.theta0_celsius + CELSIUS_TO_KELVIN
        } else {
            self.theta0_celsius
        };
        MaterialParams {
            lambda_e: self.lambda_e_mpa * PA_PER_MPA,
            mu_e: self.mu_e_mpa * PA_PER_MPA,
            mu_c: self.mu_c_mpa * PA_PER_MPA,
            lambda_micro: self.lambda_micro_mpa * PA_PER_MPA,
            mu_micro: self.mu_micro_mpa * PA_PER_MPA,
            alpha1_bar,
            alpha2_bar,
            alpha3_bar,
            rho: self.rho,
            zeta0: self.zeta0,
            c0: self.c0_cal * cal,
            c1: self.c1_cal * cal,
            c2: self.c2_cal * cal,
            c3: self.c3_cal * cal,
            c4: self.c4_cal * cal,
            theta0,
            units,
        }
    }
}

/// Table values with the curvature pattern and couple modulus of `model`.
pub fn preset_table(model: ModelId) -> TableValues {
    let t = REFERENCE_TABLE;
    let a1 = t.a1_mpa_m2;
    let (a2, a3) = match model {
        ModelId::I | ModelId::II => (a1, a1 / 3.0),
        ModelId::III | ModelId::IV => (0.0, a1 / 3.0),
        ModelId::V | ModelId::VI => (a1, 0.0),
    };
    TableValues {
        mu_c_mpa: if model.has_cosserat() { t.mu_c_mpa } else { 0.0 },
        a2_mpa_m2: a2,
        a3_mpa_m2: a3,
        ..t
    }
}

/// SI parameters of a named model with the default unit conventions.
pub fn preset(model: ModelId) -> MaterialParams {
    preset_with_units(model, UnitConversion::default())
}

pub fn preset_with_units(model: ModelId, units: UnitConversion) -> MaterialParams {
    preset_table(model).to_params(units)
}
