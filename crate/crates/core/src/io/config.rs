//! Flat `key = value unit` parameter files.
//!
//! ```text
//! # comments run to the end of the line
//! preset = I            # optional: unlisted keys fall back to this model
//! mu_e = 200 MPa
//! C0 = 206 Cal/(kg*C)
//! a2 = 2e-3 MPa*m^2
//! calorie_joules = 4.184
//! ```
//!
//! Values are converted to SI on load. A value without a unit is taken to be
//! SI already (and produces a warning).

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::material::{
    convert_curvature, curvature_moduli, preset_table, MaterialParams, ModelId, UnitConversion,
    CELSIUS_TO_KELVIN, DEFAULT_CALORIE_JOULES, PA_PER_MPA,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dim {
    Stress,
    Density,
    LineDensity,
    HeatCapacity,
    VolumeCoupling,
    AreaCoupling,
    Conductivity,
    Temperature,
    Curvature,
}

impl Dim {
    fn expected(self) -> &'static str {
        match self {
            Dim::Stress => "Pa, kPa, MPa or GPa",
            Dim::Density => "kg/m^3 or g/cm^3",
            Dim::LineDensity => "kg/m",
            Dim::HeatCapacity => "J/(kg*K) or Cal/(kg*C)",
            Dim::VolumeCoupling => "J/(m^3*K) or Cal/(m^3*C)",
            Dim::AreaCoupling => "J/(m^2*K) or Cal/(m^2*C)",
            Dim::Conductivity => "J/(m*s) or Cal/(m*s)",
            Dim::Temperature => "C or K",
            Dim::Curvature => "Pa*m^2 or MPa*m^2",
        }
    }

    fn si_unit(self) -> &'static str {
        match self {
            Dim::Stress => "Pa",
            Dim::Density => "kg/m^3",
            Dim::LineDensity => "kg/m",
            Dim::HeatCapacity => "J/(kg*K)",
            Dim::VolumeCoupling => "J/(m^3*K)",
            Dim::AreaCoupling => "J/(m^2*K)",
            Dim::Conductivity => "J/(m*s)",
            Dim::Temperature => "C",
            Dim::Curvature => "Pa*m^2",
        }
    }
}

/// Parameter keys in file order.
pub const PARAMETER_KEYS: [&str; 16] = [
    "lambda_e",
    "mu_e",
    "lambda_micro",
    "mu_micro",
    "mu_c",
    "rho",
    "zeta0",
    "C0",
    "C1",
    "C2",
    "C3",
    "C4",
    "theta0",
    "a1",
    "a2",
    "a3",
];

const DIMS: [Dim; 16] = [
    Dim::Stress,
    Dim::Stress,
    Dim::Stress,
    Dim::Stress,
    Dim::Stress,
    Dim::Density,
    Dim::LineDensity,
    Dim::HeatCapacity,
    Dim::VolumeCoupling,
    Dim::VolumeCoupling,
    Dim::AreaCoupling,
    Dim::Conductivity,
    Dim::Temperature,
    Dim::Curvature,
    Dim::Curvature,
    Dim::Curvature,
];

const OPTION_KEYS: [&str; 3] = ["preset", "calorie_joules", "theta0_absolute"];

/// A non-fatal problem in a config file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigWarning {
    pub line: usize,
    pub key: String,
    pub message: String,
}

impl std::fmt::Display for ConfigWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config line {}: key `{}`: {}", self.line, self.key, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub params: MaterialParams,
    pub preset: Option<ModelId>,
    pub warnings: Vec<ConfigWarning>,
}

struct Entry {
    line: usize,
    key: String,
    value: String,
    unit: String,
}

fn config_error(line: usize, key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        key: key.to_string(),
        message: message.into(),
    }
}

/// Canonical spelling: blanks between factors become `*`, no degree signs
/// or parentheses, `·` as `*`.
fn normalize_unit(unit: &str) -> String {
    unit.split_whitespace()
        .collect::<Vec<_>>()
        .join("*")
        .chars()
        .filter(|c| *c != '°' && *c != '(' && *c != ')')
        .map(|c| if c == '·' { '*' } else { c })
        .collect::<String>()
        .replace("*/", "/")
        .replace("/*", "/")
}

/// Multiplier to SI for a thermal constant `energy/denominator`.
fn thermal_factor(unit: &str, denominator: &[&str], calorie: f64) -> Option<f64> {
    let (energy, rest) = unit.split_once('/')?;
    let factor = match energy {
        "J" => 1.0,
        "Cal" | "cal" => calorie,
        _ => return None,
    };
    let rest = rest.to_ascii_lowercase().replace("degc", "c").replace("m3", "m^3").replace("m2", "m^2");
    denominator.contains(&rest.as_str()).then_some(factor)
}

/// SI multiplier for a value of dimension `dim` in `unit`.
fn unit_factor(dim: Dim, unit: &str, calorie: f64) -> Option<f64> {
    let u = normalize_unit(unit);
    let lower = u.to_ascii_lowercase();
    match dim {
        Dim::Stress => match u.as_str() {
            "Pa" => Some(1.0),
            "kPa" => Some(1e3),
            "MPa" => Some(PA_PER_MPA),
            "GPa" => Some(1e9),
            _ => None,
        },
        Dim::Density => match lower.as_str() {
            "kg/m^3" | "kg/m3" | "kgm^-3" => Some(1.0),
            "g/cm^3" | "g/cm3" => Some(1e3),
            _ => None,
        },
        Dim::LineDensity => matches!(lower.as_str(), "kg/m" | "kgm^-1").then_some(1.0),
        Dim::HeatCapacity => thermal_factor(&u, &["kg*k", "kg*c", "k*kg", "c*kg"], calorie),
        Dim::VolumeCoupling => thermal_factor(&u, &["m^3*k", "m^3*c", "k*m^3", "c*m^3"], calorie),
        Dim::AreaCoupling => thermal_factor(&u, &["m^2*k", "m^2*c", "k*m^2", "c*m^2"], calorie),
        Dim::Conductivity => thermal_factor(&u, &["m*s", "s*m"], calorie),
        Dim::Temperature => None,
        Dim::Curvature => {
            let (stress, length) = u.split_once('*')?;
            if !matches!(length, "m^2" | "m2") {
                return None;
            }
            unit_factor(Dim::Stress, stress, calorie)
        }
    }
}

/// A stress given as a bare number (Pa) or a number with a unit, such as
/// `440MPa` or `4.4e8 Pa`.
pub fn parse_stress(text: &str) -> Option<f64> {
    let t = text.trim();
    if let Ok(v) = t.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    for unit in ["GPa", "MPa", "kPa", "Pa"] {
        if let Some(num) = t.strip_suffix(unit) {
            let v = num.trim().parse::<f64>().ok()?;
            let si = v * unit_factor(Dim::Stress, unit, DEFAULT_CALORIE_JOULES)?;
            return si.is_finite().then_some(si);
        }
    }
    None
}

/// Reference temperature in the internal convention: the Celsius number
/// unless `absolute`, in which case kelvin.
fn temperature(value: f64, unit: &str, absolute: bool) -> Option<f64> {
    let celsius = match normalize_unit(unit).as_str() {
        "C" | "degC" | "c" => value,
        "K" => value - CELSIUS_TO_KELVIN,
        _ => return None,
    };
    Some(if absolute { celsius + CELSIUS_TO_KELVIN } else { celsius })
}

fn split_lines(text: &str) -> Result<Vec<Entry>> {
    let mut entries: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, rest)) = content.split_once('=') else {
            let key = content.split_whitespace().next().unwrap_or(content);
            return Err(config_error(line, key, "expected `key = value [unit]`"));
        };
        let key = key.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(config_error(line, key, "malformed key"));
        }
        let rest = rest.trim();
        let (value, unit) = match rest.split_once(char::is_whitespace) {
            Some((v, u)) => (v, u.trim()),
            None => (rest, ""),
        };
        if value.is_empty() {
            return Err(config_error(line, key, "missing value"));
        }
        if let Some(prev) = entries.iter().find(|e| e.key == key) {
            return Err(config_error(line, key, format!("duplicate key (first set on line {})", prev.line)));
        }
        entries.push(Entry {
            line,
            key: key.to_string(),
            value: value.to_string(),
            unit: unit.to_string(),
        });
    }
    Ok(entries)
}

fn parse_number(e: &Entry) -> Result<f64> {
    match e.value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(config_error(e.line, &e.key, format!("`{}` is not a finite number", e.value))),
    }
}

pub fn parse_config(text: &str) -> Result<LoadedConfig> {
    let entries = split_lines(text)?;
    let mut warnings = Vec::new();
    let find = |key: &str| entries.iter().find(|e| e.key == key);

    let preset = match find("preset") {
        Some(e) => Some(e.value.parse::<ModelId>().map_err(|_| {
            config_error(e.line, "preset", format!("unknown preset `{}` (expected I..VI)", e.value))
        })?),
        None => None,
    };
    let calorie = match find("calorie_joules") {
        Some(e) => {
            let v = parse_number(e)?;
            if v <= 0.0 {
                return Err(config_error(e.line, &e.key, "must be positive"));
            }
            v
        }
        None => DEFAULT_CALORIE_JOULES,
    };
    let absolute = match find("theta0_absolute") {
        Some(e) => e
            .value
            .parse::<bool>()
            .map_err(|_| config_error(e.line, &e.key, "expected `true` or `false`"))?,
        None => false,
    };
    let units = UnitConversion {
        calorie_joules: calorie,
        theta0_absolute: absolute,
    };

    for e in &entries {
        if !PARAMETER_KEYS.contains(&e.key.as_str()) && !OPTION_KEYS.contains(&e.key.as_str()) {
            warnings.push(ConfigWarning {
                line: e.line,
                key: e.key.clone(),
                message: "unknown key ignored".into(),
            });
        }
    }

    let base = preset.map(|m| {
        let t = preset_table(m);
        let p = t.to_params(units);
        [
            p.lambda_e,
            p.mu_e,
            p.lambda_micro,
            p.mu_micro,
            p.mu_c,
            p.rho,
            p.zeta0,
            p.c0,
            p.c1,
            p.c2,
            p.c3,
            p.c4,
            p.theta0,
            t.a1_mpa_m2 * PA_PER_MPA,
            t.a2_mpa_m2 * PA_PER_MPA,
            t.a3_mpa_m2 * PA_PER_MPA,
        ]
    });

    let mut si = [0.0; 16];
    for (slot, (key, dim)) in PARAMETER_KEYS.iter().zip(DIMS).enumerate() {
        let Some(e) = find(key) else {
            match base {
                Some(b) => si[slot] = b[slot],
                None => return Err(Error::MissingKey((*key).to_string())),
            }
            continue;
        };
        let v = parse_number(e)?;
        si[slot] = if e.unit.is_empty() {
            warnings.push(ConfigWarning {
                line: e.line,
                key: e.key.clone(),
                message: format!("no unit given, assuming {}", dim.si_unit()),
            });
            if dim == Dim::Temperature && absolute {
                v + CELSIUS_TO_KELVIN
            } else {
                v
            }
        } else if dim == Dim::Temperature {
            temperature(v, &e.unit, absolute).ok_or_else(|| {
                config_error(e.line, &e.key, format!("unit `{}` not understood (expected {})", e.unit, dim.expected()))
            })?
        } else {
            let f = unit_factor(dim, &e.unit, calorie).ok_or_else(|| {
                config_error(e.line, &e.key, format!("unit `{}` not understood (expected {})", e.unit, dim.expected()))
            })?;
            v * f
        };
    }

    let (alpha1_bar, alpha2_bar, alpha3_bar) = convert_curvature(si[13], si[14], si[15]);
    let params = MaterialParams {
        lambda_e: si[0],
        mu_e: si[1],
        lambda_micro: si[2],
        mu_micro: si[3],
        mu_c: si[4],
        rho: si[5],
        zeta0: si[6],
        c0: si[7],
        c1: si[8],
        c2: si[9],
        c3: si[10],
        c4: si[11],
        theta0: si[12],
        alpha1_bar,
        alpha2_bar,
        alpha3_bar,
        units,
    };
    Ok(LoadedConfig {
        params,
        preset,
        warnings,
    })
}

/// Reads and parses a config file. An unreadable file is a config error.
pub fn load_config(path: &Path) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_error(0, "config", format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

/// A preset written out in the units of the reference table.
pub fn preset_config(model: ModelId) -> String {
    let t = preset_table(model);
    let mut s = String::new();
    let _ = writeln!(s, "# Model {model}: {}", model.description());
    let _ = writeln!(s, "preset = {model}");
    let rows: [(&str, f64, &str); 16] = [
        ("lambda_e", t.lambda_e_mpa, "MPa"),
        ("mu_e", t.mu_e_mpa, "MPa"),
        ("lambda_micro", t.lambda_micro_mpa, "MPa"),
        ("mu_micro", t.mu_micro_mpa, "MPa"),
        ("mu_c", t.mu_c_mpa, "MPa"),
        ("rho", t.rho, "kg/m^3"),
        ("zeta0", t.zeta0, "kg/m"),
        ("C0", t.c0_cal, "Cal/(kg*C)"),
        ("C1", t.c1_cal, "Cal/(m^3*C)"),
        ("C2", t.c2_cal, "Cal/(m^3*C)"),
        ("C3", t.c3_cal, "Cal/(m^2*C)"),
        ("C4", t.c4_cal, "Cal/(m*s)"),
        ("theta0", t.theta0_celsius, "C"),
        ("a1", t.a1_mpa_m2, "MPa*m^2"),
        ("a2", t.a2_mpa_m2, "MPa*m^2"),
        ("a3", t.a3_mpa_m2, "MPa*m^2"),
    ];
    for (key, value, unit) in rows {
        let _ = writeln!(s, "{key} = {value:e} {unit}");
    }
    let _ = writeln!(s, "calorie_joules = {DEFAULT_CALORIE_JOULES}");
    let _ = writeln!(s, "theta0_absolute = false");
    s
}

/// SI echo of a parameter set, loadable with [`parse_config`].
pub fn params_config(p: &MaterialParams) -> String {
    let a = curvature_moduli(p.alpha1_bar, p.alpha2_bar, p.alpha3_bar);
    let (theta0, theta_unit) = if p.units.theta0_absolute { (p.theta0, "K") } else { (p.theta0, "C") };
    let values = [
        p.lambda_e, p.mu_e, p.lambda_micro, p.mu_micro, p.mu_c, p.rho, p.zeta0, p.c0, p.c1, p.c2, p.c3, p.c4,
        theta0, a.a1, a.a2, a.a3,
    ];
    let mut s = String::from("# SI values\n");
    for ((key, dim), value) in PARAMETER_KEYS.iter().zip(DIMS).zip(values) {
        let unit = if dim == Dim::Temperature { theta_unit } else { dim.si_unit() };
        let _ = writeln!(s, "{key} = {value:e} {unit}");
    }
    let _ = writeln!(s, "calorie_joules = {}", p.units.calorie_joules);
    let _ = writeln!(s, "theta0_absolute = {}", p.units.theta0_absolute);
    s
}
