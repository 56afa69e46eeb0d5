use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use micromorph::bandgap::{analyze, BandGap, DEFAULT_OMEGA_CELLS};
use micromorph::branches::{cutoffs, DEFAULT_K_MAX, DEFAULT_POINTS, DEFAULT_TOL_DAMPING};
use micromorph::io::{
    load_config, params_config, parse_stress, preset_config, write_csv, GridKind, SweepReport,
    SweepSettings,
};
use micromorph::material::{preset_table, DerivedSpeeds};
use micromorph::wave::parse_system_selector;
use micromorph::{thermal_off, validate, Error, MaterialParams, ModelId};

/// Plane-wave dispersion analysis for the thermoelastic relaxed micromorphic
/// continuum.
#[derive(Parser)]
#[command(name = "micromorph", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the closed-form cut-off frequencies.
    Cutoffs {
        #[command(flatten)]
        source: Source,
    },
    /// Sweep the wavenumber range and write branch points as CSV.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// long, trans, uncoupled or all.
        #[arg(long, default_value = "all")]
        system: String,
        #[command(flatten)]
        range: Range,
        /// CSV destination (standard output if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the full JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Repeat the sweep recorded in a JSON report instead.
        #[arg(long, value_name = "REPORT")]
        rerun: Option<PathBuf>,
    },
    /// Print per-system and joint band gaps.
    Bandgap {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        range: Range,
        /// Number of cells on the frequency axis.
        #[arg(long, default_value_t = DEFAULT_OMEGA_CELLS)]
        cells: usize,
    },
    /// List the built-in models, or print one as a config file.
    Presets {
        #[arg(long)]
        preset: Option<String>,
        /// Print the SI values instead of the tabulated units.
        #[arg(long)]
        si: bool,
    },
    /// Check a parameter set and echo it in SI units.
    Validate {
        #[command(flatten)]
        source: Source,
    },
}

#[derive(Args)]
struct Source {
    /// Built-in model I..VI.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Parameter file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Switch off the thermal couplings C1..C4.
    #[arg(long)]
    thermal_off: bool,
    /// Override the Cosserat couple modulus (Pa, or with a unit: 440MPa).
    #[arg(long, value_name = "VALUE")]
    mu_c: Option<String>,
    /// Treat config warnings (unknown keys, missing units) as errors.
    #[arg(long)]
    strict_validate: bool,
}

#[derive(Args)]
struct Range {
    #[arg(long, default_value_t = DEFAULT_K_MAX)]
    kmax: f64,
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    points: usize,
    /// Evenly spaced k instead of the log+linear default.
    #[arg(long)]
    linear: bool,
    #[arg(long, default_value_t = DEFAULT_TOL_DAMPING)]
    tol_damping: f64,
}

impl Range {
    fn settings(&self) -> SweepSettings {
        SweepSettings {
            grid: if self.linear { GridKind::Linear } else { GridKind::Hybrid },
            k_max: self.kmax,
            points: self.points,
            tol_damping: self.tol_damping,
            ..SweepSettings::default()
        }
    }
}

/// Exit status for a failure: 2 for bad input, 3 for numerical
/// preconditions, 1 for I/O.
fn exit_code(e: &Error) -> u8 {
    match e {
        _ if e.is_config_error() => 2,
        Error::Report(_) | Error::Json(_) => 2,
        Error::Io(_) | Error::Csv(_) => 1,
        _ => 3,
    }
}

fn config_error(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        line: 0,
        key: key.into(),
        message: message.into(),
    }
}

/// Resolves the parameter set and a short description of where it came from.
fn load(source: &Source) -> Result<(MaterialParams, String), Error> {
    let (mut p, mut name) = match (&source.preset, &source.config) {
        (Some(id), None) => {
            let m: ModelId = id.parse()?;
            (micromorph::preset(m), format!("preset {m}"))
        }
        (None, Some(path)) => {
            let loaded = load_config(path)?;
            for w in &loaded.warnings {
                eprintln!("warning: {w}");
            }
            if source.strict_validate {
                if let Some(w) = loaded.warnings.first() {
                    return Err(Error::Config {
                        line: w.line,
                        key: w.key.clone(),
                        message: format!("{} (strict validation)", w.message),
                    });
                }
            }
            (loaded.params, format!("config {}", path.display()))
        }
        _ => return Err(config_error("preset", "give one of --preset or --config")),
    };
    if let Some(text) = &source.mu_c {
        p.mu_c = parse_stress(text).ok_or_else(|| config_error("mu_c", format!("cannot read `{text}` as a stress")))?;
        name.push_str(&format!(", mu_c = {:e} Pa", p.mu_c));
    }
    if source.thermal_off {
        p = thermal_off(&p);
        name.push_str(", thermal off");
    }
    Ok((p, name))
}

fn load_valid(source: &Source) -> Result<(MaterialParams, String), Error> {
    let (p, name) = load(source)?;
    let report = validate(&p);
    if !report.passed() {
        return Err(Error::Validation(report));
    }
    Ok((p, name))
}

fn cmd_cutoffs(source: &Source) -> Result<(), Error> {
    let (p, name) = load_valid(source)?;
    println!("# cut-off frequencies, {name}");
    println!("{:<14}{:<11}omega [rad/s]", "system", "branch");
    for c in cutoffs(&p)? {
        println!("{:<14}{:<11}{:.4e}", c.system.to_string(), c.name(), c.omega);
    }
    Ok(())
}

fn write_output(report: &SweepReport, out: Option<&Path>, json: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write_csv(&report.branches, &mut w)?;
            w.flush()?;
        }
        None => write_csv(&report.branches, io::stdout().lock())?,
    }
    if let Some(path) = json {
        report.write(path)?;
    }
    Ok(())
}

fn summarize(report: &SweepReport) {
    let mut names: Vec<String> = Vec::new();
    for b in &report.branches {
        names.push(b.name());
    }
    eprintln!("{}: {} branches ({})", report.source, names.len(), names.join(" "));
    for a in &report.ambiguities {
        eprintln!(
            "warning: {} linking tie at k = {:e} (separation {:e})",
            a.system, a.ambiguity.k, a.ambiguity.separation
        );
    }
}

fn cmd_sweep(
    source: &Source,
    system: &str,
    range: &Range,
    out: Option<&Path>,
    json: Option<&Path>,
    rerun: Option<&Path>,
) -> Result<(), Error> {
    let report = match rerun {
        Some(path) => SweepReport::read(path)?.rerun()?,
        None => {
            let (p, name) = load_valid(source)?;
            let settings = SweepSettings {
                systems: parse_system_selector(system)?,
                ..range.settings()
            };
            SweepReport::run(name, &p, &settings)?
        }
    };
    summarize(&report);
    write_output(&report, out, json)
}

fn print_gaps(label: &str, gaps: &[BandGap]) {
    if gaps.is_empty() {
        println!("{label}: no band gap");
    }
    for g in gaps {
        println!("{label}: {:.4e} .. {:.4e} rad/s", g.lo, g.hi);
    }
}

fn cmd_bandgap(source: &Source, range: &Range, cells: usize) -> Result<(), Error> {
    let (p, name) = load_valid(source)?;
    let settings = range.settings();
    let report = analyze(&p, &settings.k_grid()?, settings.tol_damping, cells)?;
    let grid = report.omega_grid;
    println!("# band gaps, {name}");
    println!("# window 0 .. {:.4e} rad/s, cell {:.4e} rad/s", grid.max, grid.cell());
    for (system, gaps) in &report.per_system {
        print_gaps(&system.to_string(), gaps);
    }
    print_gaps("joint", &report.joint);
    Ok(())
}

fn cmd_presets(id: Option<&str>, si: bool) -> Result<(), Error> {
    let Some(id) = id else {
        println!("{:<6}{:<12}description", "model", "mu_c [MPa]");
        for m in ModelId::ALL {
            println!("{:<6}{:<12}{}", m.name(), preset_table(m).mu_c_mpa, m.description());
        }
        return Ok(());
    };
    let m: ModelId = id.parse()?;
    if si {
        print!("{}", params_config(&micromorph::preset(m)));
    } else {
        print!("{}", preset_config(m));
    }
    Ok(())
}

fn cmd_validate(source: &Source) -> Result<(), Error> {
    let (p, name) = load(source)?;
    println!("# {name}");
    print!("{}", params_config(&p));
    let report = validate(&p);
    if !report.passed() {
        return Err(Error::Validation(report));
    }
    let s = DerivedSpeeds::unchecked(&p);
    println!("# c_p = {:.4e} m/s, c_s = {:.4e} m/s, c_m = {:.4e} m/s", s.c_p, s.c_s, s.c_m);
    println!("# omega_s = {:.4e} rad/s, omega_p = {:.4e} rad/s", s.omega_s, s.omega_p);
    println!("validation: pass");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Cutoffs { source } => cmd_cutoffs(source),
        Command::Sweep {
            source,
            system,
            range,
            out,
            report,
            rerun,
        } => cmd_sweep(source, system, range, out.as_deref(), report.as_deref(), rerun.as_deref()),
        Command::Bandgap { source, range, cells } => cmd_bandgap(source, range, *cells),
        Command::Presets { preset, si } => cmd_presets(preset.as_deref(), *si),
        Command::Validate { source } => cmd_validate(source),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
