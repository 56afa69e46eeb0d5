//! Parameter files, plot tables and sweep reports.

pub mod config;
pub mod report;
pub mod table;

pub use config::{load_config, params_config, parse_config, parse_stress, preset_config, ConfigWarning, LoadedConfig};
pub use report::{GridKind, SweepReport, SweepSettings, Tolerances};
pub use table::{write_csv, CSV_HEADER};
