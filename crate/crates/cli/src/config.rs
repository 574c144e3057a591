//! Parameter resolution: built-in defaults, then the flat key-value config
//! file, then command-line overrides.
//!
//! Keys are the field names of the model, simulation and scan settings. `q`
//! and `beta` take a number for the model and an `"min:max:steps"` string for
//! the scan axes.

use crate::error::CliError;
use reactlab::pde::{Boundary, SimConfig};
use reactlab::scanner::{Axis, Spacing, Thresholds};
use reactlab::{ChemotacticLaw, ModelParams};
use serde::Serialize;
use std::path::Path;
use toml::{Table, Value};

/// Every setting a subcommand may read, fully resolved.
#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub model: ModelParams,
    pub sim: SimConfig,
    pub q_axis: Axis,
    pub beta_axis: Axis,
    pub spacing: Spacing,
    pub thresholds: Thresholds,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            model: ModelParams::default(),
            sim: SimConfig::default(),
            q_axis: Axis::new(0.01, 0.1, 46),
            beta_axis: Axis::new(0.0, 1.5, 61),
            spacing: Spacing::Linear,
            thresholds: Thresholds::default(),
        }
    }
}

/// Parses `"min:max:steps"`.
pub fn parse_range(key: &str, s: &str) -> Result<Axis, CliError> {
    let bad = || CliError::config(key, format!("expected min:max:steps, got {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    let [min, max, steps] = parts[..] else {
        return Err(bad());
    };
    Ok(Axis::new(
        min.trim().parse().map_err(|_| bad())?,
        max.trim().parse().map_err(|_| bad())?,
        steps.trim().parse().map_err(|_| bad())?,
    ))
}

fn float(key: &str, v: &Value) -> Result<f64, CliError> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        other => Err(CliError::config(
            key,
            format!("expected a number, got {other}"),
        )),
    }
}

fn unsigned(key: &str, v: &Value) -> Result<u64, CliError> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        other => Err(CliError::config(
            key,
            format!("expected a non-negative integer, got {other}"),
        )),
    }
}

fn text<'a>(key: &str, v: &'a Value) -> Result<&'a str, CliError> {
    v.as_str()
        .ok_or_else(|| CliError::config(key, format!("expected a string, got {v}")))
}

impl Settings {
    /// Applies one key. Unknown keys and mistyped values name the key.
    pub fn apply(&mut self, key: &str, v: &Value) -> Result<(), CliError> {
        let m = &mut self.model;
        let s = &mut self.sim;
        match key {
            "d_u" => m.d_u = float(key, v)?,
            "d_v" => m.d_v = float(key, v)?,
            "k1" => m.k1 = float(key, v)?,
            "k2" => m.k2 = float(key, v)?,
            "c" => m.c = float(key, v)?,
            "q" | "beta" => match v {
                Value::String(range) => {
                    let axis = parse_range(key, range)?;
                    if key == "q" {
                        self.q_axis = axis;
                    } else {
                        self.beta_axis = axis;
                    }
                }
                _ if key == "q" => m.q = float(key, v)?,
                _ => m.beta = float(key, v)?,
            },
            "ell" => {
                m.ell = match text(key, v)? {
                    "linear" => ChemotacticLaw::Linear,
                    other => return Err(CliError::config(key, format!("unknown law {other:?}"))),
                }
            }
            "dim" => s.dim = unsigned(key, v)? as usize,
            "L" => s.length = float(key, v)?,
            "nx" => s.nx = unsigned(key, v)? as usize,
            "dt" => s.dt = float(key, v)?,
            "T" => s.t_final = float(key, v)?,
            "eta" => s.eta = float(key, v)?,
            "bc" => s.bc = text(key, v)?.parse::<Boundary>()?,
            "seed" => s.seed = unsigned(key, v)?,
            "snapshot_every" => s.snapshot_every = unsigned(key, v)? as usize,
            "pattern_amplitude" => s.pattern_amplitude = float(key, v)?,
            "spacing" => self.spacing = parse_spacing(text(key, v)?)?,
            "chi_star" => self.thresholds.chi_star = float(key, v)?,
            "log_inv_h" => self.thresholds.log_inv_h = float(key, v)?,
            other => return Err(CliError::config(other, "unknown key")),
        }
        Ok(())
    }

    pub fn apply_table(&mut self, table: &Table) -> Result<(), CliError> {
        for (key, value) in table {
            self.apply(key, value)?;
        }
        Ok(())
    }

    /// Applies a `key=value` override; the value is read as a TOML scalar,
    /// or as a bare string when that fails.
    pub fn apply_assignment(&mut self, assignment: &str) -> Result<(), CliError> {
        let Some((key, raw)) = assignment.split_once('=') else {
            return Err(CliError::config(
                "set",
                format!("expected key=value, got {assignment:?}"),
            ));
        };
        let (key, raw) = (key.trim(), raw.trim());
        let value = match format!("v = {raw}").parse::<Table>() {
            Ok(mut t) => t.remove("v").expect("parsed key"),
            Err(_) => Value::String(raw.to_string()),
        };
        self.apply(key, &value)
    }
}

pub fn parse_spacing(s: &str) -> Result<Spacing, CliError> {
    match s.to_ascii_lowercase().as_str() {
        "linear" | "lin" => Ok(Spacing::Linear),
        "log" => Ok(Spacing::Log),
        other => Err(CliError::config(
            "spacing",
            format!("expected linear or log, got {other:?}"),
        )),
    }
}

/// Reads a flat key-value config file.
pub fn load(path: &Path) -> Result<Table, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::config(
            "config",
            format!("cannot read config file {}: {e}", path.display()),
        )
    })?;
    let table: Table = text.parse().map_err(|e| {
        CliError::config(
            "config",
            format!("cannot parse config file {}: {e}", path.display()),
        )
    })?;
    if let Some((key, _)) = table.iter().find(|(_, v)| v.is_table() || v.is_array()) {
        return Err(CliError::config(
            key,
            format!(
                "config file {} must be flat key = value pairs",
                path.display()
            ),
        ));
    }
    Ok(table)
}
