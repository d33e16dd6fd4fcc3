//! Run configuration: a TOML file merged over the built-in defaults table.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use sqvac_core::measurement::DetectorConfig;
use sqvac_core::quench::QuenchSource;
use sqvac_core::spectrum::{ComparisonConfig, FrequencyGrid, ModeSpectrum, Profile};
use sqvac_core::{RabiParams, Truncation};
use toml::{Table, Value};

use crate::error::CliError;

pub const DEFAULTS: &str = include_str!("defaults.toml");
pub const DEFAULTS_VERSION: i64 = 1;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub defaults_version: i64,
    pub seed: u64,
    pub output: OutputSection,
    pub truncation: Truncation,
    pub rabi: Option<RabiSection>,
    pub figure1: Figure1Section,
    pub quench: QuenchSection,
    pub spectrum: SpectrumSection,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

/// Exactly one of `coupling`, `coupling_ratio` (g/g_c) must be given.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RabiSection {
    pub omega: f64,
    pub qubit_omega: f64,
    pub coupling: Option<f64>,
    pub coupling_ratio: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Figure1Section {
    pub omega: Option<f64>,
    pub r: Option<f64>,
    pub theta: f64,
    pub times: Option<Vec<f64>>,
    pub panels: usize,
    pub grid_resolution: usize,
    pub trace_points: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuenchSection {
    pub source: QuenchSource,
    pub time_points: usize,
    /// Length of the trace in field periods `2π/ω`.
    pub periods: f64,
    pub ramp: RampSection,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampSection {
    pub enabled: bool,
    pub duration: f64,
    pub steps: usize,
    pub check_convergence: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Counts and fluctuations from the same modes.
    Matched,
    /// Counts replaced by dark counts of an unsqueezed spectrum.
    Scrambled,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub scenario: Scenario,
    pub write_records: bool,
    pub grid: Option<FrequencyGrid>,
    pub profile: Option<Value>,
    pub detector: DetectorSection,
    pub comparison: ComparisonConfig,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    pub efficiency: Option<f64>,
    pub dark_rate: Option<f64>,
    pub shots: usize,
    pub electronic_noise: f64,
}

fn missing(key: &str) -> CliError {
    CliError::Config(format!("missing required field `{key}`"))
}

impl RunConfig {
    pub fn rabi(&self) -> Result<RabiParams, CliError> {
        let r = self.rabi.as_ref().ok_or_else(|| missing("rabi"))?;
        let params = match (r.coupling, r.coupling_ratio) {
            (Some(g), None) => RabiParams::new(r.omega, r.qubit_omega, g)?,
            (None, Some(ratio)) => RabiParams::at_ratio(r.omega, r.qubit_omega, ratio)?,
            (None, None) => return Err(missing("rabi.coupling` or `rabi.coupling_ratio")),
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "give either rabi.coupling or rabi.coupling_ratio, not both".into(),
                ))
            }
        };
        Ok(params)
    }

    pub fn detector(&self) -> Result<DetectorConfig, CliError> {
        let d = &self.spectrum.detector;
        let det = DetectorConfig {
            efficiency: d
                .efficiency
                .ok_or_else(|| missing("spectrum.detector.efficiency"))?,
            dark_rate: d
                .dark_rate
                .ok_or_else(|| missing("spectrum.detector.dark_rate"))?,
            shots: d.shots,
            electronic_noise: d.electronic_noise,
        };
        det.validate()?;
        Ok(det)
    }

    pub fn mode_spectrum(&self) -> Result<ModeSpectrum, CliError> {
        let profile = self
            .spectrum
            .profile
            .as_ref()
            .ok_or_else(|| missing("spectrum.profile"))?;
        let kind = profile
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| missing("spectrum.profile.kind"))?;
        if kind == "user-table" {
            let path = profile
                .get("path")
                .and_then(Value::as_str)
                .ok_or_else(|| missing("spectrum.profile.path"))?;
            let file = std::fs::File::open(path)
                .map_err(|e| CliError::Config(format!("cannot open spectrum table {path}: {e}")))?;
            return Ok(ModeSpectrum::from_table(file)?);
        }
        let profile: Profile = profile
            .clone()
            .try_into()
            .map_err(|e| CliError::Config(format!("spectrum.profile: {e}")))?;
        let grid = self
            .spectrum
            .grid
            .as_ref()
            .ok_or_else(|| missing("spectrum.grid"))?;
        Ok(ModeSpectrum::from_profile(grid, &profile)?)
    }
}

/// Values supplied on the command line; they win over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// The merged table (what gets written as the resolved config) and its typed view.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub table: Table,
    pub config: RunConfig,
}

impl Resolved {
    pub fn to_toml(&self) -> String {
        let mut s = String::from("# resolved configuration; rerun with --config to reproduce\n");
        s.push_str(&toml::to_string(&self.table).expect("toml tables always serialize"));
        s
    }
}

/// Recursively overlays `top` on `base`. Tables merge key by key; any other
/// value replaces.
pub fn merge(base: &mut Table, top: Table) {
    for (key, value) in top {
        match (base.get_mut(&key), value) {
            (Some(Value::Table(b)), Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Resolved, CliError> {
    let mut table: Table = DEFAULTS.parse().expect("built-in defaults parse");
    if let Some(path) = path {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut user: Table = text
            .parse()
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        absolutize_table_path(&mut user, path.parent().unwrap_or(Path::new(".")))?;
        merge(&mut table, user);
    }
    if let Some(seed) = overrides.seed {
        table.insert("seed".into(), Value::Integer(seed as i64));
    }
    if let Some(out) = &overrides.out {
        let mut output = Table::new();
        output.insert(
            "dir".into(),
            Value::String(out.to_string_lossy().into_owned()),
        );
        merge(
            &mut table,
            Table::from_iter([("output".to_string(), Value::Table(output))]),
        );
    }
    from_table(table)
}

pub fn from_table(table: Table) -> Result<Resolved, CliError> {
    let config: RunConfig = Value::Table(table.clone())
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
    if config.defaults_version != DEFAULTS_VERSION {
        return Err(CliError::Config(format!(
            "config targets defaults version {}, this build has {DEFAULTS_VERSION}",
            config.defaults_version
        )));
    }
    config.truncation.validate()?;
    config.spectrum.comparison.validate()?;
    Ok(Resolved { table, config })
}

/// Spectrum tables are resolved against the config file's directory so the
/// resolved config works from anywhere.
fn absolutize_table_path(user: &mut Table, base: &Path) -> Result<(), CliError> {
    let Some(Value::Table(profile)) = user.get_mut("spectrum").and_then(|s| s.get_mut("profile"))
    else {
        return Ok(());
    };
    if let Some(Value::String(p)) = profile.get_mut("path") {
        let joined = base.join(&*p);
        let abs = std::path::absolute(&joined)
            .map_err(|e| CliError::Config(format!("cannot resolve {}: {e}", joined.display())))?;
        *p = abs.to_string_lossy().into_owned();
    }
    Ok(())
}
