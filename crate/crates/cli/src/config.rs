//! Parameter resolution: command-line flag, then config file, then default.
//!
//! The config file is TOML. Top-level keys apply to every command; a table
//! named after the command (`[pdf]`, `[gamma-curve]`, ...) overrides them
//! for that command. Keys use underscores (`alpha_s`, `s_min`).

use std::path::Path;

use anyhow::{anyhow, bail, Context};
use clap::Args;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::BadInput;

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct Shared {
    /// Dimensionless density n z³.
    #[arg(long, global = true)]
    pub chi: Option<f64>,
    /// Scatterer number density.
    #[arg(long, global = true)]
    pub n: Option<f64>,
    /// Probe distance from the medium's surface.
    #[arg(long, global = true)]
    pub z: Option<f64>,
    /// Pair coefficient of the r⁻⁷ interaction.
    #[arg(long, global = true)]
    pub gamma7: Option<f64>,
    /// Probe polarizability (SI / ε₀).
    #[arg(long, global = true)]
    pub alpha0: Option<f64>,
    /// Scatterer polarizability (SI / ε₀).
    #[arg(long = "alpha-s", global = true)]
    pub alpha_s: Option<f64>,
    #[arg(long = "hbar-c", global = true)]
    pub hbar_c: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub realizations: Option<usize>,
    /// Sampling geometry: halfspace or cube.
    #[arg(long, global = true)]
    pub mode: Option<String>,
    /// Output directory; tables go to stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<String>,
    /// csv or json.
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Worker threads [env: CPSTAT_WORKERS; default: available parallelism].
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Relative tolerance of the density evaluation.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct MomentsArgs {
    /// Highest cumulant order.
    #[arg(long = "m-max")]
    pub m_max: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct PdfArgs {
    #[arg(long = "s-min")]
    pub s_min: Option<f64>,
    #[arg(long = "s-max")]
    pub s_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// linear or log.
    #[arg(long)]
    pub spacing: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct SampleArgs {
    /// Number of histogram bins; automatic when absent.
    #[arg(long)]
    pub bins: Option<usize>,
    /// Also write every sampled s.
    #[arg(long = "raw-samples", num_args = 0..=1, default_missing_value = "true")]
    pub raw_samples: Option<bool>,
    /// Cube side (cube mode).
    #[arg(long = "cube-side")]
    pub cube_side: Option<f64>,
    /// Scatterers in the cube (cube mode).
    #[arg(long = "cube-n")]
    pub cube_n: Option<usize>,
    /// Points of the reference density grid used for the comparison.
    #[arg(long = "reference-points")]
    pub reference_points: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct GammaCurveArgs {
    /// Comma-separated χ values.
    #[arg(long = "chi-list", value_delimiter = ',')]
    pub chi_list: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ValidateArgs {
    /// fast or full.
    #[arg(long)]
    pub level: Option<String>,
}

/// Parsed config file: top-level keys merged with the command's table.
pub struct FileConfig {
    values: Map<String, Value>,
}

impl FileConfig {
    pub fn empty() -> Self {
        Self { values: Map::new() }
    }

    pub fn load(path: &Path, command: &str) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))
            .map_err(BadInput::from)?;
        Self::parse(&text, command)
    }

    pub fn parse(text: &str, command: &str) -> anyhow::Result<Self> {
        let table: toml::Table =
            toml::from_str(text).map_err(|e| BadInput::from(anyhow!("config: {e}")))?;
        let mut values = Map::new();
        let mut section = None;
        for (key, value) in table {
            match value {
                toml::Value::Table(t) if key == command => section = Some(t),
                toml::Value::Table(_) => {}
                other => {
                    values.insert(key.replace('-', "_"), toml_to_json(other)?);
                }
            }
        }
        for (key, value) in section.into_iter().flatten() {
            values.insert(key.replace('-', "_"), toml_to_json(value)?);
        }
        Ok(Self { values })
    }

    /// Keys not consumed by any of the given parameter sets.
    pub fn check_unknown(&self, known: &[&Map<String, Value>]) -> anyhow::Result<()> {
        let unknown: Vec<&String> = self
            .values
            .keys()
            .filter(|k| !known.iter().any(|m| m.contains_key(k.as_str())))
            .collect();
        if !unknown.is_empty() {
            bail!(BadInput::from(anyhow!("config: unknown keys {unknown:?}")));
        }
        Ok(())
    }
}

fn toml_to_json(value: toml::Value) -> anyhow::Result<Value> {
    serde_json::to_value(value).map_err(|e| BadInput::from(anyhow!("config: {e}")).into())
}

fn to_object<T: Serialize>(value: &T) -> Map<String, Value> {
    match serde_json::to_value(value) {
        Ok(Value::Object(m)) => m,
        _ => Map::new(),
    }
}

/// Fills every field left unset on the command line from the file.
pub fn overlay<T: Serialize + DeserializeOwned>(cli: &T, file: &FileConfig) -> anyhow::Result<T> {
    let mut merged = to_object(cli);
    for (key, slot) in merged.iter_mut() {
        if slot.is_null() {
            if let Some(v) = file.values.get(key) {
                *slot = v.clone();
            }
        }
    }
    serde_json::from_value(Value::Object(merged))
        .map_err(|e| BadInput::from(anyhow!("config: {e}")).into())
}

/// Field names of a parameter set, for unknown-key detection.
pub fn field_names<T: Serialize + Default>() -> Map<String, Value> {
    to_object(&T::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn section_overrides_top_level_and_cli_overrides_both() {
        let file = FileConfig::parse("chi = 2.0\nseed = 5\n[pdf]\nchi = 3.0\npoints = 7\n", "pdf")
            .unwrap();
        let shared = overlay(
            &Shared {
                seed: Some(9),
                ..Default::default()
            },
            &file,
        )
        .unwrap();
        assert_eq!(shared.chi, Some(3.0));
        assert_eq!(shared.seed, Some(9));
        let pdf: PdfArgs = overlay(&PdfArgs::default(), &file).unwrap();
        assert_eq!(pdf.points, Some(7));
    }

    #[test]
    fn other_sections_are_ignored_and_unknown_keys_rejected() {
        let file = FileConfig::parse("[sample]\nbins = 3\n", "pdf").unwrap();
        assert!(file
            .check_unknown(&[&field_names::<Shared>(), &field_names::<PdfArgs>()])
            .is_ok());
        let file = FileConfig::parse("chii = 1.0\n", "pdf").unwrap();
        assert!(file.check_unknown(&[&field_names::<Shared>()]).is_err());
    }

    #[test]
    fn wrong_type_is_rejected() {
        let file = FileConfig::parse("seed = \"abc\"\n", "pdf").unwrap();
        assert!(overlay(&Shared::default(), &file).is_err());
    }
}
