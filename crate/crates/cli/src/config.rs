//! Run configuration: one TOML file describes a whole run; command-line
//! flags override individual values.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use fieldcast_core::ingest::{HarvestSchema, WeatherSchema};
use fieldcast_core::models::ModelFamily;
use fieldcast_core::selection::ScalingMode;
use fieldcast_core::synth::SynthConfig;
use fieldcast_core::{Granularity, StateCode, StationBinding};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HarvestFileEntry {
    pub path: PathBuf,
    #[serde(default)]
    pub schema: HarvestSchema,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeatherFileEntry {
    pub path: PathBuf,
    #[serde(default)]
    pub schema: WeatherSchema,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TdaSection {
    pub sources: Vec<String>,
    pub target: String,
}

fn default_granularity() -> String {
    "annual".into()
}

fn default_families() -> Vec<String> {
    vec![
        "tree".into(),
        "forest".into(),
        "knn".into(),
        "svr".into(),
        "bayes_ridge".into(),
        "linear".into(),
    ]
}

fn default_scaling() -> String {
    "per_fold".into()
}

fn default_max_gap() -> u32 {
    fieldcast_core::ingest::DEFAULT_MAX_GAP
}

fn default_outer() -> usize {
    10
}

fn default_inner() -> usize {
    5
}

/// The TOML run configuration. The seed is mandatory: there is no
/// wall-clock fallback anywhere.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default = "default_granularity")]
    pub granularity: String,
    #[serde(default = "default_families")]
    pub families: Vec<String>,
    /// Include filter; empty means every state present.
    #[serde(default)]
    pub states: Vec<String>,
    #[serde(default)]
    pub exclude_states: Vec<String>,
    #[serde(default = "default_scaling")]
    pub scaling: String,
    #[serde(default = "default_max_gap")]
    pub max_gap_days: u32,
    #[serde(default = "default_outer")]
    pub outer_folds: usize,
    #[serde(default = "default_inner")]
    pub inner_folds: usize,
    #[serde(default)]
    pub harvest_files: Vec<HarvestFileEntry>,
    #[serde(default)]
    pub weather_files: Vec<WeatherFileEntry>,
    #[serde(default)]
    pub stations: Vec<StationBinding>,
    #[serde(default)]
    pub synth: Option<SynthConfig>,
    #[serde(default)]
    pub tda: Option<TdaSection>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<(RunConfig, String)> {
        let body = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut config: RunConfig = toml::from_str(&body)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        // Paths in the file resolve relative to the file's directory.
        if let Some(base) = path.parent() {
            for entry in &mut config.harvest_files {
                if entry.path.is_relative() {
                    entry.path = base.join(&entry.path);
                }
            }
            for entry in &mut config.weather_files {
                if entry.path.is_relative() {
                    entry.path = base.join(&entry.path);
                }
            }
            if config.output_dir.is_relative() {
                config.output_dir = base.join(&config.output_dir);
            }
        }
        Ok((config, body))
    }

    /// Checks that declared inputs exist and enum-ish strings parse.
    pub fn validate(&self) -> Result<()> {
        for entry in &self.harvest_files {
            if !entry.path.exists() {
                bail!("harvest file {} does not exist", entry.path.display());
            }
        }
        for entry in &self.weather_files {
            if !entry.path.exists() {
                bail!("weather file {} does not exist", entry.path.display());
            }
        }
        self.parsed_granularity()?;
        self.parsed_scaling()?;
        self.parsed_families()?;
        self.parsed_states(&self.states)?;
        self.parsed_states(&self.exclude_states)?;
        Ok(())
    }

    pub fn parsed_granularity(&self) -> Result<Granularity> {
        Granularity::parse(&self.granularity).map_err(Into::into)
    }

    pub fn parsed_scaling(&self) -> Result<ScalingMode> {
        match self.scaling.to_ascii_lowercase().as_str() {
            "per_fold" => Ok(ScalingMode::PerFold),
            "paper_literal" | "literal" => Ok(ScalingMode::PaperLiteral),
            other => bail!("unknown scaling mode {other:?} (per_fold or paper_literal)"),
        }
    }

    pub fn parsed_families(&self) -> Result<Vec<ModelFamily>> {
        if self.families.is_empty() {
            bail!("no model families configured");
        }
        self.families
            .iter()
            .map(|s| s.parse::<ModelFamily>().map_err(Into::into))
            .collect()
    }

    pub fn parsed_states(&self, list: &[String]) -> Result<Vec<StateCode>> {
        list.iter()
            .map(|s| StateCode::parse(s).map_err(Into::into))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let toml_body = r#"
seed = 42
output_dir = "out"
"#;
        let config: RunConfig = toml::from_str(toml_body).unwrap();
        assert_eq!(config.seed, 42);
        assert_eq!(config.granularity, "annual");
        assert_eq!(config.outer_folds, 10);
        assert_eq!(config.inner_folds, 5);
        assert_eq!(config.max_gap_days, 5);
        assert_eq!(config.parsed_families().unwrap().len(), 6);
    }

    #[test]
    fn seed_is_mandatory() {
        let toml_body = r#"output_dir = "out""#;
        assert!(toml::from_str::<RunConfig>(toml_body).is_err());
    }

    #[test]
    fn schema_overrides_are_partial() {
        let toml_body = r#"
seed = 1
output_dir = "out"

[[harvest_files]]
path = "h.csv"
[harvest_files.schema]
state = "State"
yield = "Yield (t/ac)"

[[weather_files]]
path = "w.csv"
[weather_files.schema]
precip_unit = "millimeters"
"#;
        let config: RunConfig = toml::from_str(toml_body).unwrap();
        let h = &config.harvest_files[0].schema;
        assert_eq!(h.state, "State");
        assert_eq!(h.yield_col, "Yield (t/ac)");
        // Unspecified fields keep canonical names.
        assert_eq!(h.location, "location");
        let w = &config.weather_files[0].schema;
        assert_eq!(w.precip, "precip");
    }

    #[test]
    fn relative_paths_resolve_against_the_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let config_path = dir.path().join("run.toml");
        let mut f = std::fs::File::create(&config_path).unwrap();
        writeln!(f, "seed = 7\noutput_dir = \"out\"\n[[harvest_files]]\npath = \"h.csv\"").unwrap();
        drop(f);
        let (config, _) = RunConfig::load(&config_path).unwrap();
        assert_eq!(config.harvest_files[0].path, dir.path().join("h.csv"));
        assert_eq!(config.output_dir, dir.path().join("out"));
    }

    #[test]
    fn validation_flags_bad_values() {
        let mut config: RunConfig =
            toml::from_str("seed = 1\noutput_dir = \"o\"").unwrap();
        config.granularity = "weekly".into();
        assert!(config.validate().is_err());
        config.granularity = "annual".into();
        config.scaling = "leaky".into();
        assert!(config.validate().is_err());
        config.scaling = "paper_literal".into();
        config.families = vec!["boosted".into()];
        assert!(config.validate().is_err());
    }
}
