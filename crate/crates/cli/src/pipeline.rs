//! Drives the core pipeline from a run configuration: parse, impute, join,
//! featurize.

use anyhow::{Context, Result};

use fieldcast_core::error::Diagnostic;
use fieldcast_core::featurize::{build_samples, BuildReport, Dataset};
use fieldcast_core::ingest::{
    derive_prev_harvest, join_weather, parse_harvest_file, parse_weather_file, JoinedDataset,
    WeatherStore,
};
use fieldcast_core::types::{HarvestRecord, StationMap, WeatherObs};
use fieldcast_core::Granularity;

use crate::config::RunConfig;

pub struct PipelineOutput {
    pub dataset: Dataset,
    pub joined: JoinedDataset,
    pub imputed_days: Vec<fieldcast_core::WeatherDay>,
    pub build: BuildReport,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn run_pipeline(config: &RunConfig, granularity: Granularity) -> Result<PipelineOutput> {
    let mut diagnostics = Vec::new();

    let mut records: Vec<HarvestRecord> = Vec::new();
    for entry in &config.harvest_files {
        let (mut r, d) = parse_harvest_file(&entry.path, &entry.schema)
            .with_context(|| format!("parsing {}", entry.path.display()))?;
        records.append(&mut r);
        diagnostics.extend(d);
    }
    derive_prev_harvest(&mut records);

    let mut obs: Vec<WeatherObs> = Vec::new();
    for entry in &config.weather_files {
        let (mut o, d) = parse_weather_file(&entry.path, &entry.schema)
            .with_context(|| format!("parsing {}", entry.path.display()))?;
        obs.append(&mut o);
        diagnostics.extend(d);
    }
    let (store, d) = WeatherStore::build(obs, config.max_gap_days)?;
    diagnostics.extend(d);

    let map = StationMap::new(config.stations.clone())?;
    let (joined, d) = join_weather(records, &store, &map)?;
    diagnostics.extend(d);

    let (mut dataset, build) = build_samples(&joined, granularity)?;
    diagnostics.extend(build.diagnostics.iter().cloned());
    dataset
        .provenance
        .insert("seed".into(), config.seed.to_string());
    dataset
        .provenance
        .insert("scaling".into(), config.scaling.clone());

    let imputed_days = store.all_days().cloned().collect();
    Ok(PipelineOutput {
        dataset,
        joined,
        imputed_days,
        build,
        diagnostics,
    })
}
