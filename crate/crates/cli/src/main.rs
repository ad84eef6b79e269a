//! Command-line frontend for the fieldcast pipeline.
//!
//! Every run is driven by a TOML configuration plus flag overrides (flags
//! win), runs under a mandatory seed, and writes a manifest next to its
//! outputs sufficient to reproduce the job bit-identically.

mod config;
mod pipeline;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use fieldcast_core::error::DiagnosticKind;
use fieldcast_core::experiments::{
    emit_report, load_snapshot, render_summary, run_loso, run_pooled, run_tda, ResultsSnapshot,
    RunFlags,
};
use fieldcast_core::featurize::Dataset;
use fieldcast_core::ingest::{write_diagnostics_sidecar, write_harvest_file};
use fieldcast_core::selection::{ScalingMode, SelectionConfig};
use fieldcast_core::types::Quality;
use fieldcast_core::StateCode;

use config::RunConfig;

const OUTPUT_DIR_ENV: &str = "FIELDCAST_OUT";

#[derive(Parser)]
#[command(
    name = "fieldcast",
    version,
    about = "Weather-driven forage yield modeling: ingestion, features, model selection, and state-transfer experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Run configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config and the FIELDCAST_OUT
    /// environment variable.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Use a prebuilt samples file instead of running ingestion.
    #[arg(long)]
    samples: Option<PathBuf>,
    /// Comma-separated model families (e.g. tree,forest,knn).
    #[arg(long, value_delimiter = ',')]
    families: Vec<String>,
    /// Comma-separated states to include (default: all present).
    #[arg(long, value_delimiter = ',')]
    states: Vec<String>,
    /// Comma-separated states to exclude.
    #[arg(long, value_delimiter = ',')]
    exclude_states: Vec<String>,
    /// Granularity override: percut or annual.
    #[arg(long)]
    granularity: Option<String>,
    /// Fit one scaler on all data before splitting (sensitivity probe).
    #[arg(long)]
    paper_literal_scaling: bool,
    /// Cap the worker pool.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args, Clone)]
struct TdaArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated source states.
    #[arg(long, value_delimiter = ',')]
    sources: Vec<String>,
    /// Target state.
    #[arg(long)]
    target: Option<String>,
}

#[derive(Args, Clone)]
struct ReportArgs {
    /// Output directory of a previous run.
    #[arg(long)]
    dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, impute, and join the inputs; write the joined dataset and
    /// diagnostics.
    Ingest(CommonArgs),
    /// Build and write the 8-column samples file.
    Featurize(RunArgs),
    /// Pooled nested cross-validation over the configured families.
    Cv(RunArgs),
    /// Train on source states, test on one target state.
    Tda(TdaArgs),
    /// Leave-one-state-out transfer matrix.
    Loso(RunArgs),
    /// Generate a synthetic corpus and a ready-to-run config for it.
    Synth(CommonArgs),
    /// Regenerate the human-readable summary from stored results.
    Report(ReportArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Ingest(args) => cmd_ingest(args),
        Command::Featurize(args) => cmd_featurize(args),
        Command::Cv(args) => cmd_cv(args),
        Command::Tda(args) => cmd_tda(args),
        Command::Loso(args) => cmd_loso(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Report(args) => cmd_report(args),
    }
}

/// Everything a command needs after merging config and flags.
struct Resolved {
    config: RunConfig,
    config_body: String,
    config_path: PathBuf,
    out_dir: PathBuf,
    seed: u64,
}

fn resolve(common: &CommonArgs) -> Result<Resolved> {
    let (mut config, body) = RunConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    let out_dir = common
        .out
        .clone()
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| config.output_dir.clone());
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("cannot create output dir {}", out_dir.display()))?;
    Ok(Resolved {
        seed: config.seed,
        config,
        config_body: body,
        config_path: common.config.clone(),
        out_dir,
    })
}

fn apply_run_overrides(config: &mut RunConfig, args: &RunArgs) {
    if !args.families.is_empty() {
        config.families = args.families.clone();
    }
    if !args.states.is_empty() {
        config.states = args.states.clone();
    }
    if !args.exclude_states.is_empty() {
        config.exclude_states = args.exclude_states.clone();
    }
    if let Some(g) = &args.granularity {
        config.granularity = g.clone();
    }
    if args.paper_literal_scaling {
        config.scaling = "paper_literal".into();
    }
    if let Some(jobs) = args.jobs {
        fieldcast_core::configure_parallelism(jobs);
    }
}

#[derive(serde::Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    config_path: String,
    config_sha256: String,
    seed: u64,
    granularity: &'a str,
    scaling: &'a str,
    families: &'a [String],
    states: &'a [String],
    exclude_states: &'a [String],
    samples_file: Option<String>,
}

fn write_manifest(
    out_dir: &Path,
    command: &str,
    resolved: &Resolved,
    samples: Option<&Path>,
) -> Result<()> {
    let sha = format!("{:x}", Sha256::digest(resolved.config_body.as_bytes()));
    let manifest = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config_path: resolved.config_path.display().to_string(),
        config_sha256: sha,
        seed: resolved.seed,
        granularity: &resolved.config.granularity,
        scaling: &resolved.config.scaling,
        families: &resolved.config.families,
        states: &resolved.config.states,
        exclude_states: &resolved.config.exclude_states,
        samples_file: samples.map(|p| p.display().to_string()),
    };
    let body = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(out_dir.join("manifest.json"), body)
        .with_context(|| format!("writing manifest in {}", out_dir.display()))
}

fn report_diagnostics(
    out_dir: &Path,
    stem: &str,
    diagnostics: &[fieldcast_core::Diagnostic],
) -> Result<()> {
    for d in diagnostics {
        eprintln!("{d}");
    }
    if !diagnostics.is_empty() {
        let path = out_dir.join(format!("{stem}.diagnostics.csv"));
        write_diagnostics_sidecar(&path, diagnostics)?;
    }
    Ok(())
}

/// Loads the dataset either from a prebuilt samples file or by running the
/// ingestion pipeline, then applies the state filters.
fn load_dataset(resolved: &Resolved, args: &RunArgs, out_dir: &Path) -> Result<Dataset> {
    let granularity = resolved.config.parsed_granularity()?;
    let dataset = match &args.samples {
        Some(path) => Dataset::read_csv(path)
            .with_context(|| format!("reading samples {}", path.display()))?,
        None => {
            resolved.config.validate()?;
            let output = pipeline::run_pipeline(&resolved.config, granularity)?;
            report_diagnostics(out_dir, "run", &output.diagnostics)?;
            output.dataset
        }
    };
    let include = resolved.config.parsed_states(&resolved.config.states)?;
    let exclude = resolved.config.parsed_states(&resolved.config.exclude_states)?;
    let filtered = dataset.filter_states(&include, &exclude);
    if filtered.is_empty() {
        bail!("no samples left after state filtering");
    }
    Ok(filtered)
}

fn selection_config(resolved: &Resolved) -> Result<SelectionConfig> {
    Ok(SelectionConfig {
        outer_k: resolved.config.outer_folds,
        inner_k: resolved.config.inner_folds,
        scaling: resolved.config.parsed_scaling()?,
        seed: resolved.seed,
    })
}

fn run_flags(resolved: &Resolved, dataset: &Dataset, scaling: ScalingMode) -> RunFlags {
    RunFlags {
        seed: resolved.seed,
        scaling,
        granularity: resolved.config.granularity.clone(),
        svr_epsilon: 0.1,
        states: dataset.state_counts().keys().copied().collect(),
        rows: dataset.len(),
    }
}

fn finish_run(out_dir: &Path, snapshot: &ResultsSnapshot) -> Result<()> {
    emit_report(out_dir, snapshot)?;
    print!("{}", render_summary(snapshot));
    let count_warnings = |diags: &[fieldcast_core::Diagnostic]| {
        diags
            .iter()
            .filter(|d| d.kind == DiagnosticKind::NonConvergence)
            .count()
    };
    let non_convergence: usize = snapshot
        .pooled
        .iter()
        .flat_map(|p| p.reports.iter())
        .map(|r| count_warnings(&r.diagnostics))
        .sum::<usize>()
        + snapshot
            .tda
            .iter()
            .map(|t| count_warnings(&t.diagnostics))
            .sum::<usize>();
    if non_convergence > 0 {
        eprintln!(
            "warning: {non_convergence} non-convergence warnings (run completed; see run.diagnostics.csv)"
        );
    }
    println!("reports written to {}", out_dir.display());
    Ok(())
}

fn cmd_ingest(args: CommonArgs) -> Result<()> {
    let resolved = resolve(&args)?;
    resolved.config.validate()?;
    let granularity = resolved.config.parsed_granularity()?;
    let out_dir = resolved.out_dir.join("ingest");
    std::fs::create_dir_all(&out_dir)?;
    let output = pipeline::run_pipeline(&resolved.config, granularity)?;
    report_diagnostics(&out_dir, "ingest", &output.diagnostics)?;

    let records: Vec<fieldcast_core::HarvestRecord> = output
        .joined
        .records
        .iter()
        .map(|j| j.record.clone())
        .collect();
    write_harvest_file(&out_dir.join("records.csv"), &records)?;

    // Imputed daily series with quality flags.
    let mut w = csv::WriterBuilder::new().from_path(out_dir.join("weather.csv"))?;
    w.write_record(["station", "date", "precip", "solar", "temp_avg", "quality"])?;
    for d in &output.imputed_days {
        w.write_record([
            d.station.clone(),
            d.date.to_string(),
            format!("{}", d.precip),
            format!("{}", d.solar),
            format!("{}", d.temp_avg),
            match d.quality {
                Quality::Observed => "observed".into(),
                Quality::Imputed => "imputed".into(),
            },
        ])?;
    }
    w.flush()?;

    write_manifest(&out_dir, "ingest", &resolved, None)?;
    println!(
        "joined {} records; {} diagnostics",
        records.len(),
        output.diagnostics.len()
    );
    println!("ingest artifacts written to {}", out_dir.display());
    Ok(())
}

fn cmd_featurize(args: RunArgs) -> Result<()> {
    let mut resolved = resolve(&args.common)?;
    apply_run_overrides(&mut resolved.config, &args);
    resolved.config.validate()?;
    let granularity = resolved.config.parsed_granularity()?;
    let out_dir = resolved.out_dir.clone();
    let output = pipeline::run_pipeline(&resolved.config, granularity)?;
    report_diagnostics(&out_dir, "featurize", &output.diagnostics)?;
    let include = resolved.config.parsed_states(&resolved.config.states)?;
    let exclude = resolved.config.parsed_states(&resolved.config.exclude_states)?;
    let dataset = output.dataset.filter_states(&include, &exclude);
    let samples_path = out_dir.join("samples.csv");
    dataset.write_csv(&samples_path)?;
    write_manifest(&out_dir, "featurize", &resolved, Some(&samples_path))?;
    println!(
        "wrote {} samples ({} removed as establishment-year, {} as season-first cuts)",
        dataset.len(),
        output.build.filter_counts.same_year,
        output.build.filter_counts.first_cut
    );
    println!("samples written to {}", samples_path.display());
    Ok(())
}

fn cmd_cv(args: RunArgs) -> Result<()> {
    let mut resolved = resolve(&args.common)?;
    apply_run_overrides(&mut resolved.config, &args);
    let out_dir = resolved.out_dir.clone();
    let dataset = load_dataset(&resolved, &args, &out_dir)?;
    let families = resolved.config.parsed_families()?;
    let cfg = selection_config(&resolved)?;
    let pooled = run_pooled(&dataset, &families, &cfg, None)?;
    let snapshot = ResultsSnapshot {
        flags: run_flags(&resolved, &dataset, cfg.scaling),
        pooled: Some(pooled),
        tda: Vec::new(),
    };
    write_manifest(&out_dir, "cv", &resolved, args.samples.as_deref())?;
    finish_run(&out_dir, &snapshot)
}

fn cmd_tda(args: TdaArgs) -> Result<()> {
    let mut resolved = resolve(&args.run.common)?;
    apply_run_overrides(&mut resolved.config, &args.run);
    let out_dir = resolved.out_dir.clone();

    let (source_names, target_name) = {
        let section = resolved.config.tda.clone();
        let sources = if args.sources.is_empty() {
            section
                .as_ref()
                .map(|s| s.sources.clone())
                .unwrap_or_default()
        } else {
            args.sources.clone()
        };
        let target = args
            .target
            .clone()
            .or_else(|| section.map(|s| s.target))
            .ok_or_else(|| anyhow::anyhow!("tda needs --target (or a [tda] config section)"))?;
        (sources, target)
    };
    if source_names.is_empty() {
        bail!("tda needs --sources (or a [tda] config section)");
    }
    let sources: Vec<StateCode> = source_names
        .iter()
        .map(|s| StateCode::parse(s).map_err(anyhow::Error::from))
        .collect::<Result<_>>()?;
    let target = StateCode::parse(&target_name)?;
    if sources.contains(&target) {
        bail!("target state {target} must not appear among the sources");
    }

    let dataset = load_dataset(&resolved, &args.run, &out_dir)?;
    let families = resolved.config.parsed_families()?;
    let cfg = selection_config(&resolved)?;
    let report = run_tda(&dataset, &sources, target, &families, &cfg, None)?;
    let snapshot = ResultsSnapshot {
        flags: run_flags(&resolved, &dataset, cfg.scaling),
        pooled: None,
        tda: vec![report],
    };
    write_manifest(&out_dir, "tda", &resolved, args.run.samples.as_deref())?;
    finish_run(&out_dir, &snapshot)
}

fn cmd_loso(args: RunArgs) -> Result<()> {
    let mut resolved = resolve(&args.common)?;
    apply_run_overrides(&mut resolved.config, &args);
    let out_dir = resolved.out_dir.clone();
    let dataset = load_dataset(&resolved, &args, &out_dir)?;
    let families = resolved.config.parsed_families()?;
    let cfg = selection_config(&resolved)?;
    let reports = run_loso(&dataset, &families, &cfg, None)?;
    let snapshot = ResultsSnapshot {
        flags: run_flags(&resolved, &dataset, cfg.scaling),
        pooled: None,
        tda: reports,
    };
    write_manifest(&out_dir, "loso", &resolved, args.samples.as_deref())?;
    finish_run(&out_dir, &snapshot)
}

fn cmd_synth(args: CommonArgs) -> Result<()> {
    let resolved = resolve(&args)?;
    let Some(mut synth_config) = resolved.config.synth.clone() else {
        bail!("config has no [synth] section");
    };
    synth_config.seed = resolved.seed;
    let data_dir = resolved.out_dir.join("data");
    let corpus = fieldcast_core::synth::generate(&synth_config, &data_dir)?;

    // A ready-to-run configuration pointing at the generated corpus.
    let run_config = RunConfig {
        seed: resolved.seed,
        output_dir: PathBuf::from("run_out"),
        granularity: "annual".into(),
        families: resolved.config.families.clone(),
        states: Vec::new(),
        exclude_states: Vec::new(),
        scaling: resolved.config.scaling.clone(),
        max_gap_days: resolved.config.max_gap_days,
        outer_folds: resolved.config.outer_folds,
        inner_folds: resolved.config.inner_folds,
        harvest_files: corpus
            .harvest_files
            .iter()
            .map(|p| config::HarvestFileEntry {
                path: PathBuf::from("data").join(p.file_name().unwrap()),
                schema: Default::default(),
            })
            .collect(),
        weather_files: corpus
            .weather_files
            .iter()
            .map(|p| config::WeatherFileEntry {
                path: PathBuf::from("data").join(p.file_name().unwrap()),
                schema: Default::default(),
            })
            .collect(),
        stations: corpus.bindings.clone(),
        synth: None,
        tda: None,
    };
    let toml_body = toml::to_string(&run_config)?;
    let config_path = resolved.out_dir.join("synth_run.toml");
    std::fs::write(&config_path, toml_body)?;
    write_manifest(&resolved.out_dir, "synth", &resolved, None)?;
    println!(
        "generated {} states × {} samples under {}",
        synth_config.n_states,
        synth_config.samples_per_state,
        data_dir.display()
    );
    println!("run config written to {}", config_path.display());
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let snapshot = load_snapshot(&args.dir)?;
    let summary = render_summary(&snapshot);
    std::fs::write(args.dir.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}
