//! Feature engineering: harvest+weather records to five-feature samples.
//!
//! The five features, in fixed order: Julian day of the harvest, days since
//! sowing, cumulative solar radiation over the window, cumulative rainfall
//! over the window, and the window mean of daily average temperature.
//! Windows are exclusive of their start day and inclusive of the harvest
//! day, so consecutive cuts partition a season with no double counting.
//! Annual windows cover the harvest calendar year up to the last cut.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Diagnostic, DiagnosticKind, Error, Result};
use crate::ingest::{JoinedDataset, JoinedRecord};
use crate::types::{Granularity, HarvestRecord, StateCode, WeatherDay};

/// Feature order is part of the file contract and is identical everywhere.
pub const FEATURE_NAMES: [&str; 5] = [
    "julian_day",
    "days_since_sown",
    "cum_solar",
    "cum_rain",
    "temp",
];

pub const N_FEATURES: usize = FEATURE_NAMES.len();

/// One model-ready row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub julian_day: u32,
    pub days_since_sown: u32,
    /// MJ/m² summed over the window.
    pub cum_solar: f64,
    /// Inches summed over the window.
    pub cum_rain: f64,
    /// Window mean of daily average temperature, °F.
    pub temp: f64,
    /// Tons per acre.
    pub target_yield: f64,
    pub state: StateCode,
    pub source_id: String,
}

impl Sample {
    pub fn features(&self) -> [f64; N_FEATURES] {
        [
            self.julian_day as f64,
            self.days_since_sown as f64,
            self.cum_solar,
            self.cum_rain,
            self.temp,
        ]
    }
}

/// An ordered, immutable collection of samples plus run provenance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub provenance: BTreeMap<String, String>,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>) -> Self {
        Dataset {
            samples,
            provenance: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn feature_rows(&self) -> Vec<Vec<f64>> {
        self.samples.iter().map(|s| s.features().to_vec()).collect()
    }

    pub fn targets(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.target_yield).collect()
    }

    /// Distinct states with row counts, in code order.
    pub fn state_counts(&self) -> BTreeMap<StateCode, usize> {
        let mut counts = BTreeMap::new();
        for s in &self.samples {
            *counts.entry(s.state).or_insert(0) += 1;
        }
        counts
    }

    /// Keeps rows whose state passes the include/exclude filters. Empty
    /// include list means all states.
    pub fn filter_states(&self, include: &[StateCode], exclude: &[StateCode]) -> Dataset {
        let samples = self
            .samples
            .iter()
            .filter(|s| include.is_empty() || include.contains(&s.state))
            .filter(|s| !exclude.contains(&s.state))
            .cloned()
            .collect();
        Dataset {
            samples,
            provenance: self.provenance.clone(),
        }
    }

    /// Writes the 8-column samples file, the contract with every downstream
    /// stage.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
        let io_err = |e: csv::Error| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        };
        w.write_record([
            "julian_day",
            "days_since_sown",
            "cum_solar",
            "cum_rain",
            "temp",
            "yield",
            "state",
            "source_id",
        ])
        .map_err(io_err)?;
        for s in &self.samples {
            w.write_record([
                s.julian_day.to_string(),
                s.days_since_sown.to_string(),
                format!("{}", s.cum_solar),
                format!("{}", s.cum_rain),
                format!("{}", s.temp),
                format!("{}", s.target_yield),
                s.state.to_string(),
                s.source_id.clone(),
            ])
            .map_err(io_err)?;
        }
        w.flush().map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn read_csv(path: &Path) -> Result<Dataset> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
        let headers = reader
            .headers()
            .map_err(|e| Error::Csv {
                path: path.to_path_buf(),
                source: e,
            })?
            .clone();
        let expected = [
            "julian_day",
            "days_since_sown",
            "cum_solar",
            "cum_rain",
            "temp",
            "yield",
            "state",
            "source_id",
        ];
        for name in expected {
            if !headers.iter().any(|h| h == name) {
                return Err(Error::MissingColumn {
                    path: path.to_path_buf(),
                    column: name.into(),
                });
            }
        }
        let idx = |name: &str| headers.iter().position(|h| h == name).unwrap();
        let (c_jd, c_dss, c_solar, c_rain, c_temp, c_yield, c_state, c_src) = (
            idx("julian_day"),
            idx("days_since_sown"),
            idx("cum_solar"),
            idx("cum_rain"),
            idx("temp"),
            idx("yield"),
            idx("state"),
            idx("source_id"),
        );
        let mut samples = Vec::new();
        for row in reader.records() {
            let row = row.map_err(|e| Error::Csv {
                path: path.to_path_buf(),
                source: e,
            })?;
            let get = |c: usize| row.get(c).unwrap_or("").trim();
            let bad = |field: &'static str, v: &str| Error::InvalidValue {
                field,
                reason: format!("unparseable {v:?} in {}", path.display()),
            };
            let sample = Sample {
                julian_day: get(c_jd).parse().map_err(|_| bad("julian_day", get(c_jd)))?,
                days_since_sown: get(c_dss)
                    .parse()
                    .map_err(|_| bad("days_since_sown", get(c_dss)))?,
                cum_solar: get(c_solar).parse().map_err(|_| bad("cum_solar", get(c_solar)))?,
                cum_rain: get(c_rain).parse().map_err(|_| bad("cum_rain", get(c_rain)))?,
                temp: get(c_temp).parse().map_err(|_| bad("temp", get(c_temp)))?,
                target_yield: get(c_yield).parse().map_err(|_| bad("yield", get(c_yield)))?,
                state: StateCode::parse(get(c_state))?,
                source_id: get(c_src).to_string(),
            };
            if !sample.features().iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidValue {
                    field: "features",
                    reason: format!("non-finite feature in row {}", sample.source_id),
                });
            }
            samples.push(sample);
        }
        Ok(Dataset::new(samples))
    }
}

/// Ordinal day of year, 1..=366.
pub fn julian_day(date: NaiveDate) -> u32 {
    date.ordinal()
}

/// Exact day count from sowing to harvest; must be positive.
pub fn days_since_sown(sown: NaiveDate, harvest: NaiveDate) -> Result<u32> {
    let days = (harvest - sown).num_days();
    if days <= 0 {
        return Err(Error::NonPositiveInterval { sown, harvest });
    }
    Ok(days as u32)
}

/// Sums and means over a daily window `(start_exclusive, end_inclusive]`.
///
/// The slice must cover the window exactly: first day after `start`, last
/// day at `end`, no gaps. Returns `(cum_solar, cum_rain, temp_mean)`.
pub fn window_aggregates(
    days: &[WeatherDay],
    start_exclusive: NaiveDate,
    end_inclusive: NaiveDate,
) -> Result<(f64, f64, f64)> {
    let hole = || Error::CoverageHole {
        station: days.first().map(|d| d.station.clone()).unwrap_or_default(),
        start: start_exclusive,
        end: end_inclusive,
    };
    if end_inclusive <= start_exclusive || days.is_empty() {
        return Err(hole());
    }
    let expected = (end_inclusive - start_exclusive).num_days() as usize;
    if days.len() != expected
        || days[0].date != start_exclusive.succ_opt().unwrap()
        || days[days.len() - 1].date != end_inclusive
    {
        return Err(hole());
    }
    let mut cum_solar = 0.0;
    let mut cum_rain = 0.0;
    let mut temp_sum = 0.0;
    for d in days {
        cum_solar += d.solar;
        cum_rain += d.precip;
        temp_sum += d.temp_avg;
    }
    Ok((cum_solar, cum_rain, temp_sum / days.len() as f64))
}

/// Removal counts from [`filter_records`], by rule.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterCounts {
    /// Rows whose harvest year equals the sown year (establishment year).
    pub same_year: usize,
    /// Per-cut rows with no previous harvest in their season.
    pub first_cut: usize,
}

fn establishment_year(record: &HarvestRecord) -> bool {
    record.harvest_date.year() == record.sown_date.year()
}

fn season_first_cut(record: &HarvestRecord) -> bool {
    record.granularity == Granularity::PerCut && record.prev_harvest_date.is_none()
}

/// Applies the two cleaning rules: establishment-year rows go for any
/// granularity; season-first cuts go for per-cut rows only. Idempotent,
/// because retained per-cut rows always carry a previous harvest date.
pub fn filter_records(records: &[HarvestRecord]) -> (Vec<HarvestRecord>, FilterCounts) {
    let mut counts = FilterCounts::default();
    let kept = records
        .iter()
        .filter(|r| {
            if establishment_year(r) {
                counts.same_year += 1;
                return false;
            }
            if season_first_cut(r) {
                counts.first_cut += 1;
                return false;
            }
            true
        })
        .cloned()
        .collect();
    (kept, counts)
}

type AnnualKey = (StateCode, String, String, i32);

fn annual_key(r: &HarvestRecord) -> AnnualKey {
    (r.state, r.location.clone(), r.variety.clone(), r.harvest_year())
}

fn merge_annual_group(key: &AnnualKey, group: &[&HarvestRecord]) -> HarvestRecord {
    let last = group
        .iter()
        .max_by_key(|r| r.harvest_date)
        .expect("non-empty group");
    HarvestRecord {
        state: key.0,
        location: key.1.clone(),
        variety: key.2.clone(),
        sown_date: group.iter().map(|r| r.sown_date).min().unwrap(),
        harvest_date: last.harvest_date,
        prev_harvest_date: None,
        yield_tons_acre: group.iter().map(|r| r.yield_tons_acre).sum(),
        granularity: Granularity::Annual,
        source_id: format!("annual:{}:{}:{}:{}", key.0, key.1, key.2, key.3),
    }
}

/// Collapses per-cut rows into one annual total per (location, variety,
/// calendar year): yield is the sum of cuts, the harvest date is the last
/// cut of the year. Rows already at annual granularity pass through.
pub fn annualize(records: &[HarvestRecord]) -> Vec<HarvestRecord> {
    let mut groups: BTreeMap<AnnualKey, Vec<&HarvestRecord>> = BTreeMap::new();
    let mut passthrough = Vec::new();
    for r in records {
        match r.granularity {
            Granularity::PerCut => groups.entry(annual_key(r)).or_default().push(r),
            Granularity::Annual => passthrough.push(r.clone()),
        }
    }
    let mut out = passthrough;
    for (key, group) in &groups {
        out.push(merge_annual_group(key, group));
    }
    out.sort_by(|a, b| annual_key(a).cmp(&annual_key(b)).then(a.harvest_date.cmp(&b.harvest_date)));
    out
}

fn annualize_joined(records: &[JoinedRecord]) -> Vec<JoinedRecord> {
    let mut groups: BTreeMap<AnnualKey, Vec<usize>> = BTreeMap::new();
    let mut out = Vec::new();
    for (i, j) in records.iter().enumerate() {
        match j.record.granularity {
            Granularity::PerCut => groups.entry(annual_key(&j.record)).or_default().push(i),
            Granularity::Annual => out.push(j.clone()),
        }
    }
    for (key, members) in &groups {
        let group: Vec<&HarvestRecord> = members.iter().map(|&i| &records[i].record).collect();
        let merged = merge_annual_group(key, &group);
        // All members share a location, hence a station series.
        let station = std::sync::Arc::clone(&records[members[0]].station);
        out.push(JoinedRecord {
            record: merged,
            station,
        });
    }
    out.sort_by(|a, b| {
        annual_key(&a.record)
            .cmp(&annual_key(&b.record))
            .then(a.record.harvest_date.cmp(&b.record.harvest_date))
    });
    out
}

/// What [`build_samples`] did to the input besides producing samples.
#[derive(Debug, Clone, Default)]
pub struct BuildReport {
    pub filter_counts: FilterCounts,
    /// Annual-granularity rows dropped in per-cut mode.
    pub granularity_mismatch: usize,
    pub diagnostics: Vec<Diagnostic>,
}

/// Converts joined records into a [`Dataset`] in the requested granularity.
///
/// Per-cut mode filters both cleaning rules and windows each cut from the
/// previous harvest; annual mode annualizes first (so totals include every
/// cut), applies the establishment-year rule, and windows each row from the
/// start of its harvest calendar year.
pub fn build_samples(joined: &JoinedDataset, mode: Granularity) -> Result<(Dataset, BuildReport)> {
    let mut report = BuildReport::default();
    let working: Vec<JoinedRecord> = match mode {
        Granularity::PerCut => {
            let percut: Vec<JoinedRecord> = joined
                .records
                .iter()
                .filter(|j| {
                    if j.record.granularity == Granularity::Annual {
                        report.granularity_mismatch += 1;
                        false
                    } else {
                        true
                    }
                })
                .cloned()
                .collect();
            percut
                .into_iter()
                .filter(|j| {
                    if establishment_year(&j.record) {
                        report.filter_counts.same_year += 1;
                        return false;
                    }
                    if season_first_cut(&j.record) {
                        report.filter_counts.first_cut += 1;
                        return false;
                    }
                    true
                })
                .collect()
        }
        Granularity::Annual => annualize_joined(&joined.records)
            .into_iter()
            .filter(|j| {
                if establishment_year(&j.record) {
                    report.filter_counts.same_year += 1;
                    return false;
                }
                true
            })
            .collect(),
    };

    let mut samples = Vec::with_capacity(working.len());
    for j in &working {
        let r = &j.record;
        let start_exclusive = match mode {
            Granularity::PerCut => r
                .prev_harvest_date
                .expect("first cuts were filtered out above"),
            Granularity::Annual => {
                NaiveDate::from_ymd_opt(r.harvest_year() - 1, 12, 31).unwrap()
            }
        };
        let slice = j.station.slice(start_exclusive, r.harvest_date)?;
        let (cum_solar, cum_rain, temp) = window_aggregates(slice, start_exclusive, r.harvest_date)?;
        samples.push(Sample {
            julian_day: julian_day(r.harvest_date),
            days_since_sown: days_since_sown(r.sown_date, r.harvest_date)?,
            cum_solar,
            cum_rain,
            temp,
            target_yield: r.yield_tons_acre,
            state: r.state,
            source_id: r.source_id.clone(),
        });
    }
    let mut dataset = Dataset::new(samples);
    dataset
        .provenance
        .insert("granularity".into(), mode.as_str().into());
    if report.filter_counts.same_year + report.filter_counts.first_cut > 0 {
        report.diagnostics.push(Diagnostic {
            source: "featurize".into(),
            row: None,
            kind: DiagnosticKind::Filtered,
            detail: format!(
                "removed {} establishment-year rows and {} season-first cuts",
                report.filter_counts.same_year, report.filter_counts.first_cut
            ),
        });
    }
    Ok((dataset, report))
}
