//! Joining harvest records with the weather coverage they need.
//!
//! A record's coverage requirement is the widest window downstream feature
//! windows can ask for: from the previous harvest or the start of the
//! harvest calendar year (whichever is earlier, exclusive) through the
//! harvest day. A record that resolves to a station without that coverage is
//! dropped with a [`DiagnosticKind::CoverageHole`]; an unresolvable location
//! is a configuration error and aborts the join.

use std::collections::BTreeMap;
use std::sync::Arc;

use chrono::NaiveDate;

use crate::error::{Diagnostic, DiagnosticKind, Error, Result};
use crate::ingest::impute::impute_segmentwise;
use crate::types::{HarvestRecord, StationMap, WeatherDay, WeatherObs};

/// One station's imputed daily series. Days are sorted and unique; holes
/// show up as missing dates.
#[derive(Debug)]
pub struct StationSeries {
    pub station: String,
    days: Vec<WeatherDay>,
}

impl StationSeries {
    pub fn new(station: String, days: Vec<WeatherDay>) -> Self {
        debug_assert!(days.windows(2).all(|w| w[0].date < w[1].date));
        StationSeries { station, days }
    }

    pub fn days(&self) -> &[WeatherDay] {
        &self.days
    }

    /// The contiguous daily slice covering `(start_exclusive, end_inclusive]`,
    /// or a coverage error if any day is missing.
    pub fn slice(&self, start_exclusive: NaiveDate, end_inclusive: NaiveDate) -> Result<&[WeatherDay]> {
        let hole = || Error::CoverageHole {
            station: self.station.clone(),
            start: start_exclusive.succ_opt().unwrap_or(start_exclusive),
            end: end_inclusive,
        };
        if end_inclusive <= start_exclusive {
            return Err(hole());
        }
        let first = start_exclusive.succ_opt().ok_or_else(hole)?;
        let len = (end_inclusive - start_exclusive).num_days() as usize;
        let i0 = self.days.partition_point(|d| d.date < first);
        if i0 + len > self.days.len() {
            return Err(hole());
        }
        let slice = &self.days[i0..i0 + len];
        // Dates are strictly increasing, so matching endpoints plus a
        // matching count guarantee a gap-free window.
        if slice[0].date != first || slice[len - 1].date != end_inclusive {
            return Err(hole());
        }
        Ok(slice)
    }
}

/// All imputed station series for a run.
#[derive(Debug, Default)]
pub struct WeatherStore {
    series: BTreeMap<String, Arc<StationSeries>>,
}

impl WeatherStore {
    /// Groups observations by station and imputes each series segment-wise.
    /// Over-long gaps become diagnostics, not errors; records whose windows
    /// touch them fail later with a coverage hole.
    pub fn build(mut obs: Vec<WeatherObs>, max_gap: u32) -> Result<(WeatherStore, Vec<Diagnostic>)> {
        obs.sort_by(|a, b| (a.station.as_str(), a.date).cmp(&(b.station.as_str(), b.date)));
        for pair in obs.windows(2) {
            if pair[0].station == pair[1].station && pair[0].date == pair[1].date {
                return Err(Error::DuplicateDay {
                    station: pair[0].station.clone(),
                    date: pair[0].date,
                });
            }
        }
        let mut store = WeatherStore::default();
        let mut diagnostics = Vec::new();
        let mut start = 0;
        while start < obs.len() {
            let mut end = start + 1;
            while end < obs.len() && obs[end].station == obs[start].station {
                end += 1;
            }
            let imputed = impute_segmentwise(&obs[start..end], max_gap);
            for &(hole_start, hole_end) in &imputed.holes {
                diagnostics.push(Diagnostic {
                    source: imputed.station.clone(),
                    row: None,
                    kind: DiagnosticKind::GapTooLarge,
                    detail: format!("unfillable gap {hole_start}..{hole_end}"),
                });
            }
            store.series.insert(
                imputed.station.clone(),
                Arc::new(StationSeries::new(imputed.station, imputed.days)),
            );
            start = end;
        }
        Ok((store, diagnostics))
    }

    pub fn get(&self, station: &str) -> Option<&Arc<StationSeries>> {
        self.series.get(station)
    }

    pub fn stations(&self) -> impl Iterator<Item = &str> {
        self.series.keys().map(String::as_str)
    }

    /// Every imputed day across all stations, for the normalized weather dump.
    pub fn all_days(&self) -> impl Iterator<Item = &WeatherDay> {
        self.series.values().flat_map(|s| s.days.iter())
    }
}

/// A harvest record paired with its station's full imputed series.
#[derive(Debug, Clone)]
pub struct JoinedRecord {
    pub record: HarvestRecord,
    pub station: Arc<StationSeries>,
}

#[derive(Debug, Default)]
pub struct JoinedDataset {
    pub records: Vec<JoinedRecord>,
}

/// Exclusive start / inclusive end of the widest weather window a record can
/// need: per-cut windows start after the previous harvest, annual windows
/// at the start of the harvest calendar year.
pub fn required_window(record: &HarvestRecord) -> (NaiveDate, NaiveDate) {
    let year_start_exclusive = NaiveDate::from_ymd_opt(record.harvest_year() - 1, 12, 31).unwrap();
    let start = match record.prev_harvest_date {
        Some(prev) => prev.min(year_start_exclusive),
        None => year_start_exclusive,
    };
    (start, record.harvest_date)
}

/// Pairs each record with its station series, verifying coverage.
///
/// Records at locations without a station binding abort the join (the
/// station map is run configuration); records whose station lacks coverage
/// are dropped with a diagnostic.
pub fn join_weather(
    records: Vec<HarvestRecord>,
    store: &WeatherStore,
    map: &StationMap,
) -> Result<(JoinedDataset, Vec<Diagnostic>)> {
    let mut joined = Vec::with_capacity(records.len());
    let mut diagnostics = Vec::new();
    for record in records {
        let station_name = map.resolve(record.state, &record.location)?;
        let (start, end) = required_window(&record);
        let Some(series) = store.get(station_name) else {
            diagnostics.push(Diagnostic {
                source: record.source_id.clone(),
                row: None,
                kind: DiagnosticKind::CoverageHole,
                detail: format!("no weather data for station {station_name}"),
            });
            continue;
        };
        match series.slice(start, end) {
            Ok(_) => joined.push(JoinedRecord {
                record,
                station: Arc::clone(series),
            }),
            Err(Error::CoverageHole { station, start, end }) => {
                diagnostics.push(Diagnostic {
                    source: record.source_id.clone(),
                    row: None,
                    kind: DiagnosticKind::CoverageHole,
                    detail: format!("station {station} missing {start}..{end}"),
                });
            }
            Err(other) => return Err(other),
        }
    }
    Ok((JoinedDataset { records: joined }, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{Granularity, StateCode, StationBinding};

    fn record(prev: Option<&str>, harvest: &str) -> HarvestRecord {
        HarvestRecord {
            state: StateCode::parse("GA").unwrap(),
            location: "Athens".into(),
            variety: "V1".into(),
            sown_date: "2012-04-10".parse().unwrap(),
            harvest_date: harvest.parse().unwrap(),
            prev_harvest_date: prev.map(|p| p.parse().unwrap()),
            yield_tons_acre: 1.0,
            granularity: Granularity::PerCut,
            source_id: "test:1".into(),
        }
    }

    fn obs_range(station: &str, from: &str, to: &str) -> Vec<WeatherObs> {
        let from: NaiveDate = from.parse().unwrap();
        let to: NaiveDate = to.parse().unwrap();
        let mut out = Vec::new();
        let mut d = from;
        while d <= to {
            out.push(WeatherObs {
                station: station.into(),
                date: d,
                precip: Some(0.1),
                solar: Some(12.0),
                temp_avg: Some(65.0),
            });
            d = d.succ_opt().unwrap();
        }
        out
    }

    fn map() -> StationMap {
        StationMap::new(vec![StationBinding {
            state: StateCode::parse("GA").unwrap(),
            location: "Athens".into(),
            station: "Watkinsville".into(),
            note: String::new(),
        }])
        .unwrap()
    }

    #[test]
    fn covered_record_joins() {
        let (store, d) =
            WeatherStore::build(obs_range("Watkinsville", "2012-12-01", "2013-09-30"), 5).unwrap();
        assert!(d.is_empty());
        let (joined, diags) =
            join_weather(vec![record(Some("2013-05-01"), "2013-09-01")], &store, &map()).unwrap();
        assert_eq!(joined.records.len(), 1);
        assert!(diags.is_empty());
    }

    #[test]
    fn unmapped_location_is_an_error() {
        let (store, _) =
            WeatherStore::build(obs_range("Watkinsville", "2013-01-01", "2013-09-30"), 5).unwrap();
        let mut r = record(Some("2013-05-01"), "2013-09-01");
        r.location = "Nowhere".into();
        let err = join_weather(vec![r], &store, &map()).unwrap_err();
        assert!(matches!(err, Error::UnmappedLocation { .. }));
    }

    #[test]
    fn uncovered_record_is_dropped_with_diagnostic() {
        // Station data stops in June; the record harvests in September.
        let (store, _) =
            WeatherStore::build(obs_range("Watkinsville", "2012-12-01", "2013-06-30"), 5).unwrap();
        let (joined, diags) =
            join_weather(vec![record(Some("2013-05-01"), "2013-09-01")], &store, &map()).unwrap();
        assert!(joined.records.is_empty());
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].kind, DiagnosticKind::CoverageHole);
    }

    #[test]
    fn interior_hole_beyond_max_gap_blocks_records_through_it() {
        // All of July missing.
        let mut obs = obs_range("Watkinsville", "2012-12-01", "2013-06-30");
        obs.extend(obs_range("Watkinsville", "2013-08-01", "2013-09-30"));
        let (store, diags) = WeatherStore::build(obs, 5).unwrap();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].kind, DiagnosticKind::GapTooLarge);

        let (joined, drops) =
            join_weather(vec![record(Some("2013-05-01"), "2013-09-01")], &store, &map()).unwrap();
        assert!(joined.records.is_empty());
        assert_eq!(drops[0].kind, DiagnosticKind::CoverageHole);

        // A record whose window avoids the hole still joins.
        let (joined, drops) =
            join_weather(vec![record(Some("2013-05-01"), "2013-06-15")], &store, &map()).unwrap();
        assert_eq!(joined.records.len(), 1);
        assert!(drops.is_empty());
    }

    #[test]
    fn required_window_accounts_for_annualization() {
        // With a previous harvest, coverage still reaches back to Jan 1 so a
        // later annualized row stays covered.
        let r = record(Some("2013-05-01"), "2013-09-01");
        let (start, end) = required_window(&r);
        assert_eq!(start.to_string(), "2012-12-31");
        assert_eq!(end.to_string(), "2013-09-01");
        // A first cut (no previous harvest) needs the calendar year too.
        let r = record(None, "2013-06-01");
        assert_eq!(required_window(&r).0.to_string(), "2012-12-31");
        // A previous harvest in the prior year extends the requirement.
        let r = record(Some("2012-10-15"), "2013-06-01");
        assert_eq!(required_window(&r).0.to_string(), "2012-10-15");
    }

    #[test]
    fn duplicate_day_across_files_is_rejected() {
        let mut obs = obs_range("Watkinsville", "2013-01-01", "2013-01-05");
        obs.push(obs[2].clone());
        assert!(matches!(
            WeatherStore::build(obs, 5),
            Err(Error::DuplicateDay { .. })
        ));
    }
}
