//! Delimited-file parsers and canonical-schema writers.
//!
//! Row-level failures (bad dates, negative yields, unparseable numbers)
//! become [`Diagnostic`]s and exclude the row; structural failures (missing
//! columns, duplicate weather days) abort the parse.

use std::collections::HashMap;
use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Diagnostic, DiagnosticKind, Error, Result};
use crate::ingest::schema::{HarvestSchema, WeatherSchema};
use crate::types::{Granularity, HarvestRecord, StateCode, WeatherObs};

fn file_label(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

struct ColumnIndex {
    by_name: HashMap<String, usize>,
}

impl ColumnIndex {
    fn from_headers(headers: &csv::StringRecord) -> Self {
        let by_name = headers
            .iter()
            .enumerate()
            .map(|(i, h)| (h.trim().to_string(), i))
            .collect();
        ColumnIndex { by_name }
    }

    fn require(&self, path: &Path, name: &str) -> Result<usize> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| Error::MissingColumn {
                path: path.to_path_buf(),
                column: name.to_string(),
            })
    }
}

fn field<'r>(record: &'r csv::StringRecord, idx: usize) -> &'r str {
    record.get(idx).unwrap_or("").trim()
}

/// Parses a harvest file against its declared schema.
///
/// Returns the retained records plus one diagnostic per excluded row.
pub fn parse_harvest_file(
    path: &Path,
    schema: &HarvestSchema,
) -> Result<(Vec<HarvestRecord>, Vec<Diagnostic>)> {
    let label = file_label(path);
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Csv {
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
    let cols = ColumnIndex::from_headers(&headers);
    let c_state = cols.require(path, &schema.state)?;
    let c_location = cols.require(path, &schema.location)?;
    let c_variety = cols.require(path, &schema.variety)?;
    let c_sown = cols.require(path, &schema.sown_date)?;
    let c_harvest = cols.require(path, &schema.harvest_date)?;
    let c_prev = schema
        .prev_harvest_date
        .as_ref()
        .map(|name| cols.require(path, name))
        .transpose()?;
    let c_yield = cols.require(path, &schema.yield_col)?;
    let c_gran = schema
        .granularity
        .as_ref()
        .map(|name| cols.require(path, name))
        .transpose()?;

    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    for (row_no, row) in reader.records().enumerate() {
        let row_no = row_no + 1;
        let row = row.map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
        let reject = |kind: DiagnosticKind, detail: String| Diagnostic {
            source: label.clone(),
            row: Some(row_no),
            kind,
            detail,
        };

        let state = match StateCode::parse(field(&row, c_state)) {
            Ok(s) => s,
            Err(e) => {
                diagnostics.push(reject(DiagnosticKind::BadValue, e.to_string()));
                continue;
            }
        };
        let parse_date = |s: &str| NaiveDate::parse_from_str(s, &schema.date_format);
        let sown_date = match parse_date(field(&row, c_sown)) {
            Ok(d) => d,
            Err(_) => {
                diagnostics.push(reject(
                    DiagnosticKind::BadDate,
                    format!("sown_date {:?}", field(&row, c_sown)),
                ));
                continue;
            }
        };
        let harvest_date = match parse_date(field(&row, c_harvest)) {
            Ok(d) => d,
            Err(_) => {
                diagnostics.push(reject(
                    DiagnosticKind::BadDate,
                    format!("harvest_date {:?}", field(&row, c_harvest)),
                ));
                continue;
            }
        };
        let prev_harvest_date = match c_prev {
            Some(c) => {
                let raw = field(&row, c);
                if raw.is_empty() {
                    None
                } else {
                    match parse_date(raw) {
                        Ok(d) => Some(d),
                        Err(_) => {
                            diagnostics.push(reject(
                                DiagnosticKind::BadDate,
                                format!("prev_harvest_date {raw:?}"),
                            ));
                            continue;
                        }
                    }
                }
            }
            None => None,
        };
        let yield_raw = field(&row, c_yield);
        let yield_val: f64 = match yield_raw.parse() {
            Ok(v) => v,
            Err(_) => {
                diagnostics.push(reject(
                    DiagnosticKind::BadNumeric,
                    format!("yield {yield_raw:?}"),
                ));
                continue;
            }
        };
        let yield_tons_acre = schema.yield_unit.to_tons_per_acre(yield_val);
        if yield_tons_acre < 0.0 {
            diagnostics.push(reject(
                DiagnosticKind::NegativeYield,
                format!("yield {yield_tons_acre}"),
            ));
            continue;
        }
        let granularity = match c_gran {
            Some(c) => {
                let raw = field(&row, c);
                if raw.is_empty() {
                    schema.default_granularity
                } else {
                    match Granularity::parse(raw) {
                        Ok(g) => g,
                        Err(e) => {
                            diagnostics.push(reject(DiagnosticKind::BadValue, e.to_string()));
                            continue;
                        }
                    }
                }
            }
            None => schema.default_granularity,
        };
        if harvest_date <= sown_date {
            diagnostics.push(reject(
                DiagnosticKind::NonPositiveInterval,
                format!("harvest {harvest_date} does not follow sown {sown_date}"),
            ));
            continue;
        }
        if let Some(prev) = prev_harvest_date {
            if prev >= harvest_date {
                diagnostics.push(reject(
                    DiagnosticKind::NonPositiveInterval,
                    format!("prev harvest {prev} does not precede harvest {harvest_date}"),
                ));
                continue;
            }
        }
        records.push(HarvestRecord {
            state,
            location: field(&row, c_location).to_string(),
            variety: field(&row, c_variety).to_string(),
            sown_date,
            harvest_date,
            prev_harvest_date,
            yield_tons_acre,
            granularity,
            source_id: format!("{label}:{row_no}"),
        });
    }
    Ok((records, diagnostics))
}

/// Parses a daily weather file against its declared schema.
///
/// Output is sorted by (station, date); duplicate (station, date) rows abort
/// the parse. Empty numeric cells become missing fields for the imputer;
/// unparseable or negative cells are diagnosed and treated as missing.
pub fn parse_weather_file(
    path: &Path,
    schema: &WeatherSchema,
) -> Result<(Vec<WeatherObs>, Vec<Diagnostic>)> {
    let label = file_label(path);
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Csv {
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
    let cols = ColumnIndex::from_headers(&headers);
    let c_station = cols.require(path, &schema.station)?;
    let c_date = cols.require(path, &schema.date)?;
    let c_precip = cols.require(path, &schema.precip)?;
    let c_solar = cols.require(path, &schema.solar)?;
    let c_temp = cols.require(path, &schema.temp_avg)?;

    let mut obs = Vec::new();
    let mut diagnostics = Vec::new();
    for (row_no, row) in reader.records().enumerate() {
        let row_no = row_no + 1;
        let row = row.map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
        let station = field(&row, c_station).to_string();
        let date_raw = field(&row, c_date);
        let date = match NaiveDate::parse_from_str(date_raw, &schema.date_format) {
            Ok(d) => d,
            Err(_) => {
                diagnostics.push(Diagnostic {
                    source: label.clone(),
                    row: Some(row_no),
                    kind: DiagnosticKind::BadDate,
                    detail: format!("date {date_raw:?}"),
                });
                continue;
            }
        };
        // Numeric fields: empty means missing; garbage or an out-of-range
        // value is diagnosed and then treated as missing.
        let mut numeric = |col: usize, name: &str, nonneg: bool| -> Option<f64> {
            let raw = field(&row, col);
            if raw.is_empty() {
                return None;
            }
            match raw.parse::<f64>() {
                Ok(v) if !nonneg || v >= 0.0 => Some(v),
                Ok(v) => {
                    diagnostics.push(Diagnostic {
                        source: label.clone(),
                        row: Some(row_no),
                        kind: DiagnosticKind::BadNumeric,
                        detail: format!("{name} {v} is negative"),
                    });
                    None
                }
                Err(_) => {
                    diagnostics.push(Diagnostic {
                        source: label.clone(),
                        row: Some(row_no),
                        kind: DiagnosticKind::BadNumeric,
                        detail: format!("{name} {raw:?}"),
                    });
                    None
                }
            }
        };
        let precip = numeric(c_precip, "precip", true).map(|v| schema.precip_unit.to_inches(v));
        let solar = numeric(c_solar, "solar", true).map(|v| schema.solar_unit.to_mj_per_m2(v));
        let temp_avg = numeric(c_temp, "temp_avg", false).map(|v| schema.temp_unit.to_fahrenheit(v));
        obs.push(WeatherObs {
            station,
            date,
            precip,
            solar,
            temp_avg,
        });
    }

    obs.sort_by(|a, b| (a.station.as_str(), a.date).cmp(&(b.station.as_str(), b.date)));
    for pair in obs.windows(2) {
        if pair[0].station == pair[1].station && pair[0].date == pair[1].date {
            return Err(Error::DuplicateDay {
                station: pair[0].station.clone(),
                date: pair[0].date,
            });
        }
    }
    Ok((obs, diagnostics))
}

/// Fills `prev_harvest_date` for per-cut rows that did not declare one, using
/// the preceding cut within the same (state, location, variety, harvest-year)
/// group. The chronologically first cut of each group keeps `None`, which is
/// what the season-start filter keys on.
pub fn derive_prev_harvest(records: &mut [HarvestRecord]) {
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = &records[a];
        let rb = &records[b];
        (
            ra.state,
            &ra.location,
            &ra.variety,
            ra.harvest_year(),
            ra.harvest_date,
        )
            .cmp(&(
                rb.state,
                &rb.location,
                &rb.variety,
                rb.harvest_year(),
                rb.harvest_date,
            ))
    });
    for w in order.windows(2) {
        let (prev_idx, idx) = (w[0], w[1]);
        let same_group = {
            let a = &records[prev_idx];
            let b = &records[idx];
            a.state == b.state
                && a.location == b.location
                && a.variety == b.variety
                && a.harvest_year() == b.harvest_year()
        };
        if same_group
            && records[idx].granularity == Granularity::PerCut
            && records[idx].prev_harvest_date.is_none()
        {
            records[idx].prev_harvest_date = Some(records[prev_idx].harvest_date);
        }
    }
}

/// Writes records in the canonical harvest schema (round-trip stable).
pub fn write_harvest_file(path: &Path, records: &[HarvestRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    })?;
    let io_err = |e: csv::Error| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    };
    w.write_record([
        "state",
        "location",
        "variety",
        "sown_date",
        "harvest_date",
        "prev_harvest_date",
        "yield",
        "granularity",
    ])
    .map_err(io_err)?;
    for r in records {
        w.write_record([
            r.state.as_str(),
            &r.location,
            &r.variety,
            &r.sown_date.to_string(),
            &r.harvest_date.to_string(),
            &r.prev_harvest_date.map(|d| d.to_string()).unwrap_or_default(),
            &format!("{}", r.yield_tons_acre),
            r.granularity.as_str(),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::io(path.display().to_string(), e))
}

/// Writes observations in the canonical weather schema (round-trip stable).
pub fn write_weather_file(path: &Path, obs: &[WeatherObs]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    })?;
    let io_err = |e: csv::Error| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    };
    w.write_record(["station", "date", "precip", "solar", "temp_avg"])
        .map_err(io_err)?;
    let fmt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    for o in obs {
        w.write_record([
            o.station.clone(),
            o.date.to_string(),
            fmt(o.precip),
            fmt(o.solar),
            fmt(o.temp_avg),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::io(path.display().to_string(), e))
}

/// Writes the diagnostics sidecar (`<stem>.diagnostics.csv`).
pub fn write_diagnostics_sidecar(path: &Path, diagnostics: &[Diagnostic]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    })?;
    let io_err = |e: csv::Error| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    };
    w.write_record(["source", "row", "kind", "detail"]).map_err(io_err)?;
    for d in diagnostics {
        w.write_record([
            d.source.clone(),
            d.row.map(|r| r.to_string()).unwrap_or_default(),
            d.kind.as_str().to_string(),
            d.detail.clone(),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::io(path.display().to_string(), e))
}
