//! Domain records shared by ingestion and feature engineering.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-letter state code, stored upper-case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateCode([u8; 2]);

impl Serialize for StateCode {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for StateCode {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        StateCode::parse(&s).map_err(serde::de::Error::custom)
    }
}

impl StateCode {
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        let bytes = t.as_bytes();
        if bytes.len() != 2 || !bytes.iter().all(|b| b.is_ascii_alphabetic()) {
            return Err(Error::InvalidValue {
                field: "state",
                reason: format!("expected a 2-letter code, got {t:?}"),
            });
        }
        Ok(StateCode([
            bytes[0].to_ascii_uppercase(),
            bytes[1].to_ascii_uppercase(),
        ]))
    }

    pub fn as_str(&self) -> &str {
        // Constructed from ASCII letters only.
        std::str::from_utf8(&self.0).unwrap()
    }
}

impl std::fmt::Display for StateCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for StateCode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        StateCode::parse(s)
    }
}

/// Whether a harvest row is a single cut or an annual total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Granularity {
    PerCut,
    Annual,
}

impl Granularity {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "percut" | "per_cut" | "cut" => Ok(Granularity::PerCut),
            "annual" | "year" => Ok(Granularity::Annual),
            other => Err(Error::InvalidValue {
                field: "granularity",
                reason: format!("expected percut or annual, got {other:?}"),
            }),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Granularity::PerCut => "percut",
            Granularity::Annual => "annual",
        }
    }
}

/// One variety-trial cut or annual total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarvestRecord {
    pub state: StateCode,
    pub location: String,
    pub variety: String,
    pub sown_date: NaiveDate,
    pub harvest_date: NaiveDate,
    /// Absent for the first cut of a season and for annualized rows.
    pub prev_harvest_date: Option<NaiveDate>,
    /// Tons per acre, non-negative.
    pub yield_tons_acre: f64,
    pub granularity: Granularity,
    /// Provenance key, unique within a run (file:row for parsed rows).
    pub source_id: String,
}

impl HarvestRecord {
    pub fn harvest_year(&self) -> i32 {
        use chrono::Datelike;
        self.harvest_date.year()
    }
}

/// Whether a weather value was observed or filled in by imputation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quality {
    Observed,
    Imputed,
}

/// One fully populated location-day of weather.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherDay {
    pub station: String,
    pub date: NaiveDate,
    /// Inches per day, non-negative.
    pub precip: f64,
    /// MJ/m² per day, non-negative.
    pub solar: f64,
    /// Daily average, °F.
    pub temp_avg: f64,
    pub quality: Quality,
}

/// A parsed weather row before imputation; any field may still be missing.
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherObs {
    pub station: String,
    pub date: NaiveDate,
    pub precip: Option<f64>,
    pub solar: Option<f64>,
    pub temp_avg: Option<f64>,
}

/// Binds a trial location to the weather station that observes it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StationBinding {
    pub state: StateCode,
    pub location: String,
    pub station: String,
    #[serde(default)]
    pub note: String,
}

/// Location → station bindings for a run.
///
/// Every trial location used by a run must resolve to exactly one station;
/// duplicate bindings for one location are rejected at construction.
#[derive(Debug, Clone, Default)]
pub struct StationMap {
    bindings: Vec<StationBinding>,
}

impl StationMap {
    pub fn new(bindings: Vec<StationBinding>) -> Result<Self> {
        for (i, b) in bindings.iter().enumerate() {
            if bindings[..i]
                .iter()
                .any(|o| o.state == b.state && o.location == b.location && o.station != b.station)
            {
                return Err(Error::AmbiguousLocation {
                    state: b.state.to_string(),
                    location: b.location.clone(),
                });
            }
        }
        Ok(StationMap { bindings })
    }

    pub fn resolve(&self, state: StateCode, location: &str) -> Result<&str> {
        self.bindings
            .iter()
            .find(|b| b.state == state && b.location == location)
            .map(|b| b.station.as_str())
            .ok_or_else(|| Error::UnmappedLocation {
                state: state.to_string(),
                location: location.to_string(),
            })
    }

    pub fn bindings(&self) -> &[StationBinding] {
        &self.bindings
    }
}
