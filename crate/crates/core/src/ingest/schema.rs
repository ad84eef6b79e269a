//! Column maps and unit declarations for delimited input files.
//!
//! Source layouts differ between providers, so every input file carries an
//! explicit column map plus unit declarations; conversions happen once, at
//! parse time, and the rest of the pipeline sees tons/acre, inches, MJ/m²,
//! and °F only.

use serde::{Deserialize, Serialize};

use crate::types::Granularity;

pub const DEFAULT_DATE_FORMAT: &str = "%Y-%m-%d";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum YieldUnit {
    TonsPerAcre,
    KgPerHectare,
}

impl YieldUnit {
    pub fn to_tons_per_acre(&self, v: f64) -> f64 {
        match self {
            YieldUnit::TonsPerAcre => v,
            // 1 US ton = 907.18474 kg, 1 ha = 2.4710538 acres.
            YieldUnit::KgPerHectare => v / (907.18474 * 2.4710538),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecipUnit {
    Inches,
    Millimeters,
}

impl PrecipUnit {
    pub fn to_inches(&self, v: f64) -> f64 {
        match self {
            PrecipUnit::Inches => v,
            PrecipUnit::Millimeters => v / 25.4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TempUnit {
    Fahrenheit,
    Celsius,
}

impl TempUnit {
    pub fn to_fahrenheit(&self, v: f64) -> f64 {
        match self {
            TempUnit::Fahrenheit => v,
            TempUnit::Celsius => v * 1.8 + 32.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolarUnit {
    MjPerM2,
    Langleys,
}

impl SolarUnit {
    pub fn to_mj_per_m2(&self, v: f64) -> f64 {
        match self {
            SolarUnit::MjPerM2 => v,
            SolarUnit::Langleys => v * 0.04184,
        }
    }
}

fn default_date_format() -> String {
    DEFAULT_DATE_FORMAT.to_string()
}

/// Column map and units for a harvest (variety trial) file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HarvestSchema {
    pub state: String,
    pub location: String,
    pub variety: String,
    pub sown_date: String,
    pub harvest_date: String,
    /// Optional column; empty cells mean "no previous harvest".
    #[serde(default)]
    pub prev_harvest_date: Option<String>,
    #[serde(rename = "yield")]
    pub yield_col: String,
    /// Optional column; when absent, `default_granularity` applies.
    #[serde(default)]
    pub granularity: Option<String>,
    #[serde(default = "Granularity::percut")]
    pub default_granularity: Granularity,
    #[serde(default = "default_date_format")]
    pub date_format: String,
    #[serde(default = "YieldUnit::tons_per_acre")]
    pub yield_unit: YieldUnit,
}

impl Granularity {
    fn percut() -> Granularity {
        Granularity::PerCut
    }
}

impl YieldUnit {
    fn tons_per_acre() -> YieldUnit {
        YieldUnit::TonsPerAcre
    }
}

impl Default for HarvestSchema {
    /// Canonical layout, also used by the writers and the synthetic generator.
    fn default() -> Self {
        HarvestSchema {
            state: "state".into(),
            location: "location".into(),
            variety: "variety".into(),
            sown_date: "sown_date".into(),
            harvest_date: "harvest_date".into(),
            prev_harvest_date: Some("prev_harvest_date".into()),
            yield_col: "yield".into(),
            granularity: Some("granularity".into()),
            default_granularity: Granularity::PerCut,
            date_format: DEFAULT_DATE_FORMAT.into(),
            yield_unit: YieldUnit::TonsPerAcre,
        }
    }
}

/// Column map and units for a daily weather file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WeatherSchema {
    pub station: String,
    pub date: String,
    pub precip: String,
    pub solar: String,
    pub temp_avg: String,
    #[serde(default = "default_date_format")]
    pub date_format: String,
    #[serde(default = "PrecipUnit::inches")]
    pub precip_unit: PrecipUnit,
    #[serde(default = "TempUnit::fahrenheit")]
    pub temp_unit: TempUnit,
    #[serde(default = "SolarUnit::mj")]
    pub solar_unit: SolarUnit,
}

impl PrecipUnit {
    fn inches() -> PrecipUnit {
        PrecipUnit::Inches
    }
}

impl TempUnit {
    fn fahrenheit() -> TempUnit {
        TempUnit::Fahrenheit
    }
}

impl SolarUnit {
    fn mj() -> SolarUnit {
        SolarUnit::MjPerM2
    }
}

impl Default for WeatherSchema {
    fn default() -> Self {
        WeatherSchema {
            station: "station".into(),
            date: "date".into(),
            precip: "precip".into(),
            solar: "solar".into(),
            temp_avg: "temp_avg".into(),
            date_format: DEFAULT_DATE_FORMAT.into(),
            precip_unit: PrecipUnit::Inches,
            temp_unit: TempUnit::Fahrenheit,
            solar_unit: SolarUnit::MjPerM2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_conversions() {
        assert!((PrecipUnit::Millimeters.to_inches(25.4) - 1.0).abs() < 1e-12);
        assert!((TempUnit::Celsius.to_fahrenheit(100.0) - 212.0).abs() < 1e-12);
        assert!((SolarUnit::Langleys.to_mj_per_m2(100.0) - 4.184).abs() < 1e-12);
        // 2241.7 kg/ha is one ton/acre to within rounding of the constants.
        let v = YieldUnit::KgPerHectare.to_tons_per_acre(2241.7024);
        assert!((v - 1.0).abs() < 1e-6);
    }
}
