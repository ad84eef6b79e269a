//! Parsing, imputation, and joining of yield-trial and weather files.

mod impute;
mod join;
mod parse;
mod schema;

pub use impute::{impute_gaps, impute_segmentwise, ImputedSeries, DEFAULT_MAX_GAP};
pub use join::{
    join_weather, required_window, JoinedDataset, JoinedRecord, StationSeries, WeatherStore,
};
pub use parse::{
    derive_prev_harvest, parse_harvest_file, parse_weather_file, write_diagnostics_sidecar,
    write_harvest_file, write_weather_file,
};
pub use schema::{
    HarvestSchema, PrecipUnit, SolarUnit, TempUnit, WeatherSchema, YieldUnit, DEFAULT_DATE_FORMAT,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::DiagnosticKind;
    use crate::types::Granularity;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn parses_a_well_formed_harvest_row() {
        let f = write_tmp(
            "state,location,variety,sown_date,harvest_date,prev_harvest_date,yield,granularity\n\
             GA,Athens,Bulldog805,2008-04-10,2009-06-01,2009-05-01,1.25,percut\n",
        );
        let (records, diags) = parse_harvest_file(f.path(), &HarvestSchema::default()).unwrap();
        assert!(diags.is_empty());
        assert_eq!(records.len(), 1);
        let r = &records[0];
        assert_eq!(r.state.as_str(), "GA");
        assert_eq!(r.location, "Athens");
        assert_eq!(r.variety, "Bulldog805");
        assert_eq!(r.yield_tons_acre, 1.25);
        assert_eq!(r.granularity, Granularity::PerCut);
        assert_eq!(r.prev_harvest_date.unwrap().to_string(), "2009-05-01");
    }

    #[test]
    fn negative_yield_becomes_a_diagnostic() {
        let f = write_tmp(
            "state,location,variety,sown_date,harvest_date,prev_harvest_date,yield,granularity\n\
             GA,Athens,V1,2008-04-10,2009-06-01,,-1,percut\n",
        );
        let (records, diags) = parse_harvest_file(f.path(), &HarvestSchema::default()).unwrap();
        assert!(records.is_empty());
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].kind, DiagnosticKind::NegativeYield);
        assert_eq!(diags[0].row, Some(1));
    }

    #[test]
    fn empty_file_with_header_parses_clean() {
        let f = write_tmp(
            "state,location,variety,sown_date,harvest_date,prev_harvest_date,yield,granularity\n",
        );
        let (records, diags) = parse_harvest_file(f.path(), &HarvestSchema::default()).unwrap();
        assert!(records.is_empty());
        assert!(diags.is_empty());
    }

    #[test]
    fn missing_column_aborts() {
        let f = write_tmp("state,location,variety,sown_date,harvest_date\nGA,A,V,2008-04-10,2009-06-01\n");
        let err = parse_harvest_file(f.path(), &HarvestSchema::default()).unwrap_err();
        assert!(matches!(err, crate::error::Error::MissingColumn { .. }));
    }

    #[test]
    fn bad_date_becomes_a_diagnostic() {
        let f = write_tmp(
            "state,location,variety,sown_date,harvest_date,prev_harvest_date,yield,granularity\n\
             GA,Athens,V1,not-a-date,2009-06-01,,1.0,percut\n\
             GA,Athens,V1,2008-04-10,2009-07-01,,1.0,percut\n",
        );
        let (records, diags) = parse_harvest_file(f.path(), &HarvestSchema::default()).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].kind, DiagnosticKind::BadDate);
    }

    #[test]
    fn weather_duplicate_day_aborts() {
        let f = write_tmp(
            "station,date,precip,solar,temp_avg\n\
             S,2013-05-01,0.0,10.0,60.0\n\
             S,2013-05-01,0.1,11.0,61.0\n",
        );
        let err = parse_weather_file(f.path(), &WeatherSchema::default()).unwrap_err();
        assert!(matches!(err, crate::error::Error::DuplicateDay { .. }));
    }

    #[test]
    fn weather_rows_sort_and_missing_fields_stay_missing() {
        let f = write_tmp(
            "station,date,precip,solar,temp_avg\n\
             S,2013-05-03,0.0,10.0,62.0\n\
             S,2013-05-01,,10.0,60.0\n\
             S,2013-05-02,0.2,10.0,61.0\n",
        );
        let (obs, diags) = parse_weather_file(f.path(), &WeatherSchema::default()).unwrap();
        assert!(diags.is_empty());
        assert_eq!(obs.len(), 3);
        assert_eq!(obs[0].date.to_string(), "2013-05-01");
        assert_eq!(obs[0].precip, None);
        assert_eq!(obs[2].date.to_string(), "2013-05-03");
        // The missing precipitation imputes to zero downstream.
        let days = impute_gaps(&obs, 3).unwrap();
        assert_eq!(days[0].precip, 0.0);
        assert_eq!(days[0].quality, crate::types::Quality::Imputed);
    }

    #[test]
    fn unit_conversions_apply_at_parse_time() {
        let f = write_tmp(
            "station,date,precip,solar,temp_avg\n\
             S,2013-05-01,25.4,100.0,20.0\n",
        );
        let schema = WeatherSchema {
            precip_unit: PrecipUnit::Millimeters,
            temp_unit: TempUnit::Celsius,
            solar_unit: SolarUnit::Langleys,
            ..WeatherSchema::default()
        };
        let (obs, _) = parse_weather_file(f.path(), &schema).unwrap();
        assert!((obs[0].precip.unwrap() - 1.0).abs() < 1e-12);
        assert!((obs[0].solar.unwrap() - 4.184).abs() < 1e-12);
        assert!((obs[0].temp_avg.unwrap() - 68.0).abs() < 1e-12);
    }

    #[test]
    fn harvest_roundtrip_through_canonical_schema() {
        let f = write_tmp(
            "state,location,variety,sown_date,harvest_date,prev_harvest_date,yield,granularity\n\
             GA,Athens,Bulldog805,2008-04-10,2009-06-01,2009-05-01,1.25,percut\n\
             KY,Lexington,V2,2012-09-15,2014-08-20,,3.5,annual\n",
        );
        let (records, _) = parse_harvest_file(f.path(), &HarvestSchema::default()).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        write_harvest_file(out.path(), &records).unwrap();
        let (reread, diags) = parse_harvest_file(out.path(), &HarvestSchema::default()).unwrap();
        assert!(diags.is_empty());
        // source_id encodes file and row, which legitimately differ after
        // rewriting; everything else must round-trip exactly.
        for (a, b) in records.iter().zip(&reread) {
            let mut b = b.clone();
            b.source_id = a.source_id.clone();
            assert_eq!(*a, b);
        }
    }

    #[test]
    fn weather_roundtrip_through_canonical_schema() {
        let f = write_tmp(
            "station,date,precip,solar,temp_avg\n\
             S,2013-05-01,0.125,10.33333333333333,60.05\n\
             S,2013-05-02,,10.0,\n",
        );
        let (obs, _) = parse_weather_file(f.path(), &WeatherSchema::default()).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        write_weather_file(out.path(), &obs).unwrap();
        let (reread, diags) = parse_weather_file(out.path(), &WeatherSchema::default()).unwrap();
        assert!(diags.is_empty());
        assert_eq!(obs, reread);
    }

    #[test]
    fn derive_prev_harvest_fills_within_plot_year() {
        let f = write_tmp(
            "state,location,variety,sown_date,harvest_date,prev_harvest_date,yield,granularity\n\
             GA,Athens,V1,2012-04-10,2013-07-20,,1.0,percut\n\
             GA,Athens,V1,2012-04-10,2013-05-01,,1.0,percut\n\
             GA,Athens,V1,2012-04-10,2013-06-10,,1.0,percut\n\
             GA,Athens,V1,2012-04-10,2014-05-05,,1.0,percut\n",
        );
        let (mut records, _) = parse_harvest_file(f.path(), &HarvestSchema::default()).unwrap();
        derive_prev_harvest(&mut records);
        let mut by_date = records.clone();
        by_date.sort_by_key(|r| r.harvest_date);
        assert_eq!(by_date[0].prev_harvest_date, None);
        assert_eq!(by_date[1].prev_harvest_date.unwrap().to_string(), "2013-05-01");
        assert_eq!(by_date[2].prev_harvest_date.unwrap().to_string(), "2013-06-10");
        // First cut of the next season starts fresh.
        assert_eq!(by_date[3].prev_harvest_date, None);
    }
}
