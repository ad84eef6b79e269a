//! Gap filling for daily weather series.
//!
//! Missing precipitation imputes to zero (rain is zero-inflated); missing
//! temperature and solar radiation interpolate linearly between the nearest
//! observed days, or extend the nearest value at a series boundary. Runs of
//! missing values longer than `max_gap` are data errors, not patched: the
//! affected dates become holes.

use chrono::{Days, NaiveDate};

use crate::error::{Error, Result};
use crate::types::{Quality, WeatherDay, WeatherObs};

/// Longest run of missing days that imputation will fill.
pub const DEFAULT_MAX_GAP: u32 = 5;

/// Result of segment-wise imputation: complete days plus the date ranges
/// that could not be filled.
#[derive(Debug, Clone)]
pub struct ImputedSeries {
    pub station: String,
    /// Complete days sorted by date; dates inside `holes` are absent.
    pub days: Vec<WeatherDay>,
    /// Inclusive date ranges that exceeded `max_gap` for some field.
    pub holes: Vec<(NaiveDate, NaiveDate)>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Field {
    Precip,
    Solar,
    Temp,
}

/// Fills gaps in one station's series, leaving over-long gaps as holes.
///
/// Input must be sorted by date with no duplicate dates (the parser
/// guarantees both).
pub fn impute_segmentwise(obs: &[WeatherObs], max_gap: u32) -> ImputedSeries {
    if obs.is_empty() {
        return ImputedSeries {
            station: String::new(),
            days: Vec::new(),
            holes: Vec::new(),
        };
    }
    let station = obs[0].station.clone();
    debug_assert!(obs.iter().all(|o| o.station == station));
    debug_assert!(obs.windows(2).all(|w| w[0].date < w[1].date));

    let first = obs[0].date;
    let last = obs[obs.len() - 1].date;
    let n = (last - first).num_days() as usize + 1;

    // Dense per-day field arrays over [first, last].
    let mut precip: Vec<Option<f64>> = vec![None; n];
    let mut solar: Vec<Option<f64>> = vec![None; n];
    let mut temp: Vec<Option<f64>> = vec![None; n];
    let mut observed: Vec<[bool; 3]> = vec![[false; 3]; n];
    for o in obs {
        let i = (o.date - first).num_days() as usize;
        precip[i] = o.precip;
        solar[i] = o.solar;
        temp[i] = o.temp_avg;
        observed[i] = [o.precip.is_some(), o.solar.is_some(), o.temp_avg.is_some()];
    }

    let mut hole_mask = vec![false; n];
    let mut imputed_mask = vec![false; n];
    for (field, values) in [
        (Field::Precip, &mut precip),
        (Field::Solar, &mut solar),
        (Field::Temp, &mut temp),
    ] {
        fill_field(field, values, max_gap, &mut hole_mask, &mut imputed_mask);
    }

    let date_at = |i: usize| first.checked_add_days(Days::new(i as u64)).unwrap();
    let mut days = Vec::with_capacity(n);
    let mut holes = Vec::new();
    let mut hole_start: Option<usize> = None;
    for i in 0..n {
        if hole_mask[i] {
            hole_start.get_or_insert(i);
            continue;
        }
        if let Some(s) = hole_start.take() {
            holes.push((date_at(s), date_at(i - 1)));
        }
        days.push(WeatherDay {
            station: station.clone(),
            date: date_at(i),
            precip: precip[i].unwrap(),
            solar: solar[i].unwrap(),
            temp_avg: temp[i].unwrap(),
            quality: if imputed_mask[i] {
                Quality::Imputed
            } else {
                Quality::Observed
            },
        });
    }
    if let Some(s) = hole_start {
        holes.push((date_at(s), date_at(n - 1)));
    }
    ImputedSeries {
        station,
        days,
        holes,
    }
}

fn fill_field(
    field: Field,
    values: &mut [Option<f64>],
    max_gap: u32,
    hole_mask: &mut [bool],
    imputed_mask: &mut [bool],
) {
    let n = values.len();
    let mut i = 0;
    while i < n {
        if values[i].is_some() {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && values[i].is_none() {
            i += 1;
        }
        let end = i; // exclusive
        let run = end - start;
        if run > max_gap as usize {
            for m in &mut hole_mask[start..end] {
                *m = true;
            }
            continue;
        }
        let left = start.checked_sub(1).and_then(|j| values[j]);
        let right = values.get(end).copied().flatten();
        for (k, slot) in values[start..end].iter_mut().enumerate() {
            let v = match field {
                Field::Precip => 0.0,
                Field::Solar | Field::Temp => match (left, right) {
                    (Some(a), Some(b)) => {
                        // Linear interpolation between the bracketing days.
                        let t = (k + 1) as f64 / (run + 1) as f64;
                        a + (b - a) * t
                    }
                    (Some(a), None) => a,
                    (None, Some(b)) => b,
                    // Field never observed anywhere in the series.
                    (None, None) => {
                        for m in &mut hole_mask[start..end] {
                            *m = true;
                        }
                        return;
                    }
                },
            };
            *slot = Some(v);
            imputed_mask[start + k] = true;
        }
    }
}

/// Strict imputation: fills every gap of length ≤ `max_gap` and errors on
/// the first longer one.
pub fn impute_gaps(obs: &[WeatherObs], max_gap: u32) -> Result<Vec<WeatherDay>> {
    let series = impute_segmentwise(obs, max_gap);
    if let Some(&(start, end)) = series.holes.first() {
        return Err(Error::GapTooLarge {
            station: series.station,
            start,
            end,
        });
    }
    Ok(series.days)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(date: &str, precip: Option<f64>, solar: Option<f64>, temp: Option<f64>) -> WeatherObs {
        WeatherObs {
            station: "S".into(),
            date: date.parse().unwrap(),
            precip,
            solar,
            temp_avg: temp,
        }
    }

    fn full(date: &str, precip: f64, solar: f64, temp: f64) -> WeatherObs {
        obs(date, Some(precip), Some(solar), Some(temp))
    }

    #[test]
    fn interior_temp_gap_interpolates_to_midpoint() {
        let days = impute_gaps(
            &[
                full("2013-05-01", 0.0, 10.0, 60.0),
                obs("2013-05-02", Some(0.0), Some(10.0), None),
                full("2013-05-03", 0.0, 10.0, 70.0),
            ],
            3,
        )
        .unwrap();
        assert_eq!(days.len(), 3);
        assert_eq!(days[1].temp_avg, 65.0);
        assert_eq!(days[1].quality, Quality::Imputed);
        assert_eq!(days[0].quality, Quality::Observed);
        assert_eq!(days[2].quality, Quality::Observed);
    }

    #[test]
    fn precip_gap_fills_with_zero() {
        let days = impute_gaps(
            &[
                full("2013-05-01", 0.2, 10.0, 60.0),
                obs("2013-05-02", None, Some(10.0), Some(61.0)),
                full("2013-05-03", 0.0, 10.0, 62.0),
            ],
            3,
        )
        .unwrap();
        assert_eq!(days[1].precip, 0.0);
        assert_eq!(days[1].quality, Quality::Imputed);
    }

    #[test]
    fn missing_whole_days_are_filled() {
        let days = impute_gaps(
            &[
                full("2013-05-01", 0.1, 10.0, 60.0),
                full("2013-05-04", 0.1, 16.0, 66.0),
            ],
            3,
        )
        .unwrap();
        assert_eq!(days.len(), 4);
        assert_eq!(days[1].date.to_string(), "2013-05-02");
        assert_eq!(days[1].precip, 0.0);
        assert_eq!(days[1].solar, 12.0);
        assert_eq!(days[1].temp_avg, 62.0);
        assert_eq!(days[2].solar, 14.0);
        assert_eq!(days[2].temp_avg, 64.0);
    }

    #[test]
    fn long_gap_is_an_error() {
        let err = impute_gaps(
            &[
                full("2013-05-01", 0.0, 10.0, 60.0),
                full("2013-05-12", 0.0, 10.0, 70.0),
            ],
            3,
        )
        .unwrap_err();
        match err {
            Error::GapTooLarge { station, start, end } => {
                assert_eq!(station, "S");
                assert_eq!(start.to_string(), "2013-05-02");
                assert_eq!(end.to_string(), "2013-05-11");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn segmentwise_keeps_data_on_both_sides_of_a_hole() {
        let series = impute_segmentwise(
            &[
                full("2013-05-01", 0.0, 10.0, 60.0),
                full("2013-05-02", 0.0, 10.0, 61.0),
                full("2013-05-20", 0.0, 10.0, 70.0),
                full("2013-05-21", 0.0, 10.0, 71.0),
            ],
            3,
        );
        assert_eq!(series.holes.len(), 1);
        assert_eq!(series.days.len(), 4);
    }

    #[test]
    fn observed_values_never_change() {
        let input = vec![
            full("2013-05-01", 0.3, 11.5, 59.5),
            obs("2013-05-02", None, None, None),
            full("2013-05-03", 0.0, 13.0, 61.0),
        ];
        let days = impute_gaps(&input, 3).unwrap();
        let observed: Vec<_> = days
            .iter()
            .filter(|d| d.quality == Quality::Observed)
            .collect();
        assert_eq!(observed.len(), 2);
        assert_eq!(observed[0].precip, 0.3);
        assert_eq!(observed[0].solar, 11.5);
        assert_eq!(observed[0].temp_avg, 59.5);
        assert_eq!(observed[1].precip, 0.0);
    }

    #[test]
    fn boundary_gap_extends_nearest_value() {
        let days = impute_gaps(
            &[
                obs("2013-05-01", Some(0.0), None, None),
                full("2013-05-02", 0.0, 12.0, 64.0),
            ],
            3,
        )
        .unwrap();
        assert_eq!(days[0].solar, 12.0);
        assert_eq!(days[0].temp_avg, 64.0);
        assert_eq!(days[0].quality, Quality::Imputed);
    }
}
