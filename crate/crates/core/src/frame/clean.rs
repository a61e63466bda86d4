use chrono::{Datelike, NaiveDateTime, TimeDelta, Timelike};
use log::warn;

use super::{ColumnKind, Frame, HOURS_COLUMN, WEEKDAY_COLUMNS};
use crate::error::{Error, Result};

/// Robust z-score cut-off used when none is given.
pub const DEFAULT_OUTLIER_K: f64 = 6.0;

/// MAD to standard-deviation factor for Gaussian data.
const MAD_SCALE: f64 = 1.4826;

fn floor_minute(ts: NaiveDateTime) -> NaiveDateTime {
    ts.with_second(0)
        .and_then(|t| t.with_nanosecond(0))
        .expect("second 0 is always valid")
}

/// Mean-aggregate readings into one row per minute over the covered span.
///
/// Minutes without any reading repeat the previous minute's values. Boolean
/// columns keep their fractional means.
pub fn resample_minutely(frame: &Frame) -> Result<Frame> {
    let (Some(first), Some(last)) = (frame.first_timestamp(), frame.last_timestamp()) else {
        return Err(Error::EmptyFrame);
    };
    let start = floor_minute(first);
    let end = floor_minute(last);
    let n_minutes = ((end - start).num_minutes() + 1) as usize;

    let cols: Vec<(&str, ColumnKind, &[f64])> = frame
        .columns()
        .map(|(n, c)| (n, c.kind, c.values.as_slice()))
        .collect();
    let mut sums = vec![vec![0.0; n_minutes]; cols.len()];
    let mut counts = vec![0usize; n_minutes];
    for (r, ts) in frame.timestamps().iter().enumerate() {
        let slot = (floor_minute(*ts) - start).num_minutes() as usize;
        counts[slot] += 1;
        for (c, (_, _, values)) in cols.iter().enumerate() {
            sums[c][slot] += values[r];
        }
    }
    if counts[0] == 0 {
        return Err(Error::EmptyFrame);
    }

    let timestamps: Vec<NaiveDateTime> = (0..n_minutes)
        .map(|i| start + TimeDelta::minutes(i as i64))
        .collect();
    let mut out = Frame::new(timestamps)?;
    for (c, (name, kind, _)) in cols.iter().enumerate() {
        let mut values = Vec::with_capacity(n_minutes);
        for slot in 0..n_minutes {
            let v = if counts[slot] == 0 {
                values[slot - 1]
            } else {
                // A mean of [0,1] values can round a hair outside the range.
                let mean = sums[c][slot] / counts[slot] as f64;
                if *kind == ColumnKind::Boolean {
                    mean.clamp(0.0, 1.0)
                } else {
                    mean
                }
            };
            values.push(v);
        }
        out.push_column(*name, *kind, values)?;
    }
    Ok(out)
}

/// Rows dropped by [`remove_outliers`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutlierReport {
    pub removed: Vec<(NaiveDateTime, f64)>,
    pub median: f64,
    pub robust_std: f64,
    pub warning: Option<String>,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Drop rows whose response lies more than `k` robust standard deviations
/// (MAD x 1.4826) from the response median.
pub fn remove_outliers(frame: &Frame, response: &str, k: f64) -> Result<(Frame, OutlierReport)> {
    if k.is_nan() || k <= 0.0 {
        return Err(Error::invalid(format!("outlier threshold must be positive, got {k}")));
    }
    let col = frame.column(response)?;
    if col.kind != ColumnKind::Numeric {
        return Err(Error::column(response, "response must be numeric"));
    }
    if frame.is_empty() {
        return Err(Error::EmptyFrame);
    }
    let y = &col.values;
    let mut sorted = y.clone();
    sorted.sort_by(f64::total_cmp);
    let med = median(&sorted);
    let mut dev: Vec<f64> = y.iter().map(|v| (v - med).abs()).collect();
    dev.sort_by(f64::total_cmp);
    let robust_std = MAD_SCALE * median(&dev);

    let mut report = OutlierReport {
        median: med,
        robust_std,
        ..Default::default()
    };
    if robust_std == 0.0 {
        let msg = format!("{response}: zero median absolute deviation, no rows removed");
        warn!("{msg}");
        report.warning = Some(msg);
        return Ok((frame.clone(), report));
    }

    let limit = k * robust_std;
    let mut keep = Vec::with_capacity(y.len());
    for (r, &v) in y.iter().enumerate() {
        if (v - med).abs() > limit {
            report.removed.push((frame.timestamps()[r], v));
        } else {
            keep.push(r);
        }
    }
    Ok((frame.take_rows(&keep), report))
}

/// Add an hour-of-day column and seven one-hot weekday columns (Monday first).
/// Existing calendar columns are overwritten.
pub fn engineer_time_features(frame: &Frame) -> Result<Frame> {
    let mut out = frame.clone();
    let n = frame.len();
    let mut weekdays = vec![vec![0.0; n]; 7];
    let mut hours = Vec::with_capacity(n);
    for (r, ts) in frame.timestamps().iter().enumerate() {
        hours.push(ts.hour() as f64);
        weekdays[ts.weekday().num_days_from_monday() as usize][r] = 1.0;
    }
    for (name, values) in WEEKDAY_COLUMNS.iter().zip(weekdays) {
        out.set_column(*name, ColumnKind::Engineered, values)?;
    }
    out.set_column(HOURS_COLUMN, ColumnKind::Engineered, hours)?;
    Ok(out)
}

/// Split at `boundary`: rows at or before it train, rows after it test.
pub fn split(frame: &Frame, boundary: NaiveDateTime) -> Result<(Frame, Frame)> {
    let (Some(first), Some(last)) = (frame.first_timestamp(), frame.last_timestamp()) else {
        return Err(Error::EmptyFrame);
    };
    if boundary < first || boundary > last {
        return Err(Error::invalid(format!(
            "split boundary {boundary} outside frame span {first} .. {last}"
        )));
    }
    let cut = frame.timestamps().partition_point(|t| *t <= boundary);
    Ok((frame.slice(0, cut), frame.slice(cut, frame.len())))
}

/// Split off the last `fraction` of rows (at least one row each side).
pub fn chronological_holdout(frame: &Frame, fraction: f64) -> Result<(Frame, Frame)> {
    if !(0.0..1.0).contains(&fraction) || fraction == 0.0 {
        return Err(Error::invalid(format!("holdout fraction must be in (0, 1), got {fraction}")));
    }
    let n = frame.len();
    if n < 2 {
        return Err(Error::invalid("need at least two rows for a holdout split"));
    }
    let n_valid = ((n as f64 * fraction).round() as usize).clamp(1, n - 1);
    Ok((frame.slice(0, n - n_valid), frame.slice(n - n_valid, n)))
}

#[cfg(test)]
mod tests {
    use super::super::test_util::*;
    use super::*;
    use chrono::TimeDelta;

    fn frame_with(name: &str, kind: ColumnKind, ts: Vec<NaiveDateTime>, v: Vec<f64>) -> Frame {
        let mut f = Frame::new(ts).unwrap();
        f.push_column(name, kind, v).unwrap();
        f
    }

    #[test]
    fn two_readings_in_a_minute_average() {
        let t0 = dec(1, 0, 0);
        let ts = vec![t0 + TimeDelta::seconds(10), t0 + TimeDelta::seconds(40)];
        let f = frame_with("1-15-TMP1", ColumnKind::Numeric, ts, vec![20.0, 21.0]);
        let r = resample_minutely(&f).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.timestamps()[0], t0);
        assert_eq!(r.values("1-15-TMP1").unwrap(), &[20.5]);
    }

    #[test]
    fn one_reading_per_minute_is_identity() {
        let ts = minutes_from(dec(1, 0, 0), 5);
        let v = vec![1.5, 2.25, 3.0, -1.0, 7.125];
        let f = frame_with("1-15-TMP1", ColumnKind::Numeric, ts, v);
        assert_eq!(resample_minutely(&f).unwrap(), f);
    }

    #[test]
    fn boolean_means_are_not_rounded() {
        let t0 = dec(1, 0, 0);
        let ts = vec![t0, t0 + TimeDelta::seconds(30)];
        let samples = [1.0, 0.0];
        let f = frame_with("1-13-HTV1", ColumnKind::Boolean, ts, samples.to_vec());
        let r = resample_minutely(&f).unwrap();
        let direct = samples.iter().sum::<f64>() / samples.len() as f64;
        assert_eq!(r.values("1-13-HTV1").unwrap(), &[direct]);
        assert_eq!(direct, 0.5);
    }

    #[test]
    fn gaps_are_forward_filled() {
        let t0 = dec(1, 0, 0);
        let ts = vec![t0, t0 + TimeDelta::minutes(3)];
        let f = frame_with("1-15-TMP1", ColumnKind::Numeric, ts, vec![1.0, 4.0]);
        let r = resample_minutely(&f).unwrap();
        assert_eq!(r.values("1-15-TMP1").unwrap(), &[1.0, 1.0, 1.0, 4.0]);
        for w in r.timestamps().windows(2) {
            assert_eq!((w[1] - w[0]).num_seconds(), 60);
        }
    }

    #[test]
    fn resample_empty_frame_errors() {
        let f = Frame::new(vec![]).unwrap();
        assert!(matches!(resample_minutely(&f), Err(Error::EmptyFrame)));
    }

    fn outlier_fixture() -> Frame {
        // 1000 values in 20 +/- 0.1 with two gross outliers.
        let n = 1000;
        let mut v: Vec<f64> = (0..n).map(|i| 20.0 + 0.1 * ((i * 37 % 101) as f64 / 50.0 - 1.0)).collect();
        v[100] = 95.0;
        v[700] = -40.0;
        frame_with("1-15-TMP1", ColumnKind::Numeric, minutes_from(dec(1, 0, 0), n), v)
    }

    /// Brute-force oracle: median by full sort, MAD by full sort, then count.
    fn oracle_count(values: &[f64], k: f64) -> usize {
        let mut s = values.to_vec();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let med = (s[s.len() / 2 - 1] + s[s.len() / 2]) / 2.0;
        let mut d: Vec<f64> = values.iter().map(|x| (x - med).abs()).collect();
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mad = (d[d.len() / 2 - 1] + d[d.len() / 2]) / 2.0;
        values.iter().filter(|x| (*x - med).abs() > k * 1.4826 * mad).count()
    }

    #[test]
    fn removes_exactly_the_two_outliers() {
        let f = outlier_fixture();
        assert_eq!(oracle_count(f.values("1-15-TMP1").unwrap(), 6.0), 2);
        let (clean, report) = remove_outliers(&f, "1-15-TMP1", 6.0).unwrap();
        assert_eq!(clean.len(), 998);
        let removed: Vec<f64> = report.removed.iter().map(|r| r.1).collect();
        assert_eq!(removed, vec![95.0, -40.0]);
        assert_eq!(report.removed[0].0, dec(1, 1, 40));
        // idempotent on this fixture
        let (again, report2) = remove_outliers(&clean, "1-15-TMP1", 6.0).unwrap();
        assert!(report2.removed.is_empty());
        assert_eq!(again, clean);
    }

    #[test]
    fn constant_response_removes_nothing() {
        let f = frame_with("1-15-TMP1", ColumnKind::Numeric, minutes_from(dec(1, 0, 0), 10), vec![21.0; 10]);
        let (clean, report) = remove_outliers(&f, "1-15-TMP1", 6.0).unwrap();
        assert_eq!(clean, f);
        assert!(report.warning.is_some());
    }

    #[test]
    fn infinite_k_is_identity() {
        let f = outlier_fixture();
        let (clean, report) = remove_outliers(&f, "1-15-TMP1", f64::INFINITY).unwrap();
        assert_eq!(clean, f);
        assert!(report.removed.is_empty());
    }

    #[test]
    fn outlier_errors() {
        let f = outlier_fixture();
        assert!(remove_outliers(&f, "1-14-TMP1", 6.0).is_err());
        assert!(remove_outliers(&f, "1-15-TMP1", 0.0).is_err());
        let b = frame_with("1-13-HTV1", ColumnKind::Boolean, minutes_from(dec(1, 0, 0), 2), vec![0.0, 1.0]);
        assert!(remove_outliers(&b, "1-13-HTV1", 6.0).is_err());
    }

    #[test]
    fn time_features_for_monday_afternoon() {
        // 2019-12-30 is a Monday (2019-12-25 was a Wednesday, +5 days).
        let f = frame_with("1-15-TMP1", ColumnKind::Numeric, vec![dec(30, 14, 40)], vec![21.0]);
        let g = engineer_time_features(&f).unwrap();
        assert_eq!(g.n_columns(), 1 + 7 + 1);
        assert_eq!(g.values(HOURS_COLUMN).unwrap(), &[14.0]);
        assert_eq!(g.values("Monday").unwrap(), &[1.0]);
        for day in &WEEKDAY_COLUMNS[1..] {
            assert_eq!(g.values(day).unwrap(), &[0.0], "{day}");
        }
        assert_eq!(g.kind("Monday").unwrap(), ColumnKind::Engineered);
    }

    #[test]
    fn time_features_one_hot_over_a_fortnight() {
        let n = 14 * 24 * 4;
        let ts: Vec<_> = (0..n).map(|i| dec(1, 0, 0) + TimeDelta::minutes(15 * i as i64)).collect();
        let f = frame_with("1-15-TMP1", ColumnKind::Numeric, ts, vec![0.0; n]);
        let g = engineer_time_features(&f).unwrap();
        for r in 0..n {
            let s: f64 = WEEKDAY_COLUMNS.iter().map(|d| g.values(d).unwrap()[r]).sum();
            assert_eq!(s, 1.0);
            let h = g.values(HOURS_COLUMN).unwrap()[r];
            assert!((0.0..=23.0).contains(&h));
        }
    }

    #[test]
    fn split_conventions() {
        let f = frame_with("1-15-TMP1", ColumnKind::Numeric, minutes_from(dec(30, 14, 30), 20), vec![0.0; 20]);
        let (train, test) = split(&f, dec(30, 14, 39)).unwrap();
        assert_eq!(train.len(), 10);
        assert_eq!(test.len(), 10);
        assert_eq!(train.last_timestamp(), Some(dec(30, 14, 39)));
        assert_eq!(test.first_timestamp(), Some(dec(30, 14, 40)));

        let (train, test) = split(&f, f.last_timestamp().unwrap()).unwrap();
        assert_eq!(train.len(), 20);
        assert!(test.is_empty());

        assert!(split(&f, dec(30, 14, 29)).is_err());
        assert!(split(&f, dec(30, 15, 0)).is_err());
    }

    #[test]
    fn holdout_takes_the_tail() {
        let f = frame_with("1-15-TMP1", ColumnKind::Numeric, minutes_from(dec(1, 0, 0), 100), (0..100).map(f64::from).collect());
        let (a, b) = chronological_holdout(&f, 0.1).unwrap();
        assert_eq!((a.len(), b.len()), (90, 10));
        assert_eq!(b.values("1-15-TMP1").unwrap()[0], 90.0);
    }
}
