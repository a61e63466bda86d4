use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDateTime;
use indexmap::IndexMap;

use super::{Column, ColumnKind, Frame};
use crate::error::{Error, Result};

pub const TIMESTAMP_COLUMN: &str = "timestamp";
pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%d %H:%M:%S";

/// Per-column kind overrides applied on ingest.
pub type KindOverrides = HashMap<String, ColumnKind>;

/// Read a sensor CSV from disk. See [`read_csv`].
pub fn ingest_csv(path: impl AsRef<Path>, overrides: &KindOverrides) -> Result<Frame> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, overrides)
}

/// Parse the CSV dialect: a `timestamp` column in `YYYY-MM-DD HH:MM:SS`
/// followed by sensor columns of decimal values. Column kinds come from the
/// sensor code unless overridden. Row numbers in errors count data rows from 1.
pub fn read_csv<R: Read>(reader: R, overrides: &KindOverrides) -> Result<Frame> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut names = headers.iter();
    match names.next() {
        Some(first) if first.trim() == TIMESTAMP_COLUMN => {}
        other => {
            return Err(Error::Parse(format!(
                "first column must be {TIMESTAMP_COLUMN:?}, found {:?}",
                other.unwrap_or("")
            )))
        }
    }

    let mut columns: IndexMap<String, Column> = IndexMap::new();
    let mut order = Vec::new();
    for name in names {
        let name = name.trim().to_string();
        let kind = match overrides.get(&name) {
            Some(k) => *k,
            None => ColumnKind::infer(&name).ok_or_else(|| {
                Error::column(&name, "not a sensor id or calendar feature; supply a kind override")
            })?,
        };
        if columns.contains_key(&name) {
            return Err(Error::DuplicateColumn(name));
        }
        columns.insert(name.clone(), Column { kind, values: Vec::new() });
        order.push(name);
    }

    let mut timestamps = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record?;
        if record.len() != order.len() + 1 {
            return Err(Error::Row {
                row,
                reason: format!("expected {} fields, found {}", order.len() + 1, record.len()),
            });
        }
        let raw_ts = record[0].trim();
        let ts = NaiveDateTime::parse_from_str(raw_ts, TIMESTAMP_FORMAT).map_err(|e| Error::Row {
            row,
            reason: format!("unparseable timestamp {raw_ts:?}: {e}"),
        })?;
        timestamps.push(ts);
        for (j, name) in order.iter().enumerate() {
            let cell = record[j + 1].trim();
            let v: f64 = cell.parse().map_err(|_| Error::Row {
                row,
                reason: format!("column {name:?}: cannot parse {cell:?} as a number"),
            })?;
            columns[j].values.push(v);
        }
    }

    let mut frame = Frame::new(timestamps)?;
    for (name, col) in columns {
        frame.push_column(name, col.kind, col.values)?;
    }
    Ok(frame)
}

pub fn write_csv(frame: &Frame, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut buf = std::io::BufWriter::new(file);
    write_csv_to(frame, &mut buf)?;
    buf.flush().map_err(|e| Error::io(path, e))
}

/// Write in the same dialect [`read_csv`] accepts. Values use the shortest
/// representation that parses back to the identical `f64`.
pub fn write_csv_to<W: Write>(frame: &Frame, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec![TIMESTAMP_COLUMN.to_string()];
    header.extend(frame.column_names().map(str::to_string));
    wtr.write_record(&header)?;
    let cols: Vec<&[f64]> = frame.columns().map(|(_, c)| c.values.as_slice()).collect();
    let mut record = Vec::with_capacity(header.len());
    for (r, ts) in frame.timestamps().iter().enumerate() {
        record.clear();
        record.push(ts.format(TIMESTAMP_FORMAT).to_string());
        record.extend(cols.iter().map(|c| c[r].to_string()));
        wtr.write_record(&record)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(s: &str) -> Result<Frame> {
        read_csv(s.as_bytes(), &KindOverrides::new())
    }

    #[test]
    fn minimal_ingest() {
        let f = read("timestamp,1-15-TMP1\n2019-12-01 00:00:00,20.1\n2019-12-01 00:01:00,20.2\n2019-12-01 00:02:00,20.3\n").unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(f.n_columns(), 1);
        assert_eq!(f.kind("1-15-TMP1").unwrap(), ColumnKind::Numeric);
        assert_eq!(f.values("1-15-TMP1").unwrap(), &[20.1, 20.2, 20.3]);
    }

    #[test]
    fn duplicate_column() {
        let err = read("timestamp,1-15-TMP1,1-15-TMP1\n2019-12-01 00:00:00,1,2\n").unwrap_err();
        assert!(err.to_string().contains("duplicate column"), "{err}");
    }

    #[test]
    fn bad_timestamp_reports_row() {
        let err = read("timestamp,1-15-TMP1\n2019-12-01 00:00:00,1\n2019-12-01 0x:01:00,1\n").unwrap_err();
        match err {
            Error::Row { row, .. } => assert_eq!(row, 2),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn override_unknown_column() {
        let mut o = KindOverrides::new();
        o.insert("setpoint".into(), ColumnKind::Numeric);
        let f = read_csv("timestamp,setpoint\n2019-12-01 00:00:00,21\n".as_bytes(), &o).unwrap();
        assert_eq!(f.kind("setpoint").unwrap(), ColumnKind::Numeric);
        assert!(read("timestamp,setpoint\n2019-12-01 00:00:00,21\n").is_err());
    }

    #[test]
    fn unreadable_file() {
        assert!(matches!(
            ingest_csv("/nonexistent/file.csv", &KindOverrides::new()),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn write_read_round_trip() {
        let src = "timestamp,1-15-TMP1,1-13-HTV1,Monday\n2019-12-30 14:40:00,21.123456789012344,0.5,1\n2019-12-30 14:41:00,0.1,1,1\n";
        let f = read(src).unwrap();
        let mut out = Vec::new();
        write_csv_to(&f, &mut out).unwrap();
        let g = read(std::str::from_utf8(&out).unwrap()).unwrap();
        assert_eq!(f, g);
        assert_eq!(std::str::from_utf8(&out).unwrap(), src);
    }
}
