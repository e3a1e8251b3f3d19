use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use ukadf_core::data::DemandMatrix;
use ukadf_core::nn::Matrix;
use ukadf_core::Error as CoreError;

use crate::{Error, Result};

/// Name of the optional leading time column.
pub const TIMESTAMP_COLUMN: &str = "timestamp";

/// A numeric table with a header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub timestamps: Option<Vec<String>>,
    pub values: Matrix,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    CoreError::Parse {
        line,
        message: message.into(),
    }
    .into()
}

/// Reads a header row and numeric rows. Line numbers in errors are 1-based
/// and count the header.
pub fn read_table(reader: impl Read) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if header.is_empty() {
        return Err(CoreError::EmptyDataset("missing header".into()).into());
    }
    let has_time = header.get(0).is_some_and(|h| h.trim() == TIMESTAMP_COLUMN);
    let skip = usize::from(has_time);
    let columns: Vec<String> = header.iter().skip(skip).map(|h| h.trim().to_string()).collect();
    if columns.is_empty() {
        return Err(parse_err(1, "header has no value columns"));
    }
    let mut timestamps = Vec::new();
    let mut data = Vec::new();
    let mut rows = 0;
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| parse_err(e.position().map_or(line, |p| p.line() as usize), e.to_string()))?;
        if rec.len() != header.len() {
            return Err(parse_err(line, format!("expected {} fields, found {}", header.len(), rec.len())));
        }
        if has_time {
            timestamps.push(rec[0].trim().to_string());
        }
        for (j, field) in rec.iter().skip(skip).enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("column '{}': '{field}' is not a number", columns[j])))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("column '{}': non-finite value", columns[j])));
            }
            data.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(CoreError::EmptyDataset("no data rows".into()).into());
    }
    Ok(Table {
        values: Matrix::from_vec(rows, columns.len(), data)?,
        columns,
        timestamps: has_time.then_some(timestamps),
    })
}

pub fn read_table_file(path: &Path) -> Result<Table> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_table(file)
}

/// Demand matrix from a table. Negative values are rejected with their line.
/// When the first timestamp is an integer it is taken as the absolute time
/// index of row 0.
pub fn demand_from_table(table: Table) -> Result<DemandMatrix> {
    let cols = table.values.cols();
    if let Some(k) = table.values.as_slice().iter().position(|v| *v < 0.0) {
        return Err(parse_err(k / cols + 2, format!("column '{}': negative demand", table.columns[k % cols])));
    }
    let first_step = table
        .timestamps
        .as_ref()
        .and_then(|t| t.first())
        .and_then(|t| t.parse::<usize>().ok())
        .unwrap_or(0);
    Ok(DemandMatrix::new(table.columns, table.timestamps, table.values)?.with_first_step(first_step))
}

pub fn read_demand(reader: impl Read) -> Result<DemandMatrix> {
    demand_from_table(read_table(reader)?)
}

pub fn load_csv(path: &Path) -> Result<DemandMatrix> {
    demand_from_table(read_table_file(path)?)
}

/// Writes a header row and one row per matrix row. Values use Rust's
/// shortest round-tripping float formatting.
pub fn write_table(
    writer: impl Write,
    columns: &[String],
    timestamps: Option<&[String]>,
    values: &Matrix,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let csv_err = |e: csv::Error| Error::io("<csv>", std::io::Error::other(e));
    let mut header: Vec<&str> = Vec::new();
    if timestamps.is_some() {
        header.push(TIMESTAMP_COLUMN);
    }
    header.extend(columns.iter().map(String::as_str));
    w.write_record(&header).map_err(csv_err)?;
    for r in 0..values.rows() {
        let mut rec: Vec<String> = Vec::with_capacity(header.len());
        if let Some(ts) = timestamps {
            rec.push(ts[r].clone());
        }
        rec.extend(values.row(r).iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn write_demand(writer: impl Write, d: &DemandMatrix) -> Result<()> {
    write_table(writer, d.station_ids(), d.timestamps(), d.values())
}

/// Writes `d` to `path` (truncating).
pub fn save_csv(path: &Path, d: &DemandMatrix) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_demand(std::io::BufWriter::new(file), d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_with_and_without_timestamps() {
        let d = read_demand("timestamp,a,b\n5,1,2\n6,3,4\n".as_bytes()).unwrap();
        assert_eq!(d.station_ids(), ["a", "b"]);
        assert_eq!(d.first_step(), 5);
        assert_eq!(d.values().row(1), [3.0, 4.0]);
        let d = read_demand("a\n1\n2\n".as_bytes()).unwrap();
        assert_eq!(d.first_step(), 0);
        assert!(d.timestamps().is_none());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = read_demand("a,b\n1,2\n3,x\n".as_bytes()).unwrap_err();
        assert_eq!(err.class(), "parse");
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = read_demand("a,b\n1,2\n3\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = read_demand("a,b\n1,-2\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn empty_file() {
        assert_eq!(read_demand("a,b\n".as_bytes()).unwrap_err().class(), "empty-dataset");
    }

    #[test]
    fn write_read_round_trip() {
        let d = read_demand("timestamp,a,b\n0,1.5,2\n1,3,0.1\n".as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_demand(&mut buf, &d).unwrap();
        assert_eq!(read_demand(buf.as_slice()).unwrap(), d);
    }
}
