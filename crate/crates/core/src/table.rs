//! CSV and JSON output shared by the scan, trial and report tools.

use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};

/// Writes records as CSV with a header row.
pub fn write_csv<T: Serialize, W: Write>(records: &[T], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in records {
        out.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

/// Writes records as a pretty-printed JSON array.
pub fn write_json<T: Serialize, W: Write>(records: &[T], mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, records).map_err(|e| Error::Format(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::invalid("format", format!("`{s}` is neither csv nor json"))),
        }
    }
}

pub fn write_records<T: Serialize, W: Write>(records: &[T], format: Format, w: W) -> Result<()> {
    match format {
        Format::Csv => write_csv(records, w),
        Format::Json => write_json(records, w),
    }
}

/// Concatenates CSV tables that share one header.
pub fn merge_csv<R: Read, W: Write>(inputs: Vec<R>, w: W) -> Result<usize> {
    let mut out = csv::Writer::from_writer(w);
    let mut header: Option<csv::StringRecord> = None;
    let mut rows = 0;
    for (i, input) in inputs.into_iter().enumerate() {
        let mut rdr = csv::Reader::from_reader(input);
        let h = rdr.headers().map_err(|e| Error::Format(e.to_string()))?.clone();
        match &header {
            None => {
                out.write_record(&h).map_err(|e| Error::Format(e.to_string()))?;
                header = Some(h);
            }
            Some(first) if *first != h => {
                return Err(Error::Format(format!("input {i} has a different header")));
            }
            Some(_) => {}
        }
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
            out.write_record(&rec).map_err(|e| Error::Format(e.to_string()))?;
            rows += 1;
        }
    }
    out.flush()?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct R {
        a: u32,
        b: f64,
    }

    #[test]
    fn csv_has_header_and_merges() {
        let mut one = Vec::new();
        write_csv(&[R { a: 1, b: 0.5 }], &mut one).unwrap();
        assert_eq!(String::from_utf8(one.clone()).unwrap(), "a,b\n1,0.5\n");
        let mut merged = Vec::new();
        let n = merge_csv(vec![&one[..], &one[..]], &mut merged).unwrap();
        assert_eq!(n, 2);
        assert_eq!(String::from_utf8(merged).unwrap(), "a,b\n1,0.5\n1,0.5\n");
        assert!(merge_csv(vec![&one[..], &b"x,y\n1,2\n"[..]], Vec::new()).is_err());
    }
}
