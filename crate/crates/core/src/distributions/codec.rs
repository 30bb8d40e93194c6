//! Binary stream files and the hidden-structure sidecar.
//!
//! Layout: the magic `PLSTRM01`, a `u32` little-endian header length, the
//! JSON header, a `u64` row count, then each row as a `u32` byte length
//! followed by its payload. Boolean rows are packed bits (least significant
//! bit first); real rows are little-endian `f64` values.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{PlantedInstance, ProblemSpec, RowData, StreamSource};
use crate::bits::BitRow;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"PLSTRM01";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamHeader {
    pub kind_tag: u8,
    pub spec: ProblemSpec,
    pub seed: u64,
    pub rows: u64,
    pub boolean: bool,
}

fn encode_row(data: &RowData, out: &mut Vec<u8>) {
    match data {
        RowData::Bits(bits) => {
            let nbytes = bits.len().div_ceil(8);
            let bytes: Vec<u8> = bits.words().iter().flat_map(|w| w.to_le_bytes()).take(nbytes).collect();
            out.extend_from_slice(&bytes);
        }
        RowData::Real(v) => {
            for x in v {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
    }
}

fn decode_row(bytes: &[u8], cols: usize, boolean: bool) -> Result<RowData> {
    if boolean {
        if bytes.len() != cols.div_ceil(8) {
            return Err(Error::Format(format!("bit row has {} bytes, expected {}", bytes.len(), cols.div_ceil(8))));
        }
        let words = bytes
            .chunks(8)
            .map(|c| {
                let mut b = [0u8; 8];
                b[..c.len()].copy_from_slice(c);
                u64::from_le_bytes(b)
            })
            .collect();
        Ok(RowData::Bits(BitRow::from_words(cols, words)))
    } else {
        if bytes.len() != cols * 8 {
            return Err(Error::Format(format!("real row has {} bytes, expected {}", bytes.len(), cols * 8)));
        }
        Ok(RowData::Real(bytes.chunks(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect()))
    }
}

/// Writes every row of `source` (from the start) to `w`.
pub fn write_stream<W: Write>(source: &StreamSource, mut w: W) -> Result<StreamHeader> {
    let spec = source.spec().clone();
    let header = StreamHeader {
        kind_tag: spec.kind.tag(),
        boolean: spec.kind.is_boolean(),
        seed: source.seed(),
        rows: source.len() as u64,
        spec,
    };
    let json = serde_json::to_vec(&header).map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(MAGIC)?;
    w.write_all(&(json.len() as u32).to_le_bytes())?;
    w.write_all(&json)?;
    w.write_all(&header.rows.to_le_bytes())?;
    let mut buf = Vec::new();
    for i in 0..source.len() {
        let row = source.row_at(i)?;
        buf.clear();
        encode_row(&row.data, &mut buf);
        w.write_all(&(buf.len() as u32).to_le_bytes())?;
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(header)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

/// Reads a stream file into a recorded source.
pub fn read_stream<R: Read>(mut r: R) -> Result<(StreamSource, StreamHeader)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a stream file (bad magic)".into()));
    }
    let len = read_u32(&mut r)? as usize;
    let mut json = vec![0u8; len];
    r.read_exact(&mut json)?;
    let header: StreamHeader = serde_json::from_slice(&json).map_err(|e| Error::Format(e.to_string()))?;
    if header.kind_tag != header.spec.kind.tag() {
        return Err(Error::Format("kind tag disagrees with the header spec".into()));
    }
    let mut count = [0u8; 8];
    r.read_exact(&mut count)?;
    let count = u64::from_le_bytes(count);
    if count != header.rows {
        return Err(Error::Format("row count disagrees with the header".into()));
    }
    let mut rows = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let n = read_u32(&mut r)? as usize;
        let mut buf = vec![0u8; n];
        r.read_exact(&mut buf)?;
        rows.push(decode_row(&buf, header.spec.cols, header.boolean)?);
    }
    let source = StreamSource::from_rows(header.spec.clone(), header.seed, rows)?;
    Ok((source, header))
}

pub fn write_instance<W: Write>(instance: &PlantedInstance, w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, instance).map_err(|e| Error::Format(e.to_string()))
}

pub fn read_instance<R: Read>(r: R) -> Result<PlantedInstance> {
    serde_json::from_reader(r).map_err(|e| Error::Format(e.to_string()))
}
