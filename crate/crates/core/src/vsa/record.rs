//! Canonical hypervector record.
//!
//! ```text
//! "HV01" | kind: u8 (0 binary, 1 cyclic) | order: u8 (0 for binary) | D: u64 LE | payload
//! ```
//!
//! Binary payload is `ceil(D / 8)` bytes: the packed words in little-endian
//! byte order, truncated, with zero padding bits. Cyclic payload is `D` bytes,
//! one element each.

use std::io::{Read, Write};

use super::{BinaryHypervector, CyclicHypervector, Hypervector};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"HV01";
const KIND_BINARY: u8 = 0;
const KIND_CYCLIC: u8 = 1;

/// Refuse to allocate payloads beyond this many coordinates when decoding.
const MAX_DIM: u64 = 1 << 32;

pub fn write_record<W: Write>(v: &Hypervector, w: &mut W) -> Result<()> {
    w.write_all(MAGIC)?;
    match v {
        Hypervector::Binary(b) => {
            w.write_all(&[KIND_BINARY, 0])?;
            w.write_all(&(b.dim() as u64).to_le_bytes())?;
            let mut bytes = Vec::with_capacity(b.words().len() * 8);
            for word in b.words() {
                bytes.extend_from_slice(&word.to_le_bytes());
            }
            bytes.truncate(b.dim().div_ceil(8));
            w.write_all(&bytes)?;
        }
        Hypervector::Cyclic(c) => {
            w.write_all(&[KIND_CYCLIC, c.order() as u8])?;
            w.write_all(&(c.dim() as u64).to_le_bytes())?;
            w.write_all(c.elems())?;
        }
    }
    Ok(())
}

pub fn read_record<R: Read>(r: &mut R) -> Result<Hypervector> {
    let mut head = [0u8; 14];
    r.read_exact(&mut head).map_err(truncated)?;
    if &head[..4] != MAGIC {
        return Err(Error::Format(format!(
            "bad hypervector magic {:?}",
            &head[..4]
        )));
    }
    let kind = head[4];
    let order = head[5];
    let dim = u64::from_le_bytes(head[6..14].try_into().unwrap());
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::Format(format!(
            "implausible hypervector dimension {dim}"
        )));
    }
    let dim = dim as usize;
    match kind {
        KIND_BINARY => {
            if order != 0 {
                return Err(Error::Format(format!(
                    "binary record with order byte {order}"
                )));
            }
            let mut bytes = vec![0u8; dim.div_ceil(8)];
            r.read_exact(&mut bytes).map_err(truncated)?;
            bytes.resize(dim.div_ceil(64) * 8, 0);
            let words = bytes
                .chunks_exact(8)
                .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
                .collect::<Vec<_>>();
            let v = BinaryHypervector::from_words(dim, words.clone())?;
            if v.words() != words.as_slice() {
                return Err(Error::Format(
                    "nonzero padding bits in binary record".into(),
                ));
            }
            Ok(Hypervector::Binary(v))
        }
        KIND_CYCLIC => {
            let mut elems = vec![0u8; dim];
            r.read_exact(&mut elems).map_err(truncated)?;
            let v = CyclicHypervector::new(order as usize, elems)
                .map_err(|e| Error::Format(e.to_string()))?;
            Ok(Hypervector::Cyclic(v))
        }
        k => Err(Error::Format(format!("unknown hypervector kind {k}"))),
    }
}

pub fn to_bytes(v: &Hypervector) -> Vec<u8> {
    let mut out = Vec::new();
    write_record(v, &mut out).expect("writing to a Vec cannot fail");
    out
}

pub fn from_bytes(bytes: &[u8]) -> Result<Hypervector> {
    let mut cursor = bytes;
    let v = read_record(&mut cursor)?;
    if !cursor.is_empty() {
        return Err(Error::Format(format!(
            "{} trailing bytes after record",
            cursor.len()
        )));
    }
    Ok(v)
}

pub(crate) fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Format("truncated record".into())
    } else {
        Error::Io(e)
    }
}
