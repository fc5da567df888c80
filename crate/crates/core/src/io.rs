//! Edge list formats.
//!
//! Binary: consecutive records of two little-endian `u64` (`u`, `v`), no
//! header. Text: one `u v` pair per line in decimal.

use std::io::{self, Read, Write};

use crate::generator::Edge;

pub const BINARY_RECORD_BYTES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Binary,
    Text,
    /// Discard edges (benchmark mode).
    None,
}

pub fn write_binary<W: Write + ?Sized>(out: &mut W, edges: &[Edge]) -> io::Result<()> {
    let mut buf = Vec::with_capacity(edges.len() * BINARY_RECORD_BYTES);
    for e in edges {
        buf.extend_from_slice(&e.u.to_le_bytes());
        buf.extend_from_slice(&e.v.to_le_bytes());
    }
    out.write_all(&buf)
}

pub fn write_text<W: Write + ?Sized>(out: &mut W, edges: &[Edge]) -> io::Result<()> {
    for e in edges {
        writeln!(out, "{} {}", e.u, e.v)?;
    }
    Ok(())
}

pub fn write_edges<W: Write + ?Sized>(out: &mut W, edges: &[Edge], format: Format) -> io::Result<()> {
    match format {
        Format::Binary => write_binary(out, edges),
        Format::Text => write_text(out, edges),
        Format::None => Ok(()),
    }
}

pub fn read_binary<R: Read>(mut input: R) -> io::Result<Vec<Edge>> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() % BINARY_RECORD_BYTES != 0 {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("{} bytes is not a whole number of 16-byte records", bytes.len()),
        ));
    }
    Ok(bytes
        .chunks_exact(BINARY_RECORD_BYTES)
        .map(|r| {
            let (u, v) = r.split_at(8);
            Edge::new(
                u64::from_le_bytes(u.try_into().unwrap()),
                u64::from_le_bytes(v.try_into().unwrap()),
            )
        })
        .collect())
}
