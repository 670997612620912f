//! Plain-text channel files.
//!
//! ```text
//! #channels v1 rx=2 tx=2
//! user=0 f_ghz=7
//! 1.0000000000000000e0+0.0000000000000000e0i 0.0000000000000000e0-2.5000000000000000e-1i
//! ...
//! ```
//!
//! Each record is a `user=<id> f_ghz=<f>` line followed by `rx` rows of
//! `tx` whitespace-separated complex entries. Entries are written with 17
//! significant digits so that reading a written file restores every bit.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{self, BufRead, Write};

use num_complex::Complex64;
use thiserror::Error;

use super::{CMatrix, ChannelError, ChannelRecord, ChannelSet};

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    MalformedHeader(String),
    MalformedRecord(String),
    BadEntry(String),
    DimensionMismatch { expected: usize, found: usize },
    DuplicateKey { user: u32, f_ghz: f64 },
    NonFinite { user: u32, f_ghz: f64 },
    UnexpectedEof,
    Io(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::MalformedHeader(s) => write!(f, "malformed header `{s}`"),
            ParseErrorKind::MalformedRecord(s) => write!(f, "malformed record line `{s}`"),
            ParseErrorKind::BadEntry(s) => write!(f, "bad complex entry `{s}`"),
            ParseErrorKind::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected} entries, found {found}")
            }
            ParseErrorKind::DuplicateKey { user, f_ghz } => {
                write!(f, "duplicate record for user {user} at {f_ghz} GHz")
            }
            ParseErrorKind::NonFinite { user, f_ghz } => {
                write!(f, "non-finite entry in record user {user} at {f_ghz} GHz")
            }
            ParseErrorKind::UnexpectedEof => write!(f, "unexpected end of input"),
            ParseErrorKind::Io(e) => write!(f, "read failed: {e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("channel file line {line}: {kind}")]
pub struct ChannelParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

fn err(line: usize, kind: ParseErrorKind) -> ChannelParseError {
    ChannelParseError { line, kind }
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let mut it = line.split_whitespace();
    if it.next()? != "#channels" || it.next()? != "v1" {
        return None;
    }
    let rx = it.next()?.strip_prefix("rx=")?.parse().ok()?;
    let tx = it.next()?.strip_prefix("tx=")?.parse().ok()?;
    if it.next().is_some() || rx == 0 || tx == 0 {
        return None;
    }
    Some((rx, tx))
}

fn parse_record_line(line: &str) -> Option<(u32, f64)> {
    let mut it = line.split_whitespace();
    let user = it.next()?.strip_prefix("user=")?.parse().ok()?;
    let f = it.next()?.strip_prefix("f_ghz=")?.parse().ok()?;
    if it.next().is_some() {
        return None;
    }
    Some((user, f))
}

/// Parses `a+bi` / `a-bi`, where `a` and `b` may carry exponents.
fn parse_complex(s: &str) -> Option<Complex64> {
    let body = s.strip_suffix('i')?;
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'))?;
    let re = body[..split].parse::<f64>().ok()?;
    let im = body[split..].parse::<f64>().ok()?;
    Some(Complex64::new(re, im))
}

fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:.16e}{sign}{:.16e}i", z.re, z.im.abs())
}

/// Reads a channel file. Records are kept exactly as stored, in file order.
pub fn read_channels<R: BufRead>(reader: R) -> Result<ChannelSet, ChannelParseError> {
    let mut lines = reader
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !matches!(l, Ok(s) if s.trim().is_empty()));
    let mut next_line = || -> Result<Option<(usize, String)>, ChannelParseError> {
        match lines.next() {
            None => Ok(None),
            Some((n, Ok(s))) => Ok(Some((n, s))),
            Some((n, Err(e))) => Err(err(n, ParseErrorKind::Io(e.to_string()))),
        }
    };

    let (hline, header) = next_line()?.ok_or(err(1, ParseErrorKind::UnexpectedEof))?;
    let (rx, tx) = parse_header(header.trim())
        .ok_or_else(|| err(hline, ParseErrorKind::MalformedHeader(header.clone())))?;

    let mut keys = BTreeSet::new();
    let mut records = Vec::new();
    while let Some((rline, rec)) = next_line()? {
        let (user, f_ghz) = parse_record_line(rec.trim())
            .filter(|(_, f)| f.is_finite() && *f > 0.0)
            .ok_or_else(|| err(rline, ParseErrorKind::MalformedRecord(rec.clone())))?;
        if !keys.insert((user, f_ghz.to_bits())) {
            return Err(err(rline, ParseErrorKind::DuplicateKey { user, f_ghz }));
        }
        let mut m = CMatrix::zeros(rx, tx);
        for i in 0..rx {
            let (n, row) = next_line()?.ok_or(err(rline, ParseErrorKind::UnexpectedEof))?;
            if parse_record_line(row.trim()).is_some() {
                // next record started before `rx` rows were read
                return Err(err(
                    n,
                    ParseErrorKind::DimensionMismatch {
                        expected: rx,
                        found: i,
                    },
                ));
            }
            let entries: Vec<&str> = row.split_whitespace().collect();
            if entries.len() != tx {
                return Err(err(
                    n,
                    ParseErrorKind::DimensionMismatch {
                        expected: tx,
                        found: entries.len(),
                    },
                ));
            }
            for (j, e) in entries.iter().enumerate() {
                let z = parse_complex(e)
                    .ok_or_else(|| err(n, ParseErrorKind::BadEntry(e.to_string())))?;
                if !z.is_finite() {
                    return Err(err(n, ParseErrorKind::NonFinite { user, f_ghz }));
                }
                m[(i, j)] = z;
            }
        }
        let record = ChannelRecord::new(user, f_ghz, m)
            .map_err(|e| err(rline, ParseErrorKind::MalformedRecord(e.to_string())))?;
        records.push(record);
    }
    ChannelSet::new(records, "ingested", None)
        .map_err(|e| err(hline, ParseErrorKind::MalformedRecord(e.to_string())))
}

pub fn parse_channels(text: &str) -> Result<ChannelSet, ChannelParseError> {
    read_channels(text.as_bytes())
}

/// Writes all records in order. Every record must share the dimensions of
/// the first.
pub fn write_channels<W: Write>(set: &ChannelSet, mut out: W) -> Result<(), io::Error> {
    let first = set.records().first().ok_or_else(|| {
        io::Error::new(io::ErrorKind::InvalidInput, "channel set has no records")
    })?;
    let (rx, tx) = (first.rx(), first.tx());
    writeln!(out, "#channels v1 rx={rx} tx={tx}")?;
    for r in set.records() {
        if r.matrix.shape() != (rx, tx) {
            return Err(io::Error::new(
                io::ErrorKind::InvalidInput,
                ChannelError::InvalidRecord {
                    user: r.user_id,
                    f_ghz: r.f_center,
                    reason: format!("shape {:?} differs from header {rx}x{tx}", r.matrix.shape()),
                }
                .to_string(),
            ));
        }
        writeln!(out, "user={} f_ghz={}", r.user_id, r.f_center)?;
        for i in 0..rx {
            let row: Vec<String> = (0..tx).map(|j| format_complex(r.matrix[(i, j)])).collect();
            writeln!(out, "{}", row.join(" "))?;
        }
    }
    Ok(())
}
