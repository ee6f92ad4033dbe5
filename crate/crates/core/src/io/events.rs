//! Event-stream persistence: a one-column CSV and a framed little-endian binary.
//!
//! CSV: header `time`, one event per row in ascending order, history rows
//! carry non-positive times. Values use 17 significant digits so that reading
//! back is lossless.
//!
//! Binary layout (all little-endian):
//!
//! ```text
//! magic  b"HKEV"        4 bytes
//! version u32 = 1
//! horizon f64
//! n_history u64
//! n_times  u64
//! history  f64 × n_history
//! times    f64 × n_times
//! ```

use std::io::{Read, Write};

use thiserror::Error;

use crate::stream::{EventStream, StreamError};

const MAGIC: &[u8; 4] = b"HKEV";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum EventIoError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("bad header: expected single column `time`")]
    Header,
    #[error("line {line}: cannot parse `{text}` as a time")]
    Value { line: u64, text: String },
    #[error("binary frame: {0}")]
    Frame(String),
    #[error(transparent)]
    Stream(#[from] StreamError),
}

pub fn write_csv<W: Write>(stream: &EventStream, writer: W) -> Result<(), EventIoError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["time"])?;
    for t in stream.all_events() {
        w.write_record([format!("{t:.16e}")])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV written by [`write_csv`]; rows `≤ 0` become history.
pub fn read_csv<R: Read>(reader: R, horizon: f64) -> Result<EventStream, EventIoError> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?;
    if headers.len() != 1 || headers.get(0).map(str::trim) != Some("time") {
        return Err(EventIoError::Header);
    }
    let (mut history, mut times) = (Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let text = rec.get(0).unwrap_or("").trim();
        let t: f64 = text.parse().map_err(|_| EventIoError::Value {
            line,
            text: text.to_string(),
        })?;
        if t <= 0.0 {
            history.push(t);
        } else {
            times.push(t);
        }
    }
    Ok(EventStream::new(horizon, times, history)?)
}

pub fn write_binary<W: Write>(stream: &EventStream, mut writer: W) -> Result<(), EventIoError> {
    writer.write_all(MAGIC)?;
    writer.write_all(&VERSION.to_le_bytes())?;
    writer.write_all(&stream.horizon().to_le_bytes())?;
    writer.write_all(&(stream.history().len() as u64).to_le_bytes())?;
    writer.write_all(&(stream.times().len() as u64).to_le_bytes())?;
    for t in stream.all_events() {
        writer.write_all(&t.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut reader: R) -> Result<EventStream, EventIoError> {
    let mut magic = [0u8; 4];
    reader.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(EventIoError::Frame("bad magic".into()));
    }
    let mut b4 = [0u8; 4];
    reader.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != VERSION {
        return Err(EventIoError::Frame(format!("unsupported version {version}")));
    }
    let mut b8 = [0u8; 8];
    let mut next = |reader: &mut R| -> Result<[u8; 8], EventIoError> {
        reader.read_exact(&mut b8)?;
        Ok(b8)
    };
    let horizon = f64::from_le_bytes(next(&mut reader)?);
    let n_history = u64::from_le_bytes(next(&mut reader)?) as usize;
    let n_times = u64::from_le_bytes(next(&mut reader)?) as usize;
    let mut read_vec = |n: usize| -> Result<Vec<f64>, EventIoError> {
        let mut buf = vec![0u8; n.checked_mul(8).ok_or_else(|| EventIoError::Frame("length overflow".into()))?];
        reader.read_exact(&mut buf)?;
        Ok(buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect())
    };
    let history = read_vec(n_history)?;
    let times = read_vec(n_times)?;
    Ok(EventStream::new(horizon, times, history)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn csv_layout() {
        let s = EventStream::new(3.0, vec![0.5, 2.0], vec![-1.0, 0.0]).unwrap();
        let mut buf = Vec::new();
        write_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "time");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with('-'));
        assert_eq!(read_csv(text.as_bytes(), 3.0).unwrap(), s);
    }

    #[test]
    fn csv_errors() {
        assert!(matches!(read_csv("t\n1.0\n".as_bytes(), 2.0), Err(EventIoError::Header)));
        assert!(matches!(read_csv("time\nabc\n".as_bytes(), 2.0), Err(EventIoError::Value { .. })));
        assert!(matches!(read_csv("time\n1.0\n0.5\n".as_bytes(), 2.0), Err(EventIoError::Stream(_))));
    }

    #[test]
    fn binary_rejects_garbage() {
        assert!(read_binary(&b"NOPE00000000"[..]).is_err());
    }

    fn stream_strategy() -> impl Strategy<Value = EventStream> {
        (
            prop::collection::vec(1e-9f64..1e3, 0..50),
            prop::collection::vec(-1e3f64..0.0, 0..10),
        )
            .prop_map(|(mut t, mut h)| {
                t.sort_by(f64::total_cmp);
                t.dedup();
                h.sort_by(f64::total_cmp);
                h.dedup();
                EventStream::new(1e3, t, h).unwrap()
            })
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_lossless(s in stream_strategy()) {
            let mut buf = Vec::new();
            write_csv(&s, &mut buf).unwrap();
            prop_assert_eq!(read_csv(&buf[..], s.horizon()).unwrap(), s);
        }

        #[test]
        fn binary_round_trip_is_lossless(s in stream_strategy()) {
            let mut buf = Vec::new();
            write_binary(&s, &mut buf).unwrap();
            prop_assert_eq!(read_binary(&buf[..]).unwrap(), s);
        }
    }
}
