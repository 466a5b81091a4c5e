//! Channel matrix dumps and precoder weight files.
//!
//! Text dump: a `rows cols` header line, then one line per matrix row holding
//! `re im` pairs. Binary dump: the 8-byte magic `PAIMCH01`, rows and cols as
//! little-endian `u32`, then row-major `(re, im)` pairs as little-endian `f64`.
//! Both are lossless.

use std::io::{BufRead, Read, Write};

use paim_core::linalg::CMat;
use paim_core::C64;
use serde::{Deserialize, Serialize};

use crate::{HarnessError, Result};

pub const CHANNEL_MAGIC: &[u8; 8] = b"PAIMCH01";

fn format_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Format(msg.into())
}

pub fn write_channel_text<W: Write>(h: &CMat, mut out: W) -> Result<()> {
    writeln!(out, "{} {}", h.rows(), h.cols())?;
    for r in 0..h.rows() {
        let line: Vec<String> = h
            .row(r)
            .iter()
            .map(|z| format!("{:?} {:?}", z.re, z.im))
            .collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn read_channel_text<R: BufRead>(input: R) -> Result<CMat> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| format_err("empty channel dump"))??;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| format_err(format!("bad dimension {t:?}")))
        })
        .collect::<Result<_>>()?;
    let [rows, cols] = dims[..] else {
        return Err(format_err(format!("header {header:?} is not `rows cols`")));
    };
    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let line = lines
            .next()
            .ok_or_else(|| format_err(format!("missing row {r}")))??;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| format_err(format!("bad number {t:?} in row {r}")))
            })
            .collect::<Result<_>>()?;
        if vals.len() != 2 * cols {
            return Err(format_err(format!(
                "row {r} has {} numbers, expected {}",
                vals.len(),
                2 * cols
            )));
        }
        data.extend(vals.chunks(2).map(|p| C64::new(p[0], p[1])));
    }
    Ok(CMat::from_row_major(rows, cols, data)?)
}

pub fn write_channel_binary<W: Write>(h: &CMat, mut out: W) -> Result<()> {
    out.write_all(CHANNEL_MAGIC)?;
    let dim = |n: usize| u32::try_from(n).map_err(|_| format_err("matrix too large"));
    out.write_all(&dim(h.rows())?.to_le_bytes())?;
    out.write_all(&dim(h.cols())?.to_le_bytes())?;
    for z in h.as_slice() {
        out.write_all(&z.re.to_le_bytes())?;
        out.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_channel_binary<R: Read>(mut input: R) -> Result<CMat> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != CHANNEL_MAGIC {
        return Err(format_err("not a binary channel dump"));
    }
    let mut word = [0u8; 4];
    input.read_exact(&mut word)?;
    let rows = u32::from_le_bytes(word) as usize;
    input.read_exact(&mut word)?;
    let cols = u32::from_le_bytes(word) as usize;
    let mut buf = [0u8; 8];
    let mut next = || -> Result<f64> {
        input.read_exact(&mut buf)?;
        Ok(f64::from_le_bytes(buf))
    };
    let data = (0..rows * cols)
        .map(|_| Ok(C64::new(next()?, next()?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CMat::from_row_major(rows, cols, data)?)
}

#[derive(Debug, Serialize, Deserialize)]
struct WeightRecord {
    waveguide: usize,
    re: f64,
    im: f64,
}

/// `waveguide,re,im` with one row per waveguide.
pub fn write_precoder_csv<W: Write>(w: &[C64], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    for (waveguide, z) in w.iter().enumerate() {
        wtr.serialize(WeightRecord {
            waveguide,
            re: z.re,
            im: z.im,
        })?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_precoder_csv<R: Read>(input: R) -> Result<Vec<C64>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut w = Vec::new();
    for rec in rdr.deserialize() {
        let rec: WeightRecord = rec?;
        if rec.waveguide != w.len() {
            return Err(format_err(format!(
                "expected waveguide {}, found {}",
                w.len(),
                rec.waveguide
            )));
        }
        w.push(C64::new(rec.re, rec.im));
    }
    Ok(w)
}
