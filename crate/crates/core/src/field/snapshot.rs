//! Plain-text field snapshots.
//!
//! ```text
//! L=<float> Nr=<int> Nphi=<int>
//! i j re im        (Nr·Nphi lines, r-index outer)
//! ```
//!
//! Floats are written in shortest round-trip form, so a save/load cycle is
//! lossless and identical fields produce identical files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::ComplexField;
use crate::error::{Error, Result};
use crate::geometry::Annulus;

pub fn write_snapshot<W: Write>(u: &ComplexField, mut out: W) -> Result<()> {
    writeln!(
        out,
        "L={} Nr={} Nphi={}",
        u.annulus().half_width(),
        u.nr(),
        u.nphi()
    )?;
    for i in 0..u.nr() {
        for (j, z) in u.row(i).iter().enumerate() {
            writeln!(out, "{i} {j} {} {}", z.re, z.im)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_snapshot_file(u: &ComplexField, path: &Path) -> Result<()> {
    write_snapshot(u, BufWriter::new(File::create(path)?))
}

fn bad(line: usize, message: impl Into<String>) -> Error {
    Error::Snapshot {
        line,
        message: message.into(),
    }
}

fn header_value<'a>(token: Option<&'a str>, key: &str) -> Result<&'a str> {
    token
        .and_then(|t| t.strip_prefix(key))
        .and_then(|t| t.strip_prefix('='))
        .ok_or_else(|| bad(1, format!("expected `{key}=<value>` in header")))
}

/// Reads a snapshot. The annulus is rebuilt from `L` with the default `ρ`.
pub fn read_snapshot<R: Read>(input: R) -> Result<ComplexField> {
    let mut lines = BufReader::new(input).lines();
    let header = lines.next().ok_or_else(|| bad(1, "empty snapshot"))??;
    let mut tokens = header.split_whitespace();
    let l: f64 = header_value(tokens.next(), "L")?
        .parse()
        .map_err(|_| bad(1, "L is not a number"))?;
    let nr: usize = header_value(tokens.next(), "Nr")?
        .parse()
        .map_err(|_| bad(1, "Nr is not an integer"))?;
    let nphi: usize = header_value(tokens.next(), "Nphi")?
        .parse()
        .map_err(|_| bad(1, "Nphi is not an integer"))?;
    if tokens.next().is_some() {
        return Err(bad(1, "trailing tokens in header"));
    }
    let annulus = Annulus::from_half_width(l).map_err(|e| bad(1, e.to_string()))?;

    let total = nr
        .checked_mul(nphi)
        .ok_or_else(|| bad(1, "grid size overflows"))?;
    let mut values = Vec::with_capacity(total);
    for k in 0..total {
        let line_no = k + 2;
        let line = lines
            .next()
            .ok_or_else(|| bad(line_no, format!("expected {total} samples, found {k}")))??;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 4 {
            return Err(bad(line_no, "expected `i j re im`"));
        }
        let (i, j): (usize, usize) = match (parts[0].parse(), parts[1].parse()) {
            (Ok(i), Ok(j)) => (i, j),
            _ => return Err(bad(line_no, "indices must be integers")),
        };
        if (i, j) != (k / nphi, k % nphi) {
            return Err(bad(
                line_no,
                format!("expected indices {} {}", k / nphi, k % nphi),
            ));
        }
        let re: f64 = parts[2]
            .parse()
            .map_err(|_| bad(line_no, "bad real part"))?;
        let im: f64 = parts[3]
            .parse()
            .map_err(|_| bad(line_no, "bad imaginary part"))?;
        values.push(Complex64::new(re, im));
    }
    for (extra, line) in lines.enumerate() {
        if !line?.trim().is_empty() {
            return Err(bad(total + 2 + extra, "unexpected data after last sample"));
        }
    }
    ComplexField::from_values(annulus, nr, nphi, values).map_err(|e| bad(1, e.to_string()))
}

pub fn read_snapshot_file(path: &Path) -> Result<ComplexField> {
    read_snapshot(File::open(path)?)
}
