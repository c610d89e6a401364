//! Serialisation of grid measures.
//!
//! * CSV: header `z,p`, one row per cell, 17 significant digits.
//! * MKV1: `b"MKV1"`, then little-endian `u32 n`, `f64 L`, `n x f64` masses.

use std::io::{BufRead, Read, Write};

use super::{Grid, GridMeasure};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"MKV1";

/// Formats a float with 17 significant digits (lossless for `f64`).
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn write_csv<W: Write>(mu: &GridMeasure, mut out: W) -> Result<()> {
    writeln!(out, "z,p")?;
    let g = mu.grid();
    for (i, p) in mu.masses().iter().enumerate() {
        writeln!(out, "{},{}", fmt_f64(g.center(i)), fmt_f64(*p))?;
    }
    Ok(())
}

/// Reads a `z,p` table back; the grid is reconstructed from the cell count and
/// the outermost centers.
pub fn read_csv<R: BufRead>(input: R) -> Result<GridMeasure> {
    let mut lines = input.lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == "z,p" => {}
        _ => return Err(Error::Format("missing `z,p` header".into())),
    }
    let mut zs = Vec::new();
    let mut ps = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (z, p) = line
            .split_once(',')
            .ok_or_else(|| Error::Format(format!("bad row `{line}`")))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("bad number `{s}`: {e}")))
        };
        zs.push(parse(z)?);
        ps.push(parse(p)?);
    }
    let n = zs.len();
    if n < 2 {
        return Err(Error::Format("too few rows".into()));
    }
    let dz = (zs[n - 1] - zs[0]) / (n - 1) as f64;
    let grid = Grid::new(zs[n - 1] + 0.5 * dz, n)?;
    GridMeasure::from_masses(grid, ps)
}

pub fn write_mkv1<W: Write>(mu: &GridMeasure, mut out: W) -> Result<()> {
    let g = mu.grid();
    out.write_all(MAGIC)?;
    out.write_all(&(g.len() as u32).to_le_bytes())?;
    out.write_all(&g.half_width().to_le_bytes())?;
    for p in mu.masses() {
        out.write_all(&p.to_le_bytes())?;
    }
    Ok(())
}

pub fn to_mkv1_bytes(mu: &GridMeasure) -> Vec<u8> {
    let mut buf = Vec::with_capacity(16 + 8 * mu.masses().len());
    write_mkv1(mu, &mut buf).expect("writing to a Vec cannot fail");
    buf
}

pub fn read_mkv1<R: Read>(mut input: R) -> Result<GridMeasure> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let mut n = [0u8; 4];
    input.read_exact(&mut n)?;
    let n = u32::from_le_bytes(n) as usize;
    let mut l = [0u8; 8];
    input.read_exact(&mut l)?;
    let grid = Grid::new(f64::from_le_bytes(l), n)?;
    let mut masses = Vec::with_capacity(n);
    let mut buf = [0u8; 8];
    for _ in 0..n {
        input.read_exact(&mut buf)?;
        masses.push(f64::from_le_bytes(buf));
    }
    GridMeasure::from_masses(grid, masses)
}
