// SPDX-License-Identifier: Apache-2.0

//! Flat little-endian binary format for fields and multiplier tables.
//!
//! Layout:
//!
//! | bytes | content                                                  |
//! |-------|----------------------------------------------------------|
//! | 0..8  | magic `DIPGPFLD`                                         |
//! | 8..12 | format version, `u32` (currently 1)                      |
//! | 12    | payload kind: 0 = complex field, 1 = real multiplier     |
//! | 13    | space: 0 = position, 1 = frequency                       |
//! | 14..16| reserved, zero                                           |
//! | 16..24| `n`, `u64`                                               |
//! | 24..32| `L`, `f64`                                               |
//! | 32..  | payload, `f64` values; complex samples interleaved re/im |
//!
//! Samples are stored with `x` fastest, then `y`, then `z`.

use std::io::{Read, Write};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{Field, Grid3, MultiplierTable, Space};

pub const MAGIC: &[u8; 8] = b"DIPGPFLD";
pub const VERSION: u32 = 1;
const KIND_COMPLEX: u8 = 0;
const KIND_REAL: u8 = 1;

fn write_header<W: Write>(w: &mut W, kind: u8, space: Space, n: usize, length: f64) -> Result<()> {
    let mut header = [0u8; 16];
    header[..8].copy_from_slice(MAGIC);
    header[8..12].copy_from_slice(&VERSION.to_le_bytes());
    header[12] = kind;
    header[13] = match space {
        Space::Position => 0,
        Space::Frequency => 1,
    };
    w.write_all(&header)?;
    w.write_all(&(n as u64).to_le_bytes())?;
    w.write_all(&length.to_le_bytes())?;
    Ok(())
}

struct Header {
    kind: u8,
    space: Space,
    n: usize,
    length: f64,
}

fn read_header<R: Read>(r: &mut R) -> Result<Header> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)?;
    if &header[..8] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(header[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let space = match header[13] {
        0 => Space::Position,
        1 => Space::Frequency,
        s => return Err(Error::Format(format!("bad space tag {s}"))),
    };
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    let n = u64::from_le_bytes(buf) as usize;
    r.read_exact(&mut buf)?;
    let length = f64::from_le_bytes(buf);
    Ok(Header {
        kind: header[12],
        space,
        n,
        length,
    })
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

pub fn write_field<T: Real, W: Write>(w: &mut W, f: &Field<T>) -> Result<()> {
    write_header(
        w,
        KIND_COMPLEX,
        f.space,
        f.grid.n(),
        f.grid.length().to_f64_lossy(),
    )?;
    let mut buf = Vec::with_capacity(16 * f.values.len());
    for z in &f.values {
        buf.extend_from_slice(&z.re.to_f64_lossy().to_le_bytes());
        buf.extend_from_slice(&z.im.to_f64_lossy().to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_field<T: Real, R: Read>(r: &mut R) -> Result<Field<T>> {
    let h = read_header(r)?;
    if h.kind != KIND_COMPLEX {
        return Err(Error::Format("payload is not a complex field".into()));
    }
    let grid = Grid3::new(h.n, T::lit(h.length))?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        let re = read_f64(r)?;
        let im = read_f64(r)?;
        values.push(Complex::new(T::lit(re), T::lit(im)));
    }
    Field::from_values(grid, values, h.space)
}

pub fn write_multiplier<T: Real, W: Write>(w: &mut W, m: &MultiplierTable<T>) -> Result<()> {
    write_header(
        w,
        KIND_REAL,
        Space::Frequency,
        m.grid.n(),
        m.grid.length().to_f64_lossy(),
    )?;
    let mut buf = Vec::with_capacity(8 * m.values.len());
    for v in &m.values {
        buf.extend_from_slice(&v.to_f64_lossy().to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_multiplier<T: Real, R: Read>(r: &mut R) -> Result<MultiplierTable<T>> {
    let h = read_header(r)?;
    if h.kind != KIND_REAL {
        return Err(Error::Format("payload is not a real multiplier".into()));
    }
    let grid = Grid3::new(h.n, T::lit(h.length))?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        values.push(T::lit(read_f64(r)?));
    }
    MultiplierTable::from_values(grid, values)
}
