//! Field files.
//!
//! Binary layout, all little-endian:
//!
//! | offset | size | content                                   |
//! |--------|------|-------------------------------------------|
//! | 0      | 4    | magic `b"FLD1"`                           |
//! | 4      | 4    | dimension `d` (u32)                       |
//! | 8      | 4    | points per axis `n` (u32)                 |
//! | 12     | 4    | layout tag (u32): 0 physical, 1 spectral  |
//! | 16     | 8    | period `L` (f64)                          |
//! | 24     | ...  | samples as f64                            |
//!
//! Physical layout stores `n^d` real samples, row-major with x fastest.
//! Spectral layout stores `n^d` coefficients as interleaved `(re, im)` pairs.

use num_complex::Complex64;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;

pub const MAGIC: &[u8; 4] = b"FLD1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    Physical = 0,
    Spectral = 1,
}

pub fn write_field(mut w: impl Write, field: &Field, layout: Layout) -> Result<()> {
    let g = field.grid();
    w.write_all(MAGIC)?;
    w.write_all(&(g.dim() as u32).to_le_bytes())?;
    w.write_all(&(g.n() as u32).to_le_bytes())?;
    w.write_all(&(layout as u32).to_le_bytes())?;
    w.write_all(&g.period().to_le_bytes())?;
    let mut buf = Vec::with_capacity(g.len() * 16);
    match layout {
        Layout::Physical => field.values().iter().for_each(|v| buf.extend_from_slice(&v.to_le_bytes())),
        Layout::Spectral => field.coeffs().iter().for_each(|c| {
            buf.extend_from_slice(&c.re.to_le_bytes());
            buf.extend_from_slice(&c.im.to_le_bytes());
        }),
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_field(mut r: impl Read) -> Result<Field> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let dim = read_u32(&mut r)? as usize;
    let n = read_u32(&mut r)? as usize;
    let tag = read_u32(&mut r)?;
    let mut lb = [0u8; 8];
    r.read_exact(&mut lb)?;
    let grid = Grid::new(dim, n, f64::from_le_bytes(lb)).map_err(|e| Error::Format(e.to_string()))?;
    let count = match tag {
        0 => grid.len(),
        1 => 2 * grid.len(),
        t => return Err(Error::Format(format!("unknown layout tag {t}"))),
    };
    let mut raw = vec![0u8; 8 * count];
    r.read_exact(&mut raw)?;
    let nums: Vec<f64> = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect();
    if tag == 0 {
        Field::from_values(grid, nums)
    } else {
        let coeffs = nums.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
        Field::from_coeffs(grid, coeffs)
    }
}

/// Debug export with one `x,y,value` row per sample.
pub fn write_field_csv(mut w: impl Write, field: &Field) -> Result<()> {
    let g = field.grid();
    writeln!(w, "x,y,value")?;
    for (idx, v) in field.values().iter().enumerate() {
        let [x, y] = g.point(idx);
        writeln!(w, "{x},{y},{v}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_both_layouts() {
        let g = Grid::square(16, 7.0).unwrap();
        let f = Field::random_smooth(g, 5.0, false, 9);
        for layout in [Layout::Physical, Layout::Spectral] {
            let mut buf = Vec::new();
            write_field(&mut buf, &f, layout).unwrap();
            assert_eq!(&buf[..4], MAGIC);
            let back = read_field(buf.as_slice()).unwrap();
            assert_eq!(back.grid(), f.grid());
            assert!(back.distance(&f) < 1e-14);
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_field(&b"NOPE0000"[..]).is_err());
    }
}
