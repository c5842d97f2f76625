//! Binary field and tensor files.
//!
//! Field layout (all little-endian):
//!
//! ```text
//! b"BEPPO1\0" | u32 d | u32 m | u32 N | f64 L | m·N^d f64 values (component-major, row-major)
//! ```
//!
//! Tensor files insert one flag byte after the magic (`1` constant, `0`
//! spatially varying). The `m` slot holds the system size; a constant tensor
//! stores `m·d·m·d` values, a varying one `m·d·m·d·N^d` values laid out like
//! a field with `m·d·m·d` components.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::ellipticity::Tensor4;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

pub const MAGIC: &[u8; 7] = b"BEPPO1\0";

struct Header {
    d: u32,
    m: u32,
    n: u32,
    half_width: f64,
}

fn write_header<W: Write>(w: &mut W, h: &Header) -> Result<()> {
    w.write_all(&h.d.to_le_bytes())?;
    w.write_all(&h.m.to_le_bytes())?;
    w.write_all(&h.n.to_le_bytes())?;
    w.write_all(&h.half_width.to_le_bytes())?;
    Ok(())
}

fn read_header<R: Read>(r: &mut R) -> Result<Header> {
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    let d = u32::from_le_bytes(b4);
    r.read_exact(&mut b4)?;
    let m = u32::from_le_bytes(b4);
    r.read_exact(&mut b4)?;
    let n = u32::from_le_bytes(b4);
    r.read_exact(&mut b8)?;
    let half_width = f64::from_le_bytes(b8);
    Ok(Header { d, m, n, half_width })
}

fn read_magic<R: Read>(r: &mut R) -> Result<()> {
    let mut magic = [0u8; 7];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    Ok(())
}

fn write_values<W: Write>(w: &mut W, values: &[f64]) -> Result<()> {
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_values<R: Read>(r: &mut R, count: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    let mut b8 = [0u8; 8];
    for _ in 0..count {
        r.read_exact(&mut b8)?;
        out.push(f64::from_le_bytes(b8));
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::Format("trailing bytes after payload".into()));
    }
    Ok(out)
}

fn grid_from(h: &Header, m: usize) -> Result<Grid> {
    Grid::new(h.d as usize, m, h.half_width, h.n as usize)
        .map_err(|e| Error::Format(format!("header: {e}")))
}

pub fn write_field<W: Write>(w: &mut W, field: &Field) -> Result<()> {
    let g = field.grid();
    w.write_all(MAGIC)?;
    write_header(
        w,
        &Header {
            d: g.d() as u32,
            m: g.m() as u32,
            n: g.n() as u32,
            half_width: g.half_width(),
        },
    )?;
    write_values(w, field.values())
}

pub fn read_field<R: Read>(r: &mut R) -> Result<Field> {
    read_magic(r)?;
    let h = read_header(r)?;
    let grid = grid_from(&h, h.m as usize)?;
    let values = read_values(r, grid.m() * grid.points())?;
    Field::new(grid, values)
}

pub fn save_field(path: impl AsRef<Path>, field: &Field) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field(&mut w, field)?;
    w.flush()?;
    Ok(())
}

pub fn load_field(path: impl AsRef<Path>) -> Result<Field> {
    read_field(&mut BufReader::new(File::open(path)?))
}

pub fn write_tensor<W: Write>(w: &mut W, tensor: &Tensor4) -> Result<()> {
    w.write_all(MAGIC)?;
    let (n, half_width, flag) = match tensor.grid() {
        Some(g) => (g.n() as u32, g.half_width(), 0u8),
        None => (0, 0.0, 1u8),
    };
    w.write_all(&[flag])?;
    write_header(
        w,
        &Header {
            d: tensor.d() as u32,
            m: tensor.m() as u32,
            n,
            half_width,
        },
    )?;
    write_values(w, tensor.raw())
}

pub fn read_tensor<R: Read>(r: &mut R) -> Result<Tensor4> {
    read_magic(r)?;
    let mut flag = [0u8; 1];
    r.read_exact(&mut flag)?;
    let h = read_header(r)?;
    let (m, d) = (h.m as usize, h.d as usize);
    if m == 0 || d == 0 || d > crate::grid::MAX_DIM {
        return Err(Error::Format(format!("tensor header m = {m}, d = {d}")));
    }
    let per_point = m * d * m * d;
    match flag[0] {
        1 => Tensor4::constant(m, d, read_values(r, per_point)?),
        0 => {
            let grid = grid_from(&h, per_point)?;
            let values = read_values(r, per_point * grid.points())?;
            Tensor4::varying(Field::new(grid, values)?, m)
        }
        other => Err(Error::Format(format!("unknown tensor flag {other}"))),
    }
}

pub fn save_tensor(path: impl AsRef<Path>, tensor: &Tensor4) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_tensor(&mut w, tensor)?;
    w.flush()?;
    Ok(())
}

pub fn load_tensor(path: impl AsRef<Path>) -> Result<Tensor4> {
    read_tensor(&mut BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout_is_fixed() {
        let g = Grid::new(1, 1, 2.0, 4).unwrap();
        let f = Field::new(g, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &f).unwrap();
        assert_eq!(&buf[..7], b"BEPPO1\0");
        assert_eq!(&buf[7..11], &1u32.to_le_bytes());
        assert_eq!(&buf[11..15], &1u32.to_le_bytes());
        assert_eq!(&buf[15..19], &4u32.to_le_bytes());
        assert_eq!(&buf[19..27], &2.0f64.to_le_bytes());
        assert_eq!(buf.len(), 27 + 4 * 8);
        assert_eq!(&buf[27..35], &1.0f64.to_le_bytes());
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        let g = Grid::new(1, 1, 2.0, 4).unwrap();
        let f = Field::zeros(g);
        let mut buf = Vec::new();
        write_field(&mut buf, &f).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_field(&mut bad.as_slice()), Err(Error::Format(_))));
        let short = &buf[..buf.len() - 3];
        assert!(read_field(&mut &short[..]).is_err());
        let mut long = buf.clone();
        long.push(0);
        assert!(read_field(&mut long.as_slice()).is_err());
    }

    #[test]
    fn tensor_round_trip() {
        let c = Tensor4::isotropic(2, 1.0, 0.5);
        let mut buf = Vec::new();
        write_tensor(&mut buf, &c).unwrap();
        assert_eq!(buf[7], 1);
        let back = read_tensor(&mut buf.as_slice()).unwrap();
        assert_eq!(back.raw(), c.raw());

        let g = Grid::new(2, 1, 3.0, 8).unwrap();
        let v = Tensor4::perturbed_laplacian(g, 1, 0.3);
        let mut buf = Vec::new();
        write_tensor(&mut buf, &v).unwrap();
        assert_eq!(buf[7], 0);
        let back = read_tensor(&mut buf.as_slice()).unwrap();
        assert_eq!(back.raw(), v.raw());
        assert_eq!(back.grid(), v.grid());
    }

    proptest! {
        #[test]
        fn field_round_trip(values in proptest::collection::vec(-1e6f64..1e6, 16)) {
            let g = Grid::new(2, 1, 1.25, 4).unwrap();
            let f = Field::new(g, values).unwrap();
            let mut buf = Vec::new();
            write_field(&mut buf, &f).unwrap();
            let back = read_field(&mut buf.as_slice()).unwrap();
            prop_assert_eq!(back, f);
        }
    }
}
