//! Binary field files.
//!
//! Layout: `b"TPFIELD1"`, then little-endian `u32` version (1), `u32` n,
//! `u32` N_t, per axis `u32` N_i and `f64` L_i, `f64` T, `u8` state
//! (0 physical, 1 spectral), then `N_t * prod N_i` values as `(f64 re,
//! f64 im)` in time-major row-major order.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{State, TPField};
use crate::grid::GroupGrid;

pub const MAGIC: &[u8; 8] = b"TPFIELD1";
pub const VERSION: u32 = 1;

/// Decoded contents of a field file.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldFile {
    pub period: f64,
    pub n_t: usize,
    /// `(N_i, L_i)` per spatial axis.
    pub axes: Vec<(usize, f64)>,
    pub state: State,
    pub data: Vec<Complex64>,
}

impl FieldFile {
    pub fn from_field(u: &TPField) -> Self {
        let g = u.grid();
        Self {
            period: g.period(),
            n_t: g.n_t(),
            axes: g.axes().iter().map(|a| (a.points, a.half_length)).collect(),
            state: u.state(),
            data: u.data().to_vec(),
        }
    }

    /// Attaches the data to `grid`, which must agree with the header.
    pub fn into_field(self, grid: Arc<GroupGrid>) -> Result<TPField> {
        let matches = grid.period() == self.period
            && grid.n_t() == self.n_t
            && grid.dim() == self.axes.len()
            && grid
                .axes()
                .iter()
                .zip(&self.axes)
                .all(|(a, &(n, l))| a.points == n && a.half_length == l);
        if !matches {
            return Err(Error::GridMismatch);
        }
        TPField::from_data(grid, self.state, self.data)
    }

    /// The grid described by the header (no half-space axis).
    pub fn grid(&self) -> Result<GroupGrid> {
        let axes: Vec<(f64, usize)> = self.axes.iter().map(|&(n, l)| (l, n)).collect();
        GroupGrid::make(self.period, axes.len(), self.n_t, &axes, None)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.header_len() + 16 * self.data.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.axes.len() as u32).to_le_bytes());
        out.extend_from_slice(&(self.n_t as u32).to_le_bytes());
        for &(n, l) in &self.axes {
            out.extend_from_slice(&(n as u32).to_le_bytes());
            out.extend_from_slice(&l.to_le_bytes());
        }
        out.extend_from_slice(&self.period.to_le_bytes());
        out.push(match self.state {
            State::Physical => 0,
            State::Spectral => 1,
        });
        for v in &self.data {
            out.extend_from_slice(&v.re.to_le_bytes());
            out.extend_from_slice(&v.im.to_le_bytes());
        }
        out
    }

    fn header_len(&self) -> usize {
        8 + 4 + 4 + 4 + 12 * self.axes.len() + 8 + 1
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::BadMagic);
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let n = r.u32()? as usize;
        let n_t = r.u32()? as usize;
        let mut axes = Vec::with_capacity(n);
        for _ in 0..n {
            let points = r.u32()? as usize;
            axes.push((points, r.f64()?));
        }
        let period = r.f64()?;
        let state = match r.take(1)?[0] {
            0 => State::Physical,
            1 => State::Spectral,
            s => return Err(Error::InvalidInput(format!("unknown state byte {s}"))),
        };
        let count = axes.iter().map(|a| a.0 as u64).product::<u64>() * n_t as u64;
        let expected = r.pos as u64 + 16 * count;
        if bytes.len() as u64 != expected {
            return Err(Error::SizeMismatch {
                expected,
                found: bytes.len() as u64,
            });
        }
        let data = (0..count)
            .map(|_| Ok(Complex64::new(r.f64()?, r.f64()?)))
            .collect::<Result<_>>()?;
        Ok(Self {
            period,
            n_t,
            axes,
            state,
            data,
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(Error::SizeMismatch {
                expected: end as u64,
                found: self.bytes.len() as u64,
            });
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn write_field(path: impl AsRef<Path>, u: &TPField) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&FieldFile::from_field(u).to_bytes())?;
    Ok(())
}

pub fn read_field_file(path: impl AsRef<Path>) -> Result<FieldFile> {
    FieldFile::from_bytes(&fs::read(path)?)
}

/// Reads a field onto the grid given by its header.
pub fn read_field(path: impl AsRef<Path>) -> Result<TPField> {
    let ff = read_field_file(path)?;
    let grid = Arc::new(ff.grid()?);
    ff.into_field(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field() -> TPField {
        let g = Arc::new(GroupGrid::make(1.5, 2, 4, &[(3.0, 8), (2.0, 4)], None).unwrap());
        TPField::from_fn(g, |t, x| Complex64::new((t * x[0]).sin(), x[1].exp() / 3.0))
    }

    #[test]
    fn bytes_round_trip() {
        let u = field();
        let bytes = FieldFile::from_field(&u).to_bytes();
        assert_eq!(bytes.len(), 8 + 12 + 24 + 8 + 1 + 16 * 128);
        let back = FieldFile::from_bytes(&bytes).unwrap();
        assert_eq!(back.to_bytes(), bytes);
        let v = back.into_field(u.grid_arc().clone()).unwrap();
        assert_eq!(v.data(), u.data());
    }

    #[test]
    fn corrupt_files() {
        let mut bytes = FieldFile::from_field(&field()).to_bytes();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(FieldFile::from_bytes(&bad), Err(Error::BadMagic)));
        bytes.pop();
        assert!(matches!(FieldFile::from_bytes(&bytes), Err(Error::SizeMismatch { .. })));
        assert!(matches!(FieldFile::from_bytes(&bytes[..10]), Err(Error::SizeMismatch { .. })));
    }
}
