//! Binary field checkpoints.
//!
//! Layout, all little-endian:
//!
//! | bytes | content                                   |
//! |-------|-------------------------------------------|
//! | 4     | magic `b"ELSF"`                           |
//! | 4     | format version (`u32`, currently 1)       |
//! | 4     | grid size `n` (`u32`)                     |
//! | 4     | component count (`u32`)                   |
//! | ...   | per component, `n³` coefficients in storage order, each as `re: f64`, `im: f64` |

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;

pub const MAGIC: &[u8; 4] = b"ELSF";
pub const VERSION: u32 = 1;

pub fn write_components<W: Write>(mut w: W, components: &[&SpectralField]) -> Result<()> {
    let Some(first) = components.first() else {
        return Err(Error::Checkpoint("no components to write".into()));
    };
    let n = first.grid().n();
    for c in components {
        first.grid().check_same(c.grid())?;
    }
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(n as u32).to_le_bytes())?;
    w.write_all(&(components.len() as u32).to_le_bytes())?;
    let mut buf = Vec::with_capacity(first.grid().len() * 16);
    for c in components {
        buf.clear();
        for z in c.coefficients() {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_components<R: Read>(mut r: R) -> Result<Vec<SpectralField>> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)?;
    if &header[0..4] != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap());
    let version = word(4);
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let grid = Grid::new(word(8) as usize)?;
    let count = word(12) as usize;
    let mut raw = vec![0u8; grid.len() * 16];
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut raw)?;
        let coeffs = raw
            .chunks_exact(16)
            .map(|b| {
                Complex64::new(
                    f64::from_le_bytes(b[0..8].try_into().unwrap()),
                    f64::from_le_bytes(b[8..16].try_into().unwrap()),
                )
            })
            .collect();
        out.push(SpectralField::from_coefficients(&grid, coeffs)?);
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::Checkpoint("trailing bytes after last component".into()));
    }
    Ok(out)
}

pub fn save(path: &Path, components: &[&SpectralField]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_components(&mut w, components)?;
    w.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Vec<SpectralField>> {
    let file = std::fs::File::open(path)?;
    read_components(std::io::BufReader::new(file))
}
