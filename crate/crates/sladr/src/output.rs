//! Field dumps: plain CSV (`x,y,species,value`) and a small binary raster
//! for structured grids.
//!
//! Raster layout: 32-byte header (magic `SLADR1\0\0`, then nx, ny and the
//! species count as 8-byte little-endian unsigned integers) followed by
//! the samples as 8-byte little-endian floats, row-major per species,
//! species blocks in order.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::mesh::GridFunction;

pub const RASTER_MAGIC: &[u8; 8] = b"SLADR1\0\0";

pub fn write_field_csv(path: &Path, coords: &[Point], field: &GridFunction) -> Result<()> {
    let mut out = String::from("x,y,species,value\n");
    for s in 0..field.n_species() {
        let vals = field.species(s);
        for (p, v) in coords.iter().zip(vals) {
            out.push_str(&format!("{},{},{},{}\n", p.x, p.y, s, v));
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_raster(path: &Path, nx: usize, ny: usize, n_species: usize, values: &[f64]) -> Result<()> {
    assert_eq!(values.len(), nx * ny * n_species);
    let mut buf = Vec::with_capacity(32 + values.len() * 8);
    buf.extend_from_slice(RASTER_MAGIC);
    buf.extend_from_slice(&(nx as u64).to_le_bytes());
    buf.extend_from_slice(&(ny as u64).to_le_bytes());
    buf.extend_from_slice(&(n_species as u64).to_le_bytes());
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(&buf)?;
    Ok(())
}

pub fn read_raster(path: &Path) -> Result<(usize, usize, usize, Vec<f64>)> {
    let bad = |msg: &str| Error::BadRaster {
        path: path.display().to_string(),
        msg: msg.to_string(),
    };
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    if buf.len() < 32 || &buf[..8] != RASTER_MAGIC {
        return Err(bad("missing or wrong magic"));
    }
    let word = |k: usize| u64::from_le_bytes(buf[8 + 8 * k..16 + 8 * k].try_into().unwrap()) as usize;
    let (nx, ny, ns) = (word(0), word(1), word(2));
    let expected = 32 + nx * ny * ns * 8;
    if buf.len() != expected {
        return Err(bad("truncated payload"));
    }
    let values = buf[32..]
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect();
    Ok((nx, ny, ns, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raster_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.raster");
        let values: Vec<f64> = (0..24).map(|i| i as f64 * 0.5 - 3.0).collect();
        write_raster(&path, 4, 3, 2, &values).unwrap();
        let (nx, ny, ns, back) = read_raster(&path).unwrap();
        assert_eq!((nx, ny, ns), (4, 3, 2));
        assert_eq!(back, values);
        // Header is exactly 32 bytes.
        assert_eq!(std::fs::metadata(&path).unwrap().len(), 32 + 24 * 8);
    }

    #[test]
    fn csv_dump_lists_all_species() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let coords = vec![Point::new(0.0, 0.0), Point::new(1.0, 2.0)];
        let field = GridFunction::from_fn(&coords, 2, |p, s| p.x + 10.0 * s as f64);
        write_field_csv(&path, &coords, &field).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("x,y,species,value\n"));
        assert_eq!(text.lines().count(), 5);
        assert!(text.contains("1,2,1,11"));
    }

    #[test]
    fn bad_raster_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.raster");
        std::fs::write(&path, b"not a raster").unwrap();
        assert!(read_raster(&path).is_err());
    }
}
