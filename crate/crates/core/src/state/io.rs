//! Wave-function CSV files with header `x,re,im` on a uniform grid.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Grid, WaveFunction};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct Row {
    x: f64,
    re: f64,
    im: f64,
}

/// Reads a wave function; the `x` column must be uniform and the amplitudes normalized.
pub fn read_wave_function<R: Read>(reader: R, hbar: f64) -> Result<WaveFunction> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["x", "re", "im"] {
        return Err(Error::Schema(format!(
            "expected header x,re,im, got {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let rows: Vec<Row> = rdr.deserialize().collect::<std::result::Result<_, _>>()?;
    if rows.len() < 2 {
        return Err(Error::Schema("wave function needs at least two rows".into()));
    }
    let dx = rows[1].x - rows[0].x;
    let grid = Grid::new(rows[0].x, dx, rows.len(), hbar).map_err(|e| Error::Schema(e.to_string()))?;
    for (j, row) in rows.iter().enumerate() {
        if (row.x - grid.x(j)).abs() > 1e-9 * dx.abs().max(1.0) {
            return Err(Error::Schema(format!("row {j}: x = {} is off the uniform grid", row.x)));
        }
    }
    let amps = rows.iter().map(|r| Complex64::new(r.re, r.im)).collect();
    WaveFunction::new(grid, amps).map_err(|e| Error::Schema(e.to_string()))
}

pub fn write_wave_function<W: Write>(psi: &WaveFunction, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for (j, z) in psi.amplitudes().iter().enumerate() {
        wtr.serialize(Row { x: psi.grid().x(j), re: z.re, im: z.im })?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn load_wave_function(path: &Path, hbar: f64) -> Result<WaveFunction> {
    read_wave_function(std::fs::File::open(path)?, hbar)
}

pub fn save_wave_function(psi: &WaveFunction, path: &Path) -> Result<()> {
    write_wave_function(psi, std::fs::File::create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::make_gaussian;

    #[test]
    fn round_trip() {
        let g = Grid::symmetric(6.0, 64, 1.0).unwrap();
        let psi = make_gaussian(&g, 0.5, 1.0, 1.0).unwrap();
        let mut buf = Vec::new();
        write_wave_function(&psi, &mut buf).unwrap();
        let back = read_wave_function(buf.as_slice(), 1.0).unwrap();
        assert_eq!(back.amplitudes(), psi.amplitudes());
        assert!(back.grid().compatible(psi.grid()));
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(read_wave_function("x,y\n0,1\n".as_bytes(), 1.0), Err(Error::Schema(_))));
        let skewed = "x,re,im\n0,1,0\n1,0,0\n3,0,0\n4,0,0\n";
        assert!(matches!(read_wave_function(skewed.as_bytes(), 1.0), Err(Error::Schema(_))));
        let unnormalized = "x,re,im\n0,1,0\n1,1,0\n";
        assert!(matches!(read_wave_function(unnormalized.as_bytes(), 1.0), Err(Error::Schema(_))));
    }
}
