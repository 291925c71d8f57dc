//! CSV form of a measure: header `x,w`, one atom per row, ascending.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::GridMeasure;
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct Row {
    x: f64,
    w: f64,
}

pub fn read_measure<R: Read>(reader: R) -> Result<GridMeasure> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["x", "w"] {
        return Err(Error::Schema(format!(
            "measure header must be `x,w`, got `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    for row in rdr.deserialize() {
        let Row { x, w } = row?;
        if let Some(&last) = atoms.last() {
            if x <= last {
                return Err(Error::Schema(format!("measure rows not strictly ascending at x = {x}")));
            }
        }
        atoms.push(x);
        weights.push(w);
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        log::warn!("measure weights sum to {total}; renormalizing");
    }
    GridMeasure::normalized(atoms, weights)
}

pub fn write_measure<W: Write>(m: &GridMeasure, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for (x, w) in m.iter() {
        wtr.serialize(Row { x, w })?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn load_measure(path: impl AsRef<Path>) -> Result<GridMeasure> {
    read_measure(std::fs::File::open(path)?)
}

pub fn save_measure(m: &GridMeasure, path: impl AsRef<Path>) -> Result<()> {
    write_measure(m, std::fs::File::create(path)?)
}
