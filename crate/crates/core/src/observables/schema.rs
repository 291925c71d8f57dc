//! JSON description of observables and the states that generate them.
//!
//! ```json
//! {"variant": "smeared_q", "noise": {"source": "gaussian", "mean": 0.0, "sd": 1.0}}
//! {"variant": "pushforward", "inner": {"variant": "sharp_q"},
//!  "map": {"kind": "shift_cos", "amplitude": 0.5, "frequency": 1.0}}
//! {"variant": "covariant", "axis": "momentum",
//!  "tau": {"family": "gaussian", "x0": 0.0, "p0": 0.0, "sigma": 1.0}}
//! ```
//!
//! Measures come from a CSV file (`{"source": "file", "path": ...}`), inline
//! atoms and weights, or a named family sampled at the working grid spacing.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Axis, CovariantSource, ObservableModel};
use crate::error::{Error, Result};
use crate::measure::{io::load_measure, GridMeasure, PointMap};
use crate::state::{
    io::load_wave_function, make_box, make_gaussian, make_hermite, make_random_localized, Grid, MixedState,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSource {
    File {
        path: PathBuf,
    },
    Inline {
        atoms: Vec<f64>,
        weights: Vec<f64>,
    },
    Point {
        at: f64,
    },
    /// Sampled at the grid spacing out to `mean ± half_width` (default `8 sd`).
    Gaussian {
        mean: f64,
        sd: f64,
        half_width: Option<f64>,
    },
    /// `points` equally spaced atoms on `[lo, hi]`.
    Uniform {
        lo: f64,
        hi: f64,
        points: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSource {
    File { path: PathBuf },
    Gaussian { x0: f64, p0: f64, sigma: f64 },
    Box { center: f64, width: f64, boost: f64 },
    Hermite { n: usize },
    RandomLocalized { lo: f64, hi: f64, seed: u64 },
    Mixture { components: Vec<(f64, StateSource)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableSpec {
    SharpQ {},
    SharpP {},
    SmearedQ { noise: MeasureSource },
    SmearedP { noise: MeasureSource },
    Pushforward { inner: Box<ObservableSpec>, map: PointMap },
    Trivial { output: MeasureSource },
    Covariant { axis: Axis, tau: StateSource },
}

impl MeasureSource {
    /// `base` resolves relative file paths; `spacing` samples the named families.
    pub fn build(&self, base: &Path, spacing: f64) -> Result<GridMeasure> {
        match self {
            Self::File { path } => load_measure(base.join(path)),
            Self::Inline { atoms, weights } => GridMeasure::new(atoms.clone(), weights.clone()),
            Self::Point { at } => Ok(GridMeasure::point(*at)),
            Self::Gaussian { mean, sd, half_width } => {
                GridMeasure::gaussian(*mean, *sd, spacing, half_width.unwrap_or(8.0 * sd))
            }
            Self::Uniform { lo, hi, points } => GridMeasure::uniform(*lo, *hi, *points),
        }
    }
}

impl StateSource {
    pub fn build(&self, base: &Path, grid: &Grid) -> Result<MixedState> {
        Ok(match self {
            Self::File { path } => {
                let psi = load_wave_function(&base.join(path), grid.hbar)?;
                psi.grid().require_compatible(grid)?;
                psi.into()
            }
            Self::Gaussian { x0, p0, sigma } => make_gaussian(grid, *x0, *p0, *sigma)?.into(),
            Self::Box { center, width, boost } => make_box(grid, *center, *width, *boost)?.into(),
            Self::Hermite { n } => make_hermite(grid, *n)?.into(),
            Self::RandomLocalized { lo, hi, seed } => make_random_localized(grid, *lo, *hi, *seed)?.into(),
            Self::Mixture { components } => {
                let mut parts = Vec::new();
                for (w, src) in components {
                    for (v, psi) in src.build(base, grid)?.components() {
                        parts.push((w * v, psi.clone()));
                    }
                }
                MixedState::mixture(parts)?
            }
        })
    }
}

impl ObservableSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Position-axis measures are sampled at `dx`, momentum-axis ones at `dp`.
    pub fn build(&self, base: &Path, grid: &Grid) -> Result<ObservableModel> {
        Ok(match self {
            Self::SharpQ {} => ObservableModel::SharpQ,
            Self::SharpP {} => ObservableModel::SharpP,
            Self::SmearedQ { noise } => ObservableModel::SmearedQ(noise.build(base, grid.dx)?),
            Self::SmearedP { noise } => ObservableModel::SmearedP(noise.build(base, grid.dp())?),
            Self::Pushforward { inner, map } => ObservableModel::pushforward(inner.build(base, grid)?, map.clone())?,
            Self::Trivial { output } => ObservableModel::Trivial(output.build(base, grid.dx)?),
            Self::Covariant { axis, tau } => {
                let source = CovariantSource::new(tau.build(base, grid)?)?;
                ObservableModel::covariant(&source, *axis)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_examples() {
        let g = Grid::symmetric(8.0, 256, 1.0).unwrap();
        let base = Path::new(".");
        for text in [
            r#"{"variant": "smeared_q", "noise": {"source": "gaussian", "mean": 0.0, "sd": 1.0}}"#,
            r#"{"variant": "pushforward", "inner": {"variant": "sharp_q"}, "map": {"kind": "shift_cos", "amplitude": 0.5, "frequency": 1.0}}"#,
            r#"{"variant": "covariant", "axis": "momentum", "tau": {"family": "gaussian", "x0": 0.0, "p0": 0.0, "sigma": 1.0}}"#,
            r#"{"variant": "trivial", "output": {"source": "inline", "atoms": [0, 1], "weights": [0.5, 0.5]}}"#,
            r#"{"variant": "smeared_p", "noise": {"source": "point", "at": 2.0}}"#,
        ] {
            let spec = ObservableSpec::from_json(text).unwrap();
            spec.build(base, &g).unwrap();
            let round = serde_json::to_string(&spec).unwrap();
            assert_eq!(ObservableSpec::from_json(&round).unwrap(), spec);
        }
    }

    #[test]
    fn rejects_unknown_fields() {
        let bad = r#"{"variant": "sharp_q", "extra": 1}"#;
        assert!(matches!(ObservableSpec::from_json(bad), Err(Error::Schema(_))));
        let bad = r#"{"variant": "teleport"}"#;
        assert!(matches!(ObservableSpec::from_json(bad), Err(Error::Schema(_))));
    }

    #[test]
    fn mixture_weights_compose() {
        let g = Grid::symmetric(8.0, 256, 1.0).unwrap();
        let src: StateSource = serde_json::from_str(
            r#"{"family": "mixture", "components": [[1.0, {"family": "hermite", "n": 0}], [3.0, {"family": "hermite", "n": 1}]]}"#,
        )
        .unwrap();
        let s = src.build(Path::new("."), &g).unwrap();
        assert_eq!(s.components().len(), 2);
        assert!((s.components()[0].0 - 0.25).abs() < 1e-15);
    }
}
