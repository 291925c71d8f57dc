use super::GridMeasure;
use crate::error::{Error, Result};

/// Default cap on the number of output bins of a convolution.
pub const DEFAULT_CONVOLUTION_CAP: usize = 1 << 22;

/// Distribution of the sum of independent draws from `a` and `b`.
///
/// Pairwise sums are binned onto a uniform grid anchored at
/// `min(a) + min(b)` with step `min(spacing(a), spacing(b))`; a sum between
/// two bins is split between them in proportion to proximity, which keeps
/// the first moment exact.
pub fn convolve(a: &GridMeasure, b: &GridMeasure) -> Result<GridMeasure> {
    convolve_capped(a, b, DEFAULT_CONVOLUTION_CAP)
}

pub fn convolve_capped(a: &GridMeasure, b: &GridMeasure, cap: usize) -> Result<GridMeasure> {
    let step = match (a.spacing(), b.spacing()) {
        (None, None) => return Ok(GridMeasure::point(a.min_atom() + b.min_atom())),
        (Some(s), None) | (None, Some(s)) => s,
        (Some(s), Some(t)) => s.min(t),
    };
    let anchor = a.min_atom() + b.min_atom();
    let span = a.max_atom() + b.max_atom() - anchor;
    let bins = (span / step).floor() as usize + 2;
    if bins > cap {
        return Err(Error::Resource(format!("convolution needs {bins} bins, cap is {cap}")));
    }
    let snap = 1e-9;
    let mut acc = vec![0.0f64; bins];
    let bp: Vec<(f64, f64)> = b.iter().filter(|(_, w)| *w > 0.0).collect();
    for (xa, wa) in a.iter().filter(|(_, w)| *w > 0.0) {
        for &(xb, wb) in &bp {
            let t = (xa + xb - anchor) / step;
            let k = t.floor();
            let frac = t - k;
            let k = k as usize;
            let w = wa * wb;
            if frac < snap {
                acc[k] += w;
            } else if frac > 1.0 - snap {
                acc[k + 1] += w;
            } else {
                acc[k] += w * (1.0 - frac);
                acc[k + 1] += w * frac;
            }
        }
    }
    let (atoms, weights): (Vec<f64>, Vec<f64>) =
        acc.into_iter().enumerate().filter(|(_, w)| *w > 0.0).map(|(k, w)| (anchor + step * k as f64, w)).unzip();
    GridMeasure::normalized(atoms, weights)
}
