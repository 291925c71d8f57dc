//! Wasserstein distances between [`GridMeasure`]s.
//!
//! On the line the monotone (quantile) coupling is optimal for every
//! `alpha`, so [`wasserstein`] and [`wasserstein_inf`] walk the two
//! distribution functions in lockstep. The transportation-problem solver in
//! [`lp`] is the exact oracle, and [`dual`] holds the Kantorovich side.

pub mod dual;
pub mod lp;

pub use dual::{
    c_transform, dual_ascent, dual_value, lipschitz_witness, lp_dual_pair, reverse_c_transform, AscentResult, DualPair,
    LipschitzFn,
};
pub use lp::{optimal_coupling_lp, solve_transport, Coupling, TransportSolution, LP_SIZE_CAP};

use crate::error::{Error, Result};
use crate::measure::GridMeasure;

/// Quantile cells lighter than this are rounding artifacts of the two
/// cumulative sums and are ignored by the support-based distance.
const CELL_FLOOR: f64 = 1e-14;

/// Cells `(mass, x, y)` of the monotone coupling of `a` and `b`.
pub fn quantile_cells(a: &GridMeasure, b: &GridMeasure) -> Vec<(f64, f64, f64)> {
    let (aw, bw) = (a.weights(), b.weights());
    let (ax, bx) = (a.atoms(), b.atoms());
    let mut cells = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (aw[0], bw[0]);
    while i < a.len() && j < b.len() {
        let c = ra.min(rb);
        if c > 0.0 {
            cells.push((c, ax[i], bx[j]));
        }
        ra -= c;
        rb -= c;
        if ra <= 0.0 {
            i += 1;
            ra = aw.get(i).copied().unwrap_or(0.0);
        }
        if rb <= 0.0 {
            j += 1;
            rb = bw.get(j).copied().unwrap_or(0.0);
        }
    }
    cells
}

/// Wasserstein-α distance `D_α` for `1 <= alpha < inf` via the monotone coupling.
pub fn wasserstein(a: &GridMeasure, b: &GridMeasure, alpha: f64) -> Result<f64> {
    if alpha == f64::INFINITY {
        return Ok(wasserstein_inf(a, b));
    }
    if !(alpha >= 1.0) {
        return Err(Error::domain(format!("alpha must be >= 1, got {alpha}")));
    }
    let cost: f64 = quantile_cells(a, b).into_iter().map(|(w, x, y)| w * (x - y).abs().powf(alpha)).sum();
    Ok(cost.powf(1.0 / alpha))
}

/// `D_∞`: largest displacement carried by the monotone coupling.
pub fn wasserstein_inf(a: &GridMeasure, b: &GridMeasure) -> f64 {
    quantile_cells(a, b)
        .into_iter()
        .filter(|(w, _, _)| *w > CELL_FLOOR)
        .map(|(_, x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::tests::arb_measure;
    use proptest::prelude::*;

    #[test]
    fn point_masses() {
        for a in [-2.5, 0.0, 3.0] {
            let (p, q) = (GridMeasure::point(0.0), GridMeasure::point(a));
            assert_eq!(wasserstein(&p, &q, 1.0).unwrap(), a.abs());
            assert!((wasserstein(&p, &q, 2.0).unwrap() - a.abs()).abs() < 1e-15);
            assert_eq!(wasserstein_inf(&p, &q), a.abs());
        }
    }

    #[test]
    fn shifted_uniform() {
        let u = GridMeasure::uniform(0.0, 1.0, 501).unwrap();
        let v = u.translate(0.37);
        assert!((wasserstein(&u, &v, 1.0).unwrap() - 0.37).abs() < 1e-9);
    }

    #[test]
    fn coin_to_point() {
        let c = GridMeasure::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        let z = GridMeasure::point(0.0);
        assert!((wasserstein(&c, &z, 2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-9);
        assert_eq!(wasserstein_inf(&c, &z), 1.0);
        assert_eq!(wasserstein_inf(&c, &c), 0.0);
    }

    #[test]
    fn rejects_small_alpha() {
        let z = GridMeasure::point(0.0);
        assert!(wasserstein(&z, &z, 0.5).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn metric_axioms(a in arb_measure(10), b in arb_measure(10), alpha in prop::sample::select(vec![1.0, 2.0, f64::INFINITY])) {
            prop_assert!(wasserstein(&a, &a, alpha).unwrap() < 1e-12);
            let ab = wasserstein(&a, &b, alpha).unwrap();
            let ba = wasserstein(&b, &a, alpha).unwrap();
            prop_assert!((ab - ba).abs() < 1e-12);
        }

        #[test]
        fn triangle_inequality(a in arb_measure(8), b in arb_measure(8), c in arb_measure(8),
                               alpha in prop::sample::select(vec![1.0, 2.0, f64::INFINITY])) {
            let ac = wasserstein(&a, &c, alpha).unwrap();
            let ab = wasserstein(&a, &b, alpha).unwrap();
            let bc = wasserstein(&b, &c, alpha).unwrap();
            prop_assert!(ac <= ab + bc + 1e-9);
        }

        #[test]
        fn monotone_in_alpha(a in arb_measure(10), b in arb_measure(10), a1 in 1.0f64..4.0, a2 in 1.0f64..4.0) {
            let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
            let dlo = wasserstein(&a, &b, lo).unwrap();
            let dhi = wasserstein(&a, &b, hi).unwrap();
            prop_assert!(dlo <= dhi + 1e-9);
            prop_assert!(dhi <= wasserstein_inf(&a, &b) + 1e-9);
        }
    }
}
