use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::relations::*;
use super::{c_alpha_beta_with, default_ground_grid, VerificationReport};
use crate::error::Result;
use crate::measure::{GridMeasure, PointMap};
use crate::metrics::DivergenceScan;
use crate::observables::{Axis, CovariantSource, ObservableModel};
use crate::state::{
    make_box, make_gaussian, make_momentum_point, make_point, test_ensemble, Grid, GroundStateOptions, MixedState,
    PhasePoint,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub seed: u64,
    pub hbar: f64,
    pub ensemble_size: usize,
    pub connection_instances: usize,
    /// Points of the grid used for the ground-state constants.
    pub ground_points: usize,
}

impl SuiteOptions {
    pub fn new(seed: u64, hbar: f64) -> Self {
        Self { seed, hbar, ensemble_size: 200, connection_instances: 20, ground_points: 2048 }
    }
}

pub const PREPARATION_PAIRS: [(f64, f64); 3] = [(1.0, 1.0), (2.0, 2.0), (1.0, 2.0)];

/// Every relation check on a fixed symmetric grid (±32, N = 2048). The
/// output order and every number depend only on `opts`.
pub fn run_suite(opts: &SuiteOptions) -> Result<Vec<VerificationReport>> {
    let grid = Grid::symmetric(32.0, 2048, opts.hbar)?;
    let ground_grid = default_ground_grid(opts.ground_points)?;
    let constants = PREPARATION_PAIRS
        .par_iter()
        .map(|&(a, b)| c_alpha_beta_with(a, b, &ground_grid, &GroundStateOptions::default()))
        .collect::<Result<Vec<_>>>()?;
    let c = |a: f64, b: f64| {
        let i = PREPARATION_PAIRS.iter().position(|&p| p == (a, b)).expect("constant computed");
        constants[i].0.c
    };
    let mut reports = Vec::new();

    // preparation relations
    let gaussian: MixedState = make_gaussian(&grid, 0.0, 0.0, 1.0)?.into();
    reports.push(verify_preparation_ur(&gaussian, 2.0, 2.0, c(2.0, 2.0))?.with_note("minimum-uncertainty Gaussian"));
    let gs22 = constants[1].1.state.with_hbar(opts.hbar)?;
    let moved = MixedState::pure(gs22).weyl_translate(PhasePoint::new(1.0, 0.5))?;
    reports.push(verify_preparation_ur(&moved, 2.0, 2.0, c(2.0, 2.0))?.with_note("translated ground state of H_22"));
    let ensemble = test_ensemble(&grid, opts.seed, opts.ensemble_size)?;
    for &(a, b) in &PREPARATION_PAIRS {
        let all = ensemble.par_iter().map(|s| verify_preparation_ur(s, a, b, c(a, b))).collect::<Result<Vec<_>>>()?;
        reports.push(worst_of("preparation_ur_ensemble", all));
    }

    // overall widths
    reports.push(verify_overall_width_ur(&gaussian, 0.05, 0.05)?);
    for w in [0.5, 1.0, 2.0, 4.0] {
        let b: MixedState = make_box(&grid, 0.0, w, 0.0)?.into();
        reports.push(verify_overall_width_ur(&b, 0.05, 0.05)?.with_note(format!("box of width {w}")));
    }

    // covariant error bars and resolution widths
    for sigma in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let src = CovariantSource::new(make_gaussian(&grid, 0.0, 0.0, sigma)?.into())?;
        reports.extend(verify_covariant_error_ur(&src, 0.05, 0.05)?);
    }

    // metric relation
    let vacuum = CovariantSource::new(make_gaussian(&grid, 0.0, 0.0, 1.0)?.into())?;
    reports.push(verify_covariant_metric_ur(&vacuum, 1.0, 1.0, c(1.0, 1.0))?);
    reports.push(verify_covariant_metric_ur(&vacuum, 2.0, 2.0, c(2.0, 2.0))?);
    let points: Vec<MixedState> = vec![make_point(&grid, 0.0)?.into(), make_momentum_point(&grid, 0.0)?.into()];
    reports.push(verify_metric_ur(
        &ObservableModel::covariant(&vacuum, Axis::Position),
        &ObservableModel::covariant(&vacuum, Axis::Momentum),
        1.0,
        1.0,
        &points,
        [None, None],
        c(1.0, 1.0),
    )?);
    let scan = DivergenceScan::toward_edge(&grid, Axis::Momentum);
    reports.push(verify_metric_ur(
        &ObservableModel::SharpQ,
        &ObservableModel::Trivial(GridMeasure::point(0.0)),
        1.0,
        1.0,
        &points,
        [None, Some(&scan)],
        c(1.0, 1.0),
    )?);

    // noise-based errors
    for (x0, sigma) in [(0.0, 0.5), (0.0, 1.0), (0.0, 2.0), (1.5, 1.0)] {
        let src = CovariantSource::new(make_gaussian(&grid, x0, 0.0, sigma)?.into())?;
        reports.push(verify_noise_ur(&src)?);
    }

    // connections between error bars, distances and noise
    let instances = random_instances(&grid, opts.seed, opts.connection_instances);
    reports.extend(verify_connections(&instances, &grid)?);

    // non-covariant joint observable
    let maps =
        [PointMap::ShiftCos { amplitude: 0.5, frequency: 1.0 }, PointMap::ShiftCos { amplitude: 0.25, frequency: 2.0 }];
    reports.push(verify_pushforward_joint_ur(&vacuum, maps, 0.1, 0.1)?);

    Ok(reports.into_iter().map(|r| r.with_seed(opts.seed)).collect())
}

/// The report with the smallest slack relative to tolerance, annotated with
/// the ensemble size and its index.
fn worst_of(relation: &str, all: Vec<VerificationReport>) -> VerificationReport {
    let count = all.len();
    let failures = all.iter().filter(|r| !r.pass).count();
    let (index, worst) = all
        .into_iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| (a.slack + a.tolerance).total_cmp(&(b.slack + b.tolerance)))
        .expect("nonempty ensemble");
    let inputs = json!({ "worst": worst.inputs, "worst_index": index, "count": count, "failures": failures });
    VerificationReport::new(relation, worst.lhs, worst.rhs, worst.tolerance, &worst.grid, inputs)
}

/// Smeared-position instances cycling through Gaussian, two-point and
/// uniform noise, each checked at ε ∈ {0.05, 0.1, 0.25} and α ∈ {1, 2}.
pub fn random_instances(grid: &Grid, seed: u64, count: usize) -> Vec<ConnectionInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let dx = grid.dx;
    let mut out = Vec::new();
    for i in 0..count {
        let noise = match i % 3 {
            0 => {
                let sd = rng.gen_range(0.2..1.5);
                GridMeasure::gaussian(rng.gen_range(-1.0..1.0), sd, dx, 6.0 * sd)
            }
            1 => {
                let a = (rng.gen_range(-2.0..2.0) / dx).round() * dx;
                let b = a + (rng.gen_range(0.1..3.0) / dx).round() * dx;
                let w = rng.gen_range(0.1..0.9);
                GridMeasure::new(vec![a, b], vec![w, 1.0 - w])
            }
            _ => {
                let lo = rng.gen_range(-2.0..1.0);
                let width = rng.gen_range(0.2..2.0);
                GridMeasure::uniform(lo, lo + width, (width / dx).round() as usize + 1)
            }
        }
        .expect("instance parameters are valid");
        for eps in [0.05, 0.1, 0.25] {
            out.push(ConnectionInstance { noise: noise.clone(), eps, alphas: vec![1.0, 2.0] });
        }
    }
    out
}
