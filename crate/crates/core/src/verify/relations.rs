use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{VerificationReport, K};
use crate::error::{Error, Result};
use crate::measure::{GridMeasure, PointMap};
use crate::metrics::{
    bias_free_error, delta_alpha_smeared_closed_form, error_bar_width, noise_based_error, observable_distance,
    DivergenceScan, ProbeConfig, WidthEstimate,
};
use crate::observables::{Axis, CovariantSource, ObservableModel};
use crate::state::{make_point, Grid, MixedState};

/// `Δ_α(ρ^Q) Δ_β(ρ^P) ≥ c_αβ ħ`, tolerance `1e-4 · rhs`.
pub fn verify_preparation_ur(s: &MixedState, alpha: f64, beta: f64, c: f64) -> Result<VerificationReport> {
    let grid = s.grid();
    let dq = s.position_distribution().alpha_deviation(alpha)?;
    let dp = s.momentum_distribution().alpha_deviation(beta)?;
    let rhs = c * grid.hbar;
    Ok(VerificationReport::new(
        "preparation_ur",
        dq * dp,
        rhs,
        1e-4 * rhs,
        grid,
        json!({ "alpha": alpha, "beta": beta, "c": c, "position_deviation": dq, "momentum_deviation": dp }),
    ))
}

/// Discretization slack for a width product: each width may be short by one
/// lattice step on its axis.
fn width_product_tolerance(grid: &Grid, wq: f64, wp: f64) -> f64 {
    2.0 * (grid.dx * wp + grid.dp() * wq)
}

/// `W_ε₁(ρ^Q) W_ε₂(ρ^P) ≥ 2πħ K(ε₁, ε₂)`.
pub fn verify_overall_width_ur(s: &MixedState, eps1: f64, eps2: f64) -> Result<VerificationReport> {
    let k = K(eps1, eps2)?;
    let grid = s.grid();
    let wq = s.position_distribution().overall_width(eps1)?;
    let wp = s.momentum_distribution().overall_width(eps2)?;
    Ok(VerificationReport::new(
        "overall_width_ur",
        wq * wp,
        2.0 * PI * grid.hbar * k,
        width_product_tolerance(grid, wq, wp),
        grid,
        json!({ "eps1": eps1, "eps2": eps2, "K": k, "position_width": wq, "momentum_width": wp }),
    ))
}

/// Bias-free error bars of the covariant marginals, `W_ε₁(μ_τ) W_ε₂(ν_τ) ≥ 2πħK`,
/// followed by the resolution-width product, which has the same value.
pub fn verify_covariant_error_ur(
    source: &Arc<CovariantSource>,
    eps1: f64,
    eps2: f64,
) -> Result<[VerificationReport; 2]> {
    let k = K(eps1, eps2)?;
    let grid = source.tau().grid();
    let wq = source.mu().overall_width(eps1)?;
    let wp = source.nu().overall_width(eps2)?;
    let inputs =
        json!({ "eps1": eps1, "eps2": eps2, "K": k, "mu_width": wq, "nu_width": wp, "tau": tau_summary(source) });
    let rhs = 2.0 * PI * grid.hbar * k;
    let tol = width_product_tolerance(grid, wq, wp);
    Ok([
        VerificationReport::new("covariant_bias_free_ur", wq * wp, rhs, tol, grid, inputs.clone()),
        VerificationReport::new("covariant_resolution_ur", wq * wp, rhs, tol, grid, inputs),
    ])
}

fn tau_summary(source: &CovariantSource) -> serde_json::Value {
    let (mu, nu) = (source.mu(), source.nu());
    json!({
        "components": source.tau().components().len(),
        "mu_mean": mu.mean(), "mu_std": mu.std_deviation(),
        "nu_mean": nu.mean(), "nu_std": nu.std_deviation(),
    })
}

/// One side of a metric uncertainty product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricFactor {
    pub value: f64,
    pub is_lower_bound: bool,
    pub infinite: bool,
}

impl From<&WidthEstimate> for MetricFactor {
    fn from(e: &WidthEstimate) -> Self {
        Self { value: e.value, is_lower_bound: e.is_lower_bound, infinite: e.infinite_flag }
    }
}

fn metric_report(
    q: MetricFactor,
    p: MetricFactor,
    alpha: f64,
    beta: f64,
    c: f64,
    grid: &Grid,
) -> Result<VerificationReport> {
    let inputs = json!({ "alpha": alpha, "beta": beta, "c": c, "position_distance": q, "momentum_distance": p });
    let rhs = c * grid.hbar;
    if q.infinite || p.infinite {
        return Ok(VerificationReport::new("metric_ur", f64::INFINITY, rhs, 0.0, grid, inputs)
            .lower_bound(q.is_lower_bound || p.is_lower_bound)
            .with_note("a distance is infinite; the finiteness premise fails and the relation holds vacuously"));
    }
    if q.value == 0.0 || p.value == 0.0 {
        return Err(Error::domain("a zero observable distance requires an infinite conjugate distance"));
    }
    Ok(VerificationReport::new("metric_ur", q.value * p.value, rhs, 1e-4 * rhs, grid, inputs)
        .lower_bound(q.is_lower_bound || p.is_lower_bound))
}

/// `Δ_α(M₁, Q) Δ_β(M₂, P) ≥ c_αβ ħ` from estimator lower bounds over
/// `ensemble` and the two divergence scans.
pub fn verify_metric_ur(
    m1: &ObservableModel,
    m2: &ObservableModel,
    alpha: f64,
    beta: f64,
    ensemble: &[MixedState],
    scans: [Option<&DivergenceScan>; 2],
    c: f64,
) -> Result<VerificationReport> {
    let q = observable_distance(m1, &ObservableModel::SharpQ, alpha, ensemble, scans[0])?;
    let p = observable_distance(m2, &ObservableModel::SharpP, beta, ensemble, scans[1])?;
    let grid = ensemble[0].grid();
    metric_report((&q).into(), (&p).into(), alpha, beta, c, grid)
}

/// The metric relation for covariant marginals from the closed forms
/// `Δ_α(Q^μ, Q) = (∫|q|^α dμ)^{1/α}`, which are exact values, not bounds.
pub fn verify_covariant_metric_ur(
    source: &Arc<CovariantSource>,
    alpha: f64,
    beta: f64,
    c: f64,
) -> Result<VerificationReport> {
    let exact = |v| MetricFactor { value: v, is_lower_bound: false, infinite: false };
    let q = exact(delta_alpha_smeared_closed_form(source.mu(), alpha)?);
    let p = exact(delta_alpha_smeared_closed_form(source.nu(), beta)?);
    metric_report(q, p, alpha, beta, c, source.tau().grid())
}

/// `ε_NO(Q, M₁) ε_NO(P, M₂) ≥ ħ/2` for the covariant marginals, tolerance `1e-5 ħ`.
pub fn verify_noise_ur(source: &Arc<CovariantSource>) -> Result<VerificationReport> {
    let tau = source.tau();
    let grid = tau.grid();
    let nq = noise_based_error(&ObservableModel::SharpQ, &ObservableModel::covariant(source, Axis::Position), tau)?;
    let np = noise_based_error(&ObservableModel::SharpP, &ObservableModel::covariant(source, Axis::Momentum), tau)?;
    Ok(VerificationReport::new(
        "noise_ur",
        nq * np,
        grid.hbar / 2.0,
        1e-5 * grid.hbar,
        grid,
        json!({ "position_noise": nq, "momentum_noise": np, "tau": tau_summary(source) }),
    ))
}

/// A smeared position observable with the confidence level and exponents at
/// which the error-bar bounds are checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectionInstance {
    pub noise: GridMeasure,
    pub eps: f64,
    pub alphas: Vec<f64>,
}

/// Gross error bar of `Q^μ` against `2Δ_α/ε^{1/α}` and `2ε_NO(1 + √(2/ε))`;
/// the bounds sit on the left, the estimate on the right, tolerance `4dx`.
pub fn verify_connections(instances: &[ConnectionInstance], grid: &Grid) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    let origin: MixedState = make_point(grid, 0.0)?.into();
    for inst in instances {
        let e1 = ObservableModel::SmearedQ(inst.noise.clone());
        let cfg = ProbeConfig::new(grid, Axis::Position, inst.eps, 2.0 * grid.dx);
        let gross = error_bar_width(&e1, &ObservableModel::SharpQ, &cfg, grid)?;
        let gross_value = if gross.infinite_flag { f64::INFINITY } else { gross.value };
        let noise_mean = inst.noise.mean();
        let noise_std = inst.noise.std_deviation();
        for &alpha in &inst.alphas {
            let delta = delta_alpha_smeared_closed_form(&inst.noise, alpha)?;
            let bound = 2.0 * delta / inst.eps.powf(1.0 / alpha);
            out.push(VerificationReport::new(
                "error_bar_vs_distance",
                bound,
                gross_value,
                4.0 * grid.dx,
                grid,
                json!({ "eps": inst.eps, "alpha": alpha, "distance": delta, "gross_error_bar": gross.value,
                        "noise_mean": noise_mean, "noise_std": noise_std }),
            ));
        }
        let eno = noise_based_error(&ObservableModel::SharpQ, &e1, &origin)?;
        out.push(VerificationReport::new(
            "error_bar_vs_noise",
            2.0 * eno * (1.0 + (2.0 / inst.eps).sqrt()),
            gross_value,
            4.0 * grid.dx,
            grid,
            json!({ "eps": inst.eps, "noise_error": eno, "gross_error_bar": gross.value,
                    "noise_mean": noise_mean, "noise_std": noise_std }),
        ));
    }
    Ok(out)
}

/// Bias-free error-bar product for the non-covariant joint observable
/// `G^τ ∘ γ⁻¹` with `γ = (γ₁, γ₂)` of bounded displacement. The widths are
/// probe lower bounds, so a shortfall is inconclusive.
pub fn verify_pushforward_joint_ur(
    source: &Arc<CovariantSource>,
    maps: [PointMap; 2],
    eps1: f64,
    eps2: f64,
) -> Result<VerificationReport> {
    let k = K(eps1, eps2)?;
    let grid = *source.tau().grid();
    for m in &maps {
        if !m.is_monotone() || m.displacement_bound().is_none() {
            return Err(Error::domain("joint pushforward needs monotone maps of bounded displacement"));
        }
    }
    let [fq, fp] = maps;
    let m1 = ObservableModel::pushforward(ObservableModel::covariant(source, Axis::Position), fq.clone())?;
    let m2 = ObservableModel::pushforward(ObservableModel::covariant(source, Axis::Momentum), fp.clone())?;
    let cfg_q = ProbeConfig::new(&grid, Axis::Position, eps1, 2.0 * grid.dx);
    let cfg_p = ProbeConfig::new(&grid, Axis::Momentum, eps2, 2.0 * grid.dp());
    let wq = bias_free_error(&m1, &ObservableModel::SharpQ, &cfg_q, &grid)?;
    let wp = bias_free_error(&m2, &ObservableModel::SharpP, &cfg_p, &grid)?;
    let gq = error_bar_width(&m1, &ObservableModel::SharpQ, &cfg_q, &grid)?;
    let gp = error_bar_width(&m2, &ObservableModel::SharpP, &cfg_p, &grid)?;
    let inputs = json!({
        "eps1": eps1, "eps2": eps2, "K": k, "position_map": fq, "momentum_map": fp,
        "position_bias_free": wq, "momentum_bias_free": wp,
        "position_gross": gq.value, "momentum_gross": gp.value,
        "gross_finite": gq.is_finite() && gp.is_finite(),
        "tau": tau_summary(source),
    });
    let report = VerificationReport::new(
        "pushforward_joint_ur",
        wq.value * wp.value,
        2.0 * PI * grid.hbar * k,
        width_product_tolerance(&grid, wq.value, wp.value),
        &grid,
        inputs,
    )
    .lower_bound(true);
    if !(gq.is_finite() && gp.is_finite()) {
        return Err(Error::Internal("bounded-displacement pushforward produced infinite error bars".into()));
    }
    Ok(report)
}
